#ifndef BAYES_PRIMER_MODEL_GRAPH_HPP_
#define BAYES_PRIMER_MODEL_GRAPH_HPP_

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "bayes_primer/distributions.hpp"
#include "bayes_primer/errors.hpp"
#include "bayes_primer/model/ast.hpp"
#include "bayes_primer/model/parser.hpp"

// Lowers a parsed model to a finite directed acyclic graph.  Loops are
// unrolled against data-supplied bounds; every identifier must be
// declared exactly once or supplied as data; stochastic nodes bound to
// data are marked observed.

namespace bayes_primer::model {

struct DataValue {
  bool is_array = false;
  double scalar = 0.0;
  std::vector<double> array;
};

using DataMap = std::map<std::string, DataValue>;

inline DataValue data_scalar(double v) { return {false, v, {}}; }
inline DataValue data_array(std::vector<double> v) {
  return {true, 0.0, std::move(v)};
}

// Compiled expression over graph-node references and folded constants.
struct CompiledExpr {
  enum class Kind { constant, node_ref, binary, negate };
  Kind kind = Kind::constant;
  double value = 0.0;
  int node = -1;
  char op = 0;
  int lhs = -1;
  int rhs = -1;
};

struct GraphNode {
  enum class Kind { stochastic, deterministic, constant };
  Kind kind = Kind::constant;
  std::string name;
  SourceSpan span;

  // stochastic
  std::string dist;
  std::vector<int> params;  // expression pool roots
  bool observed = false;

  // deterministic
  int expr = -1;

  // constant-data
  double value = 0.0;
};

struct ModelGraph {
  std::vector<GraphNode> nodes;
  std::vector<CompiledExpr> exprs;
  std::vector<int> topo_order;           // all nodes, parents first
  std::vector<int> unknowns;             // stochastic, not observed
  std::vector<int> deterministic_order;  // topo-sorted deterministic nodes
  // per node: stochastic nodes whose densities change when it moves
  // (direct children plus children reached through deterministic nodes)
  std::vector<std::vector<int>> stochastic_dependents;

  int node_index(const std::string& name) const {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].name == name) return static_cast<int>(i);
    }
    return -1;
  }
};

namespace detail {

class Compiler {
 public:
  Compiler(const ModelAst& ast, const DataMap& data) : ast_(ast), data_(data) {}

  ModelGraph run() {
    // pass 1: register every definition so forward references resolve
    walk(ast_.statements, /*register_only=*/true);
    // pass 2: compile parameter and deterministic expressions
    walk(ast_.statements, /*register_only=*/false);
    bind_observations();
    toposort();
    collect_dependents();
    return std::move(graph_);
  }

 private:
  // ---- loop unrolling -----------------------------------------------------

  void walk(const std::vector<Statement>& statements, bool register_only) {
    for (const Statement& s : statements) {
      switch (s.kind) {
        case Statement::Kind::loop:
          walk_loop(s, register_only);
          break;
        case Statement::Kind::stochastic:
        case Statement::Kind::deterministic:
          if (register_only) {
            register_definition(s);
          } else {
            compile_definition(s);
          }
          break;
      }
    }
  }

  void walk_loop(const Statement& s, bool register_only) {
    const long lo = resolve_bound(s.lower);
    const long hi = resolve_bound(s.upper);
    for (long i = lo; i <= hi; ++i) {
      loop_env_[s.loop_var] = static_cast<double>(i);
      walk(s.body, register_only);
    }
    loop_env_.erase(s.loop_var);
  }

  long resolve_bound(const LoopBound& b) {
    if (b.is_literal) return b.literal;
    const auto env = loop_env_.find(b.name);
    double v = 0.0;
    if (env != loop_env_.end()) {
      v = env->second;
    } else {
      const auto it = data_.find(b.name);
      if (it == data_.end()) {
        throw parse_error("loop bound '" + b.name + "' is not in the data",
                          b.span);
      }
      if (it->second.is_array) {
        if (it->second.array.size() == 1) {
          v = it->second.array[0];
        } else {
          throw parse_error("loop bound '" + b.name + "' must be a scalar",
                            b.span);
        }
      } else {
        v = it->second.scalar;
      }
    }
    if (v < 1.0 || v != std::floor(v)) {
      throw parse_error("loop bound '" + b.name + "' must be a positive integer",
                        b.span);
    }
    return static_cast<long>(v);
  }

  // ---- name resolution ----------------------------------------------------

  // Indices are constant-folded at compile time: they may reference loop
  // variables and scalar data only.
  long eval_const_index(int expr_id) {
    const ExprNode& e = ast_.pool[static_cast<std::size_t>(expr_id)];
    double v = 0.0;
    switch (e.kind) {
      case ExprNode::Kind::number:
        v = e.number;
        break;
      case ExprNode::Kind::variable: {
        if (e.index >= 0) {
          throw parse_error("nested indexing is not supported", e.span);
        }
        const auto env = loop_env_.find(e.name);
        if (env != loop_env_.end()) {
          v = env->second;
          break;
        }
        const auto it = data_.find(e.name);
        if (it != data_.end() && !it->second.is_array) {
          v = it->second.scalar;
          break;
        }
        throw parse_error("index expression uses '" + e.name +
                              "', which is neither a loop variable nor scalar data",
                          e.span);
      }
      case ExprNode::Kind::negate:
        v = -static_cast<double>(eval_const_index(e.lhs));
        break;
      case ExprNode::Kind::binary: {
        const double a = static_cast<double>(eval_const_index(e.lhs));
        const double b = static_cast<double>(eval_const_index(e.rhs));
        switch (e.op) {
          case '+': v = a + b; break;
          case '-': v = a - b; break;
          case '*': v = a * b; break;
          case '/': v = a / b; break;
        }
        break;
      }
    }
    if (!(v == std::floor(v)) || std::fabs(v) > 1e15) {
      throw parse_error("index expression must evaluate to an integer", e.span);
    }
    return static_cast<long>(v);
  }

  std::string instance_name(const Statement& s) {
    if (s.target_index < 0) return s.target;
    return s.target + "[" + std::to_string(eval_const_index(s.target_index)) +
           "]";
  }

  void register_definition(const Statement& s) {
    const std::string name = instance_name(s);
    if (definitions_.count(name)) {
      throw parse_error("'" + name + "' is defined more than once", s.span);
    }
    GraphNode node;
    node.kind = s.kind == Statement::Kind::stochastic
                    ? GraphNode::Kind::stochastic
                    : GraphNode::Kind::deterministic;
    node.name = name;
    node.span = s.span;
    node.dist = s.dist;
    const int id = static_cast<int>(graph_.nodes.size());
    graph_.nodes.push_back(std::move(node));
    definitions_[name] = id;
    // deterministic targets must not collide with supplied data
    if (s.kind == Statement::Kind::deterministic) {
      const std::string base = s.target;
      if (data_.count(base)) {
        throw parse_error("'" + base + "' is assigned with '<-' but also "
                          "supplied as data",
                          s.span);
      }
    }
  }

  void compile_definition(const Statement& s) {
    const std::string name = instance_name(s);
    GraphNode& node = graph_.nodes[static_cast<std::size_t>(definitions_.at(name))];
    if (s.kind == Statement::Kind::stochastic) {
      if (!node.params.empty()) return;  // compiled on an earlier unroll pass
      for (int arg : s.args) {
        node.params.push_back(compile_expr(arg));
      }
    } else {
      node.expr = compile_expr(s.expr);
    }
  }

  int add_expr(CompiledExpr e) {
    graph_.exprs.push_back(e);
    return static_cast<int>(graph_.exprs.size()) - 1;
  }

  int constant_node(const std::string& name, double value, SourceSpan span) {
    const auto it = definitions_.find(name);
    if (it != definitions_.end()) return it->second;
    GraphNode node;
    node.kind = GraphNode::Kind::constant;
    node.name = name;
    node.span = span;
    node.value = value;
    const int id = static_cast<int>(graph_.nodes.size());
    graph_.nodes.push_back(std::move(node));
    definitions_[name] = id;
    return id;
  }

  int compile_expr(int expr_id) {
    const ExprNode& e = ast_.pool[static_cast<std::size_t>(expr_id)];
    switch (e.kind) {
      case ExprNode::Kind::number:
        return add_expr({CompiledExpr::Kind::constant, e.number, -1, 0, -1, -1});
      case ExprNode::Kind::variable: {
        // loop variable: fold to a constant
        const auto env = loop_env_.find(e.name);
        if (env != loop_env_.end()) {
          if (e.index >= 0) {
            throw parse_error("loop variable '" + e.name + "' cannot be indexed",
                              e.span);
          }
          return add_expr(
              {CompiledExpr::Kind::constant, env->second, -1, 0, -1, -1});
        }
        const std::string name =
            e.index >= 0
                ? e.name + "[" + std::to_string(eval_const_index(e.index)) + "]"
                : e.name;
        const auto def = definitions_.find(name);
        if (def != definitions_.end()) {
          return add_expr(
              {CompiledExpr::Kind::node_ref, 0.0, def->second, 0, -1, -1});
        }
        // fall back to data: scalar or array element becomes a constant node
        const auto it = data_.find(e.name);
        if (it != data_.end()) {
          double value = 0.0;
          if (e.index >= 0) {
            if (!it->second.is_array) {
              throw parse_error("'" + e.name + "' is scalar data and cannot be "
                                "indexed",
                                e.span);
            }
            const long idx = eval_const_index(e.index);
            if (idx < 1 ||
                idx > static_cast<long>(it->second.array.size())) {
              throw parse_error("index " + std::to_string(idx) +
                                    " is out of range for data array '" +
                                    e.name + "'",
                                e.span);
            }
            value = it->second.array[static_cast<std::size_t>(idx - 1)];
          } else if (it->second.is_array) {
            throw parse_error("'" + e.name + "' is an array; index it",
                              e.span);
          } else {
            value = it->second.scalar;
          }
          const int id = constant_node(name, value, e.span);
          return add_expr({CompiledExpr::Kind::node_ref, 0.0, id, 0, -1, -1});
        }
        throw parse_error("undefined identifier '" + name + "'", e.span);
      }
      case ExprNode::Kind::negate: {
        const int operand = compile_expr(e.lhs);
        return add_expr(
            {CompiledExpr::Kind::negate, 0.0, -1, 0, operand, -1});
      }
      case ExprNode::Kind::binary: {
        const int lhs = compile_expr(e.lhs);
        const int rhs = compile_expr(e.rhs);
        return add_expr({CompiledExpr::Kind::binary, 0.0, -1, e.op, lhs, rhs});
      }
    }
    throw parse_error("unreachable expression kind", e.span);
  }

  // ---- observation binding ------------------------------------------------

  void bind_observations() {
    for (auto& node : graph_.nodes) {
      if (node.kind != GraphNode::Kind::stochastic) continue;
      const auto bracket = node.name.find('[');
      const std::string base = node.name.substr(0, bracket);
      const auto it = data_.find(base);
      if (it == data_.end()) continue;
      if (bracket == std::string::npos) {
        if (it->second.is_array && it->second.array.size() != 1) {
          throw parse_error("data for scalar node '" + node.name +
                                "' must be a scalar",
                            node.span);
        }
        node.value = it->second.is_array ? it->second.array[0]
                                         : it->second.scalar;
      } else {
        const long idx = std::stol(node.name.substr(bracket + 1));
        if (!it->second.is_array) {
          throw parse_error("data for indexed node '" + node.name +
                                "' must be an array",
                            node.span);
        }
        if (idx < 1 || idx > static_cast<long>(it->second.array.size())) {
          throw parse_error("data array '" + base + "' has no element " +
                                std::to_string(idx),
                            node.span);
        }
        node.value = it->second.array[static_cast<std::size_t>(idx - 1)];
      }
      node.observed = true;
    }
  }

  // ---- topology -----------------------------------------------------------

  void expr_parents(int expr_id, std::set<int>& out) const {
    const CompiledExpr& e = graph_.exprs[static_cast<std::size_t>(expr_id)];
    switch (e.kind) {
      case CompiledExpr::Kind::constant:
        break;
      case CompiledExpr::Kind::node_ref:
        out.insert(e.node);
        break;
      case CompiledExpr::Kind::negate:
        expr_parents(e.lhs, out);
        break;
      case CompiledExpr::Kind::binary:
        expr_parents(e.lhs, out);
        expr_parents(e.rhs, out);
        break;
    }
  }

  std::set<int> node_parents(const GraphNode& node) const {
    std::set<int> parents;
    if (node.kind == GraphNode::Kind::stochastic) {
      for (int p : node.params) expr_parents(p, parents);
    } else if (node.kind == GraphNode::Kind::deterministic) {
      expr_parents(node.expr, parents);
    }
    return parents;
  }

  void toposort() {
    const std::size_t n = graph_.nodes.size();
    std::vector<std::set<int>> parents(n);
    std::vector<std::vector<int>> children(n);
    std::vector<std::size_t> missing(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      parents[i] = node_parents(graph_.nodes[i]);
      missing[i] = parents[i].size();
      for (int p : parents[i]) {
        children[static_cast<std::size_t>(p)].push_back(static_cast<int>(i));
      }
    }
    std::vector<int> ready;
    for (std::size_t i = 0; i < n; ++i) {
      if (missing[i] == 0) ready.push_back(static_cast<int>(i));
    }
    while (!ready.empty()) {
      const int next = ready.back();
      ready.pop_back();
      graph_.topo_order.push_back(next);
      for (int c : children[static_cast<std::size_t>(next)]) {
        if (--missing[static_cast<std::size_t>(c)] == 0) ready.push_back(c);
      }
    }
    if (graph_.topo_order.size() != n) {
      // walk the leftover nodes to print one concrete cycle
      std::vector<int> stuck;
      for (std::size_t i = 0; i < n; ++i) {
        if (missing[i] > 0) stuck.push_back(static_cast<int>(i));
      }
      std::string cycle;
      int cur = stuck.front();
      std::set<int> seen;
      while (!seen.count(cur)) {
        seen.insert(cur);
        cycle += graph_.nodes[static_cast<std::size_t>(cur)].name + " -> ";
        for (int p : parents[static_cast<std::size_t>(cur)]) {
          if (missing[static_cast<std::size_t>(p)] > 0) {
            cur = p;
            break;
          }
        }
      }
      cycle += graph_.nodes[static_cast<std::size_t>(cur)].name;
      throw parse_error("cyclic dependency: " + cycle,
                        graph_.nodes[static_cast<std::size_t>(cur)].span);
    }
    for (int id : graph_.topo_order) {
      const GraphNode& node = graph_.nodes[static_cast<std::size_t>(id)];
      if (node.kind == GraphNode::Kind::deterministic) {
        graph_.deterministic_order.push_back(id);
      } else if (node.kind == GraphNode::Kind::stochastic && !node.observed) {
        graph_.unknowns.push_back(id);
      }
    }
  }

  // Stochastic dependents of each node: stochastic children reached
  // directly or through deterministic nodes (the Markov blanket's child
  // side).
  void collect_dependents() {
    const std::size_t n = graph_.nodes.size();
    std::vector<std::vector<int>> children(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (int p : node_parents(graph_.nodes[i])) {
        children[static_cast<std::size_t>(p)].push_back(static_cast<int>(i));
      }
    }
    graph_.stochastic_dependents.assign(n, {});
    for (std::size_t i = 0; i < n; ++i) {
      std::set<int> out;
      std::vector<int> frontier = children[i];
      std::set<int> visited;
      while (!frontier.empty()) {
        const int c = frontier.back();
        frontier.pop_back();
        if (visited.count(c)) continue;
        visited.insert(c);
        if (graph_.nodes[static_cast<std::size_t>(c)].kind ==
            GraphNode::Kind::stochastic) {
          out.insert(c);
        } else {
          for (int cc : children[static_cast<std::size_t>(c)]) {
            frontier.push_back(cc);
          }
        }
      }
      graph_.stochastic_dependents[i].assign(out.begin(), out.end());
    }
  }

  const ModelAst& ast_;
  const DataMap& data_;
  ModelGraph graph_;
  std::map<std::string, int> definitions_;
  std::map<std::string, double> loop_env_;
};

}  // namespace detail

inline ModelGraph compile(const ModelAst& ast, const DataMap& data) {
  return detail::Compiler(ast, data).run();
}

// ---------------------------------------------------------------------------
// evaluation

inline double eval_expr(const ModelGraph& g, int expr_id,
                        const std::vector<double>& values) {
  const CompiledExpr& e = g.exprs[static_cast<std::size_t>(expr_id)];
  switch (e.kind) {
    case CompiledExpr::Kind::constant:
      return e.value;
    case CompiledExpr::Kind::node_ref:
      return values[static_cast<std::size_t>(e.node)];
    case CompiledExpr::Kind::negate:
      return -eval_expr(g, e.lhs, values);
    case CompiledExpr::Kind::binary: {
      const double a = eval_expr(g, e.lhs, values);
      const double b = eval_expr(g, e.rhs, values);
      switch (e.op) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return a * b;
        default: return a / b;
      }
    }
  }
  return 0.0;
}

// Distribution of a stochastic node at the current parent values.
// Throws invalid_argument when the parameters are out of their domain;
// callers treat that as a zero-density region.
inline Distribution node_distribution(const ModelGraph& g, int node_id,
                                      const std::vector<double>& values) {
  const GraphNode& node = g.nodes[static_cast<std::size_t>(node_id)];
  std::vector<double> p;
  p.reserve(node.params.size());
  for (int e : node.params) p.push_back(eval_expr(g, e, values));
  if (node.dist == "dbeta") return Beta(p[0], p[1]);
  if (node.dist == "dnorm") return Normal(p[0], p[1]);
  if (node.dist == "dbin") {
    const double n = p[1];
    if (n < 0.0 || n != std::floor(n)) {
      throw invalid_argument("dbin: trial count must be a nonnegative integer");
    }
    return Binomial(static_cast<long>(n), p[0]);
  }
  if (node.dist == "dgamma") return Gamma(p[0], p[1]);
  if (node.dist == "dunif") return Uniform(p[0], p[1]);
  throw invalid_argument("unknown distribution tag '" + node.dist + "'");
}

// Recompute every deterministic node from its parents, in topological
// order.
inline void refresh_deterministic(const ModelGraph& g,
                                  std::vector<double>& values) {
  for (int id : g.deterministic_order) {
    values[static_cast<std::size_t>(id)] =
        eval_expr(g, g.nodes[static_cast<std::size_t>(id)].expr, values);
  }
}

// Markov-blanket evaluation: the node's own log prior plus the log
// densities of its stochastic dependents, all at the supplied full
// assignment.  Returns -infinity when any term is out of support.
inline double log_full_conditional(const ModelGraph& g, int node_id,
                                   std::vector<double> values) {
  refresh_deterministic(g, values);
  double total = 0.0;
  try {
    const Distribution self = node_distribution(g, node_id, values);
    total += log_density(self, values[static_cast<std::size_t>(node_id)]);
  } catch (const invalid_argument&) {
    return kNegInf;
  }
  if (total == kNegInf) return kNegInf;
  for (int child : g.stochastic_dependents[static_cast<std::size_t>(node_id)]) {
    try {
      const Distribution d = node_distribution(g, child, values);
      total += log_density(d, values[static_cast<std::size_t>(child)]);
    } catch (const invalid_argument&) {
      return kNegInf;
    }
    if (total == kNegInf) return kNegInf;
  }
  return total;
}

inline double log_full_conditional(const ModelGraph& g,
                                   const std::string& node_name,
                                   const std::map<std::string, double>& values) {
  const int id = g.node_index(node_name);
  if (id < 0) {
    throw invalid_argument("log_full_conditional: no node named '" +
                           node_name + "'");
  }
  std::vector<double> v(g.nodes.size(), 0.0);
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const GraphNode& node = g.nodes[i];
    if (node.kind == GraphNode::Kind::constant) {
      v[i] = node.value;
    } else if (node.observed) {
      v[i] = node.value;
    } else {
      const auto it = values.find(node.name);
      if (it == values.end() && node.kind == GraphNode::Kind::stochastic) {
        throw invalid_argument(
            "log_full_conditional: the assignment is missing '" + node.name +
            "'");
      }
      if (it != values.end()) v[i] = it->second;
    }
  }
  return log_full_conditional(g, id, std::move(v));
}

}  // namespace bayes_primer::model

#endif  // BAYES_PRIMER_MODEL_GRAPH_HPP_
