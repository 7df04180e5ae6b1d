#ifndef BAYES_PRIMER_MODEL_AST_HPP_
#define BAYES_PRIMER_MODEL_AST_HPP_

#include <string>
#include <vector>

#include "bayes_primer/io/csv.hpp"

// AST for the model-description language: stochastic statements
// (`name ~ dist(args)`), deterministic assignments (`name <- expr`) and
// `for` loops, over arithmetic expressions with scalar and indexed
// identifiers.  Expressions live in an index-based pool so the tree is
// cheap to copy and carries no ownership cycles.  Every node keeps a
// source span for error reporting.

namespace bayes_primer::model {

struct SourceSpan {
  int line = 0;
  int column = 0;

  std::string to_string() const {
    return std::to_string(line) + ":" + std::to_string(column);
  }
};

struct ExprNode {
  enum class Kind { number, variable, binary, negate };
  Kind kind = Kind::number;
  SourceSpan span;
  double number = 0.0;
  std::string name;     // variable
  int index = -1;       // variable subscript, -1 when scalar
  char op = 0;          // binary: one of + - * /
  int lhs = -1;
  int rhs = -1;         // negate uses lhs only
};

struct LoopBound {
  bool is_literal = true;
  long literal = 0;
  std::string name;  // data-bound constant when not a literal
  SourceSpan span;
};

struct Statement {
  enum class Kind { stochastic, deterministic, loop };
  Kind kind = Kind::stochastic;
  SourceSpan span;

  // stochastic and deterministic targets (possibly indexed)
  std::string target;
  int target_index = -1;

  // stochastic
  std::string dist;
  std::vector<int> args;

  // deterministic
  int expr = -1;

  // loop
  std::string loop_var;
  LoopBound lower;
  LoopBound upper;
  std::vector<Statement> body;
};

struct ModelAst {
  std::vector<ExprNode> pool;
  std::vector<Statement> statements;
};

// ---------------------------------------------------------------------------
// canonical pretty-printer; parse(pretty_print(ast)) reproduces the AST

namespace detail {

inline int precedence(char op) { return (op == '+' || op == '-') ? 1 : 2; }

inline void print_expr(const ModelAst& ast, int id, int parent_prec,
                       bool is_rhs, std::string& out) {
  const ExprNode& e = ast.pool[static_cast<std::size_t>(id)];
  switch (e.kind) {
    case ExprNode::Kind::number:
      out += io::format_double(e.number);
      break;
    case ExprNode::Kind::variable:
      out += e.name;
      if (e.index >= 0) {
        out += '[';
        print_expr(ast, e.index, 0, false, out);
        out += ']';
      }
      break;
    case ExprNode::Kind::negate:
      out += '-';
      print_expr(ast, e.lhs, 3, false, out);
      break;
    case ExprNode::Kind::binary: {
      const int prec = precedence(e.op);
      const bool parens = prec < parent_prec || (prec == parent_prec && is_rhs);
      if (parens) out += '(';
      print_expr(ast, e.lhs, prec, false, out);
      out += ' ';
      out += e.op;
      out += ' ';
      print_expr(ast, e.rhs, prec, true, out);
      if (parens) out += ')';
      break;
    }
  }
}

inline void print_bound(const LoopBound& b, std::string& out) {
  if (b.is_literal) {
    out += std::to_string(b.literal);
  } else {
    out += b.name;
  }
}

inline void print_statement(const ModelAst& ast, const Statement& s,
                            int indent, std::string& out) {
  out.append(static_cast<std::size_t>(indent), ' ');
  switch (s.kind) {
    case Statement::Kind::stochastic:
    case Statement::Kind::deterministic:
      out += s.target;
      if (s.target_index >= 0) {
        out += '[';
        print_expr(ast, s.target_index, 0, false, out);
        out += ']';
      }
      if (s.kind == Statement::Kind::stochastic) {
        out += " ~ ";
        out += s.dist;
        out += '(';
        for (std::size_t i = 0; i < s.args.size(); ++i) {
          if (i > 0) out += ", ";
          print_expr(ast, s.args[i], 0, false, out);
        }
        out += ')';
      } else {
        out += " <- ";
        print_expr(ast, s.expr, 0, false, out);
      }
      out += '\n';
      break;
    case Statement::Kind::loop:
      out += "for (";
      out += s.loop_var;
      out += " in ";
      print_bound(s.lower, out);
      out += ':';
      print_bound(s.upper, out);
      out += ") {\n";
      for (const Statement& child : s.body) {
        print_statement(ast, child, indent + 2, out);
      }
      out.append(static_cast<std::size_t>(indent), ' ');
      out += "}\n";
      break;
  }
}

}  // namespace detail

inline std::string pretty_print(const ModelAst& ast) {
  std::string out = "model {\n";
  for (const Statement& s : ast.statements) {
    detail::print_statement(ast, s, 2, out);
  }
  out += "}\n";
  return out;
}

}  // namespace bayes_primer::model

#endif  // BAYES_PRIMER_MODEL_AST_HPP_
