#ifndef BAYES_PRIMER_MODEL_SAMPLER_HPP_
#define BAYES_PRIMER_MODEL_SAMPLER_HPP_

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "bayes_primer/distributions.hpp"
#include "bayes_primer/draws.hpp"
#include "bayes_primer/errors.hpp"
#include "bayes_primer/mcmc.hpp"
#include "bayes_primer/model/graph.hpp"
#include "bayes_primer/rng.hpp"

// Systematic-scan MH-within-Gibbs over the unknowns of a compiled model.
// Each unknown gets a univariate random-walk Metropolis step on its log
// full conditional; bounded-support nodes are proposed on an unbounded
// transform (logit for two-sided bounds, log for (0, inf)) with the
// Jacobian folded into the target.  Integer-valued unknowns (dbin) take
// a rounded-normal integer walk.

namespace bayes_primer::model {

namespace detail {

inline double softplus(double z) {
  return z > 30.0 ? z : std::log1p(std::exp(z));
}

struct Support {
  enum class Kind { real, positive, interval, integer };
  Kind kind = Kind::real;
  double lo = 0.0;
  double hi = 1.0;
};

inline Support node_support(const ModelGraph& g, int node_id,
                            const std::vector<double>& values) {
  const GraphNode& node = g.nodes[static_cast<std::size_t>(node_id)];
  if (node.dist == "dbeta") return {Support::Kind::interval, 0.0, 1.0};
  if (node.dist == "dgamma") return {Support::Kind::positive, 0.0, 0.0};
  if (node.dist == "dnorm") return {Support::Kind::real, 0.0, 0.0};
  if (node.dist == "dbin") {
    const double n = eval_expr(g, node.params[1], values);
    return {Support::Kind::integer, 0.0, n};
  }
  // dunif: bounds re-evaluated at the current parent values
  return {Support::Kind::interval, eval_expr(g, node.params[0], values),
          eval_expr(g, node.params[1], values)};
}

inline double to_unbounded(const Support& s, double x) {
  switch (s.kind) {
    case Support::Kind::real:
    case Support::Kind::integer:
      return x;
    case Support::Kind::positive:
      return std::log(x);
    case Support::Kind::interval:
      return std::log((x - s.lo) / (s.hi - x));
  }
  return x;
}

inline double from_unbounded(const Support& s, double z) {
  switch (s.kind) {
    case Support::Kind::real:
    case Support::Kind::integer:
      return z;
    case Support::Kind::positive:
      return std::exp(z);
    case Support::Kind::interval:
      return s.lo + (s.hi - s.lo) / (1.0 + std::exp(-z));
  }
  return z;
}

inline double log_jacobian(const Support& s, double z) {
  switch (s.kind) {
    case Support::Kind::real:
    case Support::Kind::integer:
      return 0.0;
    case Support::Kind::positive:
      return z;
    case Support::Kind::interval:
      return std::log(s.hi - s.lo) - softplus(z) - softplus(-z);
  }
  return 0.0;
}

}  // namespace detail

// Deterministic, support-respecting starting point: every unknown begins
// at the median of its prior given the current values of its parents
// (parents are initialized first in topological order).
inline std::vector<double> initial_values(const ModelGraph& g) {
  std::vector<double> values(g.nodes.size(), 0.0);
  for (int id : g.topo_order) {
    const GraphNode& node = g.nodes[static_cast<std::size_t>(id)];
    const auto i = static_cast<std::size_t>(id);
    switch (node.kind) {
      case GraphNode::Kind::constant:
        values[i] = node.value;
        break;
      case GraphNode::Kind::deterministic:
        values[i] = eval_expr(g, node.expr, values);
        break;
      case GraphNode::Kind::stochastic:
        if (node.observed) {
          values[i] = node.value;
        } else {
          try {
            values[i] = quantile(node_distribution(g, id, values), 0.5);
          } catch (const invalid_argument&) {
            throw numerical_error(
                "sample_graph: cannot initialize '" + node.name +
                "': its prior parameters are invalid at the starting point");
          }
        }
        break;
    }
  }
  return values;
}

inline ChainReport sample_graph(const ModelGraph& g, std::size_t iters,
                                std::size_t burn_in, Seed seed,
                                const std::map<std::string, double>& scales = {}) {
  if (g.unknowns.empty()) {
    throw data_error("sample_graph: the model has no unknowns to sample");
  }
  if (iters <= burn_in) {
    throw invalid_argument("sample_graph: iters must exceed burn_in");
  }

  std::vector<double> values = initial_values(g);

  const std::size_t k = g.unknowns.size();
  std::vector<double> node_scale(k, 1.0);
  for (std::size_t j = 0; j < k; ++j) {
    const GraphNode& node =
        g.nodes[static_cast<std::size_t>(g.unknowns[j])];
    const auto it = scales.find(node.name);
    if (it != scales.end()) {
      if (!(it->second > 0.0)) {
        throw invalid_argument("sample_graph: scale for '" + node.name +
                               "' must be positive");
      }
      node_scale[j] = it->second;
    }
  }

  for (std::size_t j = 0; j < k; ++j) {
    if (log_full_conditional(g, g.unknowns[j], values) == kNegInf) {
      throw numerical_error(
          "sample_graph: non-finite initial full conditional at '" +
          g.nodes[static_cast<std::size_t>(g.unknowns[j])].name + "'");
    }
  }

  RngStream rng(seed);
  DrawMatrix draws;
  for (int id : g.unknowns) {
    draws.columns.push_back(g.nodes[static_cast<std::size_t>(id)].name);
  }
  draws.burn_in = burn_in;
  draws.seed = seed;
  draws.rows.reserve(iters - burn_in);

  std::vector<std::size_t> accepted(k, 0);
  for (std::size_t it = 0; it < iters; ++it) {
    for (std::size_t j = 0; j < k; ++j) {
      const int id = g.unknowns[j];
      const auto i = static_cast<std::size_t>(id);
      const detail::Support support = detail::node_support(g, id, values);
      const double x = values[i];

      double proposal = 0.0;
      double log_ratio_correction = 0.0;
      if (support.kind == detail::Support::Kind::integer) {
        proposal = x + std::round(node_scale[j] * rng.next_normal());
      } else {
        const double z = detail::to_unbounded(support, x);
        const double zp = z + node_scale[j] * rng.next_normal();
        proposal = detail::from_unbounded(support, zp);
        log_ratio_correction =
            detail::log_jacobian(support, zp) - detail::log_jacobian(support, z);
      }

      const double log_old = log_full_conditional(g, id, values);
      std::vector<double> candidate = values;
      candidate[i] = proposal;
      refresh_deterministic(g, candidate);
      const double log_new = log_full_conditional(g, id, candidate);

      if (std::log(rng.next_u01()) <
          log_new - log_old + log_ratio_correction) {
        values = std::move(candidate);
        ++accepted[j];
      }
    }
    if (it >= burn_in) {
      std::vector<double> row(k);
      for (std::size_t j = 0; j < k; ++j) {
        row[j] = values[static_cast<std::size_t>(g.unknowns[j])];
      }
      draws.rows.push_back(std::move(row));
    }
  }

  ChainReport report;
  report.draws = std::move(draws);
  report.proposal_scale = node_scale;
  for (std::size_t j = 0; j < k; ++j) {
    report.node_acceptance[g.nodes[static_cast<std::size_t>(g.unknowns[j])].name] =
        static_cast<double>(accepted[j]) / static_cast<double>(iters);
  }
  report.diag = bayes_primer::detail::safe_diagnostics(report.draws);
  return report;
}

}  // namespace bayes_primer::model

#endif  // BAYES_PRIMER_MODEL_SAMPLER_HPP_
