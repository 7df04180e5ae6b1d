#ifndef BAYES_PRIMER_EVAL_HPP_
#define BAYES_PRIMER_EVAL_HPP_

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "bayes_primer/conjugate.hpp"
#include "bayes_primer/discrete.hpp"
#include "bayes_primer/distributions.hpp"
#include "bayes_primer/draws.hpp"
#include "bayes_primer/errors.hpp"
#include "bayes_primer/special.hpp"

// Model comparison and criticism: marginal likelihoods for discrete and
// conjugate specifications, Bayes factors, posterior predictive checks
// with pluggable test functions, and prior sensitivity scans.

namespace bayes_primer {

// Priors a model specification can carry.  Data is passed separately so
// the same spec can be rescored against different observations.
struct DiscretePriorSpec {
  DiscreteTable prior;
};
struct BetaPriorSpec {
  double a;
  double b;
};
struct NormalPriorSpec {
  double m0;
  double s0;
};
using ModelSpec = std::variant<DiscretePriorSpec, BetaPriorSpec, NormalPriorSpec>;

struct BinomialObs {
  long successes;
  long trials;
};
struct NormalObs {
  double ybar;
  long n;
  double sigma;  // known sampling sd
};
using EvalData = std::variant<BinomialObs, NormalObs>;

// ---------------------------------------------------------------------------
// marginal likelihood

inline double marginal_likelihood(const ModelSpec& spec, const EvalData& data) {
  struct Visitor {
    const EvalData& data;

    double operator()(const DiscretePriorSpec& m) const {
      // shares the normalization constant computed inside bayes_update
      if (const auto* b = std::get_if<BinomialObs>(&data)) {
        return std::exp(
            bayes_update_detail(m.prior, BinomialData(b->successes, b->trials))
                .log_marginal);
      }
      const auto& nd = std::get<NormalObs>(data);
      return std::exp(
          bayes_update_detail(m.prior,
                              NormalKnownSdData(nd.ybar, nd.n, nd.sigma))
              .log_marginal);
    }

    double operator()(const BetaPriorSpec& m) const {
      const auto* b = std::get_if<BinomialObs>(&data);
      if (!b) {
        throw invalid_argument(
            "marginal_likelihood: a beta prior needs binomial data");
      }
      const double y = static_cast<double>(b->successes);
      const double n = static_cast<double>(b->trials);
      return std::exp(special::log_choose(n, y) +
                      special::log_beta(m.a + y, m.b + n - y) -
                      special::log_beta(m.a, m.b));
    }

    double operator()(const NormalPriorSpec& m) const {
      const auto* nd = std::get_if<NormalObs>(&data);
      if (!nd) {
        throw invalid_argument(
            "marginal_likelihood: a normal prior needs normal data");
      }
      // ybar ~ Normal(m0, sqrt(s0^2 + sigma^2/n)) marginally
      const double sd = std::sqrt(m.s0 * m.s0 +
                                  nd->sigma * nd->sigma /
                                      static_cast<double>(nd->n));
      return std::exp(log_density(Normal(m.m0, sd), nd->ybar));
    }
  };
  if (const auto* spec_beta = std::get_if<BetaPriorSpec>(&spec)) {
    if (!(spec_beta->a > 0.0) || !(spec_beta->b > 0.0)) {
      throw invalid_argument("marginal_likelihood: beta shapes must be positive");
    }
  }
  if (const auto* spec_norm = std::get_if<NormalPriorSpec>(&spec)) {
    if (!(spec_norm->s0 > 0.0)) {
      throw invalid_argument("marginal_likelihood: prior sd must be positive");
    }
  }
  return std::visit(Visitor{data}, spec);
}

inline double bayes_factor(const ModelSpec& m1, const ModelSpec& m2,
                           const EvalData& data) {
  const double ml1 = marginal_likelihood(m1, data);
  const double ml2 = marginal_likelihood(m2, data);
  if (!(ml2 > 0.0)) {
    throw numerical_error("bayes_factor: the second marginal likelihood is zero");
  }
  return ml1 / ml2;
}

// ---------------------------------------------------------------------------
// posterior predictive checks

struct PpcResult {
  double t_observed = 0.0;
  std::vector<double> t_replicates;
  double tail_prob = 0.0;  // add-one smoothed P(T_rep >= T_obs)
};

using TestStatistic = std::function<double(std::span<const double>)>;

namespace ppc_stat {

inline double mean(std::span<const double> xs) { return mean_of(xs); }

inline double variance(std::span<const double> xs) {
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size());
}

inline double min(std::span<const double> xs) {
  double v = xs[0];
  for (double x : xs) v = std::min(v, x);
  return v;
}

inline double max(std::span<const double> xs) {
  double v = xs[0];
  for (double x : xs) v = std::max(v, x);
  return v;
}

}  // namespace ppc_stat

// Replicated datasets keep the observed design: one trial count per
// observation for binomial sampling, the observation count for normal
// sampling.
struct BinomialSampling {
  std::vector<long> trials;
};
struct NormalSampling {
  double sigma;
};
using SamplingFamily = std::variant<BinomialSampling, NormalSampling>;

// theta draws come from an exact posterior or from a sampler's output
// column.
using PosteriorSource = std::variant<Distribution, std::vector<double>>;

inline PpcResult posterior_predictive_check(
    const PosteriorSource& posterior, const SamplingFamily& family,
    const TestStatistic& stat, std::size_t replicates,
    const std::vector<double>& observed, Seed seed) {
  if (replicates < 100) {
    throw invalid_argument(
        "posterior_predictive_check: need at least 100 replicates for a tail "
        "probability");
  }
  if (observed.empty()) {
    throw invalid_argument("posterior_predictive_check: observed data is empty");
  }
  if (const auto* b = std::get_if<BinomialSampling>(&family)) {
    if (b->trials.size() != observed.size()) {
      throw invalid_argument(
          "posterior_predictive_check: one trial count per observation");
    }
  }
  if (const auto* draws = std::get_if<std::vector<double>>(&posterior)) {
    if (draws->empty()) {
      throw invalid_argument(
          "posterior_predictive_check: posterior draw vector is empty");
    }
  }

  RngStream rng(seed);
  auto draw_theta = [&]() {
    if (const auto* d = std::get_if<Distribution>(&posterior)) {
      return sample_one(*d, rng);
    }
    const auto& pool = std::get<std::vector<double>>(posterior);
    const auto idx = static_cast<std::size_t>(rng.next_u01() *
                                              static_cast<double>(pool.size()));
    return pool[std::min(idx, pool.size() - 1)];
  };

  PpcResult result;
  result.t_observed = stat(observed);
  result.t_replicates.reserve(replicates);
  std::vector<double> rep(observed.size());
  std::size_t at_least = 0;
  for (std::size_t r = 0; r < replicates; ++r) {
    const double theta = draw_theta();
    if (const auto* b = std::get_if<BinomialSampling>(&family)) {
      for (std::size_t i = 0; i < rep.size(); ++i) {
        rep[i] = sample_one(Binomial(b->trials[i], theta), rng);
      }
    } else {
      const auto& nf = std::get<NormalSampling>(family);
      for (double& v : rep) {
        v = sample_one(Normal(theta, nf.sigma), rng);
      }
    }
    const double t = stat(rep);
    result.t_replicates.push_back(t);
    if (t >= result.t_observed) ++at_least;
  }
  result.tail_prob = (1.0 + static_cast<double>(at_least)) /
                     (static_cast<double>(replicates) + 1.0);
  return result;
}

// ---------------------------------------------------------------------------
// sensitivity scans

struct SummarySpec {
  enum class Kind { mean, quantile, prob_at_most };
  Kind kind = Kind::mean;
  double arg = 0.0;  // quantile level or threshold
};

struct LabeledSpec {
  std::string label;
  ModelSpec spec;
};

struct SensitivityRow {
  std::string label;
  double summary = 0.0;
};

namespace detail {

inline double summarize_posterior(const ModelSpec& spec, const EvalData& data,
                                  const SummarySpec& summary) {
  struct Visitor {
    const EvalData& data;
    const SummarySpec& summary;

    double from_distribution(const Distribution& d) const {
      switch (summary.kind) {
        case SummarySpec::Kind::mean:
          return mean(d);
        case SummarySpec::Kind::quantile:
          return quantile(d, summary.arg);
        case SummarySpec::Kind::prob_at_most:
          return cdf(d, summary.arg);
      }
      return 0.0;
    }

    double operator()(const DiscretePriorSpec& m) const {
      DiscreteTable post;
      if (const auto* b = std::get_if<BinomialObs>(&data)) {
        post = bayes_update(m.prior, BinomialData(b->successes, b->trials));
      } else {
        const auto& nd = std::get<NormalObs>(data);
        post = bayes_update(m.prior, NormalKnownSdData(nd.ybar, nd.n, nd.sigma));
      }
      switch (summary.kind) {
        case SummarySpec::Kind::mean:
          return table_mean(post);
        case SummarySpec::Kind::quantile:
          return table_quantile(post, summary.arg);
        case SummarySpec::Kind::prob_at_most:
          return table_event_prob(post, [&](const TablePoint& pt) {
            return pt[0] <= summary.arg;
          });
      }
      return 0.0;
    }

    double operator()(const BetaPriorSpec& m) const {
      const auto* b = std::get_if<BinomialObs>(&data);
      if (!b) {
        throw invalid_argument("sensitivity_scan: a beta prior needs binomial data");
      }
      return from_distribution(
          beta_update(BetaBinomialState(m.a, m.b, b->successes, b->trials)));
    }

    double operator()(const NormalPriorSpec& m) const {
      const auto* nd = std::get_if<NormalObs>(&data);
      if (!nd) {
        throw invalid_argument("sensitivity_scan: a normal prior needs normal data");
      }
      return from_distribution(normal_update(
          NormalMeanState(m.m0, m.s0, nd->ybar, nd->n, nd->sigma)));
    }
  };
  return std::visit(Visitor{data, summary}, spec);
}

}  // namespace detail

// The base spec appears first in the output, then every perturbation,
// each scored by the same posterior summary.
inline std::vector<SensitivityRow> sensitivity_scan(
    const LabeledSpec& base, const std::vector<LabeledSpec>& perturbations,
    const EvalData& data, const SummarySpec& summary) {
  std::vector<SensitivityRow> rows;
  rows.push_back({base.label,
                  detail::summarize_posterior(base.spec, data, summary)});
  for (const auto& p : perturbations) {
    rows.push_back({p.label,
                    detail::summarize_posterior(p.spec, data, summary)});
  }
  return rows;
}

}  // namespace bayes_primer

#endif  // BAYES_PRIMER_EVAL_HPP_
