#ifndef BAYES_PRIMER_CONJUGATE_HPP_
#define BAYES_PRIMER_CONJUGATE_HPP_

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "bayes_primer/distributions.hpp"
#include "bayes_primer/draws.hpp"
#include "bayes_primer/errors.hpp"

// Closed-form conjugate updating for the proportion and normal-mean
// problems, percentile-based beta prior elicitation, credible intervals
// (exact quantiles or seeded simulation) and predictive distributions.

namespace bayes_primer {

struct BetaBinomialState {
  double a;
  double b;
  long successes;
  long trials;
  BetaBinomialState(double a_, double b_, long y, long n)
      : a(a_), b(b_), successes(y), trials(n) {
    if (!(a > 0.0) || !(b > 0.0)) {
      throw invalid_argument("BetaBinomialState: shapes must be positive");
    }
    if (n < 0 || y < 0 || y > n) {
      throw invalid_argument("BetaBinomialState: need 0 <= y <= n");
    }
  }
};

struct NormalMeanState {
  double m0;      // prior mean
  double s0;      // prior sd
  double ybar;    // sample mean
  long n;         // sample size
  double sigma;   // known sampling sd
  NormalMeanState(double m0_, double s0_, double ybar_, long n_, double sigma_)
      : m0(m0_), s0(s0_), ybar(ybar_), n(n_), sigma(sigma_) {
    if (!(s0 > 0.0) || !(sigma > 0.0) || n < 1) {
      throw invalid_argument(
          "NormalMeanState: need s0 > 0, sigma > 0 and n >= 1");
    }
  }
};

inline Beta beta_update(const BetaBinomialState& s) {
  return Beta(s.a + static_cast<double>(s.successes),
              s.b + static_cast<double>(s.trials - s.successes));
}

inline Normal normal_update(const NormalMeanState& s) {
  const double prior_prec = 1.0 / (s.s0 * s.s0);
  const double data_prec = static_cast<double>(s.n) / (s.sigma * s.sigma);
  const double prec = prior_prec + data_prec;
  const double m = (s.m0 * prior_prec + s.ybar * data_prec) / prec;
  return Normal(m, 1.0 / std::sqrt(prec));
}

// ---------------------------------------------------------------------------
// percentile-based elicitation

// Beta(a, b) matching two stated percentiles: quantile(q1) = x1 and
// quantile(q2) = x2.  Solved by nested bisection on (log a, log b) over
// the box [-5, 12]^2: for fixed a the q1-quantile decreases in b, and
// with b pinned by the inner solve the q2-quantile residual is monotone
// in a.
inline Beta beta_select(double q1, double x1, double q2, double x2) {
  if (!(0.0 < q1 && q1 < q2 && q2 < 1.0)) {
    throw invalid_argument("beta_select: need 0 < q1 < q2 < 1");
  }
  if (!(0.0 < x1 && x1 < x2 && x2 < 1.0)) {
    throw invalid_argument("beta_select: need 0 < x1 < x2 < 1");
  }
  constexpr double kLogLo = -5.0;
  constexpr double kLogHi = 12.0;

  // inner solve: log b such that quantile(q1; a, b) = x1, for fixed a.
  // cdf at x1 increases with b, so the q1-quantile decreases with b;
  // when no b inside the box reaches x1 the nearest edge is returned.
  const auto solve_b = [&](double log_a) {
    const double a = std::exp(log_a);
    auto resid = [&](double log_b) {
      return quantile(Beta(a, std::exp(log_b)), q1) - x1;
    };
    double lo = kLogLo;
    double hi = kLogHi;
    const double flo = resid(lo);
    const double fhi = resid(hi);
    if (flo < 0.0 || fhi > 0.0) {
      return std::fabs(flo) < std::fabs(fhi) ? lo : hi;
    }
    while (hi - lo > 1e-13) {
      const double mid = 0.5 * (lo + hi);
      if (resid(mid) >= 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  };

  // with b = b(a) enforcing the q1 percentile, the q2-quantile residual
  // crosses zero from above as a grows and the distribution tightens
  // around x1.  A coarse scan finds a sign-change bracket (the residual
  // is flat where the inner solve pins b at a box edge), then bisection
  // finishes inside it.
  const auto outer = [&](double log_a) {
    const double log_b = solve_b(log_a);
    return quantile(Beta(std::exp(log_a), std::exp(log_b)), q2) - x2;
  };

  constexpr int kScanPoints = 69;
  double lo = kLogLo;
  double hi = kLogHi;
  double best_resid = std::numeric_limits<double>::infinity();
  bool bracketed = false;
  double prev_x = kLogLo;
  double prev_f = outer(kLogLo);
  best_resid = std::fabs(prev_f);
  for (int i = 1; i < kScanPoints; ++i) {
    const double x = kLogLo + (kLogHi - kLogLo) * i / (kScanPoints - 1.0);
    const double f = outer(x);
    best_resid = std::min(best_resid, std::fabs(f));
    if (prev_f >= 0.0 && f <= 0.0) {
      lo = prev_x;
      hi = x;
      bracketed = true;
      break;
    }
    prev_x = x;
    prev_f = f;
  }
  if (!bracketed) {
    throw numerical_error(
        "beta_select: no beta matches the stated percentiles within the "
        "search bounds (best q2 residual " +
        std::to_string(best_resid) + ")");
  }
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    if (outer(mid) >= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double log_a = 0.5 * (lo + hi);
  const Beta result(std::exp(log_a), std::exp(solve_b(log_a)));
  const double r1 = std::fabs(quantile(result, q1) - x1);
  const double r2 = std::fabs(quantile(result, q2) - x2);
  if (r1 > 1e-4 || r2 > 1e-4) {
    throw numerical_error(
        "beta_select: no beta matches the stated percentiles within the "
        "search bounds (residuals " +
        std::to_string(r1) + ", " + std::to_string(r2) + ")");
  }
  return result;
}

// ---------------------------------------------------------------------------
// credible intervals

enum class IntervalMethod { exact_quantile, simulation };

struct CredibleInterval {
  double lower;
  double upper;
  double level;
  IntervalMethod method;
};

inline CredibleInterval credible_interval(const Distribution& d, double level,
                                          IntervalMethod method,
                                          std::size_t sim_size = 10000,
                                          Seed seed = 0) {
  if (!(level > 0.0 && level < 1.0)) {
    throw invalid_argument("credible_interval: level must lie in (0, 1)");
  }
  const double tail = 0.5 * (1.0 - level);
  if (method == IntervalMethod::exact_quantile) {
    return {quantile(d, tail), quantile(d, 1.0 - tail), level, method};
  }
  std::vector<double> draws = sample(d, sim_size, seed);
  return {empirical_quantile(draws, tail),
          empirical_quantile(std::move(draws), 1.0 - tail), level, method};
}

// ---------------------------------------------------------------------------
// predictive distributions

// P(y* = k | data) = C(m,k) B(a+k, b+m-k) / B(a,b) for k = 0..m.
inline std::vector<double> beta_binomial_predictive(const Beta& posterior,
                                                    long m) {
  if (m < 0) {
    throw invalid_argument("beta_binomial_predictive: need m >= 0");
  }
  const double lb = special::log_beta(posterior.a, posterior.b);
  std::vector<double> pmf;
  pmf.reserve(static_cast<std::size_t>(m) + 1);
  for (long k = 0; k <= m; ++k) {
    const double lk =
        special::log_choose(static_cast<double>(m), static_cast<double>(k)) +
        special::log_beta(posterior.a + static_cast<double>(k),
                          posterior.b + static_cast<double>(m - k)) -
        lb;
    pmf.push_back(std::exp(lk));
  }
  return pmf;
}

// Predictive for a future observation: Normal(m*, sqrt(s*^2 + sigma^2)).
// Accepts s >= 0 so a degenerate (known-mean) posterior is usable.
inline Normal normal_predictive(double posterior_mean, double posterior_sd,
                                double sigma) {
  if (!(posterior_sd >= 0.0) || !(sigma > 0.0)) {
    throw invalid_argument(
        "normal_predictive: need posterior sd >= 0 and sigma > 0");
  }
  return Normal(posterior_mean,
                std::sqrt(posterior_sd * posterior_sd + sigma * sigma));
}

inline Normal normal_predictive(const Normal& posterior, double sigma) {
  return normal_predictive(posterior.mean, posterior.sd, sigma);
}

}  // namespace bayes_primer

#endif  // BAYES_PRIMER_CONJUGATE_HPP_
