#ifndef BAYES_PRIMER_DISTRIBUTIONS_HPP_
#define BAYES_PRIMER_DISTRIBUTIONS_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "bayes_primer/errors.hpp"
#include "bayes_primer/rng.hpp"
#include "bayes_primer/special.hpp"

// Parametric distribution primitives: log density, CDF, quantile and
// seeded sampling for the families used throughout the library.
// Distribution values are immutable; parameter domains are checked at
// construction.  log_density returns -infinity outside the support and
// never NaN.

namespace bayes_primer {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Beta {
  double a;
  double b;
  Beta(double a_, double b_) : a(a_), b(b_) {
    if (!(a > 0.0) || !(b > 0.0)) {
      throw invalid_argument("Beta: shape parameters must be positive");
    }
  }
};

struct Normal {
  double mean;
  double sd;
  Normal(double mean_, double sd_) : mean(mean_), sd(sd_) {
    if (!(sd > 0.0) || !std::isfinite(mean) || !std::isfinite(sd)) {
      throw invalid_argument("Normal: sd must be positive and finite");
    }
  }
};

struct Gamma {
  double shape;
  double rate;
  Gamma(double shape_, double rate_) : shape(shape_), rate(rate_) {
    if (!(shape > 0.0) || !(rate > 0.0)) {
      throw invalid_argument("Gamma: shape and rate must be positive");
    }
  }
};

struct InverseGamma {
  double shape;
  double scale;
  InverseGamma(double shape_, double scale_) : shape(shape_), scale(scale_) {
    if (!(shape > 0.0) || !(scale > 0.0)) {
      throw invalid_argument("InverseGamma: shape and scale must be positive");
    }
  }
};

struct Binomial {
  long trials;
  double prob;
  Binomial(long trials_, double prob_) : trials(trials_), prob(prob_) {
    if (trials < 0 || !(prob >= 0.0 && prob <= 1.0)) {
      throw invalid_argument("Binomial: need trials >= 0 and prob in [0,1]");
    }
  }
};

struct Uniform {
  double lo;
  double hi;
  Uniform(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!(lo < hi)) {
      throw invalid_argument("Uniform: need lo < hi");
    }
  }
};

struct StudentT {
  double df;
  double location;
  double scale;
  StudentT(double df_, double location_, double scale_)
      : df(df_), location(location_), scale(scale_) {
    if (!(df > 0.0) || !(scale > 0.0)) {
      throw invalid_argument("StudentT: df and scale must be positive");
    }
  }
};

using Distribution =
    std::variant<Beta, Normal, Gamma, InverseGamma, Binomial, Uniform, StudentT>;

// ---------------------------------------------------------------------------
// log density

inline double log_density(const Beta& d, double x) {
  if (x <= 0.0 || x >= 1.0) {
    // boundary points carry the a=1 / b=1 limits, otherwise out of support
    if (x == 0.0 && d.a == 1.0) return std::log(d.b);
    if (x == 1.0 && d.b == 1.0) return std::log(d.a);
    return kNegInf;
  }
  return (d.a - 1.0) * std::log(x) + (d.b - 1.0) * std::log1p(-x) -
         special::log_beta(d.a, d.b);
}

inline double log_density(const Normal& d, double x) {
  const double z = (x - d.mean) / d.sd;
  return special::std_normal_log_pdf(z) - std::log(d.sd);
}

inline double log_density(const Gamma& d, double x) {
  if (x <= 0.0) {
    if (x == 0.0 && d.shape == 1.0) return std::log(d.rate);
    return kNegInf;
  }
  return d.shape * std::log(d.rate) + (d.shape - 1.0) * std::log(x) -
         d.rate * x - std::lgamma(d.shape);
}

inline double log_density(const InverseGamma& d, double x) {
  if (x <= 0.0) return kNegInf;
  return d.shape * std::log(d.scale) - (d.shape + 1.0) * std::log(x) -
         d.scale / x - std::lgamma(d.shape);
}

inline double log_density(const Binomial& d, double x) {
  if (x < 0.0 || x > static_cast<double>(d.trials) ||
      x != std::floor(x)) {
    return kNegInf;
  }
  const double k = x;
  const double n = static_cast<double>(d.trials);
  if (d.prob == 0.0) return k == 0.0 ? 0.0 : kNegInf;
  if (d.prob == 1.0) return k == n ? 0.0 : kNegInf;
  return special::log_choose(n, k) + k * std::log(d.prob) +
         (n - k) * std::log1p(-d.prob);
}

inline double log_density(const Uniform& d, double x) {
  if (x < d.lo || x > d.hi) return kNegInf;
  return -std::log(d.hi - d.lo);
}

inline double log_density(const StudentT& d, double x) {
  const double z = (x - d.location) / d.scale;
  return std::lgamma(0.5 * (d.df + 1.0)) - std::lgamma(0.5 * d.df) -
         0.5 * std::log(d.df * special::kPi) - std::log(d.scale) -
         0.5 * (d.df + 1.0) * std::log1p(z * z / d.df);
}

inline double log_density(const Distribution& d, double x) {
  return std::visit([x](const auto& f) { return log_density(f, x); }, d);
}

// ---------------------------------------------------------------------------
// CDF

inline double cdf(const Beta& d, double x) {
  return special::reg_inc_beta(x, d.a, d.b);
}

inline double cdf(const Normal& d, double x) {
  return special::std_normal_cdf((x - d.mean) / d.sd);
}

inline double cdf(const Gamma& d, double x) {
  return special::reg_lower_gamma(d.shape, d.rate * x);
}

inline double cdf(const InverseGamma& d, double x) {
  if (x <= 0.0) return 0.0;
  return special::reg_upper_gamma(d.shape, d.scale / x);
}

inline double cdf(const Binomial& d, double x) {
  const double k = std::floor(x);
  const double n = static_cast<double>(d.trials);
  if (k < 0.0) return 0.0;
  if (k >= n) return 1.0;
  if (d.prob == 0.0) return 1.0;
  if (d.prob == 1.0) return 0.0;  // k < n here
  // P(X <= k) = I_{1-p}(n-k, k+1)
  return special::reg_inc_beta(1.0 - d.prob, n - k, k + 1.0);
}

inline double cdf(const Uniform& d, double x) {
  if (x <= d.lo) return 0.0;
  if (x >= d.hi) return 1.0;
  return (x - d.lo) / (d.hi - d.lo);
}

inline double cdf(const StudentT& d, double x) {
  const double z = (x - d.location) / d.scale;
  const double w =
      special::reg_inc_beta(d.df / (z * z + d.df), 0.5 * d.df, 0.5);
  return z >= 0.0 ? 1.0 - 0.5 * w : 0.5 * w;
}

inline double cdf(const Distribution& d, double x) {
  return std::visit([x](const auto& f) { return cdf(f, x); }, d);
}

// ---------------------------------------------------------------------------
// quantile

namespace detail {

// Invert a continuous CDF by bracket expansion + bisection.  Monotone
// CDFs make this unconditionally convergent; ~200 halvings take the
// bracket to machine precision.
template <typename F>
double invert_cdf(const F& cdf_fn, double q, double lo, double hi,
                  bool lo_is_bound, bool hi_is_bound) {
  double flo = lo_is_bound ? 0.0 : cdf_fn(lo);
  while (!lo_is_bound && flo > q) {
    const double width = hi - lo;
    lo -= 2.0 * width;
    flo = cdf_fn(lo);
  }
  double fhi = hi_is_bound ? 1.0 : cdf_fn(hi);
  while (!hi_is_bound && fhi < q) {
    const double width = hi - lo;
    hi += 2.0 * width;
    fhi = cdf_fn(hi);
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // bracket at floating-point limit
    if (cdf_fn(mid) >= q) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace detail

inline double quantile(const Beta& d, double q) {
  return detail::invert_cdf([&](double x) { return cdf(d, x); }, q, 0.0, 1.0,
                            true, true);
}

inline double quantile(const Normal& d, double q) {
  return detail::invert_cdf([&](double x) { return cdf(d, x); }, q,
                            d.mean - 8.0 * d.sd, d.mean + 8.0 * d.sd, false,
                            false);
}

inline double quantile(const Gamma& d, double q) {
  const double mean = d.shape / d.rate;
  const double sd = std::sqrt(d.shape) / d.rate;
  return detail::invert_cdf([&](double x) { return cdf(d, x); }, q, 0.0,
                            mean + 10.0 * sd, true, false);
}

inline double quantile(const InverseGamma& d, double q) {
  // invert via the underlying gamma: X = scale / G, G ~ Gamma(shape, 1)
  const double g = quantile(Gamma(d.shape, 1.0), 1.0 - q);
  return d.scale / g;
}

inline double quantile(const Binomial& d, double q) {
  // smallest integer k with cdf(k) >= q
  long lo = 0;
  long hi = d.trials;
  if (cdf(d, 0.0) >= q) return 0.0;
  while (lo + 1 < hi) {
    const long mid = lo + (hi - lo) / 2;
    if (cdf(d, static_cast<double>(mid)) >= q) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return static_cast<double>(hi);
}

inline double quantile(const Uniform& d, double q) {
  return d.lo + q * (d.hi - d.lo);
}

inline double quantile(const StudentT& d, double q) {
  const double spread = d.scale * (d.df > 2.0 ? std::sqrt(d.df / (d.df - 2.0)) : 10.0);
  return detail::invert_cdf([&](double x) { return cdf(d, x); }, q,
                            d.location - 8.0 * spread,
                            d.location + 8.0 * spread, false, false);
}

inline double quantile(const Distribution& d, double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw invalid_argument("quantile: q must lie in (0, 1)");
  }
  return std::visit([q](const auto& f) { return quantile(f, q); }, d);
}

// ---------------------------------------------------------------------------
// sampling

namespace detail {

// Marsaglia-Tsang; the shape < 1 case is boosted through shape + 1.
inline double sample_gamma_shape_rate(RngStream& rng, double shape,
                                      double rate) {
  if (shape < 1.0) {
    const double u = rng.next_u01();
    return sample_gamma_shape_rate(rng, shape + 1.0, rate) *
           std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = rng.next_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.next_u01();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
      return d * v / rate;
    }
  }
}

}  // namespace detail

inline double sample_one(const Beta& d, RngStream& rng) {
  const double x = detail::sample_gamma_shape_rate(rng, d.a, 1.0);
  const double y = detail::sample_gamma_shape_rate(rng, d.b, 1.0);
  return x / (x + y);
}

inline double sample_one(const Normal& d, RngStream& rng) {
  return d.mean + d.sd * rng.next_normal();
}

inline double sample_one(const Gamma& d, RngStream& rng) {
  return detail::sample_gamma_shape_rate(rng, d.shape, d.rate);
}

inline double sample_one(const InverseGamma& d, RngStream& rng) {
  return 1.0 / detail::sample_gamma_shape_rate(rng, d.shape, d.scale);
}

inline double sample_one(const Binomial& d, RngStream& rng) {
  // inversion with the pmf recurrence; one uniform per draw
  if (d.trials == 0) return 0.0;
  if (d.prob == 0.0) return 0.0;
  if (d.prob == 1.0) return static_cast<double>(d.trials);
  const double n = static_cast<double>(d.trials);
  const double odds = d.prob / (1.0 - d.prob);
  double pmf = std::exp(n * std::log1p(-d.prob));
  double cum = pmf;
  const double u = rng.next_u01();
  double k = 0.0;
  while (cum < u && k < n) {
    pmf *= (n - k) / (k + 1.0) * odds;
    cum += pmf;
    k += 1.0;
  }
  return k;
}

inline double sample_one(const Uniform& d, RngStream& rng) {
  return d.lo + rng.next_u01() * (d.hi - d.lo);
}

inline double sample_one(const StudentT& d, RngStream& rng) {
  const double z = rng.next_normal();
  const double g =
      detail::sample_gamma_shape_rate(rng, 0.5 * d.df, 0.5);  // chi^2_df
  return d.location + d.scale * z / std::sqrt(g / d.df);
}

inline double sample_one(const Distribution& d, RngStream& rng) {
  return std::visit([&rng](const auto& f) { return sample_one(f, rng); }, d);
}

inline std::vector<double> sample(const Distribution& d, std::size_t n,
                                  Seed seed) {
  if (n < 1) {
    throw invalid_argument("sample: need n >= 1");
  }
  RngStream rng(seed);
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(sample_one(d, rng));
  }
  return out;
}

// ---------------------------------------------------------------------------
// small conveniences used across modules

inline double mean(const Distribution& d) {
  struct Visitor {
    double operator()(const Beta& f) const { return f.a / (f.a + f.b); }
    double operator()(const Normal& f) const { return f.mean; }
    double operator()(const Gamma& f) const { return f.shape / f.rate; }
    double operator()(const InverseGamma& f) const {
      if (!(f.shape > 1.0)) {
        throw invalid_argument("mean: undefined for InverseGamma shape <= 1");
      }
      return f.scale / (f.shape - 1.0);
    }
    double operator()(const Binomial& f) const {
      return static_cast<double>(f.trials) * f.prob;
    }
    double operator()(const Uniform& f) const { return 0.5 * (f.lo + f.hi); }
    double operator()(const StudentT& f) const {
      if (!(f.df > 1.0)) {
        throw invalid_argument("mean: undefined for StudentT df <= 1");
      }
      return f.location;
    }
  };
  return std::visit(Visitor{}, d);
}

inline double std_normal_quantile(double q) {
  return quantile(Normal(0.0, 1.0), q);
}

inline std::string family_name(const Distribution& d) {
  struct Visitor {
    std::string operator()(const Beta&) const { return "beta"; }
    std::string operator()(const Normal&) const { return "normal"; }
    std::string operator()(const Gamma&) const { return "gamma"; }
    std::string operator()(const InverseGamma&) const {
      return "inverse-gamma";
    }
    std::string operator()(const Binomial&) const { return "binomial"; }
    std::string operator()(const Uniform&) const { return "uniform"; }
    std::string operator()(const StudentT&) const { return "student-t"; }
  };
  return std::visit(Visitor{}, d);
}

}  // namespace bayes_primer

#endif  // BAYES_PRIMER_DISTRIBUTIONS_HPP_
