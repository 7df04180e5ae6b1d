#ifndef BAYES_PRIMER_MODELS_HPP_
#define BAYES_PRIMER_MODELS_HPP_

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "bayes_primer/distributions.hpp"
#include "bayes_primer/draws.hpp"
#include "bayes_primer/errors.hpp"
#include "bayes_primer/io/csv.hpp"
#include "bayes_primer/mcmc.hpp"
#include "bayes_primer/special.hpp"

// Prebuilt fits for the headline applications: hierarchical proportions
// and means with partial pooling, noninformative-prior linear regression
// by direct composition sampling, logistic regression via random-walk
// Metropolis, and posterior functionals on draw matrices.

namespace bayes_primer {

struct GroupCounts {
  std::vector<long> successes;
  std::vector<long> trials;

  GroupCounts(std::vector<long> y, std::vector<long> n)
      : successes(std::move(y)), trials(std::move(n)) {
    if (successes.size() != trials.size() || successes.size() < 2) {
      throw invalid_argument("GroupCounts: need J >= 2 matching groups");
    }
    for (std::size_t j = 0; j < successes.size(); ++j) {
      if (successes[j] < 0 || successes[j] > trials[j]) {
        throw invalid_argument("GroupCounts: need 0 <= y_j <= n_j");
      }
    }
  }

  std::size_t groups() const { return successes.size(); }

  double pooled_rate() const {
    double y = 0.0;
    double n = 0.0;
    for (std::size_t j = 0; j < groups(); ++j) {
      y += static_cast<double>(successes[j]);
      n += static_cast<double>(trials[j]);
    }
    return y / n;
  }
};

struct GroupMeans {
  std::vector<double> means;
  std::vector<long> sizes;
  double sigma;  // common known sampling sd

  GroupMeans(std::vector<double> ybar, std::vector<long> n, double sigma_)
      : means(std::move(ybar)), sizes(std::move(n)), sigma(sigma_) {
    if (means.size() != sizes.size() || means.size() < 2) {
      throw invalid_argument("GroupMeans: need J >= 2 matching groups");
    }
    for (long nj : sizes) {
      if (nj < 1) throw invalid_argument("GroupMeans: need n_j >= 1");
    }
    if (!(sigma > 0.0)) throw invalid_argument("GroupMeans: need sigma > 0");
  }

  std::size_t groups() const { return means.size(); }

  double grand_mean() const {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < groups(); ++j) {
      num += static_cast<double>(sizes[j]) * means[j];
      den += static_cast<double>(sizes[j]);
    }
    return num / den;
  }
};

// ---------------------------------------------------------------------------
// hierarchical proportions
//
// p_j ~ Beta(K*eta, K*(1-eta)) exchangeably, eta ~ Uniform(0,1),
// log K ~ Uniform(log 1, log 1e4).  The p_j have exact conjugate
// conditionals Beta(K*eta + y_j, K*(1-eta) + n_j - y_j); (eta, K) move by
// a joint random-walk Metropolis step on (logit eta, logit(log K / log 1e4)).

namespace detail {

inline constexpr double kLogKMax = 9.210340371976184;  // log(1e4)

inline double hyper_log_density_props(double eta, double k,
                                      const std::vector<double>& p) {
  const double a = k * eta;
  const double b = k * (1.0 - eta);
  double total = 0.0;
  for (double pj : p) {
    total += log_density(Beta(a, b), pj);
    if (total == kNegInf) return kNegInf;
  }
  return total;  // eta and log K priors are flat on their boxes
}

inline double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline double softplus(double z) {
  return z > 30.0 ? z : std::log1p(std::exp(z));
}

// log derivative of u = c * logistic(z), up to the constant log c
inline double logit_jacobian_log(double z) {
  return -softplus(z) - softplus(-z);
}

}  // namespace detail

inline ChainReport fit_hierarchical_proportions(const GroupCounts& data,
                                                std::size_t iters,
                                                std::size_t burn_in, Seed seed,
                                                double hyper_scale = 0.5) {
  if (iters <= burn_in) {
    throw invalid_argument(
        "fit_hierarchical_proportions: iters must exceed burn_in");
  }
  const std::size_t j_groups = data.groups();
  RngStream rng(seed);

  // transformed hyperparameters; start at eta = 1/2, K = 100
  double z_eta = 0.0;
  double z_k = std::log(std::log(100.0) / (detail::kLogKMax - std::log(100.0)));
  auto eta_of = [](double z) { return detail::logistic(z); };
  auto k_of = [](double z) {
    return std::exp(detail::kLogKMax * detail::logistic(z));
  };

  std::vector<double> p(j_groups, 0.5);
  DrawMatrix draws;
  for (std::size_t j = 0; j < j_groups; ++j) {
    draws.columns.push_back("p_" + std::to_string(j + 1));
  }
  draws.columns.push_back("eta");
  draws.columns.push_back("K");
  draws.burn_in = burn_in;
  draws.seed = seed;
  draws.rows.reserve(iters - burn_in);

  std::size_t accepted = 0;
  for (std::size_t it = 0; it < iters; ++it) {
    const double eta = eta_of(z_eta);
    const double k = k_of(z_k);
    // exact conjugate conditional for every group proportion
    for (std::size_t j = 0; j < j_groups; ++j) {
      const Beta conditional(
          k * eta + static_cast<double>(data.successes[j]),
          k * (1.0 - eta) +
              static_cast<double>(data.trials[j] - data.successes[j]));
      p[j] = sample_one(conditional, rng);
    }
    // joint Metropolis step for (eta, K) on the transformed scale; the
    // Jacobian of each logistic map enters the acceptance ratio
    const double z_eta_new = z_eta + hyper_scale * rng.next_normal();
    const double z_k_new = z_k + hyper_scale * rng.next_normal();
    const double log_old =
        detail::hyper_log_density_props(eta, k, p) +
        detail::logit_jacobian_log(z_eta) + detail::logit_jacobian_log(z_k);
    const double log_new =
        detail::hyper_log_density_props(eta_of(z_eta_new), k_of(z_k_new), p) +
        detail::logit_jacobian_log(z_eta_new) +
        detail::logit_jacobian_log(z_k_new);
    if (std::log(rng.next_u01()) < log_new - log_old) {
      z_eta = z_eta_new;
      z_k = z_k_new;
      ++accepted;
    }
    if (it >= burn_in) {
      std::vector<double> row(p);
      row.push_back(eta_of(z_eta));
      row.push_back(k_of(z_k));
      draws.rows.push_back(std::move(row));
    }
  }

  ChainReport report;
  report.draws = std::move(draws);
  report.acceptance_rate =
      static_cast<double>(accepted) / static_cast<double>(iters);
  report.proposal_scale = {hyper_scale, hyper_scale};
  report.diag = detail::safe_diagnostics(report.draws);
  return report;
}

// ---------------------------------------------------------------------------
// hierarchical means
//
// mu_j ~ Normal(tau_mean, tau_sd) exchangeably, flat prior on tau_mean,
// tau_sd ~ Uniform(0, 100*sigma).  The mu_j have exact normal
// conditionals; (tau_mean, tau_sd) move by joint Metropolis with tau_sd
// proposed on a logit transform of its box.

namespace detail {

inline double hyper_log_density_means(double tau_mean, double tau_sd,
                                      const std::vector<double>& mu) {
  double total = 0.0;
  for (double m : mu) {
    total += log_density(Normal(tau_mean, tau_sd), m);
  }
  return total;
}

}  // namespace detail

inline ChainReport fit_hierarchical_means(const GroupMeans& data,
                                          std::size_t iters,
                                          std::size_t burn_in, Seed seed,
                                          double hyper_scale = 0.5) {
  if (iters <= burn_in) {
    throw invalid_argument("fit_hierarchical_means: iters must exceed burn_in");
  }
  const std::size_t j_groups = data.groups();
  const double sd_max = 100.0 * data.sigma;
  RngStream rng(seed);

  double tau_mean = data.grand_mean();
  double z_sd = 0.0;  // logit of tau_sd / sd_max, start at sd_max/2
  auto sd_of = [&](double z) { return sd_max * detail::logistic(z); };

  std::vector<double> mu(data.means);
  DrawMatrix draws;
  for (std::size_t j = 0; j < j_groups; ++j) {
    draws.columns.push_back("mu_" + std::to_string(j + 1));
  }
  draws.columns.push_back("tau_mean");
  draws.columns.push_back("tau_sd");
  draws.burn_in = burn_in;
  draws.seed = seed;
  draws.rows.reserve(iters - burn_in);

  std::size_t accepted = 0;
  for (std::size_t it = 0; it < iters; ++it) {
    const double tau_sd = sd_of(z_sd);
    const double tau_prec = 1.0 / (tau_sd * tau_sd);
    for (std::size_t j = 0; j < j_groups; ++j) {
      const double data_prec = static_cast<double>(data.sizes[j]) /
                               (data.sigma * data.sigma);
      const double prec = tau_prec + data_prec;
      const double m =
          (tau_mean * tau_prec + data.means[j] * data_prec) / prec;
      mu[j] = sample_one(Normal(m, 1.0 / std::sqrt(prec)), rng);
    }
    const double tau_mean_new = tau_mean + hyper_scale * rng.next_normal();
    const double z_sd_new = z_sd + hyper_scale * rng.next_normal();
    const double log_old = detail::hyper_log_density_means(tau_mean, tau_sd, mu) +
                           detail::logit_jacobian_log(z_sd);
    const double log_new =
        detail::hyper_log_density_means(tau_mean_new, sd_of(z_sd_new), mu) +
        detail::logit_jacobian_log(z_sd_new);
    if (std::log(rng.next_u01()) < log_new - log_old) {
      tau_mean = tau_mean_new;
      z_sd = z_sd_new;
      ++accepted;
    }
    if (it >= burn_in) {
      std::vector<double> row(mu);
      row.push_back(tau_mean);
      row.push_back(sd_of(z_sd));
      draws.rows.push_back(std::move(row));
    }
  }

  ChainReport report;
  report.draws = std::move(draws);
  report.acceptance_rate =
      static_cast<double>(accepted) / static_cast<double>(iters);
  report.proposal_scale = {hyper_scale, hyper_scale};
  report.diag = detail::safe_diagnostics(report.draws);
  return report;
}

// ---------------------------------------------------------------------------
// regression

struct RegressionData {
  Eigen::MatrixXd design;   // n x k, first column all ones
  Eigen::VectorXd response;

  RegressionData(Eigen::MatrixXd x, Eigen::VectorXd y)
      : design(std::move(x)), response(std::move(y)) {
    if (design.rows() != response.size()) {
      throw invalid_argument("RegressionData: X and y row counts differ");
    }
    if (design.rows() <= design.cols()) {
      throw invalid_argument("RegressionData: need n > k");
    }
    for (Eigen::Index i = 0; i < design.rows(); ++i) {
      if (design(i, 0) != 1.0) {
        throw invalid_argument(
            "RegressionData: the first design column must be all ones");
      }
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < design.cols()) {
      throw data_error("RegressionData: design matrix is rank deficient");
    }
  }

  Eigen::Index n() const { return design.rows(); }
  Eigen::Index k() const { return design.cols(); }
};

// Noninformative-prior regression by composition: sigma^2 drawn as
// (n-k) s^2 / chi^2_{n-k}, then beta | sigma^2 ~ Normal(beta_hat,
// sigma^2 (X'X)^-1) via the Cholesky factor.
inline DrawMatrix sim_linear_regression(const RegressionData& data,
                                        std::size_t s_draws, Seed seed) {
  if (s_draws < 1) {
    throw invalid_argument("sim_linear_regression: need at least one draw");
  }
  const Eigen::Index n = data.n();
  const Eigen::Index k = data.k();
  const Eigen::MatrixXd xtx = data.design.transpose() * data.design;
  const Eigen::LLT<Eigen::MatrixXd> llt_xtx(xtx);
  if (llt_xtx.info() != Eigen::Success) {
    throw data_error("sim_linear_regression: X'X is not positive definite");
  }
  const Eigen::VectorXd beta_hat =
      llt_xtx.solve(data.design.transpose() * data.response);
  const Eigen::VectorXd resid = data.response - data.design * beta_hat;
  const double dof = static_cast<double>(n - k);
  const double s2 = resid.squaredNorm() / dof;

  const Eigen::MatrixXd xtx_inv =
      llt_xtx.solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::LLT<Eigen::MatrixXd> llt_cov(xtx_inv);
  if (llt_cov.info() != Eigen::Success) {
    throw numerical_error("sim_linear_regression: (X'X)^-1 factorization failed");
  }
  const Eigen::MatrixXd chol = llt_cov.matrixL();

  RngStream rng(seed);
  DrawMatrix draws;
  for (Eigen::Index j = 0; j < k; ++j) {
    draws.columns.push_back("beta_" + std::to_string(j + 1));
  }
  draws.columns.push_back("sigma");
  draws.seed = seed;
  draws.rows.reserve(s_draws);
  Eigen::VectorXd z(k);
  for (std::size_t s = 0; s < s_draws; ++s) {
    const double chi2 =
        sample_one(Gamma(0.5 * dof, 0.5), rng);  // chi^2 with n-k df
    const double sigma2 = dof * s2 / chi2;
    const double sigma = std::sqrt(sigma2);
    for (Eigen::Index j = 0; j < k; ++j) z(j) = rng.next_normal();
    const Eigen::VectorXd beta = beta_hat + sigma * (chol * z);
    std::vector<double> row;
    row.reserve(static_cast<std::size_t>(k) + 1);
    for (Eigen::Index j = 0; j < k; ++j) row.push_back(beta(j));
    row.push_back(sigma);
    draws.rows.push_back(std::move(row));
  }
  return draws;
}

// ---------------------------------------------------------------------------
// logistic regression

// Random-walk Metropolis on the log posterior with independent
// Normal(0, prior_sd) priors on the coefficients.  Complete separation
// in a single predictor is reported as a warning; the posterior stays
// proper through the prior.
inline ChainReport fit_logistic(const RegressionData& data, std::size_t iters,
                                std::size_t burn_in, Seed seed,
                                double prior_sd, double scale = 0.25) {
  if (!(prior_sd > 0.0)) {
    throw invalid_argument("fit_logistic: prior_sd must be positive");
  }
  for (Eigen::Index i = 0; i < data.response.size(); ++i) {
    const double y = data.response(i);
    if (y != 0.0 && y != 1.0) {
      throw data_error("fit_logistic: the response must be binary (0/1)");
    }
  }
  const Eigen::Index k = data.k();

  // log pi = -softplus(-lin), log(1 - pi) = -softplus(lin)
  LogTarget target{
      static_cast<std::size_t>(k), [&data, prior_sd](std::span<const double> b) {
        double lp = 0.0;
        for (double bj : b) {
          lp += log_density(Normal(0.0, prior_sd), bj);
        }
        for (Eigen::Index i = 0; i < data.n(); ++i) {
          double lin = 0.0;
          for (Eigen::Index j = 0; j < data.design.cols(); ++j) {
            lin += data.design(i, j) * b[static_cast<std::size_t>(j)];
          }
          lp -= data.response(i) == 1.0 ? detail::softplus(-lin)
                                        : detail::softplus(lin);
        }
        return lp;
      }};

  ChainReport report = metropolis_rw(
      target, std::vector<double>(static_cast<std::size_t>(k), scale), iters,
      burn_in, std::vector<double>(static_cast<std::size_t>(k), 0.0), seed);
  for (Eigen::Index j = 0; j < k; ++j) {
    report.draws.columns[static_cast<std::size_t>(j)] =
        "beta_" + std::to_string(j + 1);
  }

  // single-predictor separation diagnostic
  for (Eigen::Index j = 1; j < k; ++j) {
    double max0 = -std::numeric_limits<double>::infinity();
    double min1 = std::numeric_limits<double>::infinity();
    double min0 = std::numeric_limits<double>::infinity();
    double max1 = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < data.n(); ++i) {
      const double x = data.design(i, j);
      if (data.response(i) == 1.0) {
        min1 = std::min(min1, x);
        max1 = std::max(max1, x);
      } else {
        max0 = std::max(max0, x);
        min0 = std::min(min0, x);
      }
    }
    if (min1 > max0 || min0 > max1) {
      report.warnings.push_back(
          "predictor " + std::to_string(j + 1) +
          " separates the response classes completely; estimates rely on the "
          "prior");
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// posterior functionals

// Row-wise mu + z_q * sigma: draws of the q-th percentile of the sampling
// distribution.
inline DrawMatrix normal_percentile_draws(const DrawMatrix& draws, double q,
                                          const std::string& mu_column = "mu",
                                          const std::string& sigma_column =
                                              "sigma") {
  if (!(q > 0.0 && q < 1.0)) {
    throw invalid_argument("normal_percentile_draws: q must lie in (0, 1)");
  }
  const std::size_t mu_j = draws.column_index(mu_column);
  const std::size_t sd_j = draws.column_index(sigma_column);
  const double zq = std_normal_quantile(q);
  return transform_draws(
      draws, {"percentile_" + io::format_double(q)},
      [mu_j, sd_j, zq](std::span<const double> row) {
        return std::vector<double>{row[mu_j] + zq * row[sd_j]};
      });
}

// Row-wise beta_group / sigma: the standardized group effect.
inline DrawMatrix standardized_effect_draws(
    const DrawMatrix& draws, const std::string& beta_column = "beta_2",
    const std::string& sigma_column = "sigma") {
  const std::size_t b_j = draws.column_index(beta_column);
  const std::size_t sd_j = draws.column_index(sigma_column);
  return transform_draws(draws, {"standardized_effect"},
                         [b_j, sd_j](std::span<const double> row) {
                           return std::vector<double>{row[b_j] / row[sd_j]};
                         });
}

}  // namespace bayes_primer

#endif  // BAYES_PRIMER_MODELS_HPP_
