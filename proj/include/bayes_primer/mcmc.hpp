#ifndef BAYES_PRIMER_MCMC_HPP_
#define BAYES_PRIMER_MCMC_HPP_

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bayes_primer/distributions.hpp"
#include "bayes_primer/draws.hpp"
#include "bayes_primer/errors.hpp"
#include "bayes_primer/rng.hpp"

// Simulation-based posterior computation: the Gibbs sampler for the
// normal (mu, sigma^2) model under the 1/sigma^2 prior, generic
// random-walk Metropolis, Laplace approximation with finite-difference
// Hessian, and draw transformation.

namespace bayes_primer {

// Log unnormalized posterior density on R^d; returns -infinity (never
// NaN) outside the support.
struct LogTarget {
  std::size_t dim;
  std::function<double(std::span<const double>)> log_density;

  double operator()(std::span<const double> x) const {
    const double v = log_density(x);
    return std::isnan(v) ? kNegInf : v;
  }
};

inline LogTarget distribution_target(const Distribution& d) {
  return {1, [d](std::span<const double> x) { return log_density(d, x[0]); }};
}

struct NormalModelData {
  std::vector<double> y;

  explicit NormalModelData(std::vector<double> obs) : y(std::move(obs)) {
    if (y.size() < 2) {
      throw invalid_argument("NormalModelData: need at least 2 observations");
    }
  }

  double mean() const { return mean_of(y); }

  double sum_sq_about(double mu) const {
    double ss = 0.0;
    for (double v : y) ss += (v - mu) * (v - mu);
    return ss;
  }
};

namespace detail {

inline ChainDiagnostics safe_diagnostics(const DrawMatrix& draws) {
  if (draws.draw_count() < 3) return {};
  const std::size_t max_lag = std::min<std::size_t>(200, draws.draw_count() - 1);
  try {
    return diagnostics(draws, max_lag);
  } catch (const numerical_error&) {
    return {};  // degenerate columns leave diagnostics empty in reports
  }
}

}  // namespace detail

// Gibbs sampler for normal data with unknown mean and variance under the
// prior proportional to 1/sigma^2.  Alternates
//   [mu | sigma^2] = Normal(ybar, sqrt(sigma^2/n))
//   [sigma^2 | mu] = InverseGamma(n/2, sum (y_i - mu)^2 / 2).
inline ChainReport gibbs_normal(const NormalModelData& data, std::size_t iters,
                                std::size_t burn_in,
                                std::pair<double, double> init, Seed seed) {
  if (iters <= burn_in) {
    throw invalid_argument("gibbs_normal: iters must exceed burn_in");
  }
  if (!(init.second > 0.0)) {
    throw invalid_argument("gibbs_normal: initial variance must be positive");
  }
  const double ybar = data.mean();
  if (data.sum_sq_about(ybar) == 0.0) {
    throw data_error("gibbs_normal: data has zero sample variance");
  }
  const double n = static_cast<double>(data.y.size());

  RngStream rng(seed);
  double sigma2 = init.second;
  DrawMatrix draws;
  draws.columns = {"mu", "sigma2"};
  draws.burn_in = burn_in;
  draws.seed = seed;
  draws.rows.reserve(iters - burn_in);
  for (std::size_t it = 0; it < iters; ++it) {
    const double mu = sample_one(Normal(ybar, std::sqrt(sigma2 / n)), rng);
    sigma2 = sample_one(InverseGamma(0.5 * n, 0.5 * data.sum_sq_about(mu)), rng);
    if (it >= burn_in) draws.rows.push_back({mu, sigma2});
  }

  ChainReport report;
  report.draws = std::move(draws);
  report.diag = detail::safe_diagnostics(report.draws);
  return report;
}

// Random-walk Metropolis: propose theta' = theta + scale .* z with
// z ~ Normal(0, I), accept with probability min(1, exp(delta)).
inline ChainReport metropolis_rw(const LogTarget& target,
                                 const std::vector<double>& scale,
                                 std::size_t iters, std::size_t burn_in,
                                 const std::vector<double>& init, Seed seed) {
  if (iters <= burn_in) {
    throw invalid_argument("metropolis_rw: iters must exceed burn_in");
  }
  if (init.size() != target.dim || scale.size() != target.dim) {
    throw invalid_argument("metropolis_rw: init/scale dimension mismatch");
  }
  for (double s : scale) {
    if (!(s > 0.0)) {
      throw invalid_argument("metropolis_rw: proposal scales must be positive");
    }
  }
  std::vector<double> current = init;
  double current_log = target(current);
  if (current_log == kNegInf) {
    throw invalid_argument("metropolis_rw: initial point outside the support");
  }

  RngStream rng(seed);
  DrawMatrix draws;
  for (std::size_t j = 0; j < target.dim; ++j) {
    draws.columns.push_back(target.dim == 1 ? "theta"
                                            : "theta_" + std::to_string(j + 1));
  }
  draws.burn_in = burn_in;
  draws.seed = seed;
  draws.rows.reserve(iters - burn_in);

  std::size_t accepted = 0;
  std::vector<double> proposal(target.dim);
  for (std::size_t it = 0; it < iters; ++it) {
    for (std::size_t j = 0; j < target.dim; ++j) {
      proposal[j] = current[j] + scale[j] * rng.next_normal();
    }
    const double proposal_log = target(proposal);
    if (std::log(rng.next_u01()) < proposal_log - current_log) {
      current = proposal;
      current_log = proposal_log;
      ++accepted;
    }
    if (it >= burn_in) draws.rows.push_back(current);
  }

  ChainReport report;
  report.draws = std::move(draws);
  report.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(iters);
  report.proposal_scale = scale;
  report.diag = detail::safe_diagnostics(report.draws);
  return report;
}

// Doubling/halving pilot pass over short chains until the acceptance
// rate lands in [0.2, 0.5]; returns the tuned scalar multiplier applied
// to every coordinate.
inline std::vector<double> pilot_tune_scale(const LogTarget& target,
                                            std::vector<double> scale,
                                            const std::vector<double>& init,
                                            Seed seed,
                                            std::size_t pilot_iters = 500) {
  for (int round = 0; round < 16; ++round) {
    const ChainReport pilot = metropolis_rw(target, scale, pilot_iters, 0, init,
                                            derive_seed(seed, round));
    const double acc = *pilot.acceptance_rate;
    if (acc > 0.5) {
      for (double& s : scale) s *= 2.0;
    } else if (acc < 0.2) {
      for (double& s : scale) s *= 0.5;
    } else {
      break;
    }
  }
  return scale;
}

// ---------------------------------------------------------------------------
// Laplace approximation

struct LaplaceResult {
  std::vector<double> mode;
  Eigen::MatrixXd covariance;
  double log_density_at_mode;
};

namespace detail {

// Nelder-Mead ascent (operates on -f internally as a minimizer).
inline std::vector<double> nelder_mead_max(const LogTarget& f,
                                           std::vector<double> start,
                                           double tol, std::size_t max_iter) {
  const std::size_t d = f.dim;
  auto neg = [&](const std::vector<double>& x) { return -f(x); };

  std::vector<std::vector<double>> simplex(d + 1, start);
  for (std::size_t i = 0; i < d; ++i) {
    simplex[i + 1][i] += std::max(0.1, 0.1 * std::fabs(start[i]));
  }
  std::vector<double> fx(d + 1);
  for (std::size_t i = 0; i <= d; ++i) fx[i] = neg(simplex[i]);

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    // order the simplex: best first, worst last
    std::vector<std::size_t> order(d + 1);
    for (std::size_t i = 0; i <= d; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
    std::vector<std::vector<double>> sx;
    std::vector<double> sf;
    for (std::size_t i : order) {
      sx.push_back(simplex[i]);
      sf.push_back(fx[i]);
    }
    simplex = std::move(sx);
    fx = std::move(sf);

    if (std::isfinite(fx[d]) && fx[d] - fx[0] < tol) break;

    std::vector<double> centroid(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) centroid[j] += simplex[i][j];
    }
    for (double& c : centroid) c /= static_cast<double>(d);

    auto blend = [&](double t) {
      std::vector<double> x(d);
      for (std::size_t j = 0; j < d; ++j) {
        x[j] = centroid[j] + t * (simplex[d][j] - centroid[j]);
      }
      return x;
    };

    const std::vector<double> reflected = blend(-1.0);
    const double fr = neg(reflected);
    if (fr < fx[0]) {
      const std::vector<double> expanded = blend(-2.0);
      const double fe = neg(expanded);
      if (fe < fr) {
        simplex[d] = expanded;
        fx[d] = fe;
      } else {
        simplex[d] = reflected;
        fx[d] = fr;
      }
    } else if (fr < fx[d - 1]) {
      simplex[d] = reflected;
      fx[d] = fr;
    } else {
      const std::vector<double> contracted = blend(fr < fx[d] ? -0.5 : 0.5);
      const double fc = neg(contracted);
      if (fc < std::min(fr, fx[d])) {
        simplex[d] = contracted;
        fx[d] = fc;
      } else {
        // shrink toward the best vertex
        for (std::size_t i = 1; i <= d; ++i) {
          for (std::size_t j = 0; j < d; ++j) {
            simplex[i][j] = 0.5 * (simplex[i][j] + simplex[0][j]);
          }
          fx[i] = neg(simplex[i]);
        }
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i <= d; ++i) {
    if (fx[i] < fx[best]) best = i;
  }
  return simplex[best];
}

// Golden-section polish of one coordinate inside a bracket known to
// contain the maximizer.
inline double golden_section_coord(const std::function<double(double)>& f,
                                   double lo, double hi, double xtol) {
  constexpr double invphi = 0.6180339887498949;
  double a = lo;
  double b = hi;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > xtol) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

// Posterior mode by gradient-free ascent (Nelder-Mead plus coordinatewise
// golden-section refinement), covariance from the inverse negative
// Hessian computed by central finite differences with step
// h = max(1e-4, 1e-4 |x|).
inline LaplaceResult laplace_approx(const LogTarget& target,
                                    const std::vector<double>& init) {
  if (init.size() != target.dim) {
    throw invalid_argument("laplace_approx: init dimension mismatch");
  }
  if (target(init) == kNegInf) {
    throw invalid_argument("laplace_approx: initial point outside the support");
  }
  const std::size_t d = target.dim;

  std::vector<double> mode =
      detail::nelder_mead_max(target, init, 1e-10, 4000);
  if (!std::isfinite(target(mode))) {
    throw numerical_error("laplace_approx: ascent failed to locate a mode");
  }

  // coordinate polish: bracket each coordinate then golden-section
  for (int sweep = 0; sweep < 6; ++sweep) {
    for (std::size_t j = 0; j < d; ++j) {
      auto along = [&](double xj) {
        std::vector<double> x = mode;
        x[j] = xj;
        return target(x);
      };
      double step = std::max(1e-3, 1e-3 * std::fabs(mode[j]));
      double center = mode[j];
      double fc = along(center);
      // expand until both neighbours are downhill
      for (int k = 0; k < 60; ++k) {
        const double fl = along(center - step);
        const double fr = along(center + step);
        if (fl <= fc && fr <= fc) break;
        if (fr > fc) {
          center += step;
          fc = fr;
        } else {
          center -= step;
          fc = fl;
        }
        step *= 2.0;
      }
      mode[j] = detail::golden_section_coord(
          along, center - step, center + step,
          1e-10 * std::max(1.0, std::fabs(center)));
    }
  }

  const double f0 = target(mode);
  if (!std::isfinite(f0)) {
    throw numerical_error("laplace_approx: ascent failed to locate a mode");
  }

  // central-difference Hessian
  Eigen::MatrixXd hessian(d, d);
  std::vector<double> h(d);
  for (std::size_t j = 0; j < d; ++j) {
    h[j] = std::max(1e-4, 1e-4 * std::fabs(mode[j]));
  }
  auto at = [&](const std::vector<double>& x) { return target(x); };
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<double> xp = mode;
    std::vector<double> xm = mode;
    xp[i] += h[i];
    xm[i] -= h[i];
    hessian(i, i) = (at(xp) - 2.0 * f0 + at(xm)) / (h[i] * h[i]);
    for (std::size_t j = i + 1; j < d; ++j) {
      std::vector<double> xpp = mode, xpm = mode, xmp = mode, xmm = mode;
      xpp[i] += h[i]; xpp[j] += h[j];
      xpm[i] += h[i]; xpm[j] -= h[j];
      xmp[i] -= h[i]; xmp[j] += h[j];
      xmm[i] -= h[i]; xmm[j] -= h[j];
      hessian(i, j) = hessian(j, i) =
          (at(xpp) - at(xpm) - at(xmp) + at(xmm)) / (4.0 * h[i] * h[j]);
    }
  }
  if (!hessian.allFinite()) {
    throw numerical_error(
        "laplace_approx: Hessian not finite at the located mode");
  }

  const Eigen::MatrixXd neg_hessian = -hessian;
  const Eigen::LLT<Eigen::MatrixXd> llt(neg_hessian);
  if (llt.info() != Eigen::Success) {
    throw numerical_error(
        "laplace_approx: Hessian is not negative definite at the mode");
  }
  LaplaceResult result;
  result.mode = std::move(mode);
  result.covariance =
      llt.solve(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d),
                                          static_cast<Eigen::Index>(d)));
  result.log_density_at_mode = f0;
  return result;
}

// Draws from the approximating normal via the Cholesky factor of the
// covariance.
inline DrawMatrix sample_laplace(const LaplaceResult& approx, std::size_t n,
                                 Seed seed,
                                 std::vector<std::string> column_names = {}) {
  const auto d = static_cast<std::size_t>(approx.covariance.rows());
  if (column_names.empty()) {
    for (std::size_t j = 0; j < d; ++j) {
      column_names.push_back(d == 1 ? "theta" : "theta_" + std::to_string(j + 1));
    }
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(approx.covariance);
  if (llt.info() != Eigen::Success) {
    throw numerical_error("sample_laplace: covariance is not positive definite");
  }
  const Eigen::MatrixXd chol = llt.matrixL();
  RngStream rng(seed);
  DrawMatrix draws;
  draws.columns = std::move(column_names);
  draws.seed = seed;
  draws.rows.reserve(n);
  Eigen::VectorXd z(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < z.size(); ++j) z(j) = rng.next_normal();
    const Eigen::VectorXd x = chol * z;
    std::vector<double> row(d);
    for (std::size_t j = 0; j < d; ++j) {
      row[j] = approx.mode[j] + x(static_cast<Eigen::Index>(j));
    }
    draws.rows.push_back(std::move(row));
  }
  return draws;
}

// ---------------------------------------------------------------------------
// draw transformation

// Row-wise application of h; the row count is preserved and the output
// columns are named by the caller.
inline DrawMatrix transform_draws(
    const DrawMatrix& draws, std::vector<std::string> new_columns,
    const std::function<std::vector<double>(std::span<const double>)>& h) {
  DrawMatrix out;
  out.columns = std::move(new_columns);
  out.burn_in = draws.burn_in;
  out.seed = draws.seed;
  out.rows.reserve(draws.draw_count());
  for (const auto& row : draws.rows) {
    std::vector<double> mapped = h(row);
    if (mapped.size() != out.columns.size()) {
      throw invalid_argument(
          "transform_draws: h produced a row of the wrong width");
    }
    out.rows.push_back(std::move(mapped));
  }
  return out;
}

}  // namespace bayes_primer

#endif  // BAYES_PRIMER_MCMC_HPP_
