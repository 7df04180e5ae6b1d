#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "bayes_primer/conjugate.hpp"
#include "bayes_primer/mcmc.hpp"
#include "oracles.hpp"

namespace bp = bayes_primer;
using Catch::Approx;

namespace {

std::vector<double> synthetic_normal(double mean, double sd, std::size_t n,
                                     bp::Seed seed) {
  return bp::sample(bp::Distribution(bp::Normal(mean, sd)), n, seed);
}

}  // namespace

TEST_CASE("gibbs_normal draws from the stated conditionals", "[mcmc]") {
  const bp::NormalModelData data({1.0, 3.0});

  // reproduce the first iteration by hand from the same stream:
  // mu ~ Normal(ybar=2, sqrt(sigma2_0/2)), then
  // sigma2 ~ InverseGamma(n/2, sum (y_i - mu)^2 / 2)
  const bp::Seed seed = 314;
  const bp::ChainReport run = bp::gibbs_normal(data, 1, 0, {0.0, 1.0}, seed);

  bp::RngStream rng(seed);
  const double mu = bp::sample_one(bp::Normal(2.0, std::sqrt(0.5)), rng);
  const double ss = (1.0 - mu) * (1.0 - mu) + (3.0 - mu) * (3.0 - mu);
  const double sigma2 = bp::sample_one(bp::InverseGamma(1.0, 0.5 * ss), rng);
  CHECK(run.draws.rows[0][0] == mu);
  CHECK(run.draws.rows[0][1] == sigma2);

  // at mu = ybar = 2 the variance conditional is InverseGamma(1, 1)
  CHECK(0.5 * data.sum_sq_about(2.0) == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gibbs_normal rejects degenerate inputs", "[mcmc]") {
  CHECK_THROWS_AS(bp::NormalModelData({1.0}), bp::invalid_argument);
  CHECK_THROWS_AS(
      bp::gibbs_normal(bp::NormalModelData({2.0, 2.0, 2.0}), 100, 10,
                       {0.0, 1.0}, 1),
      bp::data_error);
  CHECK_THROWS_AS(
      bp::gibbs_normal(bp::NormalModelData({1.0, 3.0}), 10, 10, {0.0, 1.0}, 1),
      bp::invalid_argument);
}

TEST_CASE("gibbs_normal matches the analytic marginals", "[mcmc][slow]") {
  const std::vector<double> y = synthetic_normal(5.0, 2.0, 50, 99);
  const bp::NormalModelData data(y);
  const double ybar = data.mean();
  const double ss = data.sum_sq_about(ybar);
  const double n = 50.0;

  const bp::ChainReport run =
      bp::gibbs_normal(data, 22000, 2000, {ybar, 1.0}, 7);
  const std::vector<double> mu = run.draws.column("mu");
  const std::vector<double> sigma2 = run.draws.column("sigma2");

  // mu | y is Student-t(df n-1, location ybar, scale s/sqrt(n))
  const double s = std::sqrt(ss / (n - 1.0));
  const double t_scale = s / std::sqrt(n);
  const double t_sd = t_scale * std::sqrt((n - 1.0) / (n - 3.0));
  const double ess_mu = run.diag.ess[0];
  const double se_mean = bp::sd_of(mu) / std::sqrt(ess_mu);
  CHECK(std::fabs(bp::mean_of(mu) - ybar) < 3.0 * se_mean);
  const double se_sd = t_sd / std::sqrt(2.0 * ess_mu);
  CHECK(std::fabs(bp::sd_of(mu) - t_sd) < 3.0 * se_sd);

  // sigma2 | y is InverseGamma((n-1)/2, ss/2)
  const bp::InverseGamma marginal(0.5 * (n - 1.0), 0.5 * ss);
  const double ig_mean = 0.5 * ss / (0.5 * (n - 1.0) - 1.0);
  const double ig_sd =
      ig_mean / std::sqrt(0.5 * (n - 1.0) - 2.0);
  const double ess_s2 = run.diag.ess[1];
  CHECK(std::fabs(bp::mean_of(sigma2) - ig_mean) <
        3.0 * bp::sd_of(sigma2) / std::sqrt(ess_s2));
  CHECK(std::fabs(bp::sd_of(sigma2) - ig_sd) < 3.0 * ig_sd / std::sqrt(ess_s2));

  // and the draws as a whole look like that marginal
  const double stat = oracles::ks_statistic(
      sigma2, [&](double x) { return bp::cdf(marginal, x); });
  // KS on autocorrelated draws: compare at the effective sample size
  CHECK(stat < oracles::ks_critical(0.001, static_cast<std::size_t>(ess_s2)));
}

TEST_CASE("gibbs_normal is reproducible", "[mcmc]") {
  const bp::NormalModelData data({0.4, 1.9, -0.3, 2.2});
  const bp::ChainReport a = bp::gibbs_normal(data, 500, 50, {0.0, 1.0}, 12);
  const bp::ChainReport b = bp::gibbs_normal(data, 500, 50, {0.0, 1.0}, 12);
  CHECK(a.draws.rows == b.draws.rows);
}

TEST_CASE("metropolis accepts every move on a flat target", "[mcmc]") {
  const bp::LogTarget flat{1, [](std::span<const double>) { return 0.0; }};
  const bp::ChainReport run =
      bp::metropolis_rw(flat, {1.0}, 5000, 500, {0.0}, 21);
  CHECK(*run.acceptance_rate == 1.0);
}

TEST_CASE("metropolis never leaves the support", "[mcmc]") {
  const bp::LogTarget unit{1, [](std::span<const double> x) {
                             return bp::log_density(bp::Uniform(0, 1), x[0]);
                           }};
  // a huge proposal scale pushes almost every candidate out of (0,1)
  const bp::ChainReport run =
      bp::metropolis_rw(unit, {50.0}, 4000, 0, {0.5}, 5);
  CHECK(*run.acceptance_rate < 0.05);
  for (const auto& row : run.draws.rows) {
    CHECK(row[0] >= 0.0);
    CHECK(row[0] <= 1.0);
  }

  CHECK_THROWS_AS(bp::metropolis_rw(unit, {1.0}, 100, 0, {2.0}, 5),
                  bp::invalid_argument);
}

TEST_CASE("metropolis recovers the Beta(5,9) target", "[mcmc][slow]") {
  const bp::LogTarget target = bp::distribution_target(bp::Beta(5, 9));
  const bp::ChainReport run =
      bp::metropolis_rw(target, {0.2}, 55000, 5000, {0.5}, 11);
  CHECK(std::fabs(bp::mean_of(run.draws.column(0)) - 5.0 / 14.0) < 0.01);

  const double exact_lo = bp::quantile(bp::Distribution(bp::Beta(5, 9)), 0.05);
  const double exact_hi = bp::quantile(bp::Distribution(bp::Beta(5, 9)), 0.95);
  CHECK(bp::empirical_quantile(run.draws.column(0), 0.05) ==
        Approx(exact_lo).margin(0.02));
  CHECK(bp::empirical_quantile(run.draws.column(0), 0.95) ==
        Approx(exact_hi).margin(0.02));
  CHECK(*run.acceptance_rate > 0.1);
  CHECK(*run.acceptance_rate < 0.9);
}

TEST_CASE("symmetric targets center at their mean", "[mcmc][property]") {
  for (double loc : {-2.0, 0.0, 3.0}) {
    const bp::LogTarget target = bp::distribution_target(bp::Normal(loc, 1.5));
    const bp::ChainReport run =
        bp::metropolis_rw(target, {1.5}, 30000, 3000, {loc}, 77);
    const std::vector<double> xs = run.draws.column(0);
    const double se = bp::sd_of(xs) / std::sqrt(run.diag.ess[0]);
    CHECK(std::fabs(bp::mean_of(xs) - loc) < 3.0 * se);
  }
}

TEST_CASE("pilot tuning lands acceptance in range", "[mcmc]") {
  const bp::LogTarget target = bp::distribution_target(bp::Normal(0, 1));
  const std::vector<double> tuned =
      bp::pilot_tune_scale(target, {1e-4}, {0.0}, 3);
  const bp::ChainReport run =
      bp::metropolis_rw(target, tuned, 5000, 500, {0.0}, 3);
  CHECK(*run.acceptance_rate > 0.15);
  CHECK(*run.acceptance_rate < 0.55);
}

TEST_CASE("laplace approximation of a normal target is exact", "[mcmc]") {
  const bp::LogTarget target = bp::distribution_target(bp::Normal(3, 2));
  const bp::LaplaceResult fit = bp::laplace_approx(target, {0.0});
  CHECK(fit.mode[0] == Approx(3.0).margin(1e-5));
  CHECK(fit.covariance(0, 0) == Approx(4.0).margin(1e-4));
}

TEST_CASE("laplace approximation of the Beta(5,9) target", "[mcmc]") {
  const bp::LogTarget target = bp::distribution_target(bp::Beta(5, 9));
  const bp::LaplaceResult fit = bp::laplace_approx(target, {0.5});
  // mode (a-1)/(a+b-2) and curvature from the second derivative by hand
  CHECK(fit.mode[0] == Approx(1.0 / 3.0).margin(1e-6));
  CHECK(std::sqrt(fit.covariance(0, 0)) ==
        Approx(1.0 / std::sqrt(54.0)).margin(1e-4));
}

TEST_CASE("laplace approximation factorizes an independent 2-D target",
          "[mcmc]") {
  const bp::LogTarget target{2, [](std::span<const double> x) {
                               return bp::log_density(bp::Normal(0, 1), x[0]) +
                                      bp::log_density(bp::Normal(0, 3), x[1]);
                             }};
  const bp::LaplaceResult fit = bp::laplace_approx(target, {1.0, -2.0});
  CHECK(fit.mode[0] == Approx(0.0).margin(1e-5));
  CHECK(fit.mode[1] == Approx(0.0).margin(1e-5));
  CHECK(fit.covariance(0, 0) == Approx(1.0).margin(1e-3));
  CHECK(fit.covariance(1, 1) == Approx(9.0).margin(1e-3));
  CHECK(fit.covariance(0, 1) == Approx(0.0).margin(1e-3));

  const bp::DrawMatrix draws = bp::sample_laplace(fit, 20000, 4);
  CHECK(std::fabs(bp::sd_of(draws.column(1)) - 3.0) < 0.1);
}

TEST_CASE("laplace error shrinks as Beta(a,a) approaches normality",
          "[mcmc][property]") {
  double previous = 1e9;
  for (double a : {2.0, 8.0, 32.0}) {
    const bp::LogTarget target = bp::distribution_target(bp::Beta(a, a));
    const bp::LaplaceResult fit = bp::laplace_approx(target, {0.4});
    const double exact_sd = 0.5 / std::sqrt(2.0 * a + 1.0);
    const double err = std::fabs(std::sqrt(fit.covariance(0, 0)) - exact_sd);
    CHECK(err < previous);
    previous = err;
  }
}

TEST_CASE("laplace rejects targets without an interior mode", "[mcmc]") {
  // monotone density: the ascent runs to the support edge where the
  // Hessian is not negative definite
  const bp::LogTarget target = bp::distribution_target(bp::Uniform(0, 1));
  CHECK_THROWS_AS(bp::laplace_approx(target, {0.5}), bp::numerical_error);
}

TEST_CASE("transform_draws applies h row-wise", "[mcmc]") {
  bp::DrawMatrix draws;
  draws.columns = {"p"};
  draws.seed = 8;
  for (double v : bp::sample(bp::Distribution(bp::Beta(1, 1)), 100000, 8)) {
    draws.rows.push_back({v});
  }

  const bp::DrawMatrix same = bp::transform_draws(
      draws, {"p"}, [](std::span<const double> row) {
        return std::vector<double>{row[0]};
      });
  CHECK(same.rows == draws.rows);

  // odds h(p) = p/(1-p); the median of the odds of a uniform p is 1
  const bp::DrawMatrix odds = bp::transform_draws(
      draws, {"odds"}, [](std::span<const double> row) {
        return std::vector<double>{row[0] / (1.0 - row[0])};
      });
  CHECK(bp::empirical_quantile(odds.column(0), 0.5) == Approx(1.0).margin(0.02));
}

TEST_CASE("monotone transforms commute with quantiles", "[mcmc][property]") {
  bp::DrawMatrix draws;
  draws.columns = {"p"};
  for (double v : bp::sample(bp::Distribution(bp::Beta(5, 9)), 100000, 44)) {
    draws.rows.push_back({v});
  }
  const bp::DrawMatrix odds = bp::transform_draws(
      draws, {"odds"}, [](std::span<const double> row) {
        return std::vector<double>{row[0] / (1.0 - row[0])};
      });
  for (double q : {0.05, 0.95}) {
    const double pq = bp::quantile(bp::Distribution(bp::Beta(5, 9)), q);
    CHECK(bp::empirical_quantile(odds.column(0), q) ==
          Approx(pq / (1.0 - pq)).margin(0.02));
  }
}

TEST_CASE("transform commutes with row subsetting", "[mcmc][property]") {
  bp::DrawMatrix draws;
  draws.columns = {"x"};
  for (double v : bp::sample(bp::Distribution(bp::Normal(0, 1)), 500, 3)) {
    draws.rows.push_back({v});
  }
  const auto h = [](std::span<const double> row) {
    return std::vector<double>{row[0] * row[0]};
  };
  bp::DrawMatrix head = draws;
  head.rows.resize(100);
  const bp::DrawMatrix transform_then_subset = [&] {
    bp::DrawMatrix full = bp::transform_draws(draws, {"x2"}, h);
    full.rows.resize(100);
    return full;
  }();
  const bp::DrawMatrix subset_then_transform =
      bp::transform_draws(head, {"x2"}, h);
  CHECK(transform_then_subset.rows == subset_then_transform.rows);
}

TEST_CASE("diagnostics: iid, antithetic and degenerate chains", "[mcmc]") {
  bp::DrawMatrix iid;
  iid.columns = {"x"};
  for (double v : bp::sample(bp::Distribution(bp::Normal(0, 1)), 10000, 15)) {
    iid.rows.push_back({v});
  }
  const bp::ChainDiagnostics d = bp::diagnostics(iid, 50);
  CHECK(std::fabs(d.ess[0] - 10000.0) < 1500.0);  // within 15% of S

  bp::DrawMatrix alternating;
  alternating.columns = {"x"};
  for (int i = 0; i < 1000; ++i) {
    alternating.rows.push_back({i % 2 == 0 ? 1.0 : -1.0});
  }
  const bp::ChainDiagnostics alt = bp::diagnostics(alternating, 10);
  CHECK(alt.autocorr[0][0] == Approx(-1.0).margin(0.01));
  // the truncated sum stops before the first nonpositive term, so the
  // estimator reports exactly S here
  CHECK(alt.ess[0] == Approx(1000.0).epsilon(1e-12));

  bp::DrawMatrix constant;
  constant.columns = {"x"};
  for (int i = 0; i < 100; ++i) constant.rows.push_back({3.0});
  CHECK_THROWS_AS(bp::diagnostics(constant, 10), bp::numerical_error);

  CHECK_THROWS_AS(bp::diagnostics(iid, 10000), bp::invalid_argument);
}
