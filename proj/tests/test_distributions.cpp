#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "bayes_primer/distributions.hpp"
#include "bayes_primer/draws.hpp"
#include "oracles.hpp"

namespace bp = bayes_primer;
using Catch::Approx;

namespace {

std::vector<bp::Distribution> continuous_families() {
  return {
      bp::Beta(5, 9),           bp::Beta(0.5, 0.5),
      bp::Normal(0, 1),         bp::Normal(-3, 2.5),
      bp::Gamma(2, 3),          bp::Gamma(0.7, 1.5),
      bp::InverseGamma(3, 2),   bp::Uniform(-1, 4),
      bp::StudentT(5, 1, 2),
  };
}

}  // namespace

TEST_CASE("parameter domains are enforced at construction", "[distributions]") {
  CHECK_THROWS_AS(bp::Beta(0, 1), bp::invalid_argument);
  CHECK_THROWS_AS(bp::Beta(1, -2), bp::invalid_argument);
  CHECK_THROWS_AS(bp::Normal(0, 0), bp::invalid_argument);
  CHECK_THROWS_AS(bp::Gamma(1, 0), bp::invalid_argument);
  CHECK_THROWS_AS(bp::InverseGamma(-1, 1), bp::invalid_argument);
  CHECK_THROWS_AS(bp::Binomial(-1, 0.5), bp::invalid_argument);
  CHECK_THROWS_AS(bp::Binomial(3, 1.2), bp::invalid_argument);
  CHECK_THROWS_AS(bp::Uniform(2, 2), bp::invalid_argument);
  CHECK_THROWS_AS(bp::StudentT(0, 0, 1), bp::invalid_argument);
}

TEST_CASE("log density values", "[distributions]") {
  CHECK(bp::log_density(bp::Uniform(0, 1), 0.3) == 0.0);
  CHECK(bp::log_density(bp::Beta(5, 9), -0.1) == bp::kNegInf);
  CHECK(bp::log_density(bp::Beta(5, 9), 1.2) == bp::kNegInf);
  // log(1/sqrt(2 pi)), evaluated by hand
  CHECK(bp::log_density(bp::Normal(0, 1), 0.0) ==
        Approx(-0.9189385332046727).epsilon(1e-12));
  // discrete family: non-integers carry no mass
  CHECK(bp::log_density(bp::Binomial(10, 0.4), 2.5) == bp::kNegInf);
  CHECK(std::exp(bp::log_density(bp::Binomial(10, 0.4), 2.0)) ==
        Approx(oracles::binom_pmf(2, 10, 0.4)).epsilon(1e-12));
}

TEST_CASE("cdf values", "[distributions]") {
  CHECK(bp::cdf(bp::Normal(0, 1), 0.0) == Approx(0.5).margin(1e-15));
  CHECK(bp::cdf(bp::Beta(1, 1), 0.25) == Approx(0.25).margin(1e-12));

  // quadrature oracle for Beta(5,9) on [0, 1/2]
  const auto beta_pdf = [](double x) {
    return std::exp(bp::log_density(bp::Beta(5, 9), x));
  };
  const double oracle = oracles::cdf_by_quadrature(beta_pdf, 0.0, 0.5);
  CHECK(oracle == Approx(0.8665771484375).epsilon(1e-9));  // frozen
  CHECK(bp::cdf(bp::Beta(5, 9), 0.5) == Approx(oracle).epsilon(1e-9));
}

TEST_CASE("quantile values", "[distributions]") {
  CHECK(bp::quantile(bp::Distribution(bp::Beta(1, 1)), 0.5) ==
        Approx(0.5).margin(1e-10));
  CHECK(bp::quantile(bp::Distribution(bp::Normal(2, 3)), 0.5) ==
        Approx(2.0).margin(1e-10));

  const auto beta_pdf = [](double x) {
    return std::exp(bp::log_density(bp::Beta(5, 9), x));
  };
  const double lo = oracles::quantile_by_quadrature(beta_pdf, 0.0, 1.0, 0.05);
  const double hi = oracles::quantile_by_quadrature(beta_pdf, 0.0, 1.0, 0.95);
  CHECK(lo == Approx(0.16565942671507172).margin(1e-8));  // frozen
  CHECK(hi == Approx(0.5726193394082123).margin(1e-8));   // frozen
  CHECK(bp::quantile(bp::Distribution(bp::Beta(5, 9)), 0.05) ==
        Approx(lo).margin(1e-8));
  CHECK(bp::quantile(bp::Distribution(bp::Beta(5, 9)), 0.95) ==
        Approx(hi).margin(1e-8));

  CHECK_THROWS_AS(bp::quantile(bp::Distribution(bp::Beta(5, 9)), 0.0),
                  bp::invalid_argument);
  CHECK_THROWS_AS(bp::quantile(bp::Distribution(bp::Beta(5, 9)), 1.0),
                  bp::invalid_argument);
}

TEST_CASE("binomial quantile is the smallest k with cdf(k) >= q",
          "[distributions]") {
  const bp::Binomial d(10, 0.3);
  for (double q : {0.01, 0.2, 0.5, 0.8, 0.99}) {
    const double k = bp::quantile(bp::Distribution(d), q);
    CHECK(bp::cdf(d, k) >= q);
    if (k > 0) CHECK(bp::cdf(d, k - 1) < q);
  }
}

TEST_CASE("seeded sampling", "[distributions]") {
  const std::vector<double> ones =
      bp::sample(bp::Distribution(bp::Binomial(1, 1.0)), 5, 123);
  CHECK(ones == std::vector<double>{1, 1, 1, 1, 1});

  // beta mean a/(a+b) = 5/14, computed by hand; sd of the mean bound
  const std::vector<double> beta_draws =
      bp::sample(bp::Distribution(bp::Beta(5, 9)), 100000, 20260809);
  const double beta_sd = std::sqrt(5.0 * 9.0 / (14.0 * 14.0 * 15.0));
  CHECK(std::fabs(bp::mean_of(beta_draws) - 5.0 / 14.0) <
        3.0 * beta_sd / std::sqrt(100000.0));

  const std::vector<double> z =
      bp::sample(bp::Distribution(bp::Normal(0, 1)), 100000, 7);
  double below = 0.0;
  for (double v : z) below += v <= 0.0 ? 1.0 : 0.0;
  CHECK(std::fabs(below / 100000.0 - 0.5) < 0.01);

  CHECK(bp::sample(bp::Distribution(bp::Gamma(2, 3)), 50, 99) ==
        bp::sample(bp::Distribution(bp::Gamma(2, 3)), 50, 99));
}

TEST_CASE("quantile/cdf round trip across the continuous families",
          "[distributions][property]") {
  for (const auto& d : continuous_families()) {
    for (int i = 1; i <= 99; ++i) {
      const double q = i / 100.0;
      const double x = bp::quantile(d, q);
      INFO(bp::family_name(d) << " at q=" << q);
      CHECK(std::fabs(bp::cdf(d, x) - q) < 1e-8);
    }
  }
}

TEST_CASE("seeded draws pass a KS test against the cdf",
          "[distributions][property]") {
  const std::size_t n = 100000;
  const double crit = oracles::ks_critical(0.001, n);
  bp::Seed seed = 31;
  for (const auto& d : continuous_families()) {
    const double stat = oracles::ks_statistic(
        bp::sample(d, n, seed++), [&](double x) { return bp::cdf(d, x); });
    INFO(bp::family_name(d));
    CHECK(stat < crit);
  }
}

TEST_CASE("densities integrate to one", "[distributions][property]") {
  struct Range {
    bp::Distribution d;
    double lo;
    double hi;
  };
  const std::vector<Range> cases = {
      {bp::Beta(5, 9), 0.0, 1.0},
      {bp::Normal(0, 1), -12.0, 12.0},
      {bp::Normal(-3, 2.5), -33.0, 27.0},
      {bp::Gamma(2, 3), 0.0, 30.0},
      {bp::InverseGamma(3, 2), 1e-9, 400.0},
      {bp::Uniform(-1, 4), -1.0, 4.0},
      {bp::StudentT(30, 1, 2), -200.0, 200.0},
  };
  for (const auto& c : cases) {
    const double mass = oracles::integrate(
        [&](double x) { return std::exp(bp::log_density(c.d, x)); }, c.lo,
        c.hi, 1e-10);
    INFO(bp::family_name(c.d));
    CHECK(mass == Approx(1.0).margin(1e-6));
  }
}
