#include <algorithm>
#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "bayes_primer/conjugate.hpp"
#include "bayes_primer/discrete.hpp"
#include "oracles.hpp"

namespace bp = bayes_primer;
using Catch::Approx;

TEST_CASE("bayes_update with a binomial observation", "[discrete]") {
  const bp::DiscreteTable prior = bp::uniform_table({0.3, 0.5, 0.7});

  // products normalized by hand: {0.3, 0.5, 0.7}/1.5
  const bp::DiscreteTable post =
      bp::bayes_update(prior, bp::BinomialData(1, 1));
  CHECK(post.probs[0] == Approx(0.2).epsilon(1e-12));
  CHECK(post.probs[1] == Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(post.probs[2] == Approx(7.0 / 15.0).epsilon(1e-12));

  const bp::DiscreteTable unchanged =
      bp::bayes_update(prior, bp::BinomialData(0, 0));
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(unchanged.probs[j] == Approx(prior.probs[j]).epsilon(1e-12));
  }

  const bp::DiscreteTable point = bp::make_table({0.5}, {1.0});
  const bp::DiscreteTable still_point =
      bp::bayes_update(point, bp::BinomialData(3, 10));
  CHECK(still_point.probs[0] == 1.0);

  // a prior concentrated where the data is impossible
  const bp::DiscreteTable zero_prior = bp::make_table({0.0, 1.0}, {0.5, 0.5});
  CHECK_THROWS_AS(bp::bayes_update(zero_prior, bp::BinomialData(1, 2)),
                  bp::data_error);
}

TEST_CASE("sequential updating folds observations in order", "[discrete]") {
  const bp::DiscreteTable prior = bp::uniform_table({0.2, 0.4, 0.6, 0.8});

  const bp::DiscreteTable two_steps = bp::sequential_update(
      prior, {bp::BinomialData(2, 5), bp::BinomialData(3, 7)});
  const bp::DiscreteTable one_step =
      bp::bayes_update(prior, bp::BinomialData(5, 12));
  for (std::size_t j = 0; j < prior.size(); ++j) {
    CHECK(two_steps.probs[j] == Approx(one_step.probs[j]).epsilon(1e-12));
  }

  const bp::DiscreteTable empty = bp::sequential_update(prior, {});
  CHECK(empty.probs == prior.probs);
}

TEST_CASE("spinner identification by per-outcome likelihood tables",
          "[discrete]") {
  // two spinners over outcomes {1,2,3}; rows give P(outcome | spinner)
  const std::vector<std::vector<double>> spinner = {{0.5, 0.25, 0.25},
                                                    {0.2, 0.2, 0.6}};
  const bp::DiscreteTable prior = bp::uniform_table({1.0, 2.0});
  const std::vector<int> outcomes = {0, 2, 2, 1};

  std::vector<bp::LikelihoodSpec> steps;
  for (int o : outcomes) {
    steps.push_back(bp::TableLikelihood{{spinner[0][static_cast<std::size_t>(o)],
                                         spinner[1][static_cast<std::size_t>(o)]}});
  }
  const bp::DiscreteTable sequential = bp::sequential_update(prior, steps);

  // brute-force joint likelihood of the whole outcome sequence
  double joint0 = 1.0;
  double joint1 = 1.0;
  for (int o : outcomes) {
    joint0 *= spinner[0][static_cast<std::size_t>(o)];
    joint1 *= spinner[1][static_cast<std::size_t>(o)];
  }
  const bp::DiscreteTable once =
      bp::bayes_update(prior, bp::TableLikelihood{{joint0, joint1}});
  CHECK(sequential.probs[0] == Approx(once.probs[0]).epsilon(1e-12));
  CHECK(sequential.probs[1] == Approx(once.probs[1]).epsilon(1e-12));
}

TEST_CASE("grid priors with diagonal mass", "[discrete]") {
  std::vector<double> nine;
  for (int i = 1; i <= 9; ++i) nine.push_back(i / 10.0);

  const bp::DiscreteTable uniform = bp::make_grid_prior(nine, nine, 0.0);
  CHECK(uniform.size() == 81);
  for (double p : uniform.probs) CHECK(p == Approx(1.0 / 81.0).epsilon(1e-12));

  const bp::DiscreteTable diag = bp::make_grid_prior(nine, nine, 0.5);
  for (std::size_t j = 0; j < diag.size(); ++j) {
    const double expected =
        diag.points[j][0] == diag.points[j][1] ? 0.5 / 9.0 : 0.5 / 72.0;
    CHECK(diag.probs[j] == Approx(expected).epsilon(1e-12));
  }

  CHECK_THROWS_AS(bp::make_grid_prior({0.2}, {0.4}, 0.3), bp::invalid_argument);
}

TEST_CASE("two-proportion grid update vs. full enumeration", "[discrete]") {
  std::vector<double> values;
  for (int i = 1; i <= 99; ++i) values.push_back(i / 100.0);
  const bp::DiscreteTable prior = bp::make_grid_prior(values, values, 0.0);
  const bp::DiscreteTable post =
      bp::two_proportion_update(prior, bp::TwoProportionData(4, 12, 6, 12));

  const oracles::GridEnumeration oracle = oracles::enumerate_two_proportion(
      values, values, prior.probs, 4, 12, 6, 12);

  double max_gap = 0.0;
  std::size_t mode = 0;
  std::size_t oracle_mode = 0;
  for (std::size_t j = 0; j < post.size(); ++j) {
    max_gap = std::max(max_gap, std::fabs(post.probs[j] - oracle.prob[j]));
    if (post.probs[j] > post.probs[mode]) mode = j;
    if (oracle.prob[j] > oracle.prob[oracle_mode]) oracle_mode = j;
  }
  CHECK(max_gap < 1e-13);
  CHECK(mode == oracle_mode);
  CHECK(bp::table_mean(post, 0) == Approx(oracle.mean_p1()).margin(1e-12));
  CHECK(bp::table_mean(post, 1) == Approx(oracle.mean_p2()).margin(1e-12));

  const bp::DiscreteTable untouched =
      bp::two_proportion_update(prior, bp::TwoProportionData(0, 0, 0, 0));
  for (std::size_t j = 0; j < prior.size(); ++j) {
    CHECK(untouched.probs[j] == Approx(prior.probs[j]).epsilon(1e-12));
  }
}

TEST_CASE("diagonal-only prior stays on the diagonal", "[discrete]") {
  std::vector<double> values = {0.1, 0.3, 0.5, 0.7, 0.9};
  bp::DiscreteTable prior;
  prior.dim = 2;
  for (double v : values) {
    prior.points.push_back({v, v});
    prior.probs.push_back(0.2);
  }
  const bp::DiscreteTable post =
      bp::two_proportion_update(prior, bp::TwoProportionData(0, 10, 10, 10));

  const double off_diag = bp::table_event_prob(
      post, [](const bp::TablePoint& p) { return p[0] != p[1]; });
  CHECK(off_diag == 0.0);
  // (0/10, 10/10) pulls a forced-equal pair toward 1/2
  std::size_t mode = 0;
  for (std::size_t j = 0; j < post.size(); ++j) {
    if (post.probs[j] > post.probs[mode]) mode = j;
  }
  CHECK(post.points[mode][0] == 0.5);
}

TEST_CASE("event probabilities over tables", "[discrete]") {
  std::vector<double> values;
  for (int i = 1; i <= 99; ++i) values.push_back(i / 100.0);
  const bp::DiscreteTable prior = bp::make_grid_prior(values, values, 0.0);
  const bp::DiscreteTable post =
      bp::two_proportion_update(prior, bp::TwoProportionData(4, 12, 6, 12));

  CHECK(bp::table_event_prob(post, [](const bp::TablePoint&) { return true; }) ==
        Approx(1.0).margin(1e-12));

  const oracles::GridEnumeration oracle = oracles::enumerate_two_proportion(
      values, values, prior.probs, 4, 12, 6, 12);
  const double lt = bp::table_event_prob(
      post, [](const bp::TablePoint& p) { return p[0] < p[1]; });
  CHECK(lt == Approx(oracle.event([](double a, double b) { return a < b; }))
                  .margin(1e-12));

  const bp::DiscreteTable point = bp::make_table({0.5}, {1.0});
  CHECK(bp::table_event_prob(point, [](const bp::TablePoint& p) {
          return p[0] > 0.9;
        }) == 0.0);
}

TEST_CASE("table sampling", "[discrete]") {
  const bp::DiscreteTable point = bp::make_table({0.4}, {1.0});
  for (const auto& draw : bp::sample_table(point, 50, 5)) {
    CHECK(draw[0] == 0.4);
  }

  const bp::DiscreteTable table =
      bp::make_table({0.3, 0.5, 0.7}, {0.2, 1.0 / 3.0, 7.0 / 15.0});
  const auto draws = bp::sample_table(table, 100000, 17);
  std::vector<double> freq(3, 0.0);
  for (const auto& d : draws) {
    for (std::size_t j = 0; j < 3; ++j) {
      if (d[0] == table.points[j][0]) freq[j] += 1.0;
    }
  }
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(std::fabs(freq[j] / 100000.0 - table.probs[j]) < 0.01);
  }

  CHECK(bp::sample_table(table, 1000, 99) == bp::sample_table(table, 1000, 99));
}

TEST_CASE("update order and likelihood scale do not matter",
          "[discrete][property]") {
  const bp::DiscreteTable prior = bp::uniform_table({0.1, 0.4, 0.6, 0.9});
  std::vector<bp::LikelihoodSpec> obs = {
      bp::BinomialData(2, 3), bp::TableLikelihood{{0.3, 0.9, 0.1, 0.5}},
      bp::BinomialData(0, 4), bp::TableLikelihood{{0.2, 0.1, 0.7, 0.4}}};

  const bp::DiscreteTable base = bp::sequential_update(prior, obs);
  std::mt19937 shuffler(3);
  for (int rep = 0; rep < 10; ++rep) {
    std::shuffle(obs.begin(), obs.end(), shuffler);
    const bp::DiscreteTable permuted = bp::sequential_update(prior, obs);
    for (std::size_t j = 0; j < prior.size(); ++j) {
      CHECK(permuted.probs[j] == Approx(base.probs[j]).margin(1e-12));
    }
  }

  // positive rescaling of a table likelihood is invisible after
  // normalization
  const bp::TableLikelihood raw{{0.3, 0.9, 0.1, 0.5}};
  bp::TableLikelihood scaled = raw;
  for (double& v : scaled.values) v *= 7331.5;
  const bp::DiscreteTable a = bp::bayes_update(prior, raw);
  const bp::DiscreteTable b = bp::bayes_update(prior, scaled);
  for (std::size_t j = 0; j < prior.size(); ++j) {
    CHECK(a.probs[j] == Approx(b.probs[j]).margin(1e-12));
  }
}

TEST_CASE("dense grid agrees with the conjugate posterior",
          "[discrete][property]") {
  std::vector<double> grid;
  for (int i = 0; i <= 1000; ++i) grid.push_back(i / 1000.0);
  const bp::DiscreteTable post = bp::bayes_update(bp::uniform_table(grid),
                                                  bp::BinomialData(4, 12));
  const bp::Beta conj = bp::beta_update(bp::BetaBinomialState(1, 1, 4, 12));
  CHECK(std::fabs(bp::table_mean(post) - conj.a / (conj.a + conj.b)) < 1e-4);

  const double conj_sd = std::sqrt(
      conj.a * conj.b /
      ((conj.a + conj.b) * (conj.a + conj.b) * (conj.a + conj.b + 1.0)));
  CHECK(std::fabs(bp::table_sd(post) - conj_sd) < 1e-4);
}

TEST_CASE("tables round-trip through csv", "[discrete]") {
  const bp::DiscreteTable table =
      bp::make_table({0.25, 0.5, 0.75}, {0.125, 0.5, 0.375});
  const bp::DiscreteTable back = bp::table_from_csv(bp::to_csv(table));
  CHECK(back.dim == 1);
  CHECK(back.points == table.points);
  CHECK(back.probs == table.probs);

  const bp::DiscreteTable grid =
      bp::make_grid_prior({0.2, 0.8}, {0.2, 0.8}, 0.4);
  const bp::DiscreteTable grid_back = bp::table_from_csv(bp::to_csv(grid));
  CHECK(grid_back.dim == 2);
  CHECK(grid_back.points == grid.points);
  CHECK(grid_back.probs == grid.probs);

  CHECK_THROWS_AS(bp::table_from_csv("wrong,header\n1,2\n"), bp::data_error);
}
