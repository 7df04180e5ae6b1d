#ifndef BAYES_PRIMER_DISCRETE_HPP_
#define BAYES_PRIMER_DISCRETE_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "bayes_primer/distributions.hpp"
#include "bayes_primer/errors.hpp"
#include "bayes_primer/io/csv.hpp"
#include "bayes_primer/rng.hpp"
#include "bayes_primer/special.hpp"

// Bayes' rule on finite supports: one-parameter discrete priors and
// two-proportion grids.  Products are accumulated in log space and
// exp-normalized against the max log product so large-n likelihoods do
// not underflow.

namespace bayes_primer {

using TablePoint = std::array<double, 2>;  // second coordinate unused in 1-D

struct DiscreteTable {
  int dim = 1;  // 1 or 2
  std::vector<TablePoint> points;
  std::vector<double> probs;

  std::size_t size() const { return points.size(); }
};

namespace detail {

inline void check_table(const DiscreteTable& t) {
  if (t.dim != 1 && t.dim != 2) {
    throw invalid_argument("DiscreteTable: dim must be 1 or 2");
  }
  if (t.points.empty() || t.points.size() != t.probs.size()) {
    throw invalid_argument(
        "DiscreteTable: need matching, nonempty support and probs");
  }
  double sum = 0.0;
  for (double p : t.probs) {
    if (!(p >= 0.0)) {
      throw invalid_argument("DiscreteTable: probabilities must be >= 0");
    }
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-10) {
    throw invalid_argument("DiscreteTable: probabilities must sum to 1");
  }
  for (std::size_t i = 0; i < t.points.size(); ++i) {
    for (std::size_t j = i + 1; j < t.points.size(); ++j) {
      if (t.points[i] == t.points[j]) {
        throw invalid_argument("DiscreteTable: support points must be distinct");
      }
    }
  }
}

}  // namespace detail

inline DiscreteTable make_table(std::vector<double> support,
                                std::vector<double> probs) {
  DiscreteTable t;
  t.dim = 1;
  t.points.reserve(support.size());
  for (double x : support) t.points.push_back({x, 0.0});
  t.probs = std::move(probs);
  detail::check_table(t);
  return t;
}

inline DiscreteTable uniform_table(std::vector<double> support) {
  const std::size_t n = support.size();
  if (n == 0) throw invalid_argument("uniform_table: empty support");
  return make_table(std::move(support),
                    std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

// ---------------------------------------------------------------------------
// likelihood specifications

struct BinomialData {
  long successes;
  long trials;
  BinomialData(long y, long n) : successes(y), trials(n) {
    if (n < 0 || y < 0 || y > n) {
      throw invalid_argument("BinomialData: need 0 <= successes <= trials");
    }
  }
};

struct NormalKnownSdData {
  double ybar;
  long n;
  double sigma;
  NormalKnownSdData(double ybar_, long n_, double sigma_)
      : ybar(ybar_), n(n_), sigma(sigma_) {
    if (n < 1 || !(sigma > 0.0)) {
      throw invalid_argument("NormalKnownSdData: need n >= 1 and sigma > 0");
    }
  }
};

struct TableLikelihood {
  std::vector<double> values;  // one likelihood value per support point
};

using LikelihoodSpec =
    std::variant<BinomialData, NormalKnownSdData, TableLikelihood>;

namespace detail {

// Log likelihood at a 1-D support point.  Binomial and normal kinds use
// the full data density (binomial coefficient included) so the update's
// normalization constant doubles as the marginal likelihood.
inline double log_likelihood_at(const LikelihoodSpec& like,
                                const DiscreteTable& table, std::size_t j) {
  struct Visitor {
    const DiscreteTable& table;
    std::size_t j;

    double operator()(const BinomialData& d) const {
      const double p = table.points[j][0];
      return log_density(Binomial(d.trials, p), static_cast<double>(d.successes));
    }
    double operator()(const NormalKnownSdData& d) const {
      const double mu = table.points[j][0];
      // density of the sample mean: ybar | mu ~ Normal(mu, sigma/sqrt(n))
      return log_density(
          Normal(mu, d.sigma / std::sqrt(static_cast<double>(d.n))), d.ybar);
    }
    double operator()(const TableLikelihood& d) const {
      if (d.values.size() != table.size()) {
        throw invalid_argument(
            "TableLikelihood: length must match the support");
      }
      const double v = d.values[j];
      if (!(v >= 0.0)) {
        throw invalid_argument("TableLikelihood: values must be >= 0");
      }
      return v > 0.0 ? std::log(v) : kNegInf;
    }
  };
  return std::visit(Visitor{table, j}, like);
}

}  // namespace detail

struct UpdateResult {
  DiscreteTable posterior;
  double log_marginal;  // log normalization constant, sum_j prior_j * L_j
};

inline UpdateResult bayes_update_detail(const DiscreteTable& prior,
                                        const LikelihoodSpec& like) {
  detail::check_table(prior);
  const std::size_t m = prior.size();
  std::vector<double> logs(m, kNegInf);
  double max_log = kNegInf;
  for (std::size_t j = 0; j < m; ++j) {
    if (prior.probs[j] <= 0.0) continue;
    const double ll = detail::log_likelihood_at(like, prior, j);
    logs[j] = std::log(prior.probs[j]) + ll;
    if (logs[j] > max_log) max_log = logs[j];
  }
  if (max_log == kNegInf) {
    throw data_error("bayes_update: data impossible under every prior point");
  }
  double total = 0.0;
  std::vector<double> weights(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    if (logs[j] == kNegInf) continue;
    weights[j] = std::exp(logs[j] - max_log);
    total += weights[j];
  }
  DiscreteTable posterior = prior;
  for (std::size_t j = 0; j < m; ++j) {
    posterior.probs[j] = weights[j] / total;
  }
  return {std::move(posterior), max_log + std::log(total)};
}

inline DiscreteTable bayes_update(const DiscreteTable& prior,
                                  const LikelihoodSpec& like) {
  return bayes_update_detail(prior, like).posterior;
}

inline DiscreteTable sequential_update(
    const DiscreteTable& prior, const std::vector<LikelihoodSpec>& observations) {
  DiscreteTable current = prior;
  for (const auto& like : observations) {
    current = bayes_update(current, like);
  }
  return current;
}

// ---------------------------------------------------------------------------
// two-proportion grids

// Uniform product grid over p1_values x p2_values, with total probability
// `diagonal_mass` reassigned uniformly onto the p1 == p2 points and the
// remainder spread uniformly off the diagonal.
inline DiscreteTable make_grid_prior(const std::vector<double>& p1_values,
                                     const std::vector<double>& p2_values,
                                     double diagonal_mass) {
  auto check_values = [](const std::vector<double>& v, const char* name) {
    if (v.empty()) {
      throw invalid_argument(std::string("make_grid_prior: ") + name +
                             " must be nonempty");
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!(v[i] >= 0.0 && v[i] <= 1.0)) {
        throw invalid_argument(std::string("make_grid_prior: ") + name +
                               " entries must lie in [0,1]");
      }
      if (i > 0 && !(v[i] > v[i - 1])) {
        throw invalid_argument(std::string("make_grid_prior: ") + name +
                               " must be strictly increasing");
      }
    }
  };
  check_values(p1_values, "p1_values");
  check_values(p2_values, "p2_values");
  if (!(diagonal_mass >= 0.0 && diagonal_mass < 1.0)) {
    throw invalid_argument("make_grid_prior: diagonal_mass must lie in [0,1)");
  }

  DiscreteTable t;
  t.dim = 2;
  std::size_t n_diag = 0;
  for (double p1 : p1_values) {
    for (double p2 : p2_values) {
      t.points.push_back({p1, p2});
      if (p1 == p2) ++n_diag;
    }
  }
  const std::size_t n_total = t.points.size();
  const std::size_t n_off = n_total - n_diag;
  if (diagonal_mass == 0.0) {
    t.probs.assign(n_total, 1.0 / static_cast<double>(n_total));
    return t;
  }
  if (n_diag == 0) {
    throw invalid_argument(
        "make_grid_prior: diagonal mass requested but the grid has no "
        "p1 == p2 points");
  }
  if (n_off == 0) {
    throw invalid_argument(
        "make_grid_prior: no off-diagonal points to carry the remaining mass");
  }
  const double diag_p = diagonal_mass / static_cast<double>(n_diag);
  const double off_p = (1.0 - diagonal_mass) / static_cast<double>(n_off);
  t.probs.reserve(n_total);
  for (const auto& pt : t.points) {
    t.probs.push_back(pt[0] == pt[1] ? diag_p : off_p);
  }
  return t;
}

struct TwoProportionData {
  long y1, n1, y2, n2;
  TwoProportionData(long y1_, long n1_, long y2_, long n2_)
      : y1(y1_), n1(n1_), y2(y2_), n2(n2_) {
    if (y1 < 0 || y1 > n1 || y2 < 0 || y2 > n2) {
      throw invalid_argument("TwoProportionData: need 0 <= y_i <= n_i");
    }
  }
};

inline UpdateResult two_proportion_update_detail(const DiscreteTable& prior,
                                                 const TwoProportionData& data) {
  if (prior.dim != 2) {
    throw invalid_argument("two_proportion_update: prior must be a 2-D grid");
  }
  TableLikelihood like;
  like.values.reserve(prior.size());
  for (const auto& pt : prior.points) {
    const double l1 = log_density(Binomial(data.n1, pt[0]),
                                  static_cast<double>(data.y1));
    const double l2 = log_density(Binomial(data.n2, pt[1]),
                                  static_cast<double>(data.y2));
    like.values.push_back(std::exp(l1 + l2));
  }
  return bayes_update_detail(prior, like);
}

inline DiscreteTable two_proportion_update(const DiscreteTable& prior,
                                           const TwoProportionData& data) {
  return two_proportion_update_detail(prior, data).posterior;
}

// ---------------------------------------------------------------------------
// summaries and sampling

inline double table_event_prob(
    const DiscreteTable& t, const std::function<bool(const TablePoint&)>& pred) {
  double sum = 0.0;
  for (std::size_t j = 0; j < t.size(); ++j) {
    if (pred(t.points[j])) sum += t.probs[j];
  }
  return sum;
}

inline double table_mean(const DiscreteTable& t, int coordinate = 0) {
  double sum = 0.0;
  for (std::size_t j = 0; j < t.size(); ++j) {
    sum += t.points[j][coordinate] * t.probs[j];
  }
  return sum;
}

inline double table_sd(const DiscreteTable& t, int coordinate = 0) {
  const double m = table_mean(t, coordinate);
  double ss = 0.0;
  for (std::size_t j = 0; j < t.size(); ++j) {
    const double d = t.points[j][coordinate] - m;
    ss += d * d * t.probs[j];
  }
  return std::sqrt(ss);
}

// Smallest support value whose cumulative probability reaches q (1-D).
inline double table_quantile(const DiscreteTable& t, double q) {
  if (t.dim != 1) {
    throw invalid_argument("table_quantile: defined for 1-D tables");
  }
  if (!(q > 0.0 && q < 1.0)) {
    throw invalid_argument("table_quantile: q must lie in (0, 1)");
  }
  std::vector<std::size_t> order(t.size());
  for (std::size_t j = 0; j < t.size(); ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return t.points[a][0] < t.points[b][0];
  });
  double cum = 0.0;
  for (std::size_t j : order) {
    cum += t.probs[j];
    if (cum >= q) return t.points[j][0];
  }
  return t.points[order.back()][0];
}

inline std::vector<TablePoint> sample_table(const DiscreteTable& t,
                                            std::size_t n, Seed seed) {
  if (n < 1) throw invalid_argument("sample_table: need n >= 1");
  std::vector<double> cum(t.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < t.size(); ++j) {
    acc += t.probs[j];
    cum[j] = acc;
  }
  cum.back() = 1.0;
  RngStream rng(seed);
  std::vector<TablePoint> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.next_u01();
    const auto it = std::lower_bound(cum.begin(), cum.end(), u);
    out.push_back(t.points[static_cast<std::size_t>(it - cum.begin())]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV serialization: header `point_1[,point_2],prob`

inline std::string to_csv(const DiscreteTable& t) {
  std::string out = t.dim == 2 ? "point_1,point_2,prob\n" : "point_1,prob\n";
  for (std::size_t j = 0; j < t.size(); ++j) {
    out += io::format_double(t.points[j][0]);
    if (t.dim == 2) {
      out += ',';
      out += io::format_double(t.points[j][1]);
    }
    out += ',';
    out += io::format_double(t.probs[j]);
    out += '\n';
  }
  return out;
}

inline DiscreteTable table_from_csv(std::string_view text) {
  const io::CsvTable csv = io::parse_csv(text);
  DiscreteTable t;
  if (csv.header == std::vector<std::string>{"point_1", "prob"}) {
    t.dim = 1;
  } else if (csv.header ==
             std::vector<std::string>{"point_1", "point_2", "prob"}) {
    t.dim = 2;
  } else {
    throw data_error(
        "DiscreteTable csv: header must be point_1[,point_2],prob");
  }
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    TablePoint pt{csv.numeric_at(i, 0), 0.0};
    if (t.dim == 2) pt[1] = csv.numeric_at(i, 1);
    t.points.push_back(pt);
    t.probs.push_back(csv.numeric_at(i, t.dim == 2 ? 2 : 1));
  }
  detail::check_table(t);
  return t;
}

}  // namespace bayes_primer

#endif  // BAYES_PRIMER_DISCRETE_HPP_
