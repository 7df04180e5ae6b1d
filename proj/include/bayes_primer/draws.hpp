#ifndef BAYES_PRIMER_DRAWS_HPP_
#define BAYES_PRIMER_DRAWS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bayes_primer/errors.hpp"
#include "bayes_primer/rng.hpp"

// DrawMatrix is the universal simulation-output carrier: S rows of
// posterior draws over named columns, plus the seed and burn-in that
// produced them.  ChainReport bundles a DrawMatrix with sampler
// bookkeeping (acceptance rates, autocorrelations, effective sample
// sizes, proposal scales).

namespace bayes_primer {

struct DrawMatrix {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;  // rows[s][j], all entries finite
  std::size_t burn_in = 0;
  Seed seed = 0;

  std::size_t draw_count() const { return rows.size(); }
  std::size_t column_count() const { return columns.size(); }

  std::size_t column_index(const std::string& name) const {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (columns[j] == name) return j;
    }
    throw invalid_argument("DrawMatrix: no column named '" + name + "'");
  }

  std::vector<double> column(std::size_t j) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[j]);
    return out;
  }

  std::vector<double> column(const std::string& name) const {
    return column(column_index(name));
  }
};

inline double mean_of(std::span<const double> xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) /
         static_cast<double>(xs.size());
}

inline double sd_of(std::span<const double> xs) {
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

// Empirical quantile with linear interpolation between order statistics.
inline double empirical_quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw invalid_argument("empirical_quantile: empty sample");
  std::sort(xs.begin(), xs.end());
  const double h = q * (static_cast<double>(xs.size()) - 1.0);
  const std::size_t i = static_cast<std::size_t>(std::floor(h));
  if (i + 1 >= xs.size()) return xs.back();
  return xs[i] + (h - static_cast<double>(i)) * (xs[i + 1] - xs[i]);
}

struct ChainDiagnostics {
  // autocorr[j][l-1] holds the lag-l sample autocorrelation of column j
  std::vector<std::vector<double>> autocorr;
  std::vector<double> ess;
};

// Sample autocorrelations up to max_lag and the truncated-sum effective
// sample size ESS = S / (1 + 2 * sum of rho(l)), summing until the first
// nonpositive autocorrelation.
inline ChainDiagnostics diagnostics(const DrawMatrix& draws,
                                    std::size_t max_lag) {
  const std::size_t s = draws.draw_count();
  if (max_lag < 1 || s <= max_lag) {
    throw invalid_argument("diagnostics: need draw count > max_lag >= 1");
  }
  ChainDiagnostics out;
  for (std::size_t j = 0; j < draws.column_count(); ++j) {
    const std::vector<double> xs = draws.column(j);
    const double m = mean_of(xs);
    double c0 = 0.0;
    for (double x : xs) c0 += (x - m) * (x - m);
    if (c0 == 0.0) {
      throw numerical_error("diagnostics: degenerate chain in column '" +
                            draws.columns[j] + "'");
    }
    std::vector<double> rho(max_lag, 0.0);
    for (std::size_t l = 1; l <= max_lag; ++l) {
      double cl = 0.0;
      for (std::size_t t = 0; t + l < s; ++t) {
        cl += (xs[t] - m) * (xs[t + l] - m);
      }
      rho[l - 1] = cl / c0;
    }
    double tail = 0.0;
    for (std::size_t l = 0; l < max_lag && rho[l] > 0.0; ++l) {
      tail += rho[l];
    }
    out.autocorr.push_back(std::move(rho));
    out.ess.push_back(static_cast<double>(s) / (1.0 + 2.0 * tail));
  }
  return out;
}

struct ChainReport {
  DrawMatrix draws;
  std::optional<double> acceptance_rate;       // Metropolis chains only
  std::map<std::string, double> node_acceptance;  // graph sampler, per node
  std::vector<double> proposal_scale;
  ChainDiagnostics diag;
  std::vector<std::string> warnings;
};

}  // namespace bayes_primer

#endif  // BAYES_PRIMER_DRAWS_HPP_
