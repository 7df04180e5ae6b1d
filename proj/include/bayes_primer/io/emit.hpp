#ifndef BAYES_PRIMER_IO_EMIT_HPP_
#define BAYES_PRIMER_IO_EMIT_HPP_

#include <json.hpp>
#include <string>

#include "bayes_primer/discrete.hpp"
#include "bayes_primer/draws.hpp"
#include "bayes_primer/eval.hpp"
#include "bayes_primer/io/csv.hpp"

// Machine-readable output: CSV for draw matrices and tables, JSON with
// stable key order for scalar results.  Every emitted document embeds
// the resolved seed: a `# seed=` comment line in CSV, a `seed` key in
// JSON.

namespace bayes_primer::io {

using ordered_json = nlohmann::ordered_json;

inline std::string draw_matrix_csv(const DrawMatrix& draws) {
  std::string out = "# seed=" + std::to_string(draws.seed) + "\n";
  out += "draw_index";
  for (const auto& c : draws.columns) {
    out += ',';
    out += quote_field(c);
  }
  out += '\n';
  for (std::size_t s = 0; s < draws.rows.size(); ++s) {
    out += std::to_string(s + 1);
    for (double v : draws.rows[s]) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

inline std::string chain_report_csv(const ChainReport& report) {
  std::string out = "# seed=" + std::to_string(report.draws.seed) + "\n";
  if (report.acceptance_rate) {
    out += "# acceptance_rate=" + format_double(*report.acceptance_rate) + "\n";
  }
  for (const auto& [name, rate] : report.node_acceptance) {
    out += "# acceptance " + name + "=" + format_double(rate) + "\n";
  }
  std::string body = draw_matrix_csv(report.draws);
  return out + body.substr(body.find('\n') + 1);  // body seed line repeats ours
}

inline ordered_json chain_summary_json(const ChainReport& report) {
  ordered_json j;
  j["seed"] = report.draws.seed;
  j["draws"] = report.draws.draw_count();
  j["burn_in"] = report.draws.burn_in;
  j["columns"] = report.draws.columns;
  ordered_json summaries = ordered_json::array();
  for (std::size_t c = 0; c < report.draws.column_count(); ++c) {
    const std::vector<double> xs = report.draws.column(c);
    ordered_json s;
    s["name"] = report.draws.columns[c];
    s["mean"] = mean_of(xs);
    s["sd"] = sd_of(xs);
    if (c < report.diag.ess.size()) s["ess"] = report.diag.ess[c];
    summaries.push_back(std::move(s));
  }
  j["summary"] = std::move(summaries);
  if (report.acceptance_rate) j["acceptance_rate"] = *report.acceptance_rate;
  if (!report.node_acceptance.empty()) {
    ordered_json acc;
    for (const auto& [name, rate] : report.node_acceptance) acc[name] = rate;
    j["node_acceptance"] = std::move(acc);
  }
  if (!report.warnings.empty()) j["warnings"] = report.warnings;
  return j;
}

inline std::string table_csv(const DiscreteTable& table, Seed seed) {
  return "# seed=" + std::to_string(seed) + "\n" + to_csv(table);
}

inline ordered_json ppc_json(const PpcResult& result) {
  ordered_json j;
  j["t_observed"] = result.t_observed;
  j["t_replicates"] = result.t_replicates;
  j["tail_prob"] = result.tail_prob;
  return j;
}

inline ordered_json sensitivity_json(const std::vector<SensitivityRow>& rows) {
  ordered_json arr = ordered_json::array();
  for (const auto& row : rows) {
    ordered_json j;
    j["label"] = row.label;
    j["summary"] = row.summary;
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace bayes_primer::io

#endif  // BAYES_PRIMER_IO_EMIT_HPP_
