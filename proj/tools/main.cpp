// bayes-primer: command-line surface over the inference library.
// One command per process; every run resolves a seed (flag, then the
// BAYES_PRIMER_SEED environment variable, then the system entropy
// source) and embeds it in the output so runs are reproducible.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical
// failure.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "bayes_primer/bayes_primer.hpp"
#include "bayes_primer/io/model_data.hpp"

namespace bp = bayes_primer;
using bp::io::ordered_json;

namespace {

struct OutputOptions {
  std::string format;  // "csv" or "json"; leaf commands set their default
  std::string path;    // empty = stdout
  std::optional<bp::Seed> seed;
};

bp::Seed resolve_seed(const OutputOptions& opts) {
  if (opts.seed) return *opts.seed;
  if (const char* env = std::getenv("BAYES_PRIMER_SEED")) {
    try {
      return static_cast<bp::Seed>(std::stoull(env));
    } catch (const std::exception&) {
      throw bp::invalid_argument(
          "BAYES_PRIMER_SEED must be an unsigned integer");
    }
  }
  std::random_device rd;
  return (static_cast<bp::Seed>(rd()) << 32) ^ rd();
}

void write_output(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw bp::data_error("cannot open output path '" + path + "'");
  out << text;
  if (!out) throw bp::data_error("failed writing output path '" + path + "'");
}

void emit_json(ordered_json j, const OutputOptions& opts) {
  write_output(j.dump(2) + "\n", opts.path);
}

void emit_chain(const bp::ChainReport& report, const OutputOptions& opts) {
  if (opts.format == "json") {
    emit_json(bp::io::chain_summary_json(report), opts);
  } else {
    write_output(bp::io::chain_report_csv(report), opts.path);
  }
}

void emit_draws(const bp::DrawMatrix& draws, const OutputOptions& opts) {
  if (opts.format == "json") {
    bp::ChainReport report;
    report.draws = draws;
    emit_json(bp::io::chain_summary_json(report), opts);
  } else {
    write_output(bp::io::draw_matrix_csv(draws), opts.path);
  }
}

void add_output_flags(CLI::App* cmd, OutputOptions& opts,
                      const std::string& default_format) {
  opts.format = default_format;
  cmd->add_option("--format", opts.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  cmd->add_option("--out", opts.path, "Output path (default: standard output)");
  cmd->add_option("--seed", opts.seed,
                  "RNG seed (default: BAYES_PRIMER_SEED or system entropy)");
}

// ---------------------------------------------------------------------------
// shared ingestion helpers

bp::DiscreteTable load_table(const std::string& path) {
  return bp::table_from_csv(bp::io::read_file(path));
}

std::vector<double> grid_values(double start, double end, double step) {
  if (!(step > 0.0) || !(start <= end)) {
    throw bp::invalid_argument("grid: need start <= end and step > 0");
  }
  std::vector<double> values;
  for (double v = start; v <= end + 0.5 * step; v += step) {
    values.push_back(v);
  }
  return values;
}

bp::GroupCounts load_group_counts(const std::string& path) {
  const bp::io::CsvTable csv = bp::io::read_csv(path);
  const std::vector<double> y = csv.numeric_column("y");
  const std::vector<double> n = csv.numeric_column("n");
  std::vector<long> yl(y.begin(), y.end());
  std::vector<long> nl(n.begin(), n.end());
  return bp::GroupCounts(std::move(yl), std::move(nl));
}

bp::GroupMeans load_group_means(const std::string& path, double sigma) {
  const bp::io::CsvTable csv = bp::io::read_csv(path);
  const std::vector<double> ybar = csv.numeric_column("ybar");
  const std::vector<double> n = csv.numeric_column("n");
  return bp::GroupMeans(ybar, std::vector<long>(n.begin(), n.end()), sigma);
}

bp::RegressionData load_regression(const std::string& path,
                                   const std::string& response) {
  const bp::io::CsvTable csv = bp::io::read_csv(path);
  const std::size_t y_col = csv.column_index(response);
  std::vector<std::size_t> x_cols;
  for (std::size_t j = 0; j < csv.header.size(); ++j) {
    if (j != y_col) x_cols.push_back(j);
  }
  const auto n = static_cast<Eigen::Index>(csv.rows.size());
  Eigen::MatrixXd design(n, static_cast<Eigen::Index>(x_cols.size()) + 1);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    const auto row = static_cast<std::size_t>(i);
    for (std::size_t j = 0; j < x_cols.size(); ++j) {
      design(i, static_cast<Eigen::Index>(j) + 1) =
          csv.numeric_at(row, x_cols[j]);
    }
    y(i) = csv.numeric_at(row, y_col);
  }
  return bp::RegressionData(std::move(design), std::move(y));
}

// prior syntax: beta:a,b | point:p | normal:m0,s0 | table:path.csv
bp::ModelSpec parse_model_spec(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw bp::invalid_argument("prior spec '" + text +
                               "': expected kind:args");
  }
  const std::string kind = text.substr(0, colon);
  const std::string args = text.substr(colon + 1);
  auto split_two = [&]() {
    const auto comma = args.find(',');
    if (comma == std::string::npos) {
      throw bp::invalid_argument("prior spec '" + text +
                                 "': expected two comma-separated values");
    }
    return std::pair<double, double>{std::stod(args.substr(0, comma)),
                                     std::stod(args.substr(comma + 1))};
  };
  try {
    if (kind == "beta") {
      const auto [a, b] = split_two();
      return bp::BetaPriorSpec{a, b};
    }
    if (kind == "normal") {
      const auto [m0, s0] = split_two();
      return bp::NormalPriorSpec{m0, s0};
    }
    if (kind == "point") {
      return bp::DiscretePriorSpec{bp::make_table({std::stod(args)}, {1.0})};
    }
    if (kind == "table") {
      return bp::DiscretePriorSpec{load_table(args)};
    }
  } catch (const std::invalid_argument&) {
    throw bp::invalid_argument("prior spec '" + text +
                               "': arguments must be numeric");
  }
  throw bp::invalid_argument("prior spec '" + text +
                             "': unknown kind '" + kind + "'");
}

bp::SummarySpec parse_summary_spec(const std::string& text) {
  if (text == "mean") return {bp::SummarySpec::Kind::mean, 0.0};
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const std::string kind = text.substr(0, colon);
    const double arg = std::stod(text.substr(colon + 1));
    if (kind == "quantile") return {bp::SummarySpec::Kind::quantile, arg};
    if (kind == "prob-le") return {bp::SummarySpec::Kind::prob_at_most, arg};
  }
  throw bp::invalid_argument("summary '" + text +
                             "': expected mean, quantile:Q or prob-le:X");
}

bp::TestStatistic parse_statistic(const std::string& name) {
  if (name == "mean") return bp::ppc_stat::mean;
  if (name == "variance") return bp::ppc_stat::variance;
  if (name == "min") return bp::ppc_stat::min;
  if (name == "max") return bp::ppc_stat::max;
  throw bp::invalid_argument("unknown test statistic '" + name + "'");
}

// ---------------------------------------------------------------------------
// subcommand wiring

struct Cli {
  CLI::App app{"Bayesian inference toolkit: discrete priors, conjugate "
               "updating, MCMC, a model-script language, hierarchical "
               "models, regression simulation and model evaluation",
               "bayes-primer"};
  std::function<void()> action;

  Cli() {
    app.require_subcommand(1);
    add_discrete();
    add_beta();
    add_normal();
    add_mcmc();
    add_model();
    add_hier();
    add_reg();
    add_eval();
  }

  // ---- discrete -----------------------------------------------------------

  void add_discrete() {
    auto* discrete = app.add_subcommand("discrete",
                                        "Bayes' rule on finite supports");
    discrete->require_subcommand(1);

    {
      auto* cmd = discrete->add_subcommand(
          "update", "Update a discrete prior table with one observation");
      auto opts = std::make_shared<OutputOptions>();
      auto prior_path = std::make_shared<std::string>();
      auto y = std::make_shared<long>(-1);
      auto n = std::make_shared<long>(-1);
      auto ybar = std::make_shared<double>();
      auto sigma = std::make_shared<double>(0.0);
      cmd->add_option("--prior", *prior_path,
                      "Prior table CSV (point_1,prob)")->required();
      cmd->add_option("--y", *y, "Binomial successes");
      cmd->add_option("--n", *n, "Trials (binomial) or sample size (normal)");
      auto* ybar_opt = cmd->add_option("--ybar", *ybar, "Sample mean (normal)");
      cmd->add_option("--sigma", *sigma, "Known sampling sd (normal)");
      add_output_flags(cmd, *opts, "csv");
      cmd->callback([=, this] {
        action = [=] {
          const bp::DiscreteTable prior = load_table(*prior_path);
          bp::LikelihoodSpec like = [&]() -> bp::LikelihoodSpec {
            if (ybar_opt->count() > 0) {
              return bp::NormalKnownSdData(*ybar, *n, *sigma);
            }
            if (*y < 0 || *n < 0) {
              throw bp::invalid_argument(
                  "discrete update: give --y/--n or --ybar/--n/--sigma");
            }
            return bp::BinomialData(*y, *n);
          }();
          const bp::DiscreteTable posterior = bp::bayes_update(prior, like);
          const bp::Seed seed = resolve_seed(*opts);
          if (opts->format == "json") {
            ordered_json j;
            j["seed"] = seed;
            ordered_json rows = ordered_json::array();
            for (std::size_t i = 0; i < posterior.size(); ++i) {
              ordered_json row;
              row["point_1"] = posterior.points[i][0];
              if (posterior.dim == 2) row["point_2"] = posterior.points[i][1];
              row["prob"] = posterior.probs[i];
              rows.push_back(std::move(row));
            }
            j["table"] = std::move(rows);
            emit_json(std::move(j), *opts);
          } else {
            write_output(bp::io::table_csv(posterior, seed), opts->path);
          }
        };
      });
    }

    {
      auto* cmd = discrete->add_subcommand(
          "grid2p", "Two-proportion inference on a uniform or diagonal grid");
      auto opts = std::make_shared<OutputOptions>();
      auto y1 = std::make_shared<long>();
      auto n1 = std::make_shared<long>();
      auto y2 = std::make_shared<long>();
      auto n2 = std::make_shared<long>();
      auto gstart = std::make_shared<double>(0.01);
      auto gend = std::make_shared<double>(0.99);
      auto gstep = std::make_shared<double>(0.01);
      auto diag = std::make_shared<double>(0.0);
      cmd->add_option("--y1", *y1, "Successes, sample 1")->required();
      cmd->add_option("--n1", *n1, "Trials, sample 1")->required();
      cmd->add_option("--y2", *y2, "Successes, sample 2")->required();
      cmd->add_option("--n2", *n2, "Trials, sample 2")->required();
      cmd->add_option("--grid-start", *gstart, "First grid value")
          ->capture_default_str();
      cmd->add_option("--grid-end", *gend, "Last grid value")
          ->capture_default_str();
      cmd->add_option("--grid-step", *gstep, "Grid spacing")
          ->capture_default_str();
      cmd->add_option("--diag-mass", *diag,
                      "Prior mass placed on the p1 == p2 diagonal")
          ->capture_default_str();
      add_output_flags(cmd, *opts, "csv");
      cmd->callback([=, this] {
        action = [=] {
          const std::vector<double> values =
              grid_values(*gstart, *gend, *gstep);
          const bp::DiscreteTable prior =
              bp::make_grid_prior(values, values, *diag);
          const bp::DiscreteTable posterior = bp::two_proportion_update(
              prior, bp::TwoProportionData(*y1, *n1, *y2, *n2));
          const bp::Seed seed = resolve_seed(*opts);
          if (opts->format == "json") {
            ordered_json j;
            j["seed"] = seed;
            j["points"] = posterior.size();
            j["mean_p1"] = bp::table_mean(posterior, 0);
            j["mean_p2"] = bp::table_mean(posterior, 1);
            j["sd_p1"] = bp::table_sd(posterior, 0);
            j["sd_p2"] = bp::table_sd(posterior, 1);
            j["prob_p1_lt_p2"] = bp::table_event_prob(
                posterior,
                [](const bp::TablePoint& p) { return p[0] < p[1]; });
            j["prob_p1_gt_p2"] = bp::table_event_prob(
                posterior,
                [](const bp::TablePoint& p) { return p[0] > p[1]; });
            j["prob_p1_eq_p2"] = bp::table_event_prob(
                posterior,
                [](const bp::TablePoint& p) { return p[0] == p[1]; });
            emit_json(std::move(j), *opts);
          } else {
            write_output(bp::io::table_csv(posterior, seed), opts->path);
          }
        };
      });
    }
  }

  // ---- beta ---------------------------------------------------------------

  void add_beta() {
    auto* beta = app.add_subcommand("beta",
                                    "Beta-binomial conjugate inference");
    beta->require_subcommand(1);

    {
      auto* cmd = beta->add_subcommand("update", "Posterior shape parameters");
      auto opts = std::make_shared<OutputOptions>();
      auto a = std::make_shared<double>();
      auto b = std::make_shared<double>();
      auto y = std::make_shared<long>();
      auto n = std::make_shared<long>();
      cmd->add_option("--a", *a, "Prior shape a")->required();
      cmd->add_option("--b", *b, "Prior shape b")->required();
      cmd->add_option("--y", *y, "Successes")->required();
      cmd->add_option("--n", *n, "Trials")->required();
      add_output_flags(cmd, *opts, "json");
      cmd->callback([=, this] {
        action = [=] {
          const bp::Beta post =
              bp::beta_update(bp::BetaBinomialState(*a, *b, *y, *n));
          ordered_json j;
          j["a_post"] = post.a;
          j["b_post"] = post.b;
          j["seed"] = resolve_seed(*opts);
          emit_json(std::move(j), *opts);
        };
      });
    }

    {
      auto* cmd = beta->add_subcommand(
          "select", "Find the beta prior matching two percentiles");
      auto opts = std::make_shared<OutputOptions>();
      auto q1 = std::make_shared<double>();
      auto x1 = std::make_shared<double>();
      auto q2 = std::make_shared<double>();
      auto x2 = std::make_shared<double>();
      cmd->add_option("--q1", *q1, "First percentile level")->required();
      cmd->add_option("--x1", *x1, "First percentile value")->required();
      cmd->add_option("--q2", *q2, "Second percentile level")->required();
      cmd->add_option("--x2", *x2, "Second percentile value")->required();
      add_output_flags(cmd, *opts, "json");
      cmd->callback([=, this] {
        action = [=] {
          const bp::Beta prior = bp::beta_select(*q1, *x1, *q2, *x2);
          ordered_json j;
          j["a"] = prior.a;
          j["b"] = prior.b;
          j["seed"] = resolve_seed(*opts);
          emit_json(std::move(j), *opts);
        };
      });
    }

    {
      auto* cmd = beta->add_subcommand("interval",
                                       "Equal-tail credible interval");
      auto opts = std::make_shared<OutputOptions>();
      auto a = std::make_shared<double>();
      auto b = std::make_shared<double>();
      auto level = std::make_shared<double>(0.9);
      auto method = std::make_shared<std::string>("exact");
      auto draws = std::make_shared<std::size_t>(10000);
      cmd->add_option("--a", *a, "Shape a")->required();
      cmd->add_option("--b", *b, "Shape b")->required();
      cmd->add_option("--level", *level, "Interval level")
          ->capture_default_str();
      cmd->add_option("--method", *method, "exact or simulation")
          ->check(CLI::IsMember({"exact", "simulation"}))
          ->capture_default_str();
      cmd->add_option("--draws", *draws, "Simulation size")
          ->capture_default_str();
      add_output_flags(cmd, *opts, "json");
      cmd->callback([=, this] {
        action = [=] {
          const bp::Seed seed = resolve_seed(*opts);
          const bp::CredibleInterval ci = bp::credible_interval(
              bp::Beta(*a, *b), *level,
              *method == "exact" ? bp::IntervalMethod::exact_quantile
                                 : bp::IntervalMethod::simulation,
              *draws, seed);
          ordered_json j;
          j["lower"] = ci.lower;
          j["upper"] = ci.upper;
          j["level"] = ci.level;
          j["method"] = *method;
          j["seed"] = seed;
          emit_json(std::move(j), *opts);
        };
      });
    }

    {
      auto* cmd = beta->add_subcommand(
          "predict", "Beta-binomial predictive pmf for future trials");
      auto opts = std::make_shared<OutputOptions>();
      auto a = std::make_shared<double>();
      auto b = std::make_shared<double>();
      auto m = std::make_shared<long>();
      cmd->add_option("--a", *a, "Posterior shape a")->required();
      cmd->add_option("--b", *b, "Posterior shape b")->required();
      cmd->add_option("--m", *m, "Future trials")->required();
      add_output_flags(cmd, *opts, "json");
      cmd->callback([=, this] {
        action = [=] {
          const std::vector<double> pmf =
              bp::beta_binomial_predictive(bp::Beta(*a, *b), *m);
          const bp::Seed seed = resolve_seed(*opts);
          if (opts->format == "json") {
            ordered_json j;
            j["pmf"] = pmf;
            j["seed"] = seed;
            emit_json(std::move(j), *opts);
          } else {
            std::string out = "# seed=" + std::to_string(seed) + "\nk,prob\n";
            for (std::size_t k = 0; k < pmf.size(); ++k) {
              out += std::to_string(k) + "," + bp::io::format_double(pmf[k]) +
                     "\n";
            }
            write_output(out, opts->path);
          }
        };
      });
    }
  }

  // ---- normal ---------------------------------------------------------------

  void add_normal() {
    auto* normal = app.add_subcommand(
        "normal", "Normal-mean inference with known sampling sd");
    normal->require_subcommand(1);

    {
      auto* cmd = normal->add_subcommand("update",
                                         "Posterior mean and sd");
      auto opts = std::make_shared<OutputOptions>();
      auto m0 = std::make_shared<double>();
      auto s0 = std::make_shared<double>();
      auto ybar = std::make_shared<double>();
      auto n = std::make_shared<long>();
      auto sigma = std::make_shared<double>();
      cmd->add_option("--m0", *m0, "Prior mean")->required();
      cmd->add_option("--s0", *s0, "Prior sd")->required();
      cmd->add_option("--ybar", *ybar, "Sample mean")->required();
      cmd->add_option("--n", *n, "Sample size")->required();
      cmd->add_option("--sigma", *sigma, "Known sampling sd")->required();
      add_output_flags(cmd, *opts, "json");
      cmd->callback([=, this] {
        action = [=] {
          const bp::Normal post = bp::normal_update(
              bp::NormalMeanState(*m0, *s0, *ybar, *n, *sigma));
          ordered_json j;
          j["mean"] = post.mean;
          j["sd"] = post.sd;
          j["seed"] = resolve_seed(*opts);
          emit_json(std::move(j), *opts);
        };
      });
    }

    {
      auto* cmd = normal->add_subcommand(
          "predict", "Predictive distribution for one future observation");
      auto opts = std::make_shared<OutputOptions>();
      auto m = std::make_shared<double>();
      auto s = std::make_shared<double>();
      auto sigma = std::make_shared<double>();
      cmd->add_option("--mean", *m, "Posterior mean")->required();
      cmd->add_option("--sd", *s, "Posterior sd")->required();
      cmd->add_option("--sigma", *sigma, "Known sampling sd")->required();
      add_output_flags(cmd, *opts, "json");
      cmd->callback([=, this] {
        action = [=] {
          const bp::Normal pred = bp::normal_predictive(*m, *s, *sigma);
          ordered_json j;
          j["mean"] = pred.mean;
          j["sd"] = pred.sd;
          j["seed"] = resolve_seed(*opts);
          emit_json(std::move(j), *opts);
        };
      });
    }
  }

  // ---- mcmc -----------------------------------------------------------------

  void add_mcmc() {
    auto* mcmc = app.add_subcommand("mcmc", "Simulation-based samplers");
    mcmc->require_subcommand(1);

    {
      auto* cmd = mcmc->add_subcommand(
          "gibbs-normal",
          "Gibbs sampler for a normal mean and variance (1/sigma^2 prior)");
      auto opts = std::make_shared<OutputOptions>();
      auto data_path = std::make_shared<std::string>();
      auto column = std::make_shared<std::string>("y");
      auto iters = std::make_shared<std::size_t>(10000);
      auto burn = std::make_shared<std::optional<std::size_t>>();
      auto init_mu = std::make_shared<double>(0.0);
      auto init_var = std::make_shared<double>(1.0);
      cmd->add_option("--data", *data_path, "Observations CSV")->required();
      cmd->add_option("--column", *column, "Response column")
          ->capture_default_str();
      cmd->add_option("--iters", *iters, "Total iterations")
          ->capture_default_str();
      cmd->add_option("--burn-in", *burn,
                      "Discarded iterations (default: 10% of iters)");
      cmd->add_option("--init-mu", *init_mu, "Initial mean")
          ->capture_default_str();
      cmd->add_option("--init-var", *init_var, "Initial variance")
          ->capture_default_str();
      add_output_flags(cmd, *opts, "csv");
      cmd->callback([=, this] {
        action = [=] {
          const bp::io::CsvTable csv = bp::io::read_csv(*data_path);
          bp::NormalModelData data(csv.numeric_column(*column));
          const std::size_t burn_in = burn->value_or(*iters / 10);
          const bp::ChainReport report =
              bp::gibbs_normal(data, *iters, burn_in, {*init_mu, *init_var},
                               resolve_seed(*opts));
          emit_chain(report, *opts);
        };
      });
    }

    {
      auto* cmd = mcmc->add_subcommand(
          "metropolis",
          "Random-walk Metropolis over a built-in density target");
      auto opts = std::make_shared<OutputOptions>();
      auto family = std::make_shared<std::string>();
      auto params = std::make_shared<std::vector<double>>();
      auto scale = std::make_shared<double>(0.5);
      auto iters = std::make_shared<std::size_t>(10000);
      auto burn = std::make_shared<std::optional<std::size_t>>();
      auto init = std::make_shared<std::optional<double>>();
      auto tune = std::make_shared<bool>(false);
      cmd->add_option("--family", *family,
                      "Target family: beta, normal, gamma")
          ->check(CLI::IsMember({"beta", "normal", "gamma"}))
          ->required();
      cmd->add_option("--params", *params, "Family parameters (two values)")
          ->expected(2)
          ->required();
      cmd->add_option("--scale", *scale, "Proposal sd")->capture_default_str();
      cmd->add_option("--iters", *iters, "Total iterations")
          ->capture_default_str();
      cmd->add_option("--burn-in", *burn,
                      "Discarded iterations (default: 10% of iters)");
      cmd->add_option("--init", *init,
                      "Starting point (default: target median)");
      cmd->add_flag("--tune", *tune,
                    "Pilot-tune the scale to acceptance in [0.2, 0.5]");
      add_output_flags(cmd, *opts, "csv");
      cmd->callback([=, this] {
        action = [=] {
          const bp::Distribution target_dist = [&]() -> bp::Distribution {
            if (*family == "beta") return bp::Beta((*params)[0], (*params)[1]);
            if (*family == "gamma") {
              return bp::Gamma((*params)[0], (*params)[1]);
            }
            return bp::Normal((*params)[0], (*params)[1]);
          }();
          const bp::LogTarget target = bp::distribution_target(target_dist);
          const double start = init->value_or(bp::quantile(target_dist, 0.5));
          const std::size_t burn_in = burn->value_or(*iters / 10);
          const bp::Seed seed = resolve_seed(*opts);
          std::vector<double> scales{*scale};
          if (*tune) {
            scales = bp::pilot_tune_scale(target, scales, {start},
                                          bp::derive_seed(seed, 999));
          }
          const bp::ChainReport report =
              bp::metropolis_rw(target, scales, *iters, burn_in, {start}, seed);
          emit_chain(report, *opts);
        };
      });
    }
  }

  // ---- model ----------------------------------------------------------------

  void add_model() {
    auto* model = app.add_subcommand("model",
                                     "Model-script compilation and sampling");
    model->require_subcommand(1);

    auto* cmd = model->add_subcommand(
        "run", "Compile a .bmodel script and sample its unknowns");
    auto opts = std::make_shared<OutputOptions>();
    auto script = std::make_shared<std::string>();
    auto data_path = std::make_shared<std::string>();
    auto iters = std::make_shared<std::size_t>(10000);
    auto burn = std::make_shared<std::optional<std::size_t>>();
    auto scales_kv = std::make_shared<std::vector<std::string>>();
    auto default_scale = std::make_shared<double>(1.0);
    cmd->add_option("script", *script, "Model script path")->required();
    cmd->add_option("--data", *data_path,
                    "Data file (.json object or .csv columns)");
    cmd->add_option("--iters", *iters, "Total iterations")
        ->capture_default_str();
    cmd->add_option("--burn-in", *burn,
                    "Discarded iterations (default: 10% of iters)");
    cmd->add_option("--scale", *scales_kv,
                    "Per-node proposal scale as name=value (repeatable)");
    cmd->add_option("--default-scale", *default_scale,
                    "Proposal scale for nodes without --scale")
        ->capture_default_str();
    add_output_flags(cmd, *opts, "csv");
    cmd->callback([=, this] {
      action = [=] {
        const bp::model::ModelAst ast =
            bp::model::parse(bp::io::read_file(*script));
        bp::model::DataMap data;
        if (!data_path->empty()) data = bp::io::load_model_data(*data_path);
        const bp::model::ModelGraph graph = bp::model::compile(ast, data);
        std::map<std::string, double> scales;
        for (int id : graph.unknowns) {
          scales[graph.nodes[static_cast<std::size_t>(id)].name] =
              *default_scale;
        }
        for (const std::string& kv : *scales_kv) {
          const auto eq = kv.find('=');
          if (eq == std::string::npos) {
            throw bp::invalid_argument("--scale expects name=value, got '" +
                                       kv + "'");
          }
          scales[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
        }
        const std::size_t burn_in = burn->value_or(*iters / 10);
        const bp::ChainReport report = bp::model::sample_graph(
            graph, *iters, burn_in, resolve_seed(*opts), scales);
        emit_chain(report, *opts);
      };
    });
  }

  // ---- hier -------------------------------------------------------------

  void add_hier() {
    auto* hier = app.add_subcommand(
        "hier", "Hierarchical (partial-pooling) models");
    hier->require_subcommand(1);

    {
      auto* cmd = hier->add_subcommand(
          "props", "Exchangeable beta-binomial model for group proportions");
      auto opts = std::make_shared<OutputOptions>();
      auto data_path = std::make_shared<std::string>();
      auto iters = std::make_shared<std::size_t>(20000);
      auto burn = std::make_shared<std::optional<std::size_t>>();
      auto hyper_scale = std::make_shared<double>(0.5);
      cmd->add_option("--data", *data_path, "Group counts CSV (group,y,n)")
          ->required();
      cmd->add_option("--iters", *iters, "Total iterations")
          ->capture_default_str();
      cmd->add_option("--burn-in", *burn,
                      "Discarded iterations (default: 10% of iters)");
      cmd->add_option("--hyper-scale", *hyper_scale,
                      "Proposal sd for the hyperparameter step")
          ->capture_default_str();
      add_output_flags(cmd, *opts, "csv");
      cmd->callback([=, this] {
        action = [=] {
          const bp::GroupCounts data = load_group_counts(*data_path);
          const std::size_t burn_in = burn->value_or(*iters / 10);
          const bp::ChainReport report = bp::fit_hierarchical_proportions(
              data, *iters, burn_in, resolve_seed(*opts), *hyper_scale);
          emit_chain(report, *opts);
        };
      });
    }

    {
      auto* cmd = hier->add_subcommand(
          "means", "Exchangeable normal model for group means");
      auto opts = std::make_shared<OutputOptions>();
      auto data_path = std::make_shared<std::string>();
      auto sigma = std::make_shared<double>();
      auto iters = std::make_shared<std::size_t>(20000);
      auto burn = std::make_shared<std::optional<std::size_t>>();
      auto hyper_scale = std::make_shared<double>(0.5);
      cmd->add_option("--data", *data_path, "Group summary CSV (group,ybar,n)")
          ->required();
      cmd->add_option("--sigma", *sigma, "Common known sampling sd")
          ->required();
      cmd->add_option("--iters", *iters, "Total iterations")
          ->capture_default_str();
      cmd->add_option("--burn-in", *burn,
                      "Discarded iterations (default: 10% of iters)");
      cmd->add_option("--hyper-scale", *hyper_scale,
                      "Proposal sd for the hyperparameter step")
          ->capture_default_str();
      add_output_flags(cmd, *opts, "csv");
      cmd->callback([=, this] {
        action = [=] {
          const bp::GroupMeans data = load_group_means(*data_path, *sigma);
          const std::size_t burn_in = burn->value_or(*iters / 10);
          const bp::ChainReport report = bp::fit_hierarchical_means(
              data, *iters, burn_in, resolve_seed(*opts), *hyper_scale);
          emit_chain(report, *opts);
        };
      });
    }
  }

  // ---- reg --------------------------------------------------------------

  void add_reg() {
    auto* reg = app.add_subcommand("reg", "Regression models");
    reg->require_subcommand(1);

    {
      auto* cmd = reg->add_subcommand(
          "linear",
          "Noninformative-prior linear regression by direct simulation");
      auto opts = std::make_shared<OutputOptions>();
      auto data_path = std::make_shared<std::string>();
      auto response = std::make_shared<std::string>();
      auto draws = std::make_shared<std::size_t>(10000);
      cmd->add_option("--data", *data_path, "Data CSV")->required();
      cmd->add_option("--response", *response, "Response column name")
          ->required();
      cmd->add_option("--draws", *draws, "Posterior draws")
          ->capture_default_str();
      add_output_flags(cmd, *opts, "csv");
      cmd->callback([=, this] {
        action = [=] {
          const bp::RegressionData data =
              load_regression(*data_path, *response);
          const bp::DrawMatrix out =
              bp::sim_linear_regression(data, *draws, resolve_seed(*opts));
          emit_draws(out, *opts);
        };
      });
    }

    {
      auto* cmd = reg->add_subcommand(
          "logistic", "Logistic regression by random-walk Metropolis");
      auto opts = std::make_shared<OutputOptions>();
      auto data_path = std::make_shared<std::string>();
      auto response = std::make_shared<std::string>();
      auto iters = std::make_shared<std::size_t>(20000);
      auto burn = std::make_shared<std::optional<std::size_t>>();
      auto prior_sd = std::make_shared<double>(10.0);
      auto scale = std::make_shared<double>(0.25);
      cmd->add_option("--data", *data_path, "Data CSV")->required();
      cmd->add_option("--response", *response, "Binary response column")
          ->required();
      cmd->add_option("--iters", *iters, "Total iterations")
          ->capture_default_str();
      cmd->add_option("--burn-in", *burn,
                      "Discarded iterations (default: 10% of iters)");
      cmd->add_option("--prior-sd", *prior_sd,
                      "Independent Normal(0, prior_sd) coefficient priors")
          ->capture_default_str();
      cmd->add_option("--scale", *scale, "Proposal sd")->capture_default_str();
      add_output_flags(cmd, *opts, "csv");
      cmd->callback([=, this] {
        action = [=] {
          const bp::RegressionData data =
              load_regression(*data_path, *response);
          const std::size_t burn_in = burn->value_or(*iters / 10);
          const bp::ChainReport report =
              bp::fit_logistic(data, *iters, burn_in, resolve_seed(*opts),
                               *prior_sd, *scale);
          emit_chain(report, *opts);
        };
      });
    }
  }

  // ---- eval -------------------------------------------------------------

  void add_eval() {
    auto* eval = app.add_subcommand("eval",
                                    "Model comparison and criticism");
    eval->require_subcommand(1);

    {
      auto* cmd = eval->add_subcommand(
          "bf", "Bayes factor between two prior specifications");
      auto opts = std::make_shared<OutputOptions>();
      auto m1 = std::make_shared<std::string>();
      auto m2 = std::make_shared<std::string>();
      auto y = std::make_shared<long>(-1);
      auto n = std::make_shared<long>(-1);
      auto ybar = std::make_shared<double>();
      auto sigma = std::make_shared<double>(0.0);
      cmd->add_option("--m1", *m1,
                      "First spec (beta:a,b | point:p | normal:m,s | "
                      "table:file)")
          ->required();
      cmd->add_option("--m2", *m2, "Second spec")->required();
      cmd->add_option("--y", *y, "Binomial successes");
      cmd->add_option("--n", *n, "Trials or sample size");
      auto* ybar_opt = cmd->add_option("--ybar", *ybar, "Sample mean (normal)");
      cmd->add_option("--sigma", *sigma, "Known sampling sd (normal)");
      add_output_flags(cmd, *opts, "json");
      cmd->callback([=, this] {
        action = [=] {
          const bp::EvalData data = [&]() -> bp::EvalData {
            if (ybar_opt->count() > 0) {
              return bp::NormalObs{*ybar, *n, *sigma};
            }
            if (*y < 0 || *n < 0) {
              throw bp::invalid_argument(
                  "eval bf: give --y/--n or --ybar/--n/--sigma");
            }
            return bp::BinomialObs{*y, *n};
          }();
          const bp::ModelSpec spec1 = parse_model_spec(*m1);
          const bp::ModelSpec spec2 = parse_model_spec(*m2);
          ordered_json j;
          j["bayes_factor"] = bp::bayes_factor(spec1, spec2, data);
          j["marginal_likelihood_1"] = bp::marginal_likelihood(spec1, data);
          j["marginal_likelihood_2"] = bp::marginal_likelihood(spec2, data);
          j["seed"] = resolve_seed(*opts);
          emit_json(std::move(j), *opts);
        };
      });
    }

    {
      auto* cmd = eval->add_subcommand(
          "ppc", "Posterior predictive check with a test statistic");
      auto opts = std::make_shared<OutputOptions>();
      auto posterior = std::make_shared<std::string>();
      auto family = std::make_shared<std::string>("binomial");
      auto observed_path = std::make_shared<std::string>();
      auto column = std::make_shared<std::string>("y");
      auto trials_column = std::make_shared<std::string>();
      auto trials = std::make_shared<long>(0);
      auto sigma = std::make_shared<double>(1.0);
      auto stat = std::make_shared<std::string>("mean");
      auto reps = std::make_shared<std::size_t>(2000);
      cmd->add_option("--posterior", *posterior,
                      "Posterior spec: beta:a,b or normal:m,s")
          ->required();
      cmd->add_option("--family", *family, "Sampling family")
          ->check(CLI::IsMember({"binomial", "normal"}))
          ->capture_default_str();
      cmd->add_option("--observed", *observed_path, "Observed data CSV")
          ->required();
      cmd->add_option("--column", *column, "Observed column")
          ->capture_default_str();
      cmd->add_option("--trials-column", *trials_column,
                      "Per-observation trials column (binomial)");
      cmd->add_option("--trials", *trials,
                      "Common trial count (binomial, ignored with "
                      "--trials-column)");
      cmd->add_option("--sigma", *sigma, "Sampling sd (normal family)")
          ->capture_default_str();
      cmd->add_option("--stat", *stat, "Test statistic")
          ->check(CLI::IsMember({"mean", "variance", "min", "max"}))
          ->capture_default_str();
      cmd->add_option("--reps", *reps, "Replicates")->capture_default_str();
      add_output_flags(cmd, *opts, "json");
      cmd->callback([=, this] {
        action = [=] {
          const bp::io::CsvTable csv = bp::io::read_csv(*observed_path);
          const std::vector<double> observed = csv.numeric_column(*column);
          bp::PosteriorSource source = [&]() -> bp::PosteriorSource {
            const bp::ModelSpec spec = parse_model_spec(*posterior);
            if (const auto* b = std::get_if<bp::BetaPriorSpec>(&spec)) {
              return bp::Distribution(bp::Beta(b->a, b->b));
            }
            if (const auto* nm = std::get_if<bp::NormalPriorSpec>(&spec)) {
              return bp::Distribution(bp::Normal(nm->m0, nm->s0));
            }
            throw bp::invalid_argument(
                "eval ppc: --posterior must be beta:a,b or normal:m,s");
          }();
          bp::SamplingFamily sampling = [&]() -> bp::SamplingFamily {
            if (*family == "normal") return bp::NormalSampling{*sigma};
            std::vector<long> counts;
            if (!trials_column->empty()) {
              for (double v : csv.numeric_column(*trials_column)) {
                counts.push_back(static_cast<long>(v));
              }
            } else {
              if (*trials < 1) {
                throw bp::invalid_argument(
                    "eval ppc: binomial family needs --trials or "
                    "--trials-column");
              }
              counts.assign(observed.size(), *trials);
            }
            return bp::BinomialSampling{std::move(counts)};
          }();
          const bp::Seed seed = resolve_seed(*opts);
          const bp::PpcResult result = bp::posterior_predictive_check(
              source, sampling, parse_statistic(*stat), *reps, observed, seed);
          ordered_json j = bp::io::ppc_json(result);
          j["seed"] = seed;
          emit_json(std::move(j), *opts);
        };
      });
    }

    {
      auto* cmd = eval->add_subcommand(
          "sensitivity", "Recompute one posterior summary under several priors");
      auto opts = std::make_shared<OutputOptions>();
      auto priors = std::make_shared<std::vector<std::string>>();
      auto y = std::make_shared<long>(-1);
      auto n = std::make_shared<long>(-1);
      auto ybar = std::make_shared<double>();
      auto sigma = std::make_shared<double>(0.0);
      auto summary = std::make_shared<std::string>("mean");
      cmd->add_option("--prior", *priors,
                      "Prior specs (repeatable); the first is the base")
          ->required();
      cmd->add_option("--y", *y, "Binomial successes");
      cmd->add_option("--n", *n, "Trials or sample size");
      auto* ybar_opt = cmd->add_option("--ybar", *ybar, "Sample mean (normal)");
      cmd->add_option("--sigma", *sigma, "Known sampling sd (normal)");
      cmd->add_option("--summary", *summary,
                      "mean, quantile:Q or prob-le:X")
          ->capture_default_str();
      add_output_flags(cmd, *opts, "json");
      cmd->callback([=, this] {
        action = [=] {
          if (priors->empty()) {
            throw bp::invalid_argument("eval sensitivity: need --prior");
          }
          const bp::EvalData data = [&]() -> bp::EvalData {
            if (ybar_opt->count() > 0) {
              return bp::NormalObs{*ybar, *n, *sigma};
            }
            if (*y < 0 || *n < 0) {
              throw bp::invalid_argument(
                  "eval sensitivity: give --y/--n or --ybar/--n/--sigma");
            }
            return bp::BinomialObs{*y, *n};
          }();
          std::vector<bp::LabeledSpec> specs;
          for (const std::string& p : *priors) {
            specs.push_back({p, parse_model_spec(p)});
          }
          const bp::LabeledSpec base = specs.front();
          specs.erase(specs.begin());
          const std::vector<bp::SensitivityRow> rows = bp::sensitivity_scan(
              base, specs, data, parse_summary_spec(*summary));
          ordered_json j;
          j["seed"] = resolve_seed(*opts);
          j["rows"] = bp::io::sensitivity_json(rows);
          emit_json(std::move(j), *opts);
        };
      });
    }
  }
};

}  // namespace

int main(int argc, char** argv) {
  Cli cli;
  try {
    cli.app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return cli.app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return cli.app.exit(e);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return cli.app.exit(e);
    std::cerr << e.what() << "\n\n" << cli.app.help() << std::flush;
    return 1;
  }

  try {
    if (cli.action) cli.action();
    return 0;
  } catch (const bp::data_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const bp::numerical_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const bp::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
