#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "bayes_primer/conjugate.hpp"
#include "bayes_primer/io/model_data.hpp"
#include "bayes_primer/model/graph.hpp"
#include "bayes_primer/model/parser.hpp"
#include "bayes_primer/model/sampler.hpp"

namespace bp = bayes_primer;
namespace bpm = bayes_primer::model;
namespace fs = std::filesystem;
using Catch::Approx;

#ifndef CORPUS_DIR
#define CORPUS_DIR "corpus"
#endif

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Conformance runner: parse, then compile against the sidecar data file
// when one exists.  The golden files pin this exact output.
std::string conformance_output(const fs::path& script) {
  std::string out;
  bpm::ModelAst ast;
  try {
    ast = bpm::parse(slurp(script));
  } catch (const bpm::parse_error& e) {
    return std::string("ERROR: ") + e.what() + "\n";
  }
  fs::path data_path = script;
  data_path.replace_extension(".data.json");
  bpm::DataMap data;
  if (fs::exists(data_path)) {
    data = bp::io::load_model_data(data_path.string());
  }
  bpm::ModelGraph graph;
  try {
    graph = bpm::compile(ast, data);
  } catch (const bpm::parse_error& e) {
    return std::string("ERROR: ") + e.what() + "\n";
  }
  out += "OK\n";
  out += bpm::pretty_print(ast);
  out += "graph:\n";
  for (const auto& node : graph.nodes) {
    out += "  " + node.name;
    switch (node.kind) {
      case bpm::GraphNode::Kind::stochastic:
        out += " stochastic " + node.dist;
        out += node.observed ? " observed" : " unknown";
        break;
      case bpm::GraphNode::Kind::deterministic:
        out += " deterministic";
        break;
      case bpm::GraphNode::Kind::constant:
        out += " constant";
        break;
    }
    out += '\n';
  }
  return out;
}

void check_against_golden(const fs::path& script) {
  const std::string actual = conformance_output(script);
  fs::path golden = script;
  golden.replace_extension(".golden");
  if (std::getenv("BAYES_PRIMER_REGEN_GOLDENS")) {
    std::ofstream out(golden, std::ios::binary);
    out << actual;
    return;
  }
  INFO("script: " << script.filename().string());
  REQUIRE(fs::exists(golden));
  CHECK(actual == slurp(golden));
}

double graph_log_joint(const bpm::ModelGraph& g, std::vector<double> values) {
  bpm::refresh_deterministic(g, values);
  double total = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    if (g.nodes[i].kind != bpm::GraphNode::Kind::stochastic) continue;
    total += bp::log_density(bpm::node_distribution(g, static_cast<int>(i), values),
                             values[i]);
  }
  return total;
}

}  // namespace

TEST_CASE("minimal scripts parse into the expected statements", "[dsl]") {
  const bpm::ModelAst ast =
      bpm::parse("model { p ~ dbeta(1,1)  y ~ dbin(p, 12) }");
  REQUIRE(ast.statements.size() == 2);
  CHECK(ast.statements[0].kind == bpm::Statement::Kind::stochastic);
  CHECK(ast.statements[0].target == "p");
  CHECK(ast.statements[0].dist == "dbeta");
  CHECK(ast.statements[1].target == "y");
  CHECK(ast.statements[1].dist == "dbin");
}

TEST_CASE("loops parse with indexed stochastic children", "[dsl]") {
  const bpm::ModelAst ast = bpm::parse(
      "model { for (i in 1:3) { y[i] ~ dnorm(mu, 1) } mu ~ dnorm(0, 10) }");
  REQUIRE(ast.statements.size() == 2);
  CHECK(ast.statements[0].kind == bpm::Statement::Kind::loop);
  CHECK(ast.statements[0].loop_var == "i");
  REQUIRE(ast.statements[0].body.size() == 1);
  CHECK(ast.statements[0].body[0].target == "y");
  CHECK(ast.statements[0].body[0].target_index >= 0);
}

TEST_CASE("arity errors name the distribution and the span", "[dsl]") {
  try {
    bpm::parse("model { p ~ dbeta(1) }");
    FAIL("expected a parse error");
  } catch (const bpm::parse_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("dbeta") != std::string::npos);
    CHECK(msg.find("1:13") != std::string::npos);
  }
}

TEST_CASE("compile marks data-bound stochastic nodes observed", "[dsl]") {
  const bpm::ModelAst ast =
      bpm::parse("model { p ~ dbeta(1,1)  y ~ dbin(p, 12) }");
  bpm::DataMap data;
  data["y"] = bpm::data_scalar(4);
  const bpm::ModelGraph g = bpm::compile(ast, data);

  REQUIRE(g.unknowns.size() == 1);
  CHECK(g.nodes[static_cast<std::size_t>(g.unknowns[0])].name == "p");
  const int y = g.node_index("y");
  REQUIRE(y >= 0);
  CHECK(g.nodes[static_cast<std::size_t>(y)].observed);
  CHECK(g.nodes[static_cast<std::size_t>(y)].value == 4.0);
}

TEST_CASE("compile rejects undefined identifiers and cycles", "[dsl]") {
  const bpm::ModelAst undef =
      bpm::parse("model { p ~ dbeta(1,1)  y ~ dbin(q, 12) }");
  try {
    bpm::compile(undef, {{"y", bpm::data_scalar(4)}});
    FAIL("expected a compile error");
  } catch (const bpm::parse_error& e) {
    CHECK(std::string(e.what()).find("undefined identifier 'q'") !=
          std::string::npos);
  }

  const bpm::ModelAst cyclic = bpm::parse("model { a <- b\n b <- a }");
  try {
    bpm::compile(cyclic, {});
    FAIL("expected a cycle error");
  } catch (const bpm::parse_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("cyclic dependency") != std::string::npos);
    CHECK(msg.find("a") != std::string::npos);
    CHECK(msg.find("b") != std::string::npos);
  }

  const bpm::ModelAst redef = bpm::parse("model { p ~ dbeta(1,1)\n p ~ dbeta(2,2) }");
  CHECK_THROWS_AS(bpm::compile(redef, {}), bpm::parse_error);
}

TEST_CASE("log_full_conditional is the Markov-blanket sum", "[dsl]") {
  const bpm::ModelAst ast =
      bpm::parse("model { p ~ dbeta(1,1)  y ~ dbin(p, 12) }");
  const bpm::ModelGraph g = bpm::compile(ast, {{"y", bpm::data_scalar(4)}});

  const double direct = bp::log_density(bp::Beta(1, 1), 0.5) +
                        bp::log_density(bp::Binomial(12, 0.5), 4.0);
  CHECK(bpm::log_full_conditional(g, "p", {{"p", 0.5}}) ==
        Approx(direct).epsilon(1e-12));

  CHECK(bpm::log_full_conditional(g, "p", {{"p", 1.5}}) == bp::kNegInf);

  // a node with no stochastic children reduces to its prior
  const bpm::ModelAst lone = bpm::parse("model { a ~ dnorm(0, 2) }");
  const bpm::ModelGraph gl = bpm::compile(lone, {});
  CHECK(bpm::log_full_conditional(gl, "a", {{"a", 0.7}}) ==
        Approx(bp::log_density(bp::Normal(0, 2), 0.7)).epsilon(1e-12));
}

TEST_CASE("full conditionals differ from the joint by a constant",
          "[dsl][property]") {
  const bpm::ModelAst ast = bpm::parse(slurp(
      fs::path(CORPUS_DIR) / "valid" / "v07_regression.bmodel"));
  const bpm::ModelGraph g = bpm::compile(
      ast, bp::io::load_model_data(
               (fs::path(CORPUS_DIR) / "valid" / "v07_regression.data.json")
                   .string()));

  std::vector<double> values = bpm::initial_values(g);
  for (int u : g.unknowns) {
    const auto i = static_cast<std::size_t>(u);
    std::vector<double> shifted = values;
    shifted[i] = values[i] == 0.0 ? 0.5 : values[i] * 1.25 + 0.1;
    if (g.nodes[i].dist == "dunif") shifted[i] = values[i] * 0.5 + 1.0;

    const double lfc_diff =
        bpm::log_full_conditional(g, u, shifted) -
        bpm::log_full_conditional(g, u, values);
    const double joint_diff =
        graph_log_joint(g, shifted) - graph_log_joint(g, values);
    CHECK(lfc_diff == Approx(joint_diff).margin(1e-10));
  }
}

TEST_CASE("sample_graph reproduces conjugate posteriors", "[dsl][slow]") {
  const bpm::ModelAst bb =
      bpm::parse("model { p ~ dbeta(1,1)  y ~ dbin(p, 12) }");
  const bpm::ModelGraph g = bpm::compile(bb, {{"y", bpm::data_scalar(4)}});
  const bp::ChainReport run = bpm::sample_graph(g, 55000, 5000, 99);
  CHECK(std::fabs(bp::mean_of(run.draws.column("p")) - 5.0 / 14.0) < 0.01);

  const bpm::ModelAst nm =
      bpm::parse("model { mu ~ dnorm(0, 1)\n y ~ dnorm(mu, 1) }");
  const bpm::ModelGraph g2 = bpm::compile(nm, {{"y", bpm::data_scalar(2)}});
  const bp::ChainReport run2 = bpm::sample_graph(g2, 55000, 5000, 17);
  const bp::Normal exact = bp::normal_update(bp::NormalMeanState(0, 1, 2, 1, 1));
  CHECK(std::fabs(bp::mean_of(run2.draws.column("mu")) - exact.mean) < 0.01);
  CHECK(std::fabs(bp::sd_of(run2.draws.column("mu")) - exact.sd) < 0.01);
}

TEST_CASE("sample_graph needs at least one unknown", "[dsl]") {
  const bpm::ModelAst ast = bpm::parse("model { y ~ dnorm(0, 1) }");
  const bpm::ModelGraph g = bpm::compile(ast, {{"y", bpm::data_scalar(1)}});
  CHECK_THROWS_AS(bpm::sample_graph(g, 100, 10, 1), bp::data_error);
}

TEST_CASE("hierarchical script matches its conjugate-style expectations",
          "[dsl][slow]") {
  // unknown-sd normal model: mu | data concentrates near ybar
  const fs::path script = fs::path(CORPUS_DIR) / "valid" /
                          "v04_normal_unknown_sd.bmodel";
  const bpm::ModelAst ast = bpm::parse(slurp(script));
  const bpm::ModelGraph g = bpm::compile(
      ast, bp::io::load_model_data((fs::path(CORPUS_DIR) / "valid" /
                                    "v04_normal_unknown_sd.data.json")
                                       .string()));
  const bp::ChainReport run = bpm::sample_graph(g, 30000, 5000, 5,
                                                {{"mu", 0.7}, {"s", 0.7}});
  const double ybar = (4.1 + 5.2 + 4.7 + 5.6) / 4.0;
  const std::vector<double> mu = run.draws.column("mu");
  const double se = bp::sd_of(mu) / std::sqrt(run.diag.ess[run.draws.column_index("mu")]);
  CHECK(std::fabs(bp::mean_of(mu) - ybar) < 3.0 * se + 1e-9);
}

TEST_CASE("pretty-print is a parser fixed point", "[dsl][property]") {
  for (const auto& entry :
       fs::directory_iterator(fs::path(CORPUS_DIR) / "valid")) {
    if (entry.path().extension() != ".bmodel") continue;
    const bpm::ModelAst ast = bpm::parse(slurp(entry.path()));
    const std::string printed = bpm::pretty_print(ast);
    const std::string reprinted = bpm::pretty_print(bpm::parse(printed));
    INFO(entry.path().filename().string());
    CHECK(printed == reprinted);
  }
}

TEST_CASE("compilation is deterministic", "[dsl][property]") {
  const std::string src = slurp(
      fs::path(CORPUS_DIR) / "valid" / "v06_hier_props.bmodel");
  const bpm::DataMap data = bp::io::load_model_data(
      (fs::path(CORPUS_DIR) / "valid" / "v06_hier_props.data.json").string());
  const bpm::ModelGraph a = bpm::compile(bpm::parse(src), data);
  const bpm::ModelGraph b = bpm::compile(bpm::parse(src), data);
  REQUIRE(a.nodes.size() == b.nodes.size());
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    CHECK(a.nodes[i].name == b.nodes[i].name);
    CHECK(a.nodes[i].kind == b.nodes[i].kind);
    CHECK(a.nodes[i].observed == b.nodes[i].observed);
  }
  CHECK(a.topo_order == b.topo_order);
  CHECK(a.unknowns == b.unknowns);
}

TEST_CASE("conformance corpus matches the golden files", "[dsl][conformance]") {
  std::size_t valid = 0;
  std::size_t invalid = 0;
  std::vector<fs::path> scripts;
  for (const char* sub : {"valid", "invalid"}) {
    for (const auto& entry :
         fs::directory_iterator(fs::path(CORPUS_DIR) / sub)) {
      if (entry.path().extension() == ".bmodel") scripts.push_back(entry.path());
    }
  }
  std::sort(scripts.begin(), scripts.end());
  for (const auto& script : scripts) {
    const std::string out = conformance_output(script);
    const bool rejected = out.rfind("ERROR:", 0) == 0;
    if (script.parent_path().filename() == "valid") {
      INFO(script.filename().string() << ": " << out);
      CHECK_FALSE(rejected);
      ++valid;
    } else {
      INFO(script.filename().string() << ": " << out);
      CHECK(rejected);
      ++invalid;
    }
    check_against_golden(script);
  }
  CHECK(valid >= 10);
  CHECK(invalid >= 10);
}
