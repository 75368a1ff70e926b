#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "mallows/io.hpp"

using namespace mallows;
namespace fs = std::filesystem;

namespace {
Ingested parse(const std::string& text, std::optional<int> n = std::nullopt) {
  std::istringstream in(text);
  return parse_preferences(in, n);
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("mallows_test_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}
}  // namespace

TEST_CASE("parse a small preference file") {
  const auto in = parse("assessor,preferred,other\n3,1,2\n3,4,2\n3,3,1\n");
  CHECK(in.data.n_assessors() == 1);
  CHECK(in.data.n_items == 4);
  CHECK(in.data.preference_sets[0].pairs.size() == 3);
  CHECK(in.data.preference_sets[0].assessor_id == 3);
  CHECK(in.data.preference_sets[0].pairs[1] == PreferencePair{3, 1});
  CHECK(in.report.non_transitive.empty());
}

TEST_CASE("parse errors carry line numbers") {
  CHECK(error_of("assessor,preferred,other\n1,1,2\n7,5,5\n").find("line 3") != std::string::npos);
  CHECK(error_of("assessor,preferred,other\n1,1,2\n7,5,5\n").find("self-comparison") != std::string::npos);
  CHECK(error_of("# c\nassessor,preferred,other\n1,1,2\n1,2,x\n").find("line 4") != std::string::npos);
  CHECK(error_of("assessor,preferred,other\n1,1,2,3\n").find("line 2") != std::string::npos);
  const auto dup = error_of("assessor,preferred,other\n1,1,2\n2,2,1\n1,2,1\n");
  CHECK(dup.find("line 4") != std::string::npos);
  CHECK(dup.find("first on line 2") != std::string::npos);
  CHECK(error_of("1,2,3\n").find("header") != std::string::npos);
  CHECK(error_of("assessor,preferred,other\n1,0,2\n").find("line 2") != std::string::npos);
  CHECK_FALSE(error_of("").empty());
}

TEST_CASE("worked example is flagged non-transitive on ingest") {
  const auto in = parse(
      "assessor,preferred,other\n"
      "1,2,1\n1,5,4\n1,5,3\n1,5,2\n1,5,1\n1,3,2\n1,1,3\n");
  CHECK(in.report.non_transitive == std::vector<int>{1});
  CHECK(in.report.describe().find("1 of 1 assessors (100%)") != std::string::npos);
}

TEST_CASE("item count override") {
  const std::string text = "assessor,preferred,other\n1,1,2\n";
  CHECK(parse(text).data.n_items == 2);
  CHECK(parse(text, 6).data.n_items == 6);
  std::istringstream in("assessor,preferred,other\n1,1,5\n");
  CHECK_THROWS_AS(parse_preferences(in, 3), DataError);
}

TEST_CASE("ingest then write round-trips byte-identically") {
  SimConfig c;
  c.n_items = 9;
  c.n_assessors = 12;
  c.lambda_m = 10;
  c.seed = 3;
  const auto sim = generate_dataset(c);
  std::ostringstream first;
  write_preferences(first, sim.data, to_json(c));
  REQUIRE(first.str().rfind("# {", 0) == 0);
  const auto back = parse(first.str());
  std::ostringstream second;
  write_preferences(second, back.data, to_json(c));
  CHECK(first.str() == second.str());

  // Row order does not matter once canonicalized.
  std::istringstream lines(first.str());
  std::vector<std::string> rows;
  std::string header;
  for (std::string l; std::getline(lines, l);) {
    if (l.empty() || l[0] == '#') continue;
    if (header.empty()) header = l;
    else rows.push_back(l);
  }
  std::reverse(rows.begin(), rows.end());
  std::string shuffled = header + "\n";
  for (const auto& r : rows) shuffled += r + "\n";
  std::ostringstream third;
  write_preferences(third, parse(shuffled).data, to_json(c));
  CHECK(third.str() == first.str());
}

TEST_CASE("truth sidecar round-trips") {
  SimConfig c;
  c.n_items = 7;
  c.n_assessors = 5;
  c.lambda_m = 8;
  c.clusters = 2;
  c.mistake = LogisticParams{1.5, 0.7};
  const auto sim = generate_dataset(c);
  std::stringstream ss;
  write_truth(ss, sim.truth, sim.data, to_json(c));
  const auto t = read_truth(ss);
  CHECK(t.alpha == sim.truth.alpha);
  CHECK(t.rho_true == sim.truth.rho_true);
  CHECK(t.labels == sim.truth.labels);
  CHECK(t.latent_true == sim.truth.latent_true);
  CHECK(t.flipped == sim.truth.flipped);
  CHECK(std::get<LogisticParams>(t.mistake).beta1 == 0.7);
  std::istringstream bad("{\"format\": \"other\"}");
  CHECK_THROWS_AS(read_truth(bad), DataError);
}

TEST_CASE("sample files round-trip and carry provenance") {
  SimConfig sim;
  sim.n_items = 6;
  sim.n_assessors = 8;
  sim.lambda_m = 6;
  const auto [data, truth] = generate_dataset(sim);
  const auto table = build_table(Metric::footrule, 6);
  for (auto kind : {ModelKind::bernoulli, ModelKind::logistic, ModelKind::mixture_bernoulli}) {
    ChainConfig cfg;
    cfg.model = {kind, kind == ModelKind::mixture_bernoulli ? 2 : 1};
    cfg.tuning.n_iterations = 600;
    cfg.tuning.burn_in = 100;
    cfg.tuning.thinning = 5;
    const auto logs = run_chains(data, cfg, table, 2);
    const auto merged = merge_chains(logs);
    std::vector<int> ids;
    for (const auto& s : data.preference_sets) ids.push_back(s.assessor_id);
    const auto dir = scratch(std::string(to_string(kind)));
    write_samples(dir, merged, ids, to_json(cfg));
    for (const char* f : {"scalars.tsv", "rho.tsv", "latent.tsv"}) CHECK(slurp(dir / f).rfind("# {", 0) == 0);
    const auto back = read_samples(dir);
    REQUIRE(back.log.snapshots.size() == merged.snapshots.size());
    CHECK(back.assessor_ids == ids);
    CHECK(back.log.acceptance.rho.accepted == merged.acceptance.rho.accepted);
    CHECK(back.log.tuning.seed == cfg.tuning.seed);
    for (std::size_t t = 0; t < merged.snapshots.size(); ++t) {
      const auto& x = merged.snapshots[t];
      const auto& y = back.log.snapshots[t];
      REQUIRE(x.chain == y.chain);
      REQUIRE(x.iteration == y.iteration);
      REQUIRE(x.log_likelihood == y.log_likelihood);
      REQUIRE(x.state.alphas == y.state.alphas);
      REQUIRE(x.state.weights == y.state.weights);
      REQUIRE(x.state.rhos == y.state.rhos);
      REQUIRE(x.state.latent == y.state.latent);
      REQUIRE(x.state.labels == y.state.labels);
      REQUIRE(x.state.mistake.index() == y.state.mistake.index());
    }
    // Writing again gives identical bytes.
    const auto dir2 = scratch(std::string(to_string(kind)) + "_2");
    write_samples(dir2, back.log, back.assessor_ids, to_json(cfg));
    for (const char* f : {"scalars.tsv", "rho.tsv", "latent.tsv"}) CHECK(slurp(dir / f) == slurp(dir2 / f));
  }
  CHECK_THROWS_AS(read_samples(scratch("missing")), ConfigError);
}

TEST_CASE("log Z cache") {
  const auto dir = scratch("cache");
  TableOptions opt;
  opt.alpha_max = 5.0;
  opt.is_samples = 50;
  const auto a = cached_table(Metric::footrule, 16, opt, dir);
  CHECK(a.method() == LogZMethod::importance_sampling);
  CHECK(fs::exists(dir / cache_file_name(Metric::footrule, 16, opt)));
  const auto b = cached_table(Metric::footrule, 16, opt, dir);
  CHECK(a.logz() == b.logz());
  CHECK(cached_table(Metric::footrule, 16, opt, std::nullopt).logz() == a.logz());
}

TEST_CASE("summary report layout") {
  SimConfig sim;
  sim.n_items = 12;
  sim.n_assessors = 10;
  const auto [data, truth] = generate_dataset(sim);
  const auto table = build_table(Metric::footrule, 12);
  ChainConfig cfg;
  cfg.tuning.n_iterations = 3000;
  cfg.tuning.burn_in = 1000;
  const auto log = run_chain(data, cfg, table);
  std::ostringstream os;
  write_summary(os, summarize(log));
  const auto text = os.str();
  CHECK(text.find("== cluster 1 ==") != std::string::npos);
  CHECK(text.find("rank |   1 |") != std::string::npos);
  CHECK(text.find("rank |  11 |") != std::string::npos);
  CHECK(text.find("theta  MAP") != std::string::npos);
  CHECK(text.find("95% HPD") != std::string::npos);

  std::ostringstream topk;
  write_topk_consensus(topk, log, 4);
  CHECK(topk.str().rfind("item\tcluster_1\n1\t", 0) == 0);
}
