#pragma once

// File formats.
//
//   preferences   CSV, header `assessor,preferred,other`, 1-based items
//   truth         JSON sidecar written by the simulator
//   samples       run.json plus scalars.tsv, rho.tsv, latent.tsv
//   log Z cache   the LogZTable text format, one file per configuration
//
// Text outputs open with a `#` comment block holding the run configuration;
// readers skip comment lines.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mallows/error.hpp"
#include "mallows/partition.hpp"
#include "mallows/permset.hpp"
#include "mallows/posterior.hpp"
#include "mallows/sampler.hpp"
#include "mallows/simulate.hpp"

namespace mallows {

using nlohmann::json;

namespace detail {

inline std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i)
    if (i == line.size() || line[i] == sep) {
      out.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  return out;
}

inline std::optional<long long> to_int(std::string_view s) noexcept {
  long long v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::optional<double> to_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (end != tmp.c_str() + tmp.size()) return std::nullopt;
  return v;
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_comment_block(std::ostream& os, const json& provenance) {
  if (provenance.is_null()) return;
  std::istringstream lines(provenance.dump(2));
  for (std::string line; std::getline(lines, line);) os << "# " << line << '\n';
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Preferences

struct IngestReport {
  int n_assessors = 0;
  std::int64_t n_pairs = 0;
  std::vector<int> non_transitive;  // assessor ids with a preference cycle

  std::string describe() const {
    const double pct = n_assessors ? 100.0 * static_cast<double>(non_transitive.size()) / n_assessors : 0.0;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%d assessors, %lld pairs; %zu of %d assessors (%.0f%%) report non-transitivities",
                  n_assessors, static_cast<long long>(n_pairs), non_transitive.size(), n_assessors, pct);
    return buf;
  }
};

struct Ingested {
  Dataset data;
  IngestReport report;
};

inline constexpr std::string_view kPreferenceHeader = "assessor,preferred,other";

/// Parses the preference CSV. Assessors are ordered by id; pairs keep file
/// order. n is the largest item index unless `n_items` is given.
inline Ingested parse_preferences(std::istream& in, std::optional<int> n_items = std::nullopt) {
  std::map<long long, PreferenceSet> sets;
  std::map<long long, std::map<std::pair<int, int>, int>> seen;  // unordered pair -> line
  bool have_header = false;
  int max_item = 0;
  int lineno = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++lineno;
    const auto line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto where = "line " + std::to_string(lineno) + ": ";
    if (!have_header) {
      if (line != kPreferenceHeader)
        throw DataError(where + "expected header '" + std::string(kPreferenceHeader) + "'");
      have_header = true;
      continue;
    }
    const auto cols = detail::split(line, ',');
    if (cols.size() != 3) throw DataError(where + "expected 3 comma-separated fields");
    const auto id = detail::to_int(cols[0]);
    const auto a = detail::to_int(cols[1]);
    const auto b = detail::to_int(cols[2]);
    if (!id || !a || !b) throw DataError(where + "fields must be integers");
    if (*a < 1 || *b < 1 || *a > 1'000'000 || *b > 1'000'000) throw DataError(where + "item indices must be positive");
    if (*a == *b) throw DataError(where + "self-comparison of item " + std::to_string(*a));
    const int pa = static_cast<int>(*a) - 1;
    const int pb = static_cast<int>(*b) - 1;
    const auto key = std::minmax(pa, pb);
    auto [it, fresh] = seen[*id].emplace(key, lineno);
    if (!fresh)
      throw DataError(where + "assessor " + std::to_string(*id) + " compares items " + std::to_string(key.first + 1) +
                      " and " + std::to_string(key.second + 1) + " again (first on line " +
                      std::to_string(it->second) + ")");
    auto& set = sets[*id];
    set.assessor_id = static_cast<int>(*id);
    set.pairs.push_back({pa, pb});
    max_item = std::max({max_item, pa + 1, pb + 1});
  }
  if (!have_header) throw DataError("preference file is empty (missing header)");
  Ingested out;
  out.data.n_items = max_item;
  if (n_items) {
    if (*n_items < max_item)
      throw DataError("--n-items " + std::to_string(*n_items) + " is below the largest item index " +
                      std::to_string(max_item));
    out.data.n_items = *n_items;
  }
  for (auto& [id, set] : sets) out.data.preference_sets.push_back(std::move(set));
  out.data.validate();
  out.report.n_assessors = out.data.n_assessors();
  out.report.n_pairs = out.data.total_pairs();
  for (const auto& s : out.data.preference_sets)
    if (!analyze_transitivity(s, out.data.n_items).is_transitive) out.report.non_transitive.push_back(s.assessor_id);
  return out;
}

inline Ingested read_preferences(const std::filesystem::path& path, std::optional<int> n_items = std::nullopt) {
  auto in = detail::open_input(path);
  return parse_preferences(in, n_items);
}

/// Canonical form: assessors by id, pairs by (preferred, other).
inline void write_preferences(std::ostream& os, const Dataset& data, const json& provenance = nullptr) {
  detail::write_comment_block(os, provenance);
  os << kPreferenceHeader << '\n';
  std::vector<const PreferenceSet*> order;
  for (const auto& s : data.preference_sets) order.push_back(&s);
  std::stable_sort(order.begin(), order.end(), [](auto* x, auto* y) { return x->assessor_id < y->assessor_id; });
  for (const auto* s : order) {
    auto pairs = s->pairs;
    std::sort(pairs.begin(), pairs.end());
    for (const auto& p : pairs) os << s->assessor_id << ',' << p.preferred + 1 << ',' << p.other + 1 << '\n';
  }
}

// ---------------------------------------------------------------------------
// Configuration as JSON

inline json to_json(const Priors& p) {
  return {{"gamma_shape", p.gamma_shape}, {"gamma_rate", p.gamma_rate}, {"kappa1", p.kappa1},
          {"kappa2", p.kappa2},           {"lambda01", p.lambda01},     {"lambda02", p.lambda02},
          {"lambda11", p.lambda11},       {"lambda12", p.lambda12},     {"chi", p.chi}};
}

inline Priors priors_from_json(const json& j) {
  Priors p;
  p.gamma_shape = j.at("gamma_shape");
  p.gamma_rate = j.at("gamma_rate");
  p.kappa1 = j.at("kappa1");
  p.kappa2 = j.at("kappa2");
  p.lambda01 = j.at("lambda01");
  p.lambda02 = j.at("lambda02");
  p.lambda11 = j.at("lambda11");
  p.lambda12 = j.at("lambda12");
  p.chi = j.at("chi");
  return p;
}

inline json to_json(const Tuning& t) {
  return {{"l_star", t.l_star},
          {"l_star_r", t.l_star_r},
          {"sigma_alpha", t.sigma_alpha},
          {"sigma_beta", t.sigma_beta},
          {"iterations", t.n_iterations},
          {"burn_in", t.burn_in},
          {"thinning", t.thinning},
          {"seed", t.seed},
          {"sample_alpha", t.sample_alpha},
          {"sample_mistake", t.sample_mistake}};
}

inline Tuning tuning_from_json(const json& j) {
  Tuning t;
  t.l_star = j.at("l_star");
  t.l_star_r = j.at("l_star_r");
  t.sigma_alpha = j.at("sigma_alpha");
  t.sigma_beta = j.at("sigma_beta");
  t.n_iterations = j.at("iterations");
  t.burn_in = j.at("burn_in");
  t.thinning = j.at("thinning");
  t.seed = j.at("seed");
  t.sample_alpha = j.at("sample_alpha");
  t.sample_mistake = j.at("sample_mistake");
  return t;
}

inline json to_json(const ChainConfig& c) {
  return {{"model", to_string(c.model.kind)},
          {"clusters", c.model.clusters},
          {"metric", to_string(c.metric)},
          {"priors", to_json(c.priors)},
          {"tuning", to_json(c.tuning)}};
}

inline json to_json(const MistakeParams& m) {
  if (const auto* b = std::get_if<BernoulliParams>(&m)) return {{"model", "bm"}, {"theta", b->theta}};
  const auto& l = std::get<LogisticParams>(m);
  return {{"model", "lm"}, {"beta0", l.beta0}, {"beta1", l.beta1}};
}

inline MistakeParams mistake_from_json(const json& j) {
  if (j.at("model") == "bm") return BernoulliParams{j.at("theta").get<double>()};
  return LogisticParams{j.at("beta0").get<double>(), j.at("beta1").get<double>()};
}

inline json to_json(const SimConfig& c) {
  json rho = json::array();
  for (const auto& r : c.rho_true) rho.push_back(std::vector<int>(r.ranks().begin(), r.ranks().end()));
  return {{"n_items", c.n_items},   {"n_assessors", c.n_assessors}, {"lambda_m", c.lambda_m},
          {"fixed_pairs", c.fixed_pairs}, {"alpha", c.alpha},     {"mistake", to_json(c.mistake)},
          {"clusters", c.clusters}, {"rho_true", rho},              {"weights", c.weights},
          {"metric", to_string(c.metric)}, {"seed", c.seed}};
}

// ---------------------------------------------------------------------------
// Truth sidecar

namespace detail {
inline json rankings_to_json(const std::vector<Ranking>& rs) {
  json a = json::array();
  for (const auto& r : rs) a.push_back(std::vector<int>(r.ranks().begin(), r.ranks().end()));
  return a;
}

inline std::vector<Ranking> rankings_from_json(const json& a) {
  std::vector<Ranking> out;
  for (const auto& r : a) out.emplace_back(r.get<std::vector<int>>());
  return out;
}
}  // namespace detail

/// Labels are written 1-based.
inline void write_truth(std::ostream& os, const TruthRecord& t, const Dataset& data, const json& provenance = nullptr) {
  std::vector<int> ids, labels;
  for (const auto& s : data.preference_sets) ids.push_back(s.assessor_id);
  for (int z : t.labels) labels.push_back(z + 1);
  json flips = json::array();
  for (const auto& f : t.flipped) flips.push_back(std::vector<int>(f.begin(), f.end()));
  json j = {{"format", "mallows-truth 1"},
            {"n_items", data.n_items},
            {"alpha", t.alpha},
            {"mistake", to_json(t.mistake)},
            {"rho_true", detail::rankings_to_json(t.rho_true)},
            {"assessor_ids", ids},
            {"labels", labels},
            {"latent_true", detail::rankings_to_json(t.latent_true)},
            {"flipped", flips}};
  if (!provenance.is_null()) j["provenance"] = provenance;
  os << j.dump(1) << '\n';
}

inline TruthRecord read_truth(std::istream& is) {
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw DataError(std::string("truth file: ") + e.what());
  }
  if (j.value("format", "") != "mallows-truth 1") throw DataError("truth file: unknown format");
  TruthRecord t;
  t.alpha = j.at("alpha");
  t.mistake = mistake_from_json(j.at("mistake"));
  t.rho_true = detail::rankings_from_json(j.at("rho_true"));
  for (int z : j.at("labels").get<std::vector<int>>()) t.labels.push_back(z - 1);
  t.latent_true = detail::rankings_from_json(j.at("latent_true"));
  for (const auto& f : j.at("flipped")) {
    const auto v = f.get<std::vector<int>>();
    t.flipped.emplace_back(v.begin(), v.end());
  }
  return t;
}

inline TruthRecord read_truth(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return read_truth(in);
}

// ---------------------------------------------------------------------------
// Sample logs

namespace detail {

inline json to_json(const KernelCounter& k) { return {{"proposed", k.proposed}, {"accepted", k.accepted}}; }

inline KernelCounter counter_from_json(const json& j) { return {j.at("proposed"), j.at("accepted")}; }

inline json acceptance_to_json(const AcceptanceStats& a) {
  return {{"rho", to_json(a.rho)},       {"alpha", to_json(a.alpha)},   {"beta0", to_json(a.beta0)},
          {"beta1", to_json(a.beta1)},   {"latent", to_json(a.latent)}, {"latent_g_unchanged", a.latent_g_unchanged},
          {"alpha_off_grid", a.alpha_off_grid}};
}

inline AcceptanceStats acceptance_from_json(const json& j) {
  AcceptanceStats a;
  a.rho = counter_from_json(j.at("rho"));
  a.alpha = counter_from_json(j.at("alpha"));
  a.beta0 = counter_from_json(j.at("beta0"));
  a.beta1 = counter_from_json(j.at("beta1"));
  a.latent = counter_from_json(j.at("latent"));
  a.latent_g_unchanged = j.at("latent_g_unchanged");
  a.alpha_off_grid = j.at("alpha_off_grid");
  return a;
}

/// Reads a TSV file: comment lines skipped, first remaining line is the header.
struct Tsv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline Tsv read_tsv(const std::filesystem::path& path) {
  auto in = open_input(path);
  Tsv t;
  int lineno = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++lineno;
    if (raw.empty() || raw.front() == '#') continue;
    std::vector<std::string> cols;
    for (auto c : split(raw, '\t')) cols.emplace_back(c);
    if (t.header.empty()) {
      t.header = std::move(cols);
    } else {
      if (cols.size() != t.header.size())
        throw DataError(path.filename().string() + " line " + std::to_string(lineno) + ": wrong number of columns");
      t.rows.push_back(std::move(cols));
    }
  }
  if (t.header.empty()) throw DataError(path.filename().string() + ": missing header");
  return t;
}

inline long long cell_int(const std::string& s, const std::filesystem::path& path) {
  const auto v = to_int(s);
  if (!v) throw DataError(path.filename().string() + ": bad integer '" + s + "'");
  return *v;
}

inline double cell_double(const std::string& s, const std::filesystem::path& path) {
  const auto v = to_double(s);
  if (!v) throw DataError(path.filename().string() + ": bad number '" + s + "'");
  return *v;
}

}  // namespace detail

/// Writes one (possibly merged) log. `assessor_ids` label latent.tsv rows.
inline void write_samples(const std::filesystem::path& dir, const SampleLog& log, std::span<const int> assessor_ids,
                          const json& provenance = nullptr) {
  std::filesystem::create_directories(dir);
  const int G = log.model.clusters;
  const int n = log.n_items;
  const bool lm = log.model.kind == ModelKind::logistic;
  int n_chains = 0;
  for (const auto& s : log.snapshots) n_chains = std::max(n_chains, s.chain + 1);

  json run = {{"format", "mallows-samples 1"},
              {"model", to_string(log.model.kind)},
              {"clusters", G},
              {"metric", to_string(log.metric)},
              {"n_items", n},
              {"n_assessors", log.n_assessors},
              {"chains", n_chains},
              {"snapshots", log.snapshots.size()},
              {"assessor_ids", std::vector<int>(assessor_ids.begin(), assessor_ids.end())},
              {"priors", to_json(log.priors)},
              {"tuning", to_json(log.tuning)},
              {"acceptance", detail::acceptance_to_json(log.acceptance)},
              {"g_evaluations", log.g_evaluations}};
  if (!provenance.is_null()) run["provenance"] = provenance;
  detail::open_output(dir / "run.json") << run.dump(1) << '\n';

  auto scalars = detail::open_output(dir / "scalars.tsv");
  detail::write_comment_block(scalars, provenance);
  scalars << "chain\titeration\tloglik";
  for (int g = 1; g <= G; ++g) scalars << "\talpha_" << g;
  for (int g = 1; g <= G; ++g) scalars << "\teta_" << g;
  scalars << (lm ? "\tbeta0\tbeta1\n" : "\ttheta\n");
  for (const auto& s : log.snapshots) {
    scalars << s.chain << '\t' << s.iteration << '\t' << detail::fmt(s.log_likelihood);
    for (double a : s.state.alphas) scalars << '\t' << detail::fmt(a);
    for (double w : s.state.weights) scalars << '\t' << detail::fmt(w);
    if (lm) {
      const auto& b = std::get<LogisticParams>(s.state.mistake);
      scalars << '\t' << detail::fmt(b.beta0) << '\t' << detail::fmt(b.beta1) << '\n';
    } else {
      scalars << '\t' << detail::fmt(std::get<BernoulliParams>(s.state.mistake).theta) << '\n';
    }
  }

  auto rho = detail::open_output(dir / "rho.tsv");
  detail::write_comment_block(rho, provenance);
  rho << "chain\titeration\tcluster";
  for (int i = 1; i <= n; ++i) rho << "\trank_" << i;
  rho << '\n';
  for (const auto& s : log.snapshots)
    for (int g = 0; g < G; ++g) {
      rho << s.chain << '\t' << s.iteration << '\t' << g + 1;
      for (int r : s.state.rhos[static_cast<std::size_t>(g)].ranks()) rho << '\t' << r;
      rho << '\n';
    }

  auto latent = detail::open_output(dir / "latent.tsv");
  detail::write_comment_block(latent, provenance);
  latent << "chain\titeration\tassessor\tcluster";
  for (int i = 1; i <= n; ++i) latent << "\trank_" << i;
  latent << '\n';
  for (const auto& s : log.snapshots)
    for (std::size_t j = 0; j < s.state.latent.size(); ++j) {
      const int id = j < assessor_ids.size() ? assessor_ids[j] : static_cast<int>(j) + 1;
      latent << s.chain << '\t' << s.iteration << '\t' << id << '\t' << s.state.labels[j] + 1;
      for (int r : s.state.latent[j].ranks()) latent << '\t' << r;
      latent << '\n';
    }
}

struct LoadedSamples {
  SampleLog log;
  std::vector<int> assessor_ids;
  json provenance;
};

inline LoadedSamples read_samples(const std::filesystem::path& dir) {
  json run;
  {
    auto in = detail::open_input(dir / "run.json");
    try {
      run = json::parse(in);
    } catch (const json::exception& e) {
      throw DataError(std::string("run.json: ") + e.what());
    }
  }
  if (run.value("format", "") != "mallows-samples 1") throw DataError("run.json: unknown format");
  LoadedSamples out;
  auto& log = out.log;
  log.model = {parse_model(run.at("model").get<std::string>()), run.at("clusters").get<int>()};
  log.metric = parse_metric(run.at("metric").get<std::string>());
  log.n_items = run.at("n_items");
  log.n_assessors = run.at("n_assessors");
  log.priors = priors_from_json(run.at("priors"));
  log.tuning = tuning_from_json(run.at("tuning"));
  log.acceptance = detail::acceptance_from_json(run.at("acceptance"));
  log.g_evaluations = run.at("g_evaluations");
  out.assessor_ids = run.at("assessor_ids").get<std::vector<int>>();
  if (run.contains("provenance")) out.provenance = run.at("provenance");
  const int G = log.model.clusters;
  const int n = log.n_items;
  const int N = log.n_assessors;
  const bool lm = log.model.kind == ModelKind::logistic;

  const auto sp = dir / "scalars.tsv";
  const auto scalars = detail::read_tsv(sp);
  const std::size_t want = 3 + 2 * static_cast<std::size_t>(G) + (lm ? 2 : 1);
  if (scalars.header.size() != want) throw DataError("scalars.tsv: column count does not match run.json");
  for (const auto& row : scalars.rows) {
    Snapshot s;
    s.chain = static_cast<int>(detail::cell_int(row[0], sp));
    s.iteration = detail::cell_int(row[1], sp);
    s.log_likelihood = detail::cell_double(row[2], sp);
    for (int g = 0; g < G; ++g) s.state.alphas.push_back(detail::cell_double(row[3 + static_cast<std::size_t>(g)], sp));
    for (int g = 0; g < G; ++g)
      s.state.weights.push_back(detail::cell_double(row[3 + static_cast<std::size_t>(G + g)], sp));
    const std::size_t m = 3 + 2 * static_cast<std::size_t>(G);
    if (lm) {
      s.state.mistake = LogisticParams{detail::cell_double(row[m], sp), detail::cell_double(row[m + 1], sp)};
    } else {
      s.state.mistake = BernoulliParams{detail::cell_double(row[m], sp)};
    }
    log.snapshots.push_back(std::move(s));
  }
  const std::size_t T = log.snapshots.size();

  auto read_ranks = [n](const std::vector<std::string>& row, std::size_t first, const std::filesystem::path& p) {
    std::vector<int> r;
    for (int i = 0; i < n; ++i) r.push_back(static_cast<int>(detail::cell_int(row[first + static_cast<std::size_t>(i)], p)));
    if (!Ranking::is_permutation_of_1_to_n(r)) throw DataError(p.filename().string() + ": row is not a ranking");
    return Ranking(std::move(r));
  };

  const auto rp = dir / "rho.tsv";
  const auto rho = detail::read_tsv(rp);
  if (rho.header.size() != 3 + static_cast<std::size_t>(n) || rho.rows.size() != T * static_cast<std::size_t>(G))
    throw DataError("rho.tsv: dimensions do not match run.json");
  for (std::size_t t = 0; t < T; ++t)
    for (int g = 0; g < G; ++g) log.snapshots[t].state.rhos.push_back(read_ranks(rho.rows[t * G + g], 3, rp));

  const auto lp = dir / "latent.tsv";
  const auto latent = detail::read_tsv(lp);
  if (latent.header.size() != 4 + static_cast<std::size_t>(n) || latent.rows.size() != T * static_cast<std::size_t>(N))
    throw DataError("latent.tsv: dimensions do not match run.json");
  for (std::size_t t = 0; t < T; ++t)
    for (int j = 0; j < N; ++j) {
      const auto& row = latent.rows[t * static_cast<std::size_t>(N) + static_cast<std::size_t>(j)];
      log.snapshots[t].state.labels.push_back(static_cast<int>(detail::cell_int(row[3], lp)) - 1);
      log.snapshots[t].state.latent.push_back(read_ranks(row, 4, lp));
    }
  for (const auto& s : log.snapshots) s.state.check_invariants(n);
  return out;
}

// ---------------------------------------------------------------------------
// Log Z cache

/// Default cache directory from MALLOWS_LOGZ_CACHE_DIR, if set.
inline std::optional<std::filesystem::path> default_cache_dir() {
  if (const char* env = std::getenv("MALLOWS_LOGZ_CACHE_DIR"); env && *env) return std::filesystem::path(env);
  return std::nullopt;
}

inline std::string cache_file_name(Metric metric, int n, const TableOptions& opt) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "logz-%s-n%d-a%g-s%g-k%lld-seed%llu.txt", std::string(to_string(metric)).c_str(), n,
                opt.alpha_max, opt.grid_step, static_cast<long long>(opt.is_samples),
                static_cast<unsigned long long>(opt.seed));
  return buf;
}

/// Reads the table from `cache_dir` when present, otherwise builds and stores it.
inline LogZTable cached_table(Metric metric, int n, const TableOptions& opt,
                              const std::optional<std::filesystem::path>& cache_dir) {
  if (!cache_dir) return build_table(metric, n, opt);
  const auto path = *cache_dir / cache_file_name(metric, n, opt);
  if (std::ifstream in(path); in) {
    auto t = LogZTable::read(in);
    if (t.metric() != metric || t.n() != n) throw DataError("log Z cache '" + path.string() + "' does not match");
    return t;
  }
  auto t = build_table(metric, n, opt);
  std::filesystem::create_directories(*cache_dir);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ConfigError("cannot write log Z cache in '" + cache_dir->string() + "'");
    t.write(out);
  }
  std::filesystem::rename(tmp, path);
  return t;
}

// ---------------------------------------------------------------------------
// Reports

namespace detail {
inline std::string interval(const ScalarSummary& s) {
  char buf[128];
  if (std::isnan(s.map)) {
    std::snprintf(buf, sizeof buf, "mean %.3f", s.mean);
  } else {
    std::snprintf(buf, sizeof buf, "MAP %.3f  mean %.3f  95%% HPD (%.3f, %.3f)", s.map, s.mean, s.lower, s.upper);
  }
  return buf;
}
}  // namespace detail

/// Human-readable summary: per cluster, the CP ordering as a rank/item table.
inline void write_summary(std::ostream& os, const ConsensusSummary& s, const json& provenance = nullptr) {
  detail::write_comment_block(os, provenance);
  os << "retained samples: " << s.n_snapshots << '\n';
  for (std::size_t g = 0; g < s.clusters.size(); ++g) {
    const auto& c = s.clusters[g];
    os << "\n== cluster " << g + 1 << " ==\n";
    os << "alpha  " << detail::interval(c.alpha) << '\n';
    if (s.clusters.size() > 1) os << "eta    " << detail::interval(c.eta) << '\n';
    const int n = c.cp.size();
    for (int start = 0; start < n; start += 10) {
      const int stop = std::min(n, start + 10);
      os << "rank |";
      for (int k = start; k < stop; ++k) os << std::setw(4) << k + 1 << " |";
      os << "\nitem |";
      for (int k = start; k < stop; ++k) os << std::setw(4) << c.cp[k] + 1 << " |";
      os << '\n';
    }
    os << "MAP rho (posterior frequency " << detail::fmt(c.map_rho_probability) << "):";
    for (int r : c.map_rho.ranks()) os << ' ' << r;
    os << '\n';
  }
  os << '\n';
  if (s.theta) os << "theta  " << detail::interval(*s.theta) << '\n';
  if (s.beta0) os << "beta0  " << detail::interval(*s.beta0) << '\n';
  if (s.beta1) os << "beta1  " << detail::interval(*s.beta1) << '\n';
  const auto& a = s.acceptance;
  char buf[200];
  std::snprintf(buf, sizeof buf, "acceptance: rho %.3f  alpha %.3f  latent %.3f  (alpha proposals off grid: %lld)\n",
                a.rho.rate(), a.alpha.rate(), a.latent.rate(), static_cast<long long>(a.alpha_off_grid));
  os << buf;
}

/// Item-by-cluster matrix of P(rank <= k) for the consensus rankings.
inline void write_topk_consensus(std::ostream& os, const SampleLog& log, int k, const json& provenance = nullptr) {
  detail::write_comment_block(os, provenance);
  os << "item";
  for (int g = 1; g <= log.model.clusters; ++g) os << "\tcluster_" << g;
  os << '\n';
  std::vector<std::vector<double>> p;
  for (int g = 0; g < log.model.clusters; ++g) p.push_back(topk_marginals(rho_samples(log, g), k));
  for (int i = 0; i < log.n_items; ++i) {
    os << i + 1;
    for (const auto& col : p) os << '\t' << detail::fmt(col[static_cast<std::size_t>(i)]);
    os << '\n';
  }
}

/// Assessor-by-item matrix of P(R_ji <= k).
inline void write_topk_latent(std::ostream& os, const SampleLog& log, std::span<const int> assessor_ids, int k,
                              const json& provenance = nullptr) {
  detail::write_comment_block(os, provenance);
  os << "assessor";
  for (int i = 1; i <= log.n_items; ++i) os << "\titem_" << i;
  os << '\n';
  for (int j = 0; j < log.n_assessors; ++j) {
    const auto p = topk_marginals(latent_samples(log, j), k);
    os << assessor_ids[static_cast<std::size_t>(j)];
    for (double v : p) os << '\t' << detail::fmt(v);
    os << '\n';
  }
}

/// One column per G, one row per retained snapshot.
inline void write_cluster_fit(std::ostream& os, const ClusterDiagnostics& d, bool misfit,
                              const json& provenance = nullptr) {
  detail::write_comment_block(os, provenance);
  os << "sample";
  std::size_t rows = 0;
  for (const auto& c : d.per_g) {
    os << "\tG" << c.clusters;
    rows = std::max(rows, c.distance.size());
  }
  os << '\n';
  for (std::size_t t = 0; t < rows; ++t) {
    os << t + 1;
    for (const auto& c : d.per_g) {
      const auto& v = misfit ? c.misfit : c.distance;
      os << '\t';
      if (t < v.size()) os << detail::fmt(v[t]);
      else os << "NA";
    }
    os << '\n';
  }
}

}  // namespace mallows
