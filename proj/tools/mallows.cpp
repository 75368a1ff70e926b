// mallows: simulate, fit, predict, diagnose and score pairwise-preference data.
//
// Exit codes: 0 success, 1 configuration error, 2 data error, 3 numeric failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mallows/mallows.hpp"

namespace fs = std::filesystem;
using namespace mallows;
using nlohmann::json;

namespace {

struct ClusterRange {
  int first = 1;
  int last = 1;
  bool is_range = false;
};

ClusterRange parse_clusters(const std::string& s) {
  ClusterRange r;
  const auto dots = s.find("..");
  auto number = [&s](std::string_view part) {
    const auto v = detail::to_int(part);
    if (!v || *v < 1 || *v > 64) throw ConfigError("--clusters: expected N or a..b with 1 <= a <= b, got '" + s + "'");
    return static_cast<int>(*v);
  };
  if (dots == std::string::npos) {
    r.first = r.last = number(s);
  } else {
    r.first = number(std::string_view(s).substr(0, dots));
    r.last = number(std::string_view(s).substr(dots + 2));
    r.is_range = true;
    if (r.last < r.first) throw ConfigError("--clusters: empty range '" + s + "'");
  }
  return r;
}

std::ofstream create(const fs::path& p) { return detail::open_output(p); }

void require_file(const fs::path& p, const char* what) {
  if (!fs::is_regular_file(p)) throw ConfigError(std::string(what) + " '" + p.string() + "' does not exist");
}

void require_dir(const fs::path& p, const char* what) {
  if (!fs::is_directory(p)) throw ConfigError(std::string(what) + " '" + p.string() + "' does not exist");
}

/// Checks that the samples, the dataset and optionally the truth describe the same assessors.
void check_alignment(const LoadedSamples& s, const Dataset& data) {
  if (s.log.n_items != data.n_items || s.log.n_assessors != data.n_assessors())
    throw DataError("samples (" + std::to_string(s.log.n_assessors) + " assessors, " + std::to_string(s.log.n_items) +
                    " items) do not match the dataset (" + std::to_string(data.n_assessors()) + " assessors, " +
                    std::to_string(data.n_items) + " items)");
  for (int j = 0; j < data.n_assessors(); ++j)
    if (s.assessor_ids[static_cast<std::size_t>(j)] != data.preference_sets[static_cast<std::size_t>(j)].assessor_id)
      throw DataError("samples and dataset list different assessor ids");
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  fs::path out;
  SimConfig cfg;
  double theta = 0.1;
  std::optional<double> beta0, beta1;
  std::string metric = "footrule";
};

int run_simulate(SimulateArgs& a) {
  a.cfg.metric = parse_metric(a.metric);
  if (a.beta0 || a.beta1) {
    if (!a.beta0 || !a.beta1) throw ConfigError("simulate: give both --beta0 and --beta1");
    a.cfg.mistake = LogisticParams{*a.beta0, *a.beta1};
  } else {
    a.cfg.mistake = BernoulliParams{a.theta};
  }
  const auto sim = generate_dataset(a.cfg);
  const json prov = {{"command", "simulate"}, {"simulation", to_json(a.cfg)}};
  fs::create_directories(a.out);
  {
    auto os = create(a.out / "preferences.csv");
    write_preferences(os, sim.data, prov);
  }
  {
    auto os = create(a.out / "truth.json");
    write_truth(os, sim.truth, sim.data, prov);
  }
  std::cerr << "simulate: wrote " << sim.data.n_assessors() << " assessors, " << sim.data.total_pairs()
            << " pairs to " << a.out.string() << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct FitArgs {
  fs::path data;
  fs::path out;
  std::optional<int> n_items;
  std::string model = "bm";
  bool model_given = false;
  std::string metric = "footrule";
  std::string clusters = "1";
  int chains = 1;
  int top_k = 3;
  std::optional<fs::path> logz_cache;
  Priors priors;
  Tuning tuning;
};

void write_fit(const fs::path& dir, const SampleLog& log, const std::vector<int>& ids, const json& prov, int top_k) {
  write_samples(dir, log, ids, prov);
  {
    auto os = create(dir / "summary.txt");
    write_summary(os, summarize(log), prov);
  }
  {
    auto os = create(dir / "topk_consensus.tsv");
    write_topk_consensus(os, log, top_k, prov);
  }
  {
    auto os = create(dir / "topk_latent.tsv");
    write_topk_latent(os, log, ids, top_k, prov);
  }
}

int run_fit(FitArgs& a) {
  require_file(a.data, "--data");
  const auto range = parse_clusters(a.clusters);
  ModelKind kind = parse_model(a.model);
  if (!a.model_given && (range.is_range || range.last > 1)) kind = ModelKind::mixture_bernoulli;
  if (range.is_range && kind != ModelKind::mixture_bernoulli)
    throw ConfigError("--clusters range requires --model mixture");
  if (a.chains < 1) throw ConfigError("--chains must be at least 1");
  if (a.top_k < 1) throw ConfigError("--top-k must be at least 1");

  const auto in = read_preferences(a.data, a.n_items);
  std::cerr << "ingest: " << in.report.describe() << '\n';
  const Dataset& data = in.data;
  std::vector<int> ids;
  for (const auto& s : data.preference_sets) ids.push_back(s.assessor_id);

  ChainConfig cfg;
  cfg.metric = parse_metric(a.metric);
  cfg.priors = a.priors;
  cfg.tuning = a.tuning;
  const auto cache = a.logz_cache ? a.logz_cache : default_cache_dir();
  const LogZTable table = cached_table(cfg.metric, data.n_items, TableOptions{}, cache);

  std::vector<SampleLog> runs;
  for (int G = range.first; G <= range.last; ++G) {
    cfg.model = {kind, G};
    const json prov = {{"command", "fit"},
                       {"data", a.data.string()},
                       {"n_items", data.n_items},
                       {"chains", a.chains},
                       {"config", to_json(cfg)}};
    auto logs = run_chains(data, cfg, table, a.chains);
    SampleLog merged = merge_chains(logs);
    if (G > 1) merged = relabel(merged, table);
    const fs::path dir = range.is_range ? a.out / ("G" + std::to_string(G)) : a.out;
    write_fit(dir, merged, ids, prov, a.top_k);
    std::cerr << "fit: G=" << G << " wrote " << merged.snapshots.size() << " snapshots to " << dir.string() << '\n';
    if (range.is_range) runs.push_back(std::move(merged));
  }
  if (range.is_range) {
    cfg.model = {kind, range.first};
    const json prov = {{"command", "fit"},
                       {"data", a.data.string()},
                       {"clusters", a.clusters},
                       {"chains", a.chains},
                       {"config", to_json(cfg)}};
    const auto curves = cluster_fit_curves(runs, data);
    {
      auto os = create(a.out / "cluster_fit_distance.tsv");
      write_cluster_fit(os, curves, false, prov);
    }
    {
      auto os = create(a.out / "cluster_fit_misfit.tsv");
      write_cluster_fit(os, curves, true, prov);
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct PredictArgs {
  fs::path samples;
  fs::path pairs;
  std::optional<fs::path> out;
};

// Pair list: CSV `assessor,first,second`, 1-based items. Assessor 0 asks for
// the consensus ranking of cluster 1; other values are assessor ids.
int run_predict(PredictArgs& a) {
  require_dir(a.samples, "--samples");
  require_file(a.pairs, "--pairs");
  const auto s = read_samples(a.samples);
  const int n = s.log.n_items;
  auto in = detail::open_input(a.pairs);
  std::map<int, int> position;
  for (std::size_t j = 0; j < s.assessor_ids.size(); ++j) position[s.assessor_ids[j]] = static_cast<int>(j);

  struct Query {
    int assessor, first, second;
  };
  std::vector<Query> queries;
  bool have_header = false;
  int lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto where = a.pairs.string() + ": line " + std::to_string(lineno) + ": ";
    if (!have_header) {
      if (t != "assessor,first,second") throw DataError(where + "expected header 'assessor,first,second'");
      have_header = true;
      continue;
    }
    const auto f = detail::split(t, ',');
    if (f.size() != 3) throw DataError(where + "expected 3 fields");
    const auto id = detail::to_int(detail::trim(f[0]));
    const auto x = detail::to_int(detail::trim(f[1]));
    const auto y = detail::to_int(detail::trim(f[2]));
    if (!id || !x || !y) throw DataError(where + "fields must be integers");
    if (*x < 1 || *x > n || *y < 1 || *y > n) throw DataError(where + "item index outside 1.." + std::to_string(n));
    if (*x == *y) throw DataError(where + "items must differ");
    if (*id != 0 && !position.count(static_cast<int>(*id)))
      throw DataError(where + "unknown assessor " + std::to_string(*id));
    queries.push_back({static_cast<int>(*id), static_cast<int>(*x), static_cast<int>(*y)});
  }
  if (!have_header) throw DataError(a.pairs.string() + ": missing header");

  std::map<int, std::vector<Ranking>> cache;
  auto samples_for = [&](int id) -> const std::vector<Ranking>& {
    auto it = cache.find(id);
    if (it == cache.end())
      it = cache.emplace(id, id == 0 ? rho_samples(s.log, 0) : latent_samples(s.log, position.at(id))).first;
    return it->second;
  };

  std::ofstream file;
  if (a.out) file = create(*a.out);
  std::ostream& os = a.out ? static_cast<std::ostream&>(file) : std::cout;
  detail::write_comment_block(os, {{"command", "predict"}, {"samples", a.samples.string()}, {"pairs", a.pairs.string()}});
  os << "assessor,first,second,probability\n";
  for (const auto& q : queries)
    os << q.assessor << ',' << q.first << ',' << q.second << ','
       << detail::fmt(predict_pair(samples_for(q.assessor), q.first - 1, q.second - 1)) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct DiagnoseArgs {
  fs::path samples;
  fs::path out;
};

int run_diagnose(DiagnoseArgs& a) {
  require_dir(a.samples, "--samples");
  const auto s = read_samples(a.samples);
  const auto& log = s.log;
  if (log.snapshots.empty()) throw DataError("diagnose: no snapshots");
  const int G = log.model.clusters;

  std::vector<Ordering> cp;
  for (int g = 0; g < G; ++g) cp.push_back(cp_consensus(rho_samples(log, g)));

  std::vector<std::string> names{"loglik"};
  for (int g = 1; g <= G; ++g) names.push_back("alpha_" + std::to_string(g));
  if (G > 1)
    for (int g = 1; g <= G; ++g) names.push_back("eta_" + std::to_string(g));
  if (log.model.kind == ModelKind::logistic) {
    names.push_back("beta0");
    names.push_back("beta1");
  } else {
    names.push_back("theta");
  }
  for (int g = 1; g <= G; ++g) names.push_back("rho_dist_" + std::to_string(g));

  auto values = [&](const Snapshot& snap) {
    const auto& st = snap.state;
    std::vector<double> v{snap.log_likelihood};
    for (double x : st.alphas) v.push_back(x);
    if (G > 1)
      for (double x : st.weights) v.push_back(x);
    if (const auto* b = std::get_if<BernoulliParams>(&st.mistake)) {
      v.push_back(b->theta);
    } else {
      const auto& l = std::get<LogisticParams>(st.mistake);
      v.push_back(l.beta0);
      v.push_back(l.beta1);
    }
    for (int g = 0; g < G; ++g) v.push_back(normalized_footrule(st.rhos[static_cast<std::size_t>(g)], invert(cp[static_cast<std::size_t>(g)])));
    return v;
  };

  const json prov = {{"command", "diagnose"}, {"samples", a.samples.string()}, {"run", s.provenance}};
  std::map<int, std::vector<std::vector<double>>> by_chain;  // chain -> quantity -> trace
  {
    auto os = create(a.out / "traces.tsv");
    detail::write_comment_block(os, prov);
    os << "chain\titeration";
    for (const auto& nm : names) os << '\t' << nm;
    os << '\n';
    for (const auto& snap : log.snapshots) {
      const auto v = values(snap);
      auto& tr = by_chain[snap.chain];
      tr.resize(v.size());
      os << snap.chain << '\t' << snap.iteration;
      for (std::size_t q = 0; q < v.size(); ++q) {
        os << '\t' << detail::fmt(v[q]);
        tr[q].push_back(v[q]);
      }
      os << '\n';
    }
  }
  auto os = create(a.out / "iat.tsv");
  detail::write_comment_block(os, prov);
  os << "chain\tquantity\tsamples\tmean\tiat\tess\tnote\n";
  for (const auto& [chain, traces] : by_chain)
    for (std::size_t q = 0; q < traces.size(); ++q) {
      const auto& tr = traces[q];
      double mean = 0.0;
      for (double x : tr) mean += x;
      mean /= static_cast<double>(tr.size());
      const auto r = integrated_autocorrelation(tr);
      os << chain << '\t' << names[q] << '\t' << tr.size() << '\t' << detail::fmt(mean) << '\t';
      if (r.iat) os << detail::fmt(*r.iat) << '\t' << detail::fmt(static_cast<double>(tr.size()) / *r.iat);
      else os << "NA\tNA";
      os << '\t' << (r.diagnostic.empty() ? "-" : r.diagnostic) << '\n';
    }

  auto rate = [](const KernelCounter& k) {
    return k.proposed ? static_cast<double>(k.accepted) / static_cast<double>(k.proposed) : 0.0;
  };
  const auto& acc = log.acceptance;
  std::printf("acceptance  rho %.3f  alpha %.3f  latent %.3f", rate(acc.rho), rate(acc.alpha), rate(acc.latent));
  if (log.model.kind == ModelKind::logistic) std::printf("  beta0 %.3f  beta1 %.3f", rate(acc.beta0), rate(acc.beta1));
  std::printf("\nalpha proposals off the log Z grid: %lld\n", static_cast<long long>(acc.alpha_off_grid));
  std::printf("wrote %s and %s\n", (a.out / "traces.tsv").string().c_str(), (a.out / "iat.tsv").string().c_str());
  return 0;
}

// ---------------------------------------------------------------------------

struct ScoreArgs {
  fs::path samples;
  fs::path truth;
  fs::path data;
  std::optional<int> n_items;
  std::optional<fs::path> out;
  std::optional<fs::path> per_assessor;
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

int run_score(ScoreArgs& a) {
  require_dir(a.samples, "--samples");
  require_file(a.truth, "--truth");
  require_file(a.data, "--data");
  const auto s = read_samples(a.samples);
  const auto truth = read_truth(a.truth);
  const auto in = read_preferences(a.data, a.n_items ? a.n_items : std::optional<int>(s.log.n_items));
  check_alignment(s, in.data);
  if (truth.latent_true.size() != in.data.preference_sets.size() || truth.rho_true.front().size() != s.log.n_items)
    throw DataError("truth sidecar does not match the samples");
  const auto& log = s.log;
  const int G = log.model.clusters;

  json report = json::object();
  report["clusters"] = G;
  json per_cluster = json::array();
  std::vector<double> cp_distances, median_distances;
  for (int g = 0; g < G; ++g) {
    const auto samples = rho_samples(log, g);
    const Ranking cp = invert(cp_consensus(samples));
    std::size_t nearest = 0;
    for (std::size_t t = 1; t < truth.rho_true.size(); ++t)
      if (normalized_footrule(cp, truth.rho_true[t]) < normalized_footrule(cp, truth.rho_true[nearest])) nearest = t;
    std::vector<double> d;
    for (const auto& r : samples) d.push_back(normalized_footrule(r, truth.rho_true[nearest]));
    const double cp_d = normalized_footrule(cp, truth.rho_true[nearest]);
    per_cluster.push_back({{"cluster", g + 1},
                           {"matched_true_cluster", nearest + 1},
                           {"median_df_to_rho_true", median(d)},
                           {"cp_df_to_rho_true", cp_d}});
    cp_distances.push_back(cp_d);
    median_distances.push_back(median(d));
  }
  report["consensus"] = per_cluster;
  report["top3_in_top5_percent"] = top3_in_top5_percentage(log, truth.latent_true);

  std::vector<Ranking> consensus_true;
  for (int j = 0; j < in.data.n_assessors(); ++j) consensus_true.push_back(truth.consensus_of(j));
  const auto pred = heldout_prediction(log, in.data, truth.latent_true, consensus_true);
  double total = 0.0;
  int used = 0;
  for (const auto& p : pred)
    if (p.n_heldout) {
      total += p.mean_probability;
      ++used;
    }
  report["heldout_prediction_mean"] = used ? total / used : std::numeric_limits<double>::quiet_NaN();
  report["heldout_assessors"] = used;
  if (G > 1 || truth.rho_true.size() > 1) report["assignment_accuracy"] = assignment_accuracy(modal_labels(log), truth.labels);

  const json prov = {{"command", "score"},
                     {"samples", a.samples.string()},
                     {"truth", a.truth.string()},
                     {"data", a.data.string()}};
  std::ofstream file;
  if (a.out) file = create(*a.out);
  std::ostream& os = a.out ? static_cast<std::ostream&>(file) : std::cout;
  detail::write_comment_block(os, prov);
  os << report.dump(2) << '\n';

  if (a.per_assessor) {
    auto pa = create(*a.per_assessor);
    detail::write_comment_block(pa, prov);
    pa << "assessor\tpairs\tdf_true_consensus\theldout\tmean_probability\n";
    for (const auto& p : pred)
      pa << s.assessor_ids[static_cast<std::size_t>(p.assessor)] << '\t' << p.n_assessed << '\t'
         << p.distance_to_consensus << '\t' << p.n_heldout << '\t'
         << (p.n_heldout ? detail::fmt(p.mean_probability) : std::string("NA")) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian Mallows rank model for possibly non-transitive pairwise comparisons"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "mallows 1.0");

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Generate a synthetic dataset and its truth sidecar");
  s->add_option("--out", sim.out, "Output directory (preferences.csv, truth.json)")->required();
  s->add_option("--n-items", sim.cfg.n_items, "Number of items n")->capture_default_str();
  s->add_option("--assessors", sim.cfg.n_assessors, "Number of assessors N")->capture_default_str();
  s->add_option("--lambda-m", sim.cfg.lambda_m, "Mean number of pairs per assessor")->capture_default_str();
  s->add_flag("--fixed-pairs", sim.cfg.fixed_pairs, "Give every assessor round(lambda-m) pairs");
  s->add_option("--alpha", sim.cfg.alpha, "Scale parameter alpha")->capture_default_str();
  s->add_option("--theta", sim.theta, "Bernoulli mistake probability")->capture_default_str();
  s->add_option("--beta0", sim.beta0, "Logistic mistake intercept (with --beta1)");
  s->add_option("--beta1", sim.beta1, "Logistic mistake slope (with --beta0)");
  s->add_option("--clusters", sim.cfg.clusters, "Number of clusters")->capture_default_str();
  s->add_option("--weights", sim.cfg.weights, "Cluster weights (default uniform)");
  s->add_option("--metric", sim.metric, "Distance: footrule, spearman, kendall, cayley, hamming")->capture_default_str();
  s->add_option("--seed", sim.cfg.seed, "Random seed")->capture_default_str();

  FitArgs fit;
  auto* f = app.add_subcommand("fit", "Run the MCMC sampler on a preference file");
  f->add_option("--data", fit.data, "Preference CSV")->required();
  f->add_option("--out", fit.out, "Output directory")->required();
  f->add_option("--n-items", fit.n_items, "Number of items (default: largest index in the data)");
  f->add_option("--model", fit.model, "bm, lm or mixture")->capture_default_str();
  f->add_option("--metric", fit.metric, "Distance: footrule, spearman, kendall, cayley, hamming")->capture_default_str();
  f->add_option("--clusters", fit.clusters, "Number of clusters G, or a range a..b")->capture_default_str();
  f->add_option("--iterations", fit.tuning.n_iterations, "Total MCMC iterations")->capture_default_str();
  f->add_option("--burn-in", fit.tuning.burn_in, "Iterations discarded before recording")->capture_default_str();
  f->add_option("--thin", fit.tuning.thinning, "Record every k-th iteration")->capture_default_str();
  f->add_option("--seed", fit.tuning.seed, "Random seed")->capture_default_str();
  f->add_option("--l-star", fit.tuning.l_star, "Swap width for rho proposals")->capture_default_str();
  f->add_option("--l-star-r", fit.tuning.l_star_r, "Swap width for latent proposals")->capture_default_str();
  f->add_option("--sigma-alpha", fit.tuning.sigma_alpha, "Log-normal scale of alpha proposals")->capture_default_str();
  f->add_option("--sigma-beta", fit.tuning.sigma_beta, "Log-normal scale of beta proposals")->capture_default_str();
  f->add_option("--chi", fit.priors.chi, "Dirichlet parameter of cluster weights")->capture_default_str();
  f->add_option("--kappa1", fit.priors.kappa1, "Truncated Beta prior on theta, first shape")->capture_default_str();
  f->add_option("--kappa2", fit.priors.kappa2, "Truncated Beta prior on theta, second shape")->capture_default_str();
  f->add_option("--gamma", fit.priors.gamma_shape, "Gamma prior on alpha, shape")->capture_default_str();
  f->add_option("--lambda", fit.priors.gamma_rate, "Gamma prior on alpha, rate")->capture_default_str();
  f->add_option("--lambda01", fit.priors.lambda01, "Gamma prior on beta0, shape")->capture_default_str();
  f->add_option("--lambda02", fit.priors.lambda02, "Gamma prior on beta0, rate")->capture_default_str();
  f->add_option("--lambda11", fit.priors.lambda11, "Gamma prior on beta1, shape")->capture_default_str();
  f->add_option("--lambda12", fit.priors.lambda12, "Gamma prior on beta1, rate")->capture_default_str();
  f->add_option("--chains", fit.chains, "Independent chains run in parallel")->capture_default_str();
  f->add_option("--logz-cache", fit.logz_cache, "Directory caching log Z tables (default $MALLOWS_LOGZ_CACHE_DIR)");
  f->add_option("--top-k", fit.top_k, "k for the top-k probability tables")->capture_default_str();

  PredictArgs pr;
  auto* p = app.add_subcommand("predict", "Posterior probabilities for pairs of items");
  p->add_option("--samples", pr.samples, "Sample directory written by fit")->required();
  p->add_option("--pairs", pr.pairs, "CSV 'assessor,first,second'; assessor 0 is the consensus")->required();
  p->add_option("--out", pr.out, "Output CSV (default stdout)");

  DiagnoseArgs dg;
  auto* d = app.add_subcommand("diagnose", "Traces and integrated autocorrelation times");
  d->add_option("--samples", dg.samples, "Sample directory written by fit")->required();
  d->add_option("--out", dg.out, "Output directory (traces.tsv, iat.tsv)")->required();

  ScoreArgs sc;
  auto* c = app.add_subcommand("score", "Compare a fit with the simulation truth");
  c->add_option("--samples", sc.samples, "Sample directory written by fit")->required();
  c->add_option("--truth", sc.truth, "truth.json written by simulate")->required();
  c->add_option("--data", sc.data, "The preference CSV that was fitted")->required();
  c->add_option("--n-items", sc.n_items, "Number of items (default: from the samples)");
  c->add_option("--out", sc.out, "Report file (default stdout)");
  c->add_option("--per-assessor", sc.per_assessor, "Per-assessor held-out prediction table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  fit.model_given = f->count("--model") > 0;

  try {
    if (*s) return run_simulate(sim);
    if (*f) return run_fit(fit);
    if (*p) return run_predict(pr);
    if (*d) return run_diagnose(dg);
    if (*c) return run_score(sc);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
