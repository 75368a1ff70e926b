#pragma once

// Posterior summaries computed from a SampleLog: label-switching correction,
// CP consensus, MAP/HPD, top-k marginals, pair prediction, cluster-fit
// diagnostics and integrated autocorrelation times.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mallows/error.hpp"
#include "mallows/mistakes.hpp"
#include "mallows/partition.hpp"
#include "mallows/permset.hpp"
#include "mallows/sampler.hpp"

namespace mallows {

/// Normalized footrule: (1/n) sum_i |a_i - b_i|.
inline double normalized_footrule(const Ranking& a, const Ranking& b) {
  return static_cast<double>(distance(Metric::footrule, a, b)) / a.size();
}

/// Rho samples of cluster g, one per snapshot.
inline std::vector<Ranking> rho_samples(const SampleLog& log, int g) {
  std::vector<Ranking> out;
  out.reserve(log.snapshots.size());
  for (const auto& s : log.snapshots) out.push_back(s.state.rhos[static_cast<std::size_t>(g)]);
  return out;
}

/// R_j samples of assessor j, one per snapshot.
inline std::vector<Ranking> latent_samples(const SampleLog& log, int j) {
  std::vector<Ranking> out;
  out.reserve(log.snapshots.size());
  for (const auto& s : log.snapshots) out.push_back(s.state.latent[static_cast<std::size_t>(j)]);
  return out;
}

// ---------------------------------------------------------------------------
// Label switching

namespace detail {

// p[j][g]: probability that assessor j belongs to cluster g at this snapshot.
inline std::vector<std::vector<double>> assignment_probabilities(const ChainState& s, Metric metric,
                                                                 const LogZTable& table) {
  const int G = s.clusters();
  const int n = s.rhos.front().size();
  std::vector<double> logz(static_cast<std::size_t>(G));
  for (int g = 0; g < G; ++g) logz[static_cast<std::size_t>(g)] = table(s.alphas[static_cast<std::size_t>(g)]);
  std::vector<std::vector<double>> p(s.latent.size(), std::vector<double>(static_cast<std::size_t>(G)));
  for (std::size_t j = 0; j < s.latent.size(); ++j) {
    auto& row = p[j];
    double top = -std::numeric_limits<double>::infinity();
    for (int g = 0; g < G; ++g) {
      const auto gi = static_cast<std::size_t>(g);
      const double w = s.weights[gi];
      row[gi] = w > 0.0 ? std::log(w) - (s.alphas[gi] / n) * static_cast<double>(distance(metric, s.latent[j], s.rhos[gi])) - logz[gi]
                        : -std::numeric_limits<double>::infinity();
      top = std::max(top, row[gi]);
    }
    double total = 0.0;
    for (double& x : row) total += (x = std::exp(x - top));
    for (double& x : row) x /= total;
  }
  return p;
}

// new cluster g takes over old cluster perm[g].
inline ChainState permute_clusters(const ChainState& s, const std::vector<int>& perm) {
  ChainState out = s;
  std::vector<int> inverse(perm.size());
  for (std::size_t g = 0; g < perm.size(); ++g) {
    const auto old = static_cast<std::size_t>(perm[g]);
    out.alphas[g] = s.alphas[old];
    out.rhos[g] = s.rhos[old];
    out.weights[g] = s.weights[old];
    inverse[old] = static_cast<int>(g);
  }
  for (auto& z : out.labels) z = inverse[static_cast<std::size_t>(z)];
  return out;
}

}  // namespace detail

/// Stephens' KL relabeling. For each snapshot, picks the cluster permutation
/// (exhaustively over G!) that brings its assignment probabilities closest to
/// the running mean matrix; repeats until no snapshot changes permutation.
inline SampleLog relabel(const SampleLog& log, const LogZTable& table, int max_sweeps = 100) {
  const int G = log.model.clusters;
  if (G > 8) throw ConfigError("relabel: exhaustive search refused for G > 8");
  if (G <= 1 || log.snapshots.empty()) return log;
  const std::size_t T = log.snapshots.size();
  const auto N = static_cast<std::size_t>(log.n_assessors);
  const auto Gs = static_cast<std::size_t>(G);

  std::vector<std::vector<std::vector<double>>> probs(T);
  for (std::size_t t = 0; t < T; ++t)
    probs[t] = detail::assignment_probabilities(log.snapshots[t].state, log.metric, table);

  std::vector<std::vector<int>> perms;
  std::vector<int> perm(Gs);
  std::iota(perm.begin(), perm.end(), 0);
  do perms.push_back(perm); while (std::next_permutation(perm.begin(), perm.end()));

  std::vector<int> choice(T, 0);  // index into perms; 0 = identity
  std::vector<std::vector<double>> logq(N, std::vector<double>(Gs));
  std::vector<double> cost(Gs * Gs);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    for (auto& row : logq) std::fill(row.begin(), row.end(), 0.0);
    for (std::size_t t = 0; t < T; ++t) {
      const auto& pm = perms[static_cast<std::size_t>(choice[t])];
      for (std::size_t j = 0; j < N; ++j)
        for (std::size_t g = 0; g < Gs; ++g) logq[j][g] += probs[t][j][static_cast<std::size_t>(pm[g])];
    }
    for (auto& row : logq)
      for (double& q : row) q = std::log(std::max(q / static_cast<double>(T), 1e-300));

    bool changed = false;
    for (std::size_t t = 0; t < T; ++t) {
      // cost[old * G + new] = sum_j p[j][old] log Q[j][new]; maximize over permutations.
      std::fill(cost.begin(), cost.end(), 0.0);
      for (std::size_t j = 0; j < N; ++j)
        for (std::size_t o = 0; o < Gs; ++o)
          for (std::size_t g = 0; g < Gs; ++g) cost[o * Gs + g] += probs[t][j][o] * logq[j][g];
      int best = 0;
      double best_score = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < perms.size(); ++k) {
        double score = 0.0;
        for (std::size_t g = 0; g < Gs; ++g) score += cost[static_cast<std::size_t>(perms[k][g]) * Gs + g];
        if (score > best_score + 1e-12) {
          best_score = score;
          best = static_cast<int>(k);
        }
      }
      if (best != choice[t]) {
        choice[t] = best;
        changed = true;
      }
    }
    if (!changed) break;
  }

  SampleLog out = log;
  for (std::size_t t = 0; t < T; ++t)
    out.snapshots[t].state = detail::permute_clusters(log.snapshots[t].state, perms[static_cast<std::size_t>(choice[t])]);
  return out;
}

// ---------------------------------------------------------------------------
// Point and interval estimates

/// Cumulative-probability consensus: position k takes the remaining item with
/// the highest posterior probability of rank <= k. Ties go to the smaller index.
inline Ordering cp_consensus(std::span<const Ranking> samples) {
  if (samples.empty()) throw DataError("cp_consensus: no samples");
  const int n = samples.front().size();
  // at_most[i][k] = #samples with rank(i) <= k+1
  std::vector<std::vector<std::int64_t>> at_most(static_cast<std::size_t>(n), std::vector<std::int64_t>(static_cast<std::size_t>(n), 0));
  for (const auto& r : samples)
    for (int i = 0; i < n; ++i) ++at_most[static_cast<std::size_t>(i)][static_cast<std::size_t>(r[i] - 1)];
  for (auto& row : at_most) std::partial_sum(row.begin(), row.end(), row.begin());
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  std::vector<int> items;
  for (int k = 0; k < n; ++k) {
    int best = -1;
    for (int i = 0; i < n; ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      if (best < 0 || at_most[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] > at_most[static_cast<std::size_t>(best)][static_cast<std::size_t>(k)])
        best = i;
    }
    used[static_cast<std::size_t>(best)] = 1;
    items.push_back(best);
  }
  return Ordering(std::move(items));
}

/// Most frequent ranking among the samples (ties: lexicographically smallest).
inline std::pair<Ranking, double> map_ranking(std::span<const Ranking> samples) {
  if (samples.empty()) throw DataError("map_ranking: no samples");
  std::map<Ranking, std::int64_t> freq;
  for (const auto& r : samples) ++freq[r];
  auto best = freq.begin();
  for (auto it = freq.begin(); it != freq.end(); ++it)
    if (it->second > best->second) best = it;
  return {best->first, static_cast<double>(best->second) / static_cast<double>(samples.size())};
}

struct MapHpd {
  double map = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double mean = 0.0;
};

/// MAP from a Freedman-Diaconis histogram and the shortest interval holding
/// `level` of the samples.
inline MapHpd map_and_hpd(std::span<const double> samples, double level = 0.95) {
  if (samples.size() < 100) throw DataError("map_and_hpd: need at least 100 samples");
  if (!(level > 0.0 && level <= 1.0)) throw ConfigError("map_and_hpd: level must lie in (0, 1]");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const std::size_t m = x.size();
  MapHpd out;
  out.mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(m);

  const auto k = static_cast<std::size_t>(std::ceil(level * static_cast<double>(m) - 1e-9));
  std::size_t best = 0;
  for (std::size_t i = 0; i + k <= m; ++i)
    if (x[i + k - 1] - x[i] < x[best + k - 1] - x[best]) best = i;
  out.lower = x[best];
  out.upper = x[best + k - 1];

  auto quantile = [&x, m](double q) {
    const double pos = q * static_cast<double>(m - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, m - 1);
    return x[lo] + (pos - static_cast<double>(lo)) * (x[hi] - x[lo]);
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  const double width = 2.0 * iqr / std::cbrt(static_cast<double>(m));
  if (!(width > 0.0) || x.back() == x.front()) {
    // Degenerate spread: most frequent exact value.
    double mode = x.front();
    std::size_t run = 0, best_run = 0;
    for (std::size_t i = 0; i < m; ++i) {
      run = (i > 0 && x[i] == x[i - 1]) ? run + 1 : 1;
      if (run > best_run) {
        best_run = run;
        mode = x[i];
      }
    }
    out.map = mode;
    return out;
  }
  const auto bins = static_cast<std::size_t>(std::max(1.0, std::ceil((x.back() - x.front()) / width)));
  std::vector<std::size_t> counts(bins, 0);
  for (double v : x) ++counts[std::min(bins - 1, static_cast<std::size_t>((v - x.front()) / width))];
  const auto top = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
  out.map = x.front() + (static_cast<double>(top) + 0.5) * width;
  return out;
}

// ---------------------------------------------------------------------------
// Top-k probabilities and prediction

/// Per-item posterior probability of rank <= k.
inline std::vector<double> topk_marginals(std::span<const Ranking> samples, int k) {
  if (samples.empty()) throw DataError("topk_marginals: no samples");
  const int n = samples.front().size();
  if (k < 1 || k >= n) throw ConfigError("topk_marginals: need 1 <= k < n");
  std::vector<double> p(static_cast<std::size_t>(n), 0.0);
  for (const auto& r : samples)
    for (int i = 0; i < n; ++i)
      if (r[i] <= k) p[static_cast<std::size_t>(i)] += 1.0;
  for (double& v : p) v /= static_cast<double>(samples.size());
  return p;
}

/// Posterior probability that every item in `items` has rank <= k.
inline double joint_topk_probability(std::span<const Ranking> samples, std::span<const int> items, int k) {
  if (samples.empty()) throw DataError("joint_topk_probability: no samples");
  if (static_cast<int>(items.size()) > k) throw ConfigError("joint_topk_probability: |S| must not exceed k");
  std::int64_t hits = 0;
  for (const auto& r : samples)
    hits += std::all_of(items.begin(), items.end(), [&](int i) { return r[i] <= k; });
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

struct TopSet {
  std::vector<int> items;  // sorted item indices
  double probability = 0.0;
};

/// The size-`set_size` item set with the largest joint probability of all
/// ranking in the top k (ties: lexicographically smallest set).
inline TopSet best_topk_set(std::span<const Ranking> samples, int set_size, int k) {
  if (samples.empty()) throw DataError("best_topk_set: no samples");
  if (set_size < 1 || set_size > k) throw ConfigError("best_topk_set: need 1 <= set size <= k");
  std::map<std::vector<int>, std::int64_t> freq;
  std::vector<int> top;
  for (const auto& r : samples) {
    top.clear();
    for (int i = 0; i < r.size(); ++i)
      if (r[i] <= k) top.push_back(i);
    // Enumerate set_size-subsets of the top-k items.
    std::vector<char> pick(top.size(), 0);
    std::fill(pick.begin(), pick.begin() + set_size, 1);
    do {
      std::vector<int> subset;
      for (std::size_t t = 0; t < top.size(); ++t)
        if (pick[t]) subset.push_back(top[t]);
      ++freq[subset];
    } while (std::prev_permutation(pick.begin(), pick.end()));
  }
  auto best = freq.begin();
  for (auto it = freq.begin(); it != freq.end(); ++it)
    if (it->second > best->second) best = it;
  return {best->first, static_cast<double>(best->second) / static_cast<double>(samples.size())};
}

/// Posterior probability that item i is ranked above item k.
inline double predict_pair(std::span<const Ranking> samples, int i, int k) {
  if (i == k) throw DataError("predict_pair: items must differ");
  if (samples.empty()) throw DataError("predict_pair: no samples");
  std::int64_t hits = 0;
  for (const auto& r : samples) hits += r[i] < r[k];
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

// ---------------------------------------------------------------------------
// Cluster-count diagnostics

struct ClusterFitSamples {
  int clusters = 0;
  std::vector<double> distance;  // sum_j d_f(R_j, rho_{z_j}) per snapshot
  std::vector<double> misfit;    // sum_j sum_m g(B_jm, rho_{z_j}) per snapshot
};

struct ClusterDiagnostics {
  std::vector<ClusterFitSamples> per_g;
};

inline ClusterFitSamples cluster_fit(const SampleLog& log, const Dataset& data) {
  if (log.n_assessors != data.n_assessors() || log.n_items != data.n_items)
    throw DataError("cluster_fit: samples and dataset dimensions differ");
  ClusterFitSamples out;
  out.clusters = log.model.clusters;
  for (const auto& snap : log.snapshots) {
    const auto& s = snap.state;
    double d = 0.0, miss = 0.0;
    for (std::size_t j = 0; j < s.latent.size(); ++j) {
      const auto& rho = s.rhos[static_cast<std::size_t>(s.labels[j])];
      d += normalized_footrule(s.latent[j], rho);
      miss += mistake_count(data.preference_sets[j], rho);
    }
    out.distance.push_back(d);
    out.misfit.push_back(miss);
  }
  return out;
}

inline ClusterDiagnostics cluster_fit_curves(std::span<const SampleLog> runs, const Dataset& data) {
  ClusterDiagnostics out;
  for (const auto& log : runs) out.per_g.push_back(cluster_fit(log, data));
  return out;
}

/// Most frequent cluster label per assessor across snapshots (ties: lowest).
inline std::vector<int> modal_labels(const SampleLog& log) {
  const int G = log.model.clusters;
  std::vector<std::vector<int>> counts(static_cast<std::size_t>(log.n_assessors), std::vector<int>(static_cast<std::size_t>(G)));
  for (const auto& snap : log.snapshots)
    for (std::size_t j = 0; j < snap.state.labels.size(); ++j) ++counts[j][static_cast<std::size_t>(snap.state.labels[j])];
  std::vector<int> out;
  for (const auto& c : counts) out.push_back(static_cast<int>(std::max_element(c.begin(), c.end()) - c.begin()));
  return out;
}

/// Fraction of assessors whose estimated label equals the true one under the
/// best one-to-one matching of estimated to true clusters.
inline double assignment_accuracy(std::span<const int> estimated, std::span<const int> truth) {
  if (estimated.size() != truth.size() || truth.empty()) throw DataError("assignment_accuracy: label count mismatch");
  const int k = 1 + std::max(*std::max_element(estimated.begin(), estimated.end()), *std::max_element(truth.begin(), truth.end()));
  if (k > 9) throw ConfigError("assignment_accuracy: at most 9 clusters");
  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t best = 0;
  do {
    std::size_t hits = 0;
    for (std::size_t j = 0; j < truth.size(); ++j) hits += perm[static_cast<std::size_t>(estimated[j])] == truth[j];
    best = std::max(best, hits);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(truth.size());
}

/// Index i maximizing curve[i-1] - curve[i]; curve must have at least two points.
inline std::size_t largest_drop(std::span<const double> curve) {
  if (curve.size() < 2) throw DataError("largest_drop: need at least two points");
  std::size_t best = 1;
  for (std::size_t i = 2; i < curve.size(); ++i)
    if (curve[i - 1] - curve[i] > curve[best - 1] - curve[best]) best = i;
  return best;
}

// ---------------------------------------------------------------------------
// Convergence

struct IatResult {
  std::optional<double> iat;
  std::string diagnostic;
};

/// Integrated autocorrelation time by Geyer's initial positive sequence:
/// tau = -1 + 2 sum_m (rho_{2m} + rho_{2m+1}), stopped at the first
/// non-positive pair sum.
inline IatResult integrated_autocorrelation(std::span<const double> trace) {
  const std::size_t T = trace.size();
  if (T < 1000) throw DataError("integrated autocorrelation needs at least 1000 samples");
  const double mean = std::accumulate(trace.begin(), trace.end(), 0.0) / static_cast<double>(T);
  auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t t = 0; t + lag < T; ++t) s += (trace[t] - mean) * (trace[t + lag] - mean);
    return s / static_cast<double>(T);
  };
  const double c0 = autocov(0);
  if (!(c0 > 0.0)) return {std::nullopt, "trace is constant; autocorrelation undefined"};
  double tau = -1.0;
  for (std::size_t m = 0; 2 * m + 1 < T; ++m) {
    const double pair = (autocov(2 * m) + autocov(2 * m + 1)) / c0;
    if (!(pair > 0.0)) break;
    tau += 2.0 * pair;
  }
  return {tau, ""};
}

// ---------------------------------------------------------------------------
// Consensus summary

struct ScalarSummary {
  double mean = 0.0;
  double map = std::numeric_limits<double>::quiet_NaN();
  double lower = std::numeric_limits<double>::quiet_NaN();
  double upper = std::numeric_limits<double>::quiet_NaN();
};

inline ScalarSummary summarize_scalar(std::span<const double> x, double level = 0.95) {
  ScalarSummary s;
  if (x.empty()) return s;
  s.mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  if (x.size() >= 100) {
    const auto m = map_and_hpd(x, level);
    s.map = m.map;
    s.lower = m.lower;
    s.upper = m.upper;
  }
  return s;
}

struct ClusterSummary {
  Ordering cp;
  Ranking map_rho;
  double map_rho_probability = 0.0;
  ScalarSummary alpha;
  ScalarSummary eta;
};

struct ConsensusSummary {
  std::vector<ClusterSummary> clusters;
  std::optional<ScalarSummary> theta, beta0, beta1;
  AcceptanceStats acceptance;
  std::size_t n_snapshots = 0;
};

inline ConsensusSummary summarize(const SampleLog& log) {
  if (log.snapshots.empty()) throw DataError("summarize: no retained samples");
  ConsensusSummary out;
  out.acceptance = log.acceptance;
  out.n_snapshots = log.snapshots.size();
  for (int g = 0; g < log.model.clusters; ++g) {
    const auto rhos = rho_samples(log, g);
    std::vector<double> alpha, eta;
    for (const auto& s : log.snapshots) {
      alpha.push_back(s.state.alphas[static_cast<std::size_t>(g)]);
      eta.push_back(s.state.weights[static_cast<std::size_t>(g)]);
    }
    auto [mode, prob] = map_ranking(rhos);
    out.clusters.push_back({cp_consensus(rhos), mode, prob, summarize_scalar(alpha), summarize_scalar(eta)});
  }
  if (std::holds_alternative<BernoulliParams>(log.snapshots.front().state.mistake)) {
    std::vector<double> th;
    for (const auto& s : log.snapshots) th.push_back(std::get<BernoulliParams>(s.state.mistake).theta);
    out.theta = summarize_scalar(th);
  } else {
    std::vector<double> b0, b1;
    for (const auto& s : log.snapshots) {
      b0.push_back(std::get<LogisticParams>(s.state.mistake).beta0);
      b1.push_back(std::get<LogisticParams>(s.state.mistake).beta1);
    }
    out.beta0 = summarize_scalar(b0);
    out.beta1 = summarize_scalar(b1);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scoring against a known truth

/// Percentage of assessors whose most probable top-3 set lies inside their
/// true top 5.
inline double top3_in_top5_percentage(const SampleLog& log, std::span<const Ranking> latent_true) {
  if (static_cast<int>(latent_true.size()) != log.n_assessors) throw DataError("score: assessor count mismatch");
  if (log.n_items < 5) throw DataError("score: top-3-in-top-5 needs at least 5 items");
  int hits = 0;
  for (int j = 0; j < log.n_assessors; ++j) {
    const auto samples = latent_samples(log, j);
    const auto best = best_topk_set(samples, 3, 3);
    const auto& truth = latent_true[static_cast<std::size_t>(j)];
    hits += std::all_of(best.items.begin(), best.items.end(), [&](int i) { return truth[i] <= 5; });
  }
  return 100.0 * hits / log.n_assessors;
}

struct AssessorPrediction {
  int assessor = 0;         // 0-based position in the dataset
  int n_assessed = 0;       // M_j
  std::int64_t distance_to_consensus = 0;  // footrule d(rho_true, R_j_true)
  int n_heldout = 0;
  double mean_probability = 0.0;  // mean P(correct order) over unassessed pairs
};

/// Posterior probability of ordering each unassessed pair as the true latent
/// ranking does, averaged per assessor.
inline std::vector<AssessorPrediction> heldout_prediction(const SampleLog& log, const Dataset& data,
                                                          std::span<const Ranking> latent_true,
                                                          std::span<const Ranking> consensus_true) {
  const int n = data.n_items;
  if (static_cast<int>(latent_true.size()) != data.n_assessors() ||
      static_cast<int>(consensus_true.size()) != data.n_assessors() || log.n_assessors != data.n_assessors())
    throw DataError("heldout_prediction: assessor count mismatch");
  std::vector<AssessorPrediction> out;
  for (int j = 0; j < data.n_assessors(); ++j) {
    const auto& b = data.preference_sets[static_cast<std::size_t>(j)];
    std::vector<char> assessed(static_cast<std::size_t>(n * n), 0);
    for (const auto& p : b.pairs) {
      assessed[static_cast<std::size_t>(p.preferred * n + p.other)] = 1;
      assessed[static_cast<std::size_t>(p.other * n + p.preferred)] = 1;
    }
    const auto samples = latent_samples(log, j);
    const auto& truth = latent_true[static_cast<std::size_t>(j)];
    AssessorPrediction ap;
    ap.assessor = j;
    ap.n_assessed = static_cast<int>(b.pairs.size());
    ap.distance_to_consensus = distance(Metric::footrule, consensus_true[static_cast<std::size_t>(j)], truth);
    double total = 0.0;
    for (int a = 0; a < n; ++a)
      for (int c = a + 1; c < n; ++c) {
        if (assessed[static_cast<std::size_t>(a * n + c)]) continue;
        const int better = truth[a] < truth[c] ? a : c;
        const int worse = better == a ? c : a;
        total += predict_pair(samples, better, worse);
        ++ap.n_heldout;
      }
    ap.mean_probability = ap.n_heldout ? total / ap.n_heldout : std::numeric_limits<double>::quiet_NaN();
    out.push_back(ap);
  }
  return out;
}

}  // namespace mallows
