#pragma once

// Synthetic pairwise-preference data: latent Mallows rankings, uniform pair
// assignment, and mistakes injected under the Bernoulli or logistic model.

#include <cmath>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "mallows/error.hpp"
#include "mallows/mistakes.hpp"
#include "mallows/permset.hpp"
#include "mallows/rng.hpp"
#include "mallows/sampler.hpp"

namespace mallows {

/// Draw from Mal(rho, alpha) by a Metropolis run of `steps` Swap moves
/// (L* = n-1) started at rho. steps = 0 selects the default 200 n.
/// Each step holds with probability 1/2: a swap is a transposition, so a
/// chain that never rejects (alpha = 0) would otherwise alternate parity.
inline Ranking sample_mallows(const Ranking& rho, double alpha, Metric metric, Rng& rng, std::int64_t steps = 0) {
  if (alpha < 0.0) throw ConfigError("sample_mallows: alpha must be non-negative");
  const int n = rho.size();
  if (steps <= 0) steps = 200 * static_cast<std::int64_t>(n);
  Ranking current = rho;
  std::int64_t d_current = 0;
  Ordering x = invert(current);
  for (std::int64_t s = 0; s < steps; ++s) {
    if (rng.uniform() < 0.5) continue;
    const SwapMove move = swap_propose(x, n - 1, rng);
    Ranking proposal = invert(move.proposed);
    const std::int64_t d_prop = distance(metric, proposal, rho);
    const double log_ratio = -(alpha / n) * static_cast<double>(d_prop - d_current);
    if (std::log(rng.uniform_open()) < log_ratio) {
      current = std::move(proposal);
      x = move.proposed;
      d_current = d_prop;
    }
  }
  return current;
}

struct SimConfig {
  int n_items = 10;
  int n_assessors = 40;
  double lambda_m = 25.0;     // mean pairs per assessor
  bool fixed_pairs = false;   // every M_j = round(lambda_m) instead of truncated Poisson
  double alpha = 3.0;
  MistakeParams mistake = BernoulliParams{0.1};
  int clusters = 1;
  std::vector<Ranking> rho_true;   // empty: drawn, mutually distant when clusters > 1
  std::vector<double> weights;     // empty: uniform
  std::vector<int> labels;         // empty: drawn from weights
  Metric metric = Metric::footrule;
  std::uint64_t seed = 1;
  std::int64_t mallows_steps = 0;  // 0: default burn-in of sample_mallows

  std::int64_t pair_budget() const noexcept {
    return static_cast<std::int64_t>(n_items) * (n_items - 1) / 2;
  }

  void validate() const {
    if (n_items < 2) throw ConfigError("simulate: need at least 2 items");
    if (n_assessors < 1) throw ConfigError("simulate: need at least 1 assessor");
    if (clusters < 1) throw ConfigError("simulate: need at least 1 cluster");
    if (!(lambda_m > 0.0) || lambda_m > static_cast<double>(pair_budget()))
      throw ConfigError("simulate: lambda_M must lie in (0, n(n-1)/2]");
    if (!(alpha >= 0.0)) throw ConfigError("simulate: alpha must be non-negative");
    if (const auto* b = std::get_if<BernoulliParams>(&mistake)) {
      b->validate();
    } else {
      std::get<LogisticParams>(mistake).validate();
      require_logistic_dimension(n_items);
    }
    if (!rho_true.empty() && static_cast<int>(rho_true.size()) != clusters)
      throw ConfigError("simulate: one true consensus per cluster required");
    for (const auto& r : rho_true)
      if (r.size() != n_items) throw ConfigError("simulate: true consensus has the wrong length");
    if (!weights.empty() && static_cast<int>(weights.size()) != clusters)
      throw ConfigError("simulate: one weight per cluster required");
    if (!labels.empty()) {
      if (static_cast<int>(labels.size()) != n_assessors) throw ConfigError("simulate: one label per assessor required");
      for (int z : labels)
        if (z < 0 || z >= clusters) throw ConfigError("simulate: label out of range");
    }
  }
};

struct TruthRecord {
  double alpha = 0.0;
  MistakeParams mistake = BernoulliParams{};
  std::vector<Ranking> rho_true;
  std::vector<int> labels;          // 0-based
  std::vector<Ranking> latent_true;
  std::vector<std::vector<char>> flipped;  // per assessor, per reported pair

  /// rho_true of the cluster assessor j belongs to.
  const Ranking& consensus_of(int j) const { return rho_true[static_cast<std::size_t>(labels[static_cast<std::size_t>(j)])]; }
};

struct SimResult {
  Dataset data;
  TruthRecord truth;
};

/// Chooses `count` consensus rankings greedily far apart in footrule distance:
/// each addition is the best of 64 uniform candidates by minimum distance.
inline std::vector<Ranking> distant_consensus(int n, int count, Rng& rng) {
  std::vector<Ranking> chosen{Ranking::random(n, rng)};
  while (static_cast<int>(chosen.size()) < count) {
    Ranking best;
    std::int64_t best_d = -1;
    for (int c = 0; c < 64; ++c) {
      Ranking cand = Ranking::random(n, rng);
      std::int64_t dmin = std::numeric_limits<std::int64_t>::max();
      for (const auto& r : chosen) dmin = std::min(dmin, distance(Metric::footrule, cand, r));
      if (dmin > best_d) {
        best_d = dmin;
        best = std::move(cand);
      }
    }
    chosen.push_back(std::move(best));
  }
  return chosen;
}

inline SimResult generate_dataset(const SimConfig& cfg) {
  cfg.validate();
  const int n = cfg.n_items;
  Rng rng(derive_seed(cfg.seed, 0));
  SimResult out;
  auto& truth = out.truth;
  truth.alpha = cfg.alpha;
  truth.mistake = cfg.mistake;
  truth.rho_true = cfg.rho_true.empty() ? distant_consensus(n, cfg.clusters, rng) : cfg.rho_true;
  if (!cfg.labels.empty()) {
    truth.labels = cfg.labels;
  } else if (cfg.clusters == 1) {
    truth.labels.assign(static_cast<std::size_t>(cfg.n_assessors), 0);
  } else {
    std::vector<double> logw(static_cast<std::size_t>(cfg.clusters));
    for (int g = 0; g < cfg.clusters; ++g)
      logw[static_cast<std::size_t>(g)] = cfg.weights.empty() ? 0.0 : std::log(cfg.weights[static_cast<std::size_t>(g)]);
    for (int j = 0; j < cfg.n_assessors; ++j) truth.labels.push_back(static_cast<int>(rng.categorical_log(logw)));
  }

  std::vector<PreferencePair> all_pairs;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) all_pairs.push_back({a, b});
  const std::int64_t budget = cfg.pair_budget();
  const std::int64_t min_pairs = std::min<std::int64_t>(5, budget);

  out.data.n_items = n;
  for (int j = 0; j < cfg.n_assessors; ++j) {
    Rng arng(derive_seed(cfg.seed, static_cast<std::uint64_t>(j) + 1));
    const Ranking latent = sample_mallows(truth.consensus_of(j), cfg.alpha, cfg.metric, arng, cfg.mallows_steps);

    std::int64_t m;
    if (cfg.fixed_pairs) {
      m = std::clamp<std::int64_t>(std::llround(cfg.lambda_m), 1, budget);
    } else {
      do m = arng.poisson(cfg.lambda_m); while (m < min_pairs || m > budget);
    }
    // Partial Fisher-Yates: the first m entries become the assigned pairs.
    std::vector<PreferencePair> pool = all_pairs;
    for (std::int64_t k = 0; k < m; ++k) {
      const auto pick = static_cast<std::size_t>(arng.uniform_int(k, static_cast<std::int64_t>(pool.size()) - 1));
      std::swap(pool[static_cast<std::size_t>(k)], pool[pick]);
    }

    PreferenceSet set{j + 1, {}};
    std::vector<char> flips;
    for (std::int64_t k = 0; k < m; ++k) {
      const auto [a, b] = pool[static_cast<std::size_t>(k)];
      const int better = latent[a] < latent[b] ? a : b;
      const int worse = better == a ? b : a;
      double p_flip;
      if (const auto* bm = std::get_if<BernoulliParams>(&cfg.mistake)) {
        p_flip = bm->theta;
      } else {
        p_flip = lm_mistake_prob(std::abs(latent[a] - latent[b]), n, std::get<LogisticParams>(cfg.mistake));
      }
      const bool flip = arng.uniform() < p_flip;
      set.pairs.push_back(flip ? PreferencePair{worse, better} : PreferencePair{better, worse});
      flips.push_back(flip ? 1 : 0);
    }
    out.data.preference_sets.push_back(std::move(set));
    truth.latent_true.push_back(latent);
    truth.flipped.push_back(std::move(flips));
  }
  return out;
}

}  // namespace mallows
