#pragma once

// Error models linking a latent ranking to the reported pair orders.
//
//   Bernoulli: each reported pair is reversed independently with prob theta.
//   Logistic:  logit P(reversed) = -beta0 - beta1 (gap - 1)/(n - 2), where gap
//              is the rank distance of the two items in the latent ranking.

#include <cmath>
#include <cstdlib>
#include <limits>

#include "mallows/error.hpp"
#include "mallows/permset.hpp"

namespace mallows {

struct BernoulliParams {
  double theta = 0.1;

  void validate() const {
    if (!(theta >= 0.0 && theta < 0.5)) throw ConfigError("theta must lie in [0, 0.5)");
  }
};

struct LogisticParams {
  double beta0 = 1.0;
  double beta1 = 1.0;

  void validate() const {
    if (!(beta0 > 0.0 && beta1 > 0.0)) throw ConfigError("beta0 and beta1 must be positive");
  }
};

/// 1 iff the reported order contradicts r.
inline int g_indicator(const PreferencePair& pair, const Ranking& r) noexcept {
  return r[pair.preferred] > r[pair.other] ? 1 : 0;
}

/// sum_m g(B_jm, r)
inline int mistake_count(const PreferenceSet& b, const Ranking& r) noexcept {
  int s = 0;
  for (const auto& p : b.pairs) s += g_indicator(p, r);
  return s;
}

/// (sum g) log(theta/(1-theta)) + M log(1-theta); theta = 0 admits no mistakes.
inline double bm_log_likelihood(int mistakes, int n_pairs, const BernoulliParams& p) {
  p.validate();
  if (p.theta == 0.0) return mistakes == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  return mistakes * std::log(p.theta / (1.0 - p.theta)) + n_pairs * std::log1p(-p.theta);
}

inline double bm_log_likelihood(const PreferenceSet& b, const Ranking& r, const BernoulliParams& p) {
  return bm_log_likelihood(mistake_count(b, r), static_cast<int>(b.pairs.size()), p);
}

namespace detail {
// log(1 + e^x) without overflow.
inline double log1p_exp(double x) noexcept { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
}  // namespace detail

inline void require_logistic_dimension(int n) {
  if (n < 3)
    throw ConfigError("logistic mistake model needs n >= 3 (gap is normalized by n-2); use the Bernoulli model");
}

/// P(mistake) for two items `rank_gap` ranks apart.
inline double lm_mistake_prob(int rank_gap, int n, const LogisticParams& p) {
  require_logistic_dimension(n);
  if (rank_gap < 1 || rank_gap > n - 1) throw DataError("lm_mistake_prob: rank gap out of range");
  const double eta = p.beta0 + p.beta1 * (rank_gap - 1) / (n - 2);
  return 1.0 / (1.0 + std::exp(eta));
}

/// sum_m [g log q + (1-g) log(1-q)], computed stably from the linear predictor.
inline double lm_log_likelihood(const PreferenceSet& b, const Ranking& r, const LogisticParams& p) {
  const int n = r.size();
  require_logistic_dimension(n);
  const double scale = 1.0 / (n - 2);
  double s = 0.0;
  for (const auto& pair : b.pairs) {
    const int gap = std::abs(r[pair.preferred] - r[pair.other]);
    const double eta = p.beta0 + p.beta1 * (gap - 1) * scale;
    // log q = -log(1+e^eta); log(1-q) = -log(1+e^-eta)
    s -= g_indicator(pair, r) ? detail::log1p_exp(eta) : detail::log1p_exp(-eta);
  }
  return s;
}

}  // namespace mallows
