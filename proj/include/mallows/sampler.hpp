#pragma once

// Metropolis-within-Gibbs sampler for the Mallows model with Bernoulli or
// logistic mistakes, and the Bernoulli mixture over G clusters.
//
// One iteration:
//   step 1  for each cluster g: Metropolis on rho_g (Swap), Metropolis on
//           alpha_g (log-normal); then theta (truncated-Beta Gibbs) or
//           beta0/beta1 (log-normal Metropolis); mixtures then redraw all
//           labels z_j and the weights eta.
//   step 2  Metropolis on every latent ranking R_j (Swap).
//
// Random streams: the chain stream drives step 1 and initialization of the
// chain-level parameters; assessor j owns its own stream for initializing and
// updating R_j, so step 2 is order-independent.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "mallows/error.hpp"
#include "mallows/mistakes.hpp"
#include "mallows/partition.hpp"
#include "mallows/permset.hpp"
#include "mallows/rng.hpp"

namespace mallows {

struct Priors {
  double gamma_shape = 1.0;  // alpha_g ~ Gamma(shape, rate)
  double gamma_rate = 0.1;
  double kappa1 = 1.0;  // theta ~ Beta(kappa1, kappa2) on [0, 0.5)
  double kappa2 = 1.0;
  double lambda01 = 1.0;  // beta0 ~ Gamma(lambda01, lambda02)
  double lambda02 = 1.0;
  double lambda11 = 1.0;  // beta1 ~ Gamma(lambda11, lambda12)
  double lambda12 = 1.0;
  double chi = 20.0;  // eta ~ Dirichlet(chi, ..., chi)

  void validate() const {
    for (double v : {gamma_shape, gamma_rate, kappa1, kappa2, lambda01, lambda02, lambda11, lambda12, chi})
      if (!(v > 0.0)) throw ConfigError("all prior hyperparameters must be strictly positive");
  }
};

struct Tuning {
  int l_star = 3;    // max rank distance of swapped items in rho proposals
  int l_star_r = 1;  // same, for latent ranking proposals
  double sigma_alpha = 0.15;
  double sigma_beta = 0.5;
  std::int64_t n_iterations = 120000;
  std::int64_t burn_in = 20000;
  std::int64_t thinning = 10;
  std::uint64_t seed = 1;
  // Freezing a block keeps it at its initial value (used by kernel oracles).
  bool sample_alpha = true;
  bool sample_mistake = true;
#ifdef NDEBUG
  bool check_invariants = false;
#else
  bool check_invariants = true;
#endif
};

enum class ModelKind { bernoulli, logistic, mixture_bernoulli };

constexpr std::string_view to_string(ModelKind k) noexcept {
  switch (k) {
    case ModelKind::bernoulli: return "bm";
    case ModelKind::logistic: return "lm";
    case ModelKind::mixture_bernoulli: return "mixture";
  }
  return "?";
}

inline ModelKind parse_model(std::string_view s) {
  if (s == "bm") return ModelKind::bernoulli;
  if (s == "lm") return ModelKind::logistic;
  if (s == "mixture") return ModelKind::mixture_bernoulli;
  throw ConfigError("unknown model '" + std::string(s) + "' (expected bm, lm or mixture)");
}

struct Model {
  ModelKind kind = ModelKind::bernoulli;
  int clusters = 1;
};

/// Optional starting values; anything unset uses the default initialization.
struct Init {
  std::optional<double> alpha;
  std::optional<double> theta;
  std::optional<LogisticParams> betas;
  std::optional<std::vector<Ranking>> rhos;
  std::optional<std::vector<Ranking>> latent;
};

struct ChainConfig {
  Model model;
  Metric metric = Metric::footrule;
  Priors priors;
  Tuning tuning;
  Init init;
};

using MistakeParams = std::variant<BernoulliParams, LogisticParams>;

struct ChainState {
  std::vector<double> alphas;
  std::vector<Ranking> rhos;
  MistakeParams mistake = BernoulliParams{};
  std::vector<Ranking> latent;
  std::vector<int> labels;  // 0-based cluster index per assessor
  std::vector<double> weights;

  int clusters() const noexcept { return static_cast<int>(alphas.size()); }

  /// Throws NumericError if any structural invariant is broken.
  void check_invariants(int n_items) const {
    const auto G = alphas.size();
    if (rhos.size() != G || weights.size() != G) throw NumericError("state: cluster arrays disagree");
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw NumericError("state: negative cluster weight");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw NumericError("state: weights leave the simplex");
    for (double a : alphas)
      if (!(a > 0.0) || !std::isfinite(a)) throw NumericError("state: alpha not positive and finite");
    for (const auto& r : rhos)
      if (r.size() != n_items || !Ranking::is_permutation_of_1_to_n(r.ranks())) throw NumericError("state: invalid rho");
    for (const auto& r : latent)
      if (r.size() != n_items || !Ranking::is_permutation_of_1_to_n(r.ranks())) throw NumericError("state: invalid latent ranking");
    if (labels.size() != latent.size()) throw NumericError("state: label count");
    for (int z : labels)
      if (z < 0 || z >= static_cast<int>(G)) throw NumericError("state: label out of range");
    if (const auto* b = std::get_if<BernoulliParams>(&mistake)) {
      if (!(b->theta >= 0.0 && b->theta < 0.5)) throw NumericError("state: theta outside [0, 0.5)");
    } else {
      const auto& l = std::get<LogisticParams>(mistake);
      if (!(l.beta0 > 0.0 && l.beta1 > 0.0)) throw NumericError("state: betas not positive");
    }
  }
};

struct Snapshot {
  std::int64_t iteration = 0;
  int chain = 0;
  ChainState state;
  double log_likelihood = 0.0;  // complete-data: Mallows terms + mistake model
};

struct KernelCounter {
  std::int64_t proposed = 0;
  std::int64_t accepted = 0;
  double rate() const noexcept { return proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0; }
};

struct AcceptanceStats {
  KernelCounter rho, alpha, beta0, beta1, latent;
  std::int64_t latent_g_unchanged = 0;  // latent proposals leaving every g_m unchanged
  std::int64_t alpha_off_grid = 0;      // alpha proposals outside the log Z table
};

struct SampleLog {
  Model model;
  Metric metric = Metric::footrule;
  int n_items = 0;
  int n_assessors = 0;
  Priors priors;
  Tuning tuning;
  std::vector<Snapshot> snapshots;
  AcceptanceStats acceptance;
  std::int64_t g_evaluations = 0;  // individual g(B_jm, r) evaluations
};

struct SwapMove {
  Ordering proposed;
  int l = 1;  // rank distance of the swapped positions
  int u = 1;  // first swapped position, 1-based
};

/// Swaps positions u and u+l (1-based) of an ordering.
inline Ordering apply_swap(Ordering x, int l, int u) {
  if (l < 1 || u < 1 || u + l > x.size()) throw ConfigError("apply_swap: positions out of range");
  x.swap_positions(u - 1, u + l - 1);
  return x;
}

/// Draws l ~ U{1..L*}, u ~ U{1..n-l} and applies the swap.
inline SwapMove swap_propose(const Ordering& x, int l_star, Rng& rng) {
  const int n = x.size();
  if (l_star < 1 || l_star > n - 1) throw ConfigError("swap proposal: L* must lie in [1, n-1]");
  const int l = static_cast<int>(rng.uniform_int(1, l_star));
  const int u = static_cast<int>(rng.uniform_int(1, n - l));
  return {apply_swap(x, l, u), l, u};
}

/// Beta(a, b) restricted to [0, upper), by inverting the CDF on that interval.
inline double truncated_beta(double a, double b, double upper, Rng& rng) {
  const double mass = boost::math::ibeta(a, b, upper);
  const double u = rng.uniform() * mass;
  if (u <= 0.0) return 0.0;
  double x = boost::math::ibeta_inv(a, b, u);
  if (x >= upper) x = std::nextafter(upper, 0.0);
  return x;
}

/// Validates a configuration against a dataset and table before any sampling.
inline void validate_config(const Dataset& data, const ChainConfig& cfg, const LogZTable& table) {
  data.validate();
  cfg.priors.validate();
  const int n = data.n_items;
  const auto& t = cfg.tuning;
  const auto& m = cfg.model;
  if (m.clusters < 1) throw ConfigError("number of clusters must be at least 1");
  if (m.kind != ModelKind::mixture_bernoulli && m.clusters != 1)
    throw ConfigError("only the mixture model supports more than one cluster");
  if (m.kind == ModelKind::logistic) require_logistic_dimension(n);
  if (t.l_star < 1 || t.l_star > n - 1) throw ConfigError("--l-star must lie in [1, n-1]");
  if (t.l_star_r < 1 || t.l_star_r > n - 1) throw ConfigError("--l-star-r must lie in [1, n-1]");
  if (!(t.sigma_alpha > 0.0) || !(t.sigma_beta > 0.0)) throw ConfigError("proposal scales must be positive");
  if (t.n_iterations < 1 || t.burn_in < 0 || t.burn_in >= t.n_iterations)
    throw ConfigError("need 0 <= burn-in < iterations");
  if (t.thinning < 1) throw ConfigError("thinning must be at least 1");
  if (table.n() != n || table.metric() != cfg.metric)
    throw ConfigError("log Z table does not match the metric and item count");
  if (m.clusters > 1 && n == 2 && m.clusters > 2)
    throw ConfigError("cannot draw distinct consensus rankings for this many clusters with n=2");
  if (cfg.init.alpha && !(*cfg.init.alpha > 0.0)) throw ConfigError("initial alpha must be positive");
  if (cfg.init.theta) BernoulliParams{*cfg.init.theta}.validate();
  if (cfg.init.betas) cfg.init.betas->validate();
  if (cfg.init.rhos && static_cast<int>(cfg.init.rhos->size()) != m.clusters)
    throw ConfigError("initial rho count must equal the number of clusters");
  if (cfg.init.latent && static_cast<int>(cfg.init.latent->size()) != data.n_assessors())
    throw ConfigError("initial latent ranking count must equal the number of assessors");
}

/// Topological order of the acyclic part of B_j: edges are kept in input
/// order unless they close a cycle; ties among free items are broken at random.
inline Ranking topological_init(const PreferenceSet& b, int n, Rng& rng) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  auto reaches = [&adj, n](int from, int to) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> todo{from};
    seen[static_cast<std::size_t>(from)] = 1;
    while (!todo.empty()) {
      const int v = todo.back();
      todo.pop_back();
      if (v == to) return true;
      for (int w : adj[static_cast<std::size_t>(v)])
        if (!seen[static_cast<std::size_t>(w)]) {
          seen[static_cast<std::size_t>(w)] = 1;
          todo.push_back(w);
        }
    }
    return false;
  };
  std::vector<int> indegree(static_cast<std::size_t>(n), 0);
  for (const auto& p : b.pairs) {
    if (reaches(p.other, p.preferred)) continue;  // would close a cycle
    adj[static_cast<std::size_t>(p.preferred)].push_back(p.other);
    ++indegree[static_cast<std::size_t>(p.other)];
  }
  std::vector<int> ready;
  for (int i = 0; i < n; ++i)
    if (indegree[static_cast<std::size_t>(i)] == 0) ready.push_back(i);
  std::vector<int> ranks(static_cast<std::size_t>(n));
  for (int next_rank = 1; next_rank <= n; ++next_rank) {
    const auto pick = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(ready.size()) - 1));
    const int v = ready[pick];
    ready.erase(ready.begin() + static_cast<std::ptrdiff_t>(pick));
    ranks[static_cast<std::size_t>(v)] = next_rank;
    for (int w : adj[static_cast<std::size_t>(v)])
      if (--indegree[static_cast<std::size_t>(w)] == 0) ready.push_back(w);
  }
  return Ranking(std::move(ranks));
}

/// A single chain. Kernels are public so they can be exercised one at a time.
class Sampler {
 public:
  Sampler(const Dataset& data, ChainConfig cfg, const LogZTable& table)
      : data_(data), cfg_(std::move(cfg)), table_(table), rng_(derive_seed(cfg_.tuning.seed, 0)) {
    validate_config(data_, cfg_, table_);
    n_ = data_.n_items;
    initialize();
  }
  // The sampler keeps references to the data and the table.
  Sampler(Dataset&&, ChainConfig, const LogZTable&) = delete;
  Sampler(const Dataset&, ChainConfig, LogZTable&&) = delete;

  const ChainState& state() const noexcept { return state_; }
  ChainState& mutable_state() noexcept { return state_; }
  const AcceptanceStats& acceptance() const noexcept { return acc_; }
  std::int64_t g_evaluations() const noexcept { return g_evals_; }
  const ChainConfig& config() const noexcept { return cfg_; }

  /// Recomputes every cache from the state; call after editing mutable_state().
  void refresh() {
    const auto N = static_cast<std::size_t>(data_.n_assessors());
    dist_.assign(N, 0);
    mistakes_.assign(N, 0);
    lm_ll_.assign(N, 0.0);
    logz_.assign(state_.alphas.size(), 0.0);
    for (std::size_t g = 0; g < state_.alphas.size(); ++g) logz_[g] = table_(state_.alphas[g]);
    for (std::size_t j = 0; j < N; ++j) refresh_assessor(j);
  }

  /// Metropolis update of rho_g; uses only assessors currently in cluster g.
  bool update_rho(int g) {
    auto& rho = state_.rhos[static_cast<std::size_t>(g)];
    const SwapMove move = swap_propose(invert(rho), cfg_.tuning.l_star, rng_);
    const Ranking proposal = invert(move.proposed);
    const double alpha = state_.alphas[static_cast<std::size_t>(g)];
    std::int64_t delta = 0;
    proposal_dist_.assign(dist_.size(), 0);
    for (std::size_t j = 0; j < dist_.size(); ++j) {
      if (state_.labels[j] != g) continue;
      proposal_dist_[j] = distance(cfg_.metric, state_.latent[j], proposal);
      delta += proposal_dist_[j] - dist_[j];
    }
    const double log_ratio = -(alpha / n_) * static_cast<double>(delta);
    ++acc_.rho.proposed;
    if (!accept(log_ratio)) return false;
    ++acc_.rho.accepted;
    rho = proposal;
    for (std::size_t j = 0; j < dist_.size(); ++j)
      if (state_.labels[j] == g) dist_[j] = proposal_dist_[j];
    return true;
  }

  /// Log acceptance ratio of alpha_g -> proposal (log-normal correction included).
  double alpha_log_ratio(int g, double proposal) const {
    const double current = state_.alphas[static_cast<std::size_t>(g)];
    double dsum = 0.0;
    int members = 0;
    for (std::size_t j = 0; j < dist_.size(); ++j)
      if (state_.labels[j] == g) {
        dsum += static_cast<double>(dist_[j]);
        ++members;
      }
    const auto& pr = cfg_.priors;
    return pr.gamma_shape * std::log(proposal / current) -
           (pr.gamma_rate + dsum / n_) * (proposal - current) -
           members * (table_(proposal) - logz_[static_cast<std::size_t>(g)]);
  }

  bool update_alpha(int g) {
    const double current = state_.alphas[static_cast<std::size_t>(g)];
    const double proposal = current * std::exp(cfg_.tuning.sigma_alpha * rng_.normal());
    ++acc_.alpha.proposed;
    if (!table_.covers(proposal)) {
      ++acc_.alpha_off_grid;
      return false;
    }
    if (!accept(alpha_log_ratio(g, proposal))) return false;
    ++acc_.alpha.accepted;
    state_.alphas[static_cast<std::size_t>(g)] = proposal;
    logz_[static_cast<std::size_t>(g)] = table_(proposal);
    return true;
  }

  /// Posterior Beta parameters (kappa1', kappa2') for theta given the current R.
  std::pair<double, double> theta_posterior_params() const {
    std::int64_t g_sum = 0;
    for (int m : mistakes_) g_sum += m;
    const double k1 = cfg_.priors.kappa1 + static_cast<double>(g_sum);
    const double k2 = cfg_.priors.kappa2 + static_cast<double>(data_.total_pairs() - g_sum);
    return {k1, k2};
  }

  double update_theta() {
    auto& p = std::get<BernoulliParams>(state_.mistake);
    auto [k1, k2] = theta_posterior_params();
    p.theta = truncated_beta(k1, k2, 0.5, rng_);
    return p.theta;
  }

  /// Separate log-normal Metropolis steps for beta0 then beta1.
  std::pair<bool, bool> update_betas() {
    auto& p = std::get<LogisticParams>(state_.mistake);
    const auto& pr = cfg_.priors;
    auto step = [&](double LogisticParams::*field, double shape, double rate, KernelCounter& counter) {
      LogisticParams prop = p;
      const double current = p.*field;
      const double proposed = current * std::exp(cfg_.tuning.sigma_beta * rng_.normal());
      prop.*field = proposed;
      double ll_prop = 0.0, ll_cur = 0.0;
      proposal_ll_.resize(lm_ll_.size());
      for (std::size_t j = 0; j < lm_ll_.size(); ++j) {
        proposal_ll_[j] = lm_log_likelihood(data_.preference_sets[j], state_.latent[j], prop);
        g_evals_ += static_cast<std::int64_t>(data_.preference_sets[j].pairs.size());
        ll_prop += proposal_ll_[j];
        ll_cur += lm_ll_[j];
      }
      // Gamma prior in log space, plus the Jacobian log(proposed/current).
      const double log_ratio = (shape - 1.0) * std::log(proposed / current) - rate * (proposed - current) +
                               (ll_prop - ll_cur) + std::log(proposed / current);
      ++counter.proposed;
      if (!accept(log_ratio)) return false;
      ++counter.accepted;
      p = prop;
      lm_ll_.swap(proposal_ll_);
      return true;
    };
    const bool a0 = step(&LogisticParams::beta0, pr.lambda01, pr.lambda02, acc_.beta0);
    const bool a1 = step(&LogisticParams::beta1, pr.lambda11, pr.lambda12, acc_.beta1);
    return {a0, a1};
  }

  /// Metropolis update of R_j using the parameters of its cluster.
  bool update_latent_rank(int j) {
    const auto idx = static_cast<std::size_t>(j);
    Rng& rng = latent_rng_[idx];
    const auto& b = data_.preference_sets[idx];
    Ranking& current = state_.latent[idx];
    const int g = state_.labels[idx];
    const Ranking& rho = state_.rhos[static_cast<std::size_t>(g)];
    const double alpha = state_.alphas[static_cast<std::size_t>(g)];

    const SwapMove move = swap_propose(invert(current), cfg_.tuning.l_star_r, rng);
    const Ranking proposal = invert(move.proposed);
    const std::int64_t d_prop = distance(cfg_.metric, proposal, rho);
    double log_ratio = -(alpha / n_) * static_cast<double>(d_prop - dist_[idx]);  // ln a1

    bool g_unchanged = true;
    int m_prop = 0;
    for (const auto& pair : b.pairs) {
      const int gp = g_indicator(pair, proposal);
      m_prop += gp;
      if (gp != g_indicator(pair, current)) g_unchanged = false;
    }
    g_evals_ += 2 * static_cast<std::int64_t>(b.pairs.size());
    double ll_prop = 0.0;
    if (const auto* bm = std::get_if<BernoulliParams>(&state_.mistake)) {
      const int dg = m_prop - mistakes_[idx];
      if (dg != 0) log_ratio += dg * std::log(bm->theta / (1.0 - bm->theta));  // ln a2
    } else {
      ll_prop = lm_log_likelihood(b, proposal, std::get<LogisticParams>(state_.mistake));
      log_ratio += ll_prop - lm_ll_[idx];
    }
    ++acc_.latent.proposed;
    if (g_unchanged) ++acc_.latent_g_unchanged;
    if (!accept(log_ratio)) return false;
    ++acc_.latent.accepted;
    current = proposal;
    dist_[idx] = d_prop;
    mistakes_[idx] = m_prop;
    lm_ll_[idx] = ll_prop;
    return true;
  }

  /// Log of the unnormalized assignment mass of assessor j to cluster g.
  double label_log_mass(int j, int g) const {
    const auto gi = static_cast<std::size_t>(g);
    const double w = state_.weights[gi];
    if (!(w > 0.0)) return -std::numeric_limits<double>::infinity();
    const double d = static_cast<double>(distance(cfg_.metric, state_.latent[static_cast<std::size_t>(j)], state_.rhos[gi]));
    return std::log(w) - (state_.alphas[gi] / n_) * d - logz_[gi];
  }

  const std::vector<int>& update_labels() {
    const int G = state_.clusters();
    std::vector<double> logw(static_cast<std::size_t>(G));
    for (int j = 0; j < data_.n_assessors(); ++j) {
      for (int g = 0; g < G; ++g) logw[static_cast<std::size_t>(g)] = label_log_mass(j, g);
      const int z = static_cast<int>(rng_.categorical_log(logw));
      state_.labels[static_cast<std::size_t>(j)] = z;
      dist_[static_cast<std::size_t>(j)] =
          distance(cfg_.metric, state_.latent[static_cast<std::size_t>(j)], state_.rhos[static_cast<std::size_t>(z)]);
    }
    return state_.labels;
  }

  const std::vector<double>& update_weights() {
    const int G = state_.clusters();
    std::vector<double> conc(static_cast<std::size_t>(G), cfg_.priors.chi);
    for (int z : state_.labels) conc[static_cast<std::size_t>(z)] += 1.0;
    state_.weights = dirichlet(rng_, conc);
    return state_.weights;
  }

  void iterate() {
    const int G = state_.clusters();
    for (int g = 0; g < G; ++g) {
      update_rho(g);
      if (cfg_.tuning.sample_alpha) update_alpha(g);
    }
    if (cfg_.tuning.sample_mistake) {
      if (std::holds_alternative<BernoulliParams>(state_.mistake)) {
        update_theta();
      } else {
        update_betas();
      }
    }
    if (G > 1) {
      update_labels();
      update_weights();
    }
    for (int j = 0; j < data_.n_assessors(); ++j) update_latent_rank(j);
    if (cfg_.tuning.check_invariants) state_.check_invariants(n_);
  }

  /// Complete-data log likelihood of the current state.
  double log_likelihood() const {
    double ll = 0.0;
    for (std::size_t j = 0; j < dist_.size(); ++j) {
      const auto g = static_cast<std::size_t>(state_.labels[j]);
      ll += -(state_.alphas[g] / n_) * static_cast<double>(dist_[j]) - logz_[g];
      if (const auto* bm = std::get_if<BernoulliParams>(&state_.mistake)) {
        ll += bm_log_likelihood(mistakes_[j], static_cast<int>(data_.preference_sets[j].pairs.size()), *bm);
      } else {
        ll += lm_ll_[j];
      }
    }
    return ll;
  }

  SampleLog run() {
    SampleLog log;
    log.model = cfg_.model;
    log.metric = cfg_.metric;
    log.n_items = n_;
    log.n_assessors = data_.n_assessors();
    log.priors = cfg_.priors;
    log.tuning = cfg_.tuning;
    const auto& t = cfg_.tuning;
    log.snapshots.reserve(static_cast<std::size_t>((t.n_iterations - t.burn_in) / t.thinning));
    for (std::int64_t it = 1; it <= t.n_iterations; ++it) {
      iterate();
      if (it > t.burn_in && (it - t.burn_in) % t.thinning == 0)
        log.snapshots.push_back({it, 0, state_, log_likelihood()});
    }
    log.acceptance = acc_;
    log.g_evaluations = g_evals_;
    return log;
  }

 private:
  void initialize() {
    const int G = cfg_.model.clusters;
    const int N = data_.n_assessors();
    const auto& init = cfg_.init;
    state_.alphas.assign(static_cast<std::size_t>(G), init.alpha.value_or(1.0));
    if (init.rhos) {
      state_.rhos = *init.rhos;
    } else {
      while (static_cast<int>(state_.rhos.size()) < G) {
        Ranking r = Ranking::random(n_, rng_);
        if (std::find(state_.rhos.begin(), state_.rhos.end(), r) == state_.rhos.end())
          state_.rhos.push_back(std::move(r));
      }
    }
    if (cfg_.model.kind == ModelKind::logistic) {
      state_.mistake = init.betas.value_or(LogisticParams{1.0, 1.0});
    } else {
      state_.mistake = BernoulliParams{init.theta.value_or(0.1)};
    }
    state_.weights.assign(static_cast<std::size_t>(G), 1.0 / G);
    state_.labels.assign(static_cast<std::size_t>(N), 0);
    if (G > 1)
      for (int& z : state_.labels) z = static_cast<int>(rng_.uniform_int(0, G - 1));
    latent_rng_.clear();
    state_.latent.clear();
    for (int j = 0; j < N; ++j) {
      latent_rng_.emplace_back(derive_seed(cfg_.tuning.seed, static_cast<std::uint64_t>(j) + 1));
      if (init.latent) {
        state_.latent.push_back((*init.latent)[static_cast<std::size_t>(j)]);
      } else {
        state_.latent.push_back(topological_init(data_.preference_sets[static_cast<std::size_t>(j)], n_, latent_rng_.back()));
      }
    }
    refresh();
    state_.check_invariants(n_);
  }

  void refresh_assessor(std::size_t j) {
    const auto& r = state_.latent[j];
    const auto& b = data_.preference_sets[j];
    dist_[j] = distance(cfg_.metric, r, state_.rhos[static_cast<std::size_t>(state_.labels[j])]);
    mistakes_[j] = mistake_count(b, r);
    if (const auto* lm = std::get_if<LogisticParams>(&state_.mistake)) lm_ll_[j] = lm_log_likelihood(b, r, *lm);
  }

  bool accept(double log_ratio) {
    const double u = rng_.uniform_open();
    return std::log(u) < log_ratio;
  }

  const Dataset& data_;
  ChainConfig cfg_;
  const LogZTable& table_;
  int n_ = 0;
  Rng rng_;
  std::vector<Rng> latent_rng_;
  ChainState state_;
  AcceptanceStats acc_;
  std::int64_t g_evals_ = 0;
  // Caches: d(R_j, rho_{z_j}), sum_m g(B_jm, R_j), LM log-likelihood of B_j, log Z(alpha_g).
  std::vector<std::int64_t> dist_;
  std::vector<int> mistakes_;
  std::vector<double> lm_ll_;
  std::vector<double> logz_;
  std::vector<std::int64_t> proposal_dist_;
  std::vector<double> proposal_ll_;
};

/// One chain from start to finish.
inline SampleLog run_chain(const Dataset& data, const ChainConfig& cfg, const LogZTable& table) {
  return Sampler(data, cfg, table).run();
}

/// Seed of chain `c` in a multi-chain run; chain 0 keeps the configured seed.
inline std::uint64_t chain_seed(std::uint64_t seed, int c) {
  return c == 0 ? seed : derive_seed(seed, 0x10000u + static_cast<std::uint64_t>(c));
}

/// Independent chains on separate threads; results are ordered by chain index.
inline std::vector<SampleLog> run_chains(const Dataset& data, const ChainConfig& cfg, const LogZTable& table,
                                         int n_chains) {
  if (n_chains < 1) throw ConfigError("number of chains must be at least 1");
  validate_config(data, cfg, table);
  std::vector<SampleLog> logs(static_cast<std::size_t>(n_chains));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_chains));
  {
    std::vector<std::jthread> workers;
    for (int c = 0; c < n_chains; ++c) {
      workers.emplace_back([&, c] {
        try {
          ChainConfig local = cfg;
          local.tuning.seed = chain_seed(cfg.tuning.seed, c);
          logs[static_cast<std::size_t>(c)] = run_chain(data, local, table);
        } catch (...) {
          errors[static_cast<std::size_t>(c)] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return logs;
}

/// Concatenates chains into one log; snapshots keep their chain index and the
/// acceptance counters are summed.
inline SampleLog merge_chains(std::span<const SampleLog> logs) {
  if (logs.empty()) throw ConfigError("merge_chains: no chains");
  SampleLog out = logs.front();
  out.snapshots.clear();
  out.acceptance = {};
  out.g_evaluations = 0;
  auto add = [](KernelCounter& a, const KernelCounter& b) {
    a.proposed += b.proposed;
    a.accepted += b.accepted;
  };
  for (std::size_t c = 0; c < logs.size(); ++c) {
    const auto& log = logs[c];
    if (log.n_items != out.n_items || log.n_assessors != out.n_assessors || log.model.clusters != out.model.clusters)
      throw DataError("merge_chains: chains disagree in dimensions");
    for (auto snap : log.snapshots) {
      snap.chain = static_cast<int>(c);
      out.snapshots.push_back(std::move(snap));
    }
    auto& a = out.acceptance;
    const auto& b = log.acceptance;
    add(a.rho, b.rho);
    add(a.alpha, b.alpha);
    add(a.beta0, b.beta0);
    add(a.beta1, b.beta1);
    add(a.latent, b.latent);
    a.latent_g_unchanged += b.latent_g_unchanged;
    a.alpha_off_grid += b.alpha_off_grid;
    out.g_evaluations += log.g_evaluations;
  }
  return out;
}

}  // namespace mallows
