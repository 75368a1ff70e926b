#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "mallows/sampler.hpp"
#include "mallows/simulate.hpp"

using namespace mallows;
using Catch::Approx;

namespace {
Ranking R(std::vector<int> v) { return Ranking(std::move(v)); }
std::vector<int> V(std::span<const int> s) { return {s.begin(), s.end()}; }

Dataset small_dataset() {
  Dataset d;
  d.n_items = 5;
  d.preference_sets = {{1, {{1, 0}, {4, 3}, {4, 2}, {4, 1}, {4, 0}, {2, 1}, {0, 2}}},
                       {2, {{0, 1}, {1, 2}, {2, 3}}},
                       {3, {{3, 4}, {0, 4}, {2, 1}}}};
  return d;
}

ChainConfig quick_config(ModelKind kind = ModelKind::bernoulli, int G = 1) {
  ChainConfig c;
  c.model = {kind, G};
  c.tuning.n_iterations = 2000;
  c.tuning.burn_in = 500;
  c.tuning.thinning = 5;
  c.tuning.check_invariants = true;
  return c;
}

// Mean and batch-means standard error of a correlated sequence.
std::pair<double, double> batch_mean_se(const std::vector<double>& x, int batches = 50) {
  const std::size_t len = x.size() / static_cast<std::size_t>(batches);
  std::vector<double> means;
  for (int b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < len; ++i) s += x[static_cast<std::size_t>(b) * len + i];
    means.push_back(s / static_cast<double>(len));
  }
  const double m = std::accumulate(means.begin(), means.end(), 0.0) / batches;
  double v = 0.0;
  for (double y : means) v += (y - m) * (y - m);
  return {m, std::sqrt(v / (batches - 1) / batches)};
}
}  // namespace

TEST_CASE("swap proposal examples") {
  const Ordering x({4, 3, 2, 1, 0});  // (O5,O4,O3,O2,O1), ranking (5,4,3,2,1)
  CHECK(V(apply_swap(x, 1, 1).items()) == std::vector<int>{3, 4, 2, 1, 0});
  CHECK(V(apply_swap(x, 1, 3).items()) == std::vector<int>{4, 3, 1, 2, 0});
  CHECK(V(invert(apply_swap(x, 1, 3)).ranks()) == std::vector<int>{5, 3, 4, 2, 1});
  // The ranking (5,4,2,3,1) of the worked example is the swap at u = 2.
  CHECK(V(invert(apply_swap(x, 1, 2)).ranks()) == std::vector<int>{5, 4, 2, 3, 1});
  CHECK_THROWS_AS(apply_swap(x, 2, 4), ConfigError);

  Rng rng(1);
  const Ordering two({0, 1});
  for (int i = 0; i < 20; ++i) {
    const auto m = swap_propose(two, 1, rng);
    CHECK(V(m.proposed.items()) == std::vector<int>{1, 0});
  }
  CHECK_THROWS_AS(swap_propose(x, 5, rng), ConfigError);
}

TEST_CASE("swap proposal is symmetric: exhaustive at n=5, L*=2") {
  const int n = 5, L = 2;
  std::vector<int> items(n);
  std::iota(items.begin(), items.end(), 0);
  std::map<std::pair<std::vector<int>, std::vector<int>>, double> prob;
  do {
    const Ordering x(items);
    for (int l = 1; l <= L; ++l)
      for (int u = 1; u <= n - l; ++u)
        prob[{items, V(apply_swap(x, l, u).items())}] += 1.0 / L / (n - l);
  } while (std::next_permutation(items.begin(), items.end()));
  REQUIRE(prob.size() == 120 * 7);
  for (const auto& [key, p] : prob) {
    const auto it = prob.find({key.second, key.first});
    REQUIRE(it != prob.end());
    REQUIRE(it->second == Approx(p).epsilon(1e-15));
  }

  // swap_propose draws (l, u) with the right frequencies.
  Rng rng(2);
  const Ordering x({0, 1, 2, 3, 4});
  std::map<std::pair<int, int>, int> hits;
  const int N = 200000;
  for (int i = 0; i < N; ++i) {
    const auto m = swap_propose(x, L, rng);
    ++hits[{m.l, m.u}];
  }
  for (const auto& [lu, h] : hits) CHECK(h / double(N) == Approx(1.0 / L / (n - lu.first)).margin(0.004));
}

TEST_CASE("truncated beta matches the quadrature mean") {
  Rng rng(3);
  auto quad_mean = [](double a, double b) {
    auto pdf = [a, b](double x) { return std::pow(x, a - 1) * std::pow(1 - x, b - 1); };
    const double z = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(pdf, 0.0, 0.5);
    const double m = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double x) { return x * pdf(x); }, 0.0, 0.5);
    return m / z;
  };
  for (auto [a, b] : {std::pair{6.0, 96.0}, std::pair{1.0, 1.0}, std::pair{30.0, 25.0}}) {
    const int N = 100000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < N; ++i) {
      const double x = truncated_beta(a, b, 0.5, rng);
      REQUIRE(x >= 0.0);
      REQUIRE(x < 0.5);
      s += x;
      s2 += x * x;
    }
    const double m = s / N, se = std::sqrt((s2 / N - m * m) / N);
    CHECK(std::abs(m - quad_mean(a, b)) < 3 * se);
  }
}

TEST_CASE("configuration errors are reported before sampling") {
  const auto data = small_dataset();
  const auto table = build_table(Metric::footrule, 5);
  auto bad = [&](auto edit) {
    auto c = quick_config();
    edit(c);
    return c;
  };
  CHECK_THROWS_AS(Sampler(data, bad([](ChainConfig& c) { c.tuning.l_star = 5; }), table), ConfigError);
  CHECK_THROWS_AS(Sampler(data, bad([](ChainConfig& c) { c.tuning.burn_in = 2000; }), table), ConfigError);
  CHECK_THROWS_AS(Sampler(data, bad([](ChainConfig& c) { c.model.clusters = 2; }), table), ConfigError);
  CHECK_THROWS_AS(Sampler(data, bad([](ChainConfig& c) { c.priors.chi = 0.0; }), table), ConfigError);
  CHECK_THROWS_AS(Sampler(data, bad([](ChainConfig& c) { c.metric = Metric::kendall; }), table), ConfigError);
  Dataset two;
  two.n_items = 2;
  two.preference_sets = {{1, {{0, 1}}}};
  auto lm = quick_config(ModelKind::logistic);
  lm.tuning.l_star = lm.tuning.l_star_r = 1;
  const auto table2 = build_table(Metric::footrule, 2);
  CHECK_THROWS_AS(Sampler(two, lm, table2), ConfigError);
}

TEST_CASE("topological initialization respects acyclic preferences") {
  Rng rng(4);
  for (int t = 0; t < 500; ++t) {
    const int n = 3 + static_cast<int>(rng.uniform_int(0, 8));
    // Pairs consistent with a hidden ranking, so the relation is acyclic.
    const auto hidden = Ranking::random(n, rng);
    PreferenceSet b{1, {}};
    for (int a = 0; a < n; ++a)
      for (int c = a + 1; c < n; ++c)
        if (rng.uniform() < 0.3) b.pairs.push_back(hidden[a] < hidden[c] ? PreferencePair{a, c} : PreferencePair{c, a});
    REQUIRE(mistake_count(b, topological_init(b, n, rng)) == 0);
  }
  // Cyclic input still yields a valid ranking.
  const PreferenceSet cyc{1, {{0, 1}, {1, 2}, {2, 0}}};
  const auto r = topological_init(cyc, 3, rng);
  CHECK(mistake_count(cyc, r) == 1);
}

TEST_CASE("alpha log ratio") {
  const auto data = small_dataset();
  const auto table = build_table(Metric::footrule, 5);
  Sampler s(data, quick_config(), table);
  const double a = s.state().alphas[0];
  CHECK(s.alpha_log_ratio(0, a) == Approx(0.0).margin(1e-14));

  // Empty cluster: second cluster has no members, so only the prior remains.
  auto mix = quick_config(ModelKind::mixture_bernoulli, 2);
  mix.priors.gamma_shape = 1.0;
  mix.priors.gamma_rate = 0.37;
  Sampler m(data, mix, table);
  for (int& z : m.mutable_state().labels) z = 0;
  m.refresh();
  const double cur = m.state().alphas[1];
  for (double p : {0.5, 2.0, 7.0})
    CHECK(m.alpha_log_ratio(1, p) == Approx(std::log(p / cur) - 0.37 * (p - cur)).epsilon(1e-12));

  // Against a direct evaluation of the formula on the occupied cluster.
  double dsum = 0.0;
  for (const auto& r : m.state().latent) dsum += static_cast<double>(distance(Metric::footrule, r, m.state().rhos[0]));
  const double t0 = m.state().alphas[0], p0 = 2.5;
  const double direct = mix.priors.gamma_shape * std::log(p0 / t0) - (0.37 + dsum / 5) * (p0 - t0) -
                        3 * (table(p0) - table(t0));
  CHECK(m.alpha_log_ratio(0, p0) == Approx(direct).epsilon(1e-12));
}

TEST_CASE("alpha proposals outside the table are rejected and counted") {
  const auto data = small_dataset();
  TableOptions opt;
  opt.alpha_max = 1.2;
  const auto table = build_table(Metric::footrule, 5, opt);
  auto c = quick_config();
  c.tuning.sigma_alpha = 1.0;
  auto log = run_chain(data, c, table);
  CHECK(log.acceptance.alpha_off_grid > 0);
  for (const auto& snap : log.snapshots) REQUIRE(snap.state.alphas[0] <= 1.2);
}

TEST_CASE("theta posterior parameters") {
  const auto data = small_dataset();
  const auto table = build_table(Metric::footrule, 5);
  auto c = quick_config();
  c.priors.kappa1 = 2.0;
  c.priors.kappa2 = 3.0;
  Sampler s(data, c, table);
  std::int64_t g = 0;
  for (std::size_t j = 0; j < data.preference_sets.size(); ++j) g += mistake_count(data.preference_sets[j], s.state().latent[j]);
  const auto [k1, k2] = s.theta_posterior_params();
  CHECK(k1 == 2.0 + g);
  CHECK(k2 == 3.0 + 13 - g);
  for (int i = 0; i < 1000; ++i) {
    const double th = s.update_theta();
    REQUIRE(th >= 0.0);
    REQUIRE(th < 0.5);
  }
}

TEST_CASE("labels: symmetry, zero weight and direct normalization") {
  const auto data = small_dataset();
  const auto table = build_table(Metric::footrule, 5);
  Sampler s(data, quick_config(ModelKind::mixture_bernoulli, 2), table);
  auto& st = s.mutable_state();
  st.alphas = {2.0, 2.0};
  st.rhos = {R({1, 2, 3, 4, 5}), R({1, 2, 3, 4, 5})};
  st.weights = {0.5, 0.5};
  s.refresh();
  for (int j = 0; j < 3; ++j) CHECK(s.label_log_mass(j, 0) == Approx(s.label_log_mass(j, 1)));

  st.alphas = {1.3, 4.0};
  st.rhos = {R({1, 2, 3, 4, 5}), R({5, 4, 3, 2, 1})};
  st.weights = {0.3, 0.7};
  s.refresh();
  for (int j = 0; j < 3; ++j) {
    double mass[2];
    for (int g = 0; g < 2; ++g) {
      const double d = static_cast<double>(distance(Metric::footrule, st.latent[static_cast<std::size_t>(j)], st.rhos[static_cast<std::size_t>(g)]));
      mass[g] = st.weights[static_cast<std::size_t>(g)] * std::exp(-st.alphas[static_cast<std::size_t>(g)] / 5 * d) / std::exp(table(st.alphas[static_cast<std::size_t>(g)]));
    }
    const double p0 = mass[0] / (mass[0] + mass[1]);
    const double q0 = 1.0 / (1.0 + std::exp(s.label_log_mass(j, 1) - s.label_log_mass(j, 0)));
    CHECK(q0 == Approx(p0).epsilon(1e-12));
  }

  st.weights = {1.0, 0.0};
  s.refresh();
  for (int it = 0; it < 2000; ++it)
    for (int z : s.update_labels()) REQUIRE(z == 0);
}

TEST_CASE("weights: Dirichlet moments at fixed labels") {
  Dataset data;
  data.n_items = 4;
  for (int j = 0; j < 46; ++j) data.preference_sets.push_back({j + 1, {{0, 1}}});
  const auto table = build_table(Metric::footrule, 4);
  auto c = quick_config(ModelKind::mixture_bernoulli, 3);
  c.tuning.l_star = 2;
  Sampler s(data, c, table);
  auto& labels = s.mutable_state().labels;
  for (int j = 0; j < 46; ++j) labels[static_cast<std::size_t>(j)] = j < 10 ? 0 : (j < 25 ? 1 : 2);
  s.refresh();
  const int N = 40000;
  double m0 = 0.0, s0 = 0.0;
  for (int i = 0; i < N; ++i) {
    const auto& w = s.update_weights();
    REQUIRE(std::abs(w[0] + w[1] + w[2] - 1.0) < 1e-12);
    m0 += w[0];
    s0 += w[0] * w[0];
  }
  m0 /= N;
  const double se = std::sqrt((s0 / N - m0 * m0) / N);
  CHECK(std::abs(m0 - 30.0 / 106.0) < 3 * se);
}

TEST_CASE("beta updates recover the priors when there is no data") {
  Dataset data;
  data.n_items = 5;
  data.preference_sets = {{1, {}}};
  const auto table = build_table(Metric::footrule, 5);
  auto c = quick_config(ModelKind::logistic);
  c.priors.lambda01 = 2.0;
  c.priors.lambda02 = 1.0;
  c.priors.lambda11 = 3.0;
  c.priors.lambda12 = 2.0;
  c.tuning.sigma_beta = 0.8;
  Sampler s(data, c, table);
  std::vector<double> b0, b1;
  for (int i = 0; i < 200000; ++i) {
    s.update_betas();
    const auto& p = std::get<LogisticParams>(s.state().mistake);
    b0.push_back(p.beta0);
    b1.push_back(p.beta1);
  }
  const auto [m0, se0] = batch_mean_se(b0);
  const auto [m1, se1] = batch_mean_se(b1);
  CHECK(std::abs(m0 - 2.0) < 3 * se0);
  CHECK(std::abs(m1 - 1.5) < 3 * se1);
}

TEST_CASE("chains are deterministic and G=1 mixture equals BM") {
  const auto data = small_dataset();
  const auto table = build_table(Metric::footrule, 5);
  const auto a = run_chain(data, quick_config(), table);
  const auto b = run_chain(data, quick_config(), table);
  const auto m = run_chain(data, quick_config(ModelKind::mixture_bernoulli, 1), table);
  REQUIRE(a.snapshots.size() == (2000 - 500) / 5);
  for (std::size_t t = 0; t < a.snapshots.size(); ++t) {
    for (const auto* other : {&b, &m}) {
      const auto& x = a.snapshots[t].state;
      const auto& y = other->snapshots[t].state;
      REQUIRE(x.alphas == y.alphas);
      REQUIRE(x.rhos == y.rhos);
      REQUIRE(x.latent == y.latent);
      REQUIRE(std::get<BernoulliParams>(x.mistake).theta == std::get<BernoulliParams>(y.mistake).theta);
      REQUIRE(a.snapshots[t].log_likelihood == other->snapshots[t].log_likelihood);
    }
  }
  auto other_seed = quick_config();
  other_seed.tuning.seed = 2;
  CHECK(run_chain(data, other_seed, table).snapshots.back().state.alphas != a.snapshots.back().state.alphas);
}

TEST_CASE("snapshot count and acceptance counters") {
  const auto data = small_dataset();
  const auto table = build_table(Metric::footrule, 5);
  for (auto [iters, burn, thin] : {std::tuple{1000, 0, 1}, std::tuple{1001, 100, 7}, std::tuple{50, 49, 3}}) {
    auto c = quick_config();
    c.tuning.n_iterations = iters;
    c.tuning.burn_in = burn;
    c.tuning.thinning = thin;
    const auto log = run_chain(data, c, table);
    CHECK(log.snapshots.size() == static_cast<std::size_t>((iters - burn) / thin));
    const auto& acc = log.acceptance;
    CHECK(acc.rho.proposed == iters);
    CHECK(acc.alpha.proposed == iters);
    CHECK(acc.latent.proposed == 3 * iters);
    CHECK(acc.rho.accepted <= acc.rho.proposed);
    CHECK(acc.latent.accepted <= acc.latent.proposed);
    CHECK(acc.latent_g_unchanged <= acc.latent.proposed);
  }
}

TEST_CASE("multiple chains run in parallel with distinct seeds") {
  const auto data = small_dataset();
  const auto table = build_table(Metric::footrule, 5);
  const auto logs = run_chains(data, quick_config(), table, 3);
  REQUIRE(logs.size() == 3);
  const auto single = run_chain(data, quick_config(), table);
  CHECK(logs[0].snapshots.back().state.alphas == single.snapshots.back().state.alphas);
  CHECK(logs[1].snapshots.back().state.alphas != logs[0].snapshots.back().state.alphas);
  const auto merged = merge_chains(logs);
  CHECK(merged.snapshots.size() == 3 * logs[0].snapshots.size());
  CHECK(merged.snapshots.back().chain == 2);
  CHECK(merged.acceptance.rho.proposed == 3 * logs[0].acceptance.rho.proposed);
}

TEST_CASE("recovery of alpha and mixing on simulated data") {
  SimConfig sim;
  sim.n_items = 10;
  sim.n_assessors = 40;
  sim.lambda_m = 25;
  sim.alpha = 3.0;
  sim.mistake = BernoulliParams{0.1};
  sim.seed = 5;
  const auto [data, truth] = generate_dataset(sim);
  const auto table = build_table(Metric::footrule, 10);
  for (int L : {1, 2, 3}) {
    ChainConfig c;
    c.tuning.l_star = L;
    c.tuning.n_iterations = 20000;
    c.tuning.burn_in = 5000;
    c.tuning.thinning = 10;
    const auto log = run_chain(data, c, table);
    CHECK(log.acceptance.rho.rate() > 0.0);
    CHECK(log.acceptance.rho.rate() < 1.0);
    CHECK(log.acceptance.latent.rate() > 0.0);
    CHECK(log.acceptance.latent.rate() < 1.0);
    if (L == 3) {
      double mean = 0.0;
      for (const auto& s : log.snapshots) mean += s.state.alphas[0];
      mean /= static_cast<double>(log.snapshots.size());
      CHECK(mean > 2.0);
      CHECK(mean < 4.0);
    }
  }
}
