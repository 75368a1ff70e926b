#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "mallows/partition.hpp"
#include "mallows/simulate.hpp"

using namespace mallows;

namespace {
Ranking R(std::vector<int> v) { return Ranking(std::move(v)); }

std::map<Ranking, int> frequencies(const Ranking& rho, double alpha, int draws, std::uint64_t seed) {
  Rng rng(seed);
  std::map<Ranking, int> f;
  for (int i = 0; i < draws; ++i) ++f[sample_mallows(rho, alpha, Metric::footrule, rng)];
  return f;
}
}  // namespace

TEST_CASE("sample_mallows at alpha = 0 is uniform on P_3") {
  const int N = 10000;
  const auto f = frequencies(R({1, 2, 3}), 0.0, N, 1);
  REQUIRE(f.size() == 6);
  double chi2 = 0.0;
  for (const auto& [r, c] : f) chi2 += (c - N / 6.0) * (c - N / 6.0) / (N / 6.0);
  const double p = 1.0 - boost::math::cdf(boost::math::chi_squared(5.0), chi2);
  CHECK(p > 0.01);
}

TEST_CASE("sample_mallows matches exact probabilities at n=3, alpha=3") {
  const int N = 20000;
  const auto rho = R({1, 2, 3});
  const auto f = frequencies(rho, 3.0, N, 2);
  const double z = 1.0 + 2.0 * std::exp(-2.0) + 3.0 * std::exp(-4.0);
  for (const auto& [r, c] : f) {
    const double prob = std::exp(-3.0 / 3.0 * static_cast<double>(distance(Metric::footrule, r, rho))) / z;
    const double se = std::sqrt(prob * (1 - prob) / N);
    CHECK(std::abs(c / double(N) - prob) < 3 * se);
  }
}

TEST_CASE("sample_mallows concentrates at large alpha and validates input") {
  const auto rho = R({3, 1, 4, 2, 5});
  const auto f = frequencies(rho, 100.0, 2000, 3);
  CHECK(f.at(rho) / 2000.0 > 0.99);
  Rng rng(4);
  CHECK_THROWS_AS(sample_mallows(rho, -1.0, Metric::footrule, rng), ConfigError);
}

TEST_CASE("sample_mallows reproduces the n=10 distance distribution") {
  // Exact P(d = k) from the counts against the sampler's histogram.
  const int n = 10;
  const double alpha = 3.0;
  const auto counts = exact_counts(Metric::footrule, n);
  const double logz = exact_logz(counts, alpha);
  Rng rng(5);
  const int N = 5000;
  double mean_d = 0.0;
  for (int i = 0; i < N; ++i)
    mean_d += static_cast<double>(distance(Metric::footrule, sample_mallows(Ranking::identity(n), alpha, Metric::footrule, rng), Ranking::identity(n)));
  mean_d /= N;
  double exact_mean = 0.0, exact_m2 = 0.0;
  for (const auto& [d, c] : counts.counts) {
    const double p = std::exp(detail::log_big(c) - alpha * static_cast<double>(d) / n - logz);
    exact_mean += p * static_cast<double>(d);
    exact_m2 += p * static_cast<double>(d) * static_cast<double>(d);
  }
  const double se = std::sqrt((exact_m2 - exact_mean * exact_mean) / N);
  CHECK(std::abs(mean_d - exact_mean) < 3.5 * se);
}

TEST_CASE("generate_dataset without mistakes is transitive") {
  SimConfig c;
  c.mistake = BernoulliParams{0.0};
  c.seed = 6;
  const auto [data, truth] = generate_dataset(c);
  for (const auto& s : data.preference_sets) CHECK(analyze_transitivity(s, data.n_items).is_transitive);
  for (const auto& f : truth.flipped) CHECK(std::count(f.begin(), f.end(), 1) == 0);
}

TEST_CASE("flip fraction matches theta") {
  SimConfig c;
  c.n_items = 10;
  c.n_assessors = 40;
  c.lambda_m = 25;
  c.mistake = BernoulliParams{0.1};
  c.seed = 7;
  const auto [data, truth] = generate_dataset(c);
  std::int64_t flips = 0, total = 0;
  for (const auto& f : truth.flipped) {
    flips += std::count(f.begin(), f.end(), 1);
    total += static_cast<std::int64_t>(f.size());
  }
  const double frac = static_cast<double>(flips) / static_cast<double>(total);
  CHECK(std::abs(frac - 0.1) < 3 * std::sqrt(0.1 * 0.9 / static_cast<double>(total)));
  CHECK(std::abs(static_cast<double>(total) / 40 - 25.0) < 3 * std::sqrt(25.0 / 40) + 0.5);
}

TEST_CASE("truth record round-trip and pair bookkeeping, over many configurations") {
  Rng meta(8);
  for (int rep = 0; rep < 1000; ++rep) {
    SimConfig c;
    c.n_items = 3 + static_cast<int>(meta.uniform_int(0, 9));
    c.n_assessors = 1 + static_cast<int>(meta.uniform_int(0, 5));
    c.lambda_m = std::max(1.0, meta.uniform() * static_cast<double>(c.pair_budget()));
    c.fixed_pairs = meta.uniform() < 0.3;
    c.alpha = 5 * meta.uniform();
    if (meta.uniform() < 0.5) c.mistake = BernoulliParams{0.45 * meta.uniform()};
    else c.mistake = LogisticParams{0.1 + 2 * meta.uniform(), 0.1 + 2 * meta.uniform()};
    c.clusters = 1 + static_cast<int>(meta.uniform_int(0, 2));
    c.seed = meta();
    c.mallows_steps = 50;
    const auto [data, truth] = generate_dataset(c);
    REQUIRE(data.n_assessors() == c.n_assessors);
    REQUIRE(truth.labels.size() == static_cast<std::size_t>(c.n_assessors));
    REQUIRE_NOTHROW(data.validate());
    const auto budget = c.pair_budget();
    for (int j = 0; j < c.n_assessors; ++j) {
      const auto& b = data.preference_sets[static_cast<std::size_t>(j)];
      const auto& r = truth.latent_true[static_cast<std::size_t>(j)];
      const auto& f = truth.flipped[static_cast<std::size_t>(j)];
      REQUIRE(f.size() == b.pairs.size());
      const auto m = static_cast<std::int64_t>(b.pairs.size());
      if (c.fixed_pairs) REQUIRE(m == std::clamp<std::int64_t>(std::llround(c.lambda_m), 1, budget));
      else REQUIRE((m >= std::min<std::int64_t>(5, budget) && m <= budget));
      std::set<std::pair<int, int>> seen;
      for (std::size_t k = 0; k < b.pairs.size(); ++k) {
        const auto& p = b.pairs[k];
        REQUIRE(seen.insert(std::minmax(p.preferred, p.other)).second);
        const bool implied = r[p.preferred] < r[p.other];
        REQUIRE(implied == !f[k]);
      }
    }
  }
}

TEST_CASE("mixture labels and consensus follow the configuration") {
  SimConfig c;
  c.n_items = 8;
  c.n_assessors = 10;
  c.clusters = 2;
  c.rho_true = {Ranking::identity(8), R({8, 7, 6, 5, 4, 3, 2, 1})};
  c.labels = {0, 1, 0, 1, 0, 1, 1, 1, 0, 0};
  const auto [data, truth] = generate_dataset(c);
  CHECK(truth.labels == c.labels);
  CHECK(truth.rho_true == c.rho_true);

  SimConfig drawn;
  drawn.n_items = 12;
  drawn.clusters = 3;
  drawn.weights = {0.2, 0.3, 0.5};
  drawn.n_assessors = 3000;
  drawn.lambda_m = 5;
  drawn.mallows_steps = 10;
  const auto sim = generate_dataset(drawn);
  std::vector<int> counts(3, 0);
  for (int z : sim.truth.labels) ++counts[static_cast<std::size_t>(z)];
  CHECK(std::abs(counts[2] / 3000.0 - 0.5) < 0.04);
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b)
      CHECK(distance(Metric::footrule, sim.truth.rho_true[static_cast<std::size_t>(a)], sim.truth.rho_true[static_cast<std::size_t>(b)]) >= 40);
}

TEST_CASE("simulation config validation") {
  SimConfig c;
  c.n_items = 5;
  c.lambda_m = 11;
  CHECK_THROWS_AS(generate_dataset(c), ConfigError);
  c.lambda_m = 4;
  c.mistake = BernoulliParams{0.5};
  CHECK_THROWS_AS(generate_dataset(c), ConfigError);
  c.mistake = LogisticParams{1.0, 1.0};
  c.n_items = 2;
  c.lambda_m = 1;
  CHECK_THROWS_AS(generate_dataset(c), ConfigError);
}

TEST_CASE("same seed, same dataset") {
  SimConfig c;
  c.seed = 99;
  const auto a = generate_dataset(c);
  const auto b = generate_dataset(c);
  CHECK(a.truth.latent_true == b.truth.latent_true);
  for (int j = 0; j < c.n_assessors; ++j)
    CHECK(a.data.preference_sets[static_cast<std::size_t>(j)].pairs == b.data.preference_sets[static_cast<std::size_t>(j)].pairs);
}
