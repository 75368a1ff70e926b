#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <vector>

#include "mallows/partition.hpp"

using namespace mallows;
using Catch::Approx;

namespace {
// Distance histogram from the identity by visiting all n! permutations.
std::map<std::int64_t, std::int64_t> enumerate_counts(Metric m, int n) {
  std::vector<int> r(static_cast<std::size_t>(n));
  std::iota(r.begin(), r.end(), 1);
  const auto id = r;
  std::map<std::int64_t, std::int64_t> out;
  do ++out[distance(m, r, id)]; while (std::next_permutation(r.begin(), r.end()));
  return out;
}

double enumerate_logz(Metric m, int n, double alpha) {
  double z = 0.0;
  for (const auto& [d, c] : enumerate_counts(m, n)) z += static_cast<double>(c) * std::exp(-alpha * d / n);
  return std::log(z);
}
}  // namespace

TEST_CASE("exact_counts examples") {
  const auto f3 = exact_counts(Metric::footrule, 3);
  CHECK(f3.counts == std::map<std::int64_t, BigInt>{{0, 1}, {2, 2}, {4, 3}});
  const auto h3 = exact_counts(Metric::hamming, 3);
  CHECK(h3.counts == std::map<std::int64_t, BigInt>{{0, 1}, {2, 3}, {3, 2}});
  for (Metric m : kAllMetrics) {
    const auto c2 = exact_counts(m, 2);
    REQUIRE(c2.counts.size() == 2);
    CHECK(c2.counts.begin()->first == 0);
    CHECK(c2.counts.begin()->second == 1);
    CHECK(c2.counts.rbegin()->second == 1);
  }
  CHECK_THROWS_AS(exact_counts(Metric::footrule, 15), ConfigError);
}

TEST_CASE("exact_counts matches enumeration for n <= 7") {
  for (Metric m : kAllMetrics)
    for (int n = 2; n <= 7; ++n) {
      const auto c = exact_counts(m, n);
      const auto e = enumerate_counts(m, n);
      REQUIRE(c.counts.size() == e.size());
      for (const auto& [d, k] : e) REQUIRE(c.counts.at(d) == k);
      REQUIRE(c.counts.at(0) == 1);
    }
}

TEST_CASE("counts sum to n! exactly, beyond 64-bit range") {
  BigInt f = 1;
  for (int i = 2; i <= 25; ++i) f *= i;
  CHECK(exact_counts(Metric::kendall, 25).total() == f);
  CHECK(exact_counts(Metric::cayley, 25).total() == f);
  CHECK(exact_counts(Metric::hamming, 25).total() == f);
  BigInt f12 = 479001600;
  CHECK(exact_counts(Metric::footrule, 12).total() == f12);
  CHECK(exact_counts(Metric::spearman, 10).total() == BigInt(3628800));
}

TEST_CASE("exact_logz") {
  const auto f3 = exact_counts(Metric::footrule, 3);
  CHECK(exact_logz(f3, 3.0) == Approx(std::log(1.0 + 2.0 * std::exp(-2.0) + 3.0 * std::exp(-4.0))).epsilon(1e-14));
  CHECK(exact_logz(f3, 3.0) == Approx(0.2818783758931443).epsilon(1e-12));
  CHECK(exact_logz(f3, 0.0) == Approx(std::log(6.0)).epsilon(1e-14));
  CHECK(exact_logz(exact_counts(Metric::footrule, 1), 2.0) == 0.0);
  // Footrule n=10 values from an independent subset-DP in double precision.
  const auto f10 = exact_counts(Metric::footrule, 10);
  CHECK(exact_logz(f10, 1.0) == Approx(12.065100145140475).epsilon(1e-12));
  CHECK(exact_logz(f10, 3.0) == Approx(7.52734207420137).epsilon(1e-12));
  CHECK(exact_logz(f10, 5.0) == Approx(4.644253728300863).epsilon(1e-12));
}

TEST_CASE("closed forms") {
  CHECK(closed_form_logz(Metric::kendall, 2, 0.0) == Approx(std::log(2.0)));
  for (double a : {0.3, 1.0, 7.0}) CHECK(closed_form_logz(Metric::kendall, 2, a) == Approx(std::log1p(std::exp(-a / 2))));
  CHECK(closed_form_logz(Metric::cayley, 3, 0.0) == Approx(std::log(6.0)));
  CHECK_THROWS_AS(closed_form_logz(Metric::footrule, 3, 1.0), ConfigError);
  for (Metric m : {Metric::kendall, Metric::cayley, Metric::hamming})
    for (int n = 2; n <= 7; ++n)
      for (double a : {0.0, 0.1, 1.0, 5.0, 20.0}) {
        const double direct = enumerate_logz(m, n, a);
        REQUIRE(std::abs(closed_form_logz(m, n, a) - direct) <= 1e-10 * std::max(1.0, std::abs(direct)));
        REQUIRE(std::abs(exact_logz(exact_counts(m, n), a) - direct) <= 1e-12 * std::max(1.0, std::abs(direct)));
      }
}

TEST_CASE("build_table dispatch and table invariants") {
  CHECK(build_table(Metric::kendall, 12).method() == LogZMethod::closed_form);
  CHECK(build_table(Metric::footrule, 12).method() == LogZMethod::exact);
  TableOptions cheap;
  cheap.alpha_max = 5.0;
  cheap.grid_step = 0.5;
  cheap.is_samples = 200;
  CHECK(build_table(Metric::footrule, 30, cheap).method() == LogZMethod::importance_sampling);

  for (Metric m : kAllMetrics) {
    const auto t = build_table(m, 6);
    CHECK(t(0.0) == Approx(std::log(720.0)).margin(1e-9));
    // non-increasing and convex along the grid
    const auto& z = t.logz();
    for (std::size_t i = 1; i < z.size(); ++i) REQUIRE(z[i] <= z[i - 1] + 1e-12);
    for (std::size_t i = 2; i < z.size(); ++i) REQUIRE(z[i] - 2 * z[i - 1] + z[i - 2] >= -1e-9);
    CHECK_THROWS_AS(t(40.5), NumericError);
    CHECK_THROWS_AS(t(-0.1), NumericError);
  }
}

TEST_CASE("importance sampling") {
  const std::vector<double> grid{0.0, 1.0};
  for (auto prop : {IsProposal::uniform, IsProposal::pseudo_likelihood}) {
    const auto t = is_logz(Metric::footrule, 3, grid, 100000, 5, prop);
    CHECK(t.logz()[0] == Approx(std::log(6.0)).epsilon(1e-12));
    CHECK(t.std_error()[0] == Approx(0.0).margin(1e-12));
    const double exact = std::log(1.0 + 2.0 * std::exp(-2.0 / 3) + 3.0 * std::exp(-4.0 / 3));
    CHECK(std::abs(t.logz()[1] - exact) < 3.0 * t.std_error()[1] + 1e-12);
  }
  CHECK_THROWS_AS(is_logz(Metric::footrule, 3, {}, 10, 1), ConfigError);

  // Interpolation on an IS table is linear between grid points.
  const auto t = is_logz(Metric::footrule, 5, {0.0, 1.0, 2.0}, 2000, 1);
  CHECK(t(1.5) == Approx(0.5 * (t.logz()[1] + t.logz()[2])));
}

TEST_CASE("grid refinement: interpolation error of an IS-style table shrinks") {
  // Compare linear interpolation of exact log Z on coarse and fine grids.
  const auto counts = exact_counts(Metric::footrule, 8);
  auto max_err = [&](double step) {
    auto grid = make_alpha_grid(10.0, step);
    std::vector<double> lz;
    for (double a : grid) lz.push_back(exact_logz(counts, a));
    const auto t = LogZTable::from_estimates(Metric::footrule, 8, grid, lz, std::vector<double>(grid.size(), 0.0));
    double e = 0.0;
    for (double a = 0.0; a <= 10.0; a += 0.013) e = std::max(e, std::abs(t(a) - exact_logz(counts, a)));
    return e;
  };
  const double coarse = max_err(0.2), fine = max_err(0.1);
  CHECK(fine < coarse / 3.0);
  CHECK(fine < 1e-3);
}

TEST_CASE("table text format round-trips") {
  for (Metric m : {Metric::footrule, Metric::kendall}) {
    const auto t = build_table(m, 7, {10.0, 0.5, 100, 1});
    std::stringstream ss;
    t.write(ss);
    const auto u = LogZTable::read(ss);
    CHECK(u.metric() == t.metric());
    CHECK(u.n() == t.n());
    CHECK(u.method() == t.method());
    CHECK(u.grid() == t.grid());
    CHECK(u.logz() == t.logz());
    CHECK(u(3.3) == t(3.3));
  }
  const auto is = is_logz(Metric::footrule, 20, {0.0, 0.5, 1.0}, 100, 3);
  std::stringstream ss;
  is.write(ss);
  const auto back = LogZTable::read(ss);
  CHECK(back.logz() == is.logz());
  CHECK(back.std_error() == is.std_error());
  std::stringstream bad("mallows-logz 2\n");
  CHECK_THROWS_AS(LogZTable::read(bad), DataError);
}
