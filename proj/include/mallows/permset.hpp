#pragma once

// Rankings, orderings, right-invariant permutation distances, the Mallows
// kernel, and transitivity analysis of pairwise preference sets.
//
// Conventions: item indices are 0-based; ranks are 1-based (rank 1 = best).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mallows/error.hpp"
#include "mallows/rng.hpp"

namespace mallows {

class Ordering;

/// ranks()[i] is the rank of item i. Always a permutation of {1..n}, n >= 2.
class Ranking {
 public:
  Ranking() = default;
  explicit Ranking(std::vector<int> ranks) : ranks_(std::move(ranks)) {
    if (!is_permutation_of_1_to_n(ranks_))
      throw DataError("ranking is not a permutation of 1..n");
  }

  static Ranking identity(int n) {
    std::vector<int> r(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) r[static_cast<std::size_t>(i)] = i + 1;
    return Ranking(std::move(r));
  }

  /// Uniform random permutation.
  static Ranking random(int n, Rng& rng) {
    std::vector<int> r(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) r[static_cast<std::size_t>(i)] = i + 1;
    rng.shuffle(r);
    return Ranking(std::move(r));
  }

  int size() const noexcept { return static_cast<int>(ranks_.size()); }
  int operator[](int item) const noexcept { return ranks_[static_cast<std::size_t>(item)]; }
  std::span<const int> ranks() const noexcept { return ranks_; }

  /// Exchanges the ranks held by two items. Stays a permutation.
  void swap_items(int a, int b) noexcept {
    std::swap(ranks_[static_cast<std::size_t>(a)], ranks_[static_cast<std::size_t>(b)]);
  }

  friend bool operator==(const Ranking&, const Ranking&) = default;
  friend auto operator<=>(const Ranking&, const Ranking&) = default;

  static bool is_permutation_of_1_to_n(std::span<const int> v) {
    if (v.size() < 2) return false;
    std::vector<char> seen(v.size() + 1, 0);
    for (int x : v) {
      if (x < 1 || x > static_cast<int>(v.size()) || seen[static_cast<std::size_t>(x)]) return false;
      seen[static_cast<std::size_t>(x)] = 1;
    }
    return true;
  }

 private:
  std::vector<int> ranks_;
};

/// items()[k] is the item holding rank k+1 (best to worst).
class Ordering {
 public:
  Ordering() = default;
  explicit Ordering(std::vector<int> items) : items_(std::move(items)) {
    std::vector<int> shifted(items_);
    for (int& x : shifted) ++x;
    if (!Ranking::is_permutation_of_1_to_n(shifted))
      throw DataError("ordering is not a permutation of item indices");
  }

  int size() const noexcept { return static_cast<int>(items_.size()); }
  int operator[](int position) const noexcept { return items_[static_cast<std::size_t>(position)]; }
  std::span<const int> items() const noexcept { return items_; }

  void swap_positions(int a, int b) noexcept {
    std::swap(items_[static_cast<std::size_t>(a)], items_[static_cast<std::size_t>(b)]);
  }

  friend bool operator==(const Ordering&, const Ordering&) = default;

 private:
  std::vector<int> items_;
};

inline Ordering invert(const Ranking& r) {
  std::vector<int> items(static_cast<std::size_t>(r.size()));
  for (int i = 0; i < r.size(); ++i) items[static_cast<std::size_t>(r[i] - 1)] = i;
  return Ordering(std::move(items));
}

inline Ranking invert(const Ordering& x) {
  std::vector<int> ranks(static_cast<std::size_t>(x.size()));
  for (int k = 0; k < x.size(); ++k) ranks[static_cast<std::size_t>(x[k])] = k + 1;
  return Ranking(std::move(ranks));
}

/// (a ∘ b)_i = a_{b_i}: the right action used in the invariance property.
inline Ranking compose(const Ranking& a, const Ranking& b) {
  if (a.size() != b.size()) throw DataError("compose: dimension mismatch");
  std::vector<int> out(static_cast<std::size_t>(a.size()));
  for (int i = 0; i < a.size(); ++i) out[static_cast<std::size_t>(i)] = a[b[i] - 1];
  return Ranking(std::move(out));
}

enum class Metric { footrule, spearman, kendall, cayley, hamming };

inline constexpr Metric kAllMetrics[] = {Metric::footrule, Metric::spearman, Metric::kendall,
                                         Metric::cayley, Metric::hamming};

constexpr std::string_view to_string(Metric m) noexcept {
  switch (m) {
    case Metric::footrule: return "footrule";
    case Metric::spearman: return "spearman";
    case Metric::kendall: return "kendall";
    case Metric::cayley: return "cayley";
    case Metric::hamming: return "hamming";
  }
  return "?";
}

inline Metric parse_metric(std::string_view s) {
  for (Metric m : kAllMetrics)
    if (to_string(m) == s) return m;
  throw ConfigError("unknown metric '" + std::string(s) + "'");
}

namespace detail {

// Counts inversions of v in place by merge sort; buf must match v in size.
inline std::int64_t count_inversions(std::span<int> v, std::span<int> buf) {
  const std::size_t n = v.size();
  if (n < 2) return 0;
  const std::size_t mid = n / 2;
  std::int64_t inv = count_inversions(v.first(mid), buf.first(mid)) +
                     count_inversions(v.subspan(mid), buf.subspan(mid));
  std::size_t i = 0, j = mid, k = 0;
  while (i < mid && j < n) {
    if (v[i] <= v[j]) {
      buf[k++] = v[i++];
    } else {
      inv += static_cast<std::int64_t>(mid - i);
      buf[k++] = v[j++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < n) buf[k++] = v[j++];
  std::copy(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(n), v.begin());
  return inv;
}

}  // namespace detail

/// Distance between two rank vectors of equal length. All five metrics are
/// right-invariant and integer-valued.
inline std::int64_t distance(Metric metric, std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw DataError("distance: dimension mismatch");
  const std::size_t n = a.size();
  switch (metric) {
    case Metric::footrule: {
      std::int64_t d = 0;
      for (std::size_t i = 0; i < n; ++i) d += std::abs(a[i] - b[i]);
      return d;
    }
    case Metric::spearman: {
      std::int64_t d = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const std::int64_t diff = a[i] - b[i];
        d += diff * diff;
      }
      return d;
    }
    case Metric::kendall: {
      // Lay out b's ranks in a's order; discordant pairs are the inversions.
      std::vector<int> seq(n), buf(n);
      for (std::size_t i = 0; i < n; ++i) seq[static_cast<std::size_t>(a[i] - 1)] = b[i];
      return detail::count_inversions(seq, buf);
    }
    case Metric::cayley: {
      // sigma maps rank b_i -> a_i; distance = n - #cycles(sigma).
      std::vector<int> sigma(n);
      for (std::size_t i = 0; i < n; ++i) sigma[static_cast<std::size_t>(b[i] - 1)] = a[i] - 1;
      std::vector<char> seen(n, 0);
      std::int64_t cycles = 0;
      for (std::size_t s = 0; s < n; ++s) {
        if (seen[s]) continue;
        ++cycles;
        for (std::size_t t = s; !seen[t]; t = static_cast<std::size_t>(sigma[t])) seen[t] = 1;
      }
      return static_cast<std::int64_t>(n) - cycles;
    }
    case Metric::hamming: {
      std::int64_t d = 0;
      for (std::size_t i = 0; i < n; ++i) d += (a[i] != b[i]);
      return d;
    }
  }
  return 0;
}

inline std::int64_t distance(Metric metric, const Ranking& a, const Ranking& b) {
  return distance(metric, a.ranks(), b.ranks());
}

/// Largest value the metric attains on P_n.
inline std::int64_t max_distance(Metric metric, int n) {
  const std::int64_t m = n;
  switch (metric) {
    case Metric::footrule: return (m * m) / 2;
    case Metric::spearman: return m * (m * m - 1) / 3;
    case Metric::kendall: return m * (m - 1) / 2;
    case Metric::cayley: return m - 1;
    case Metric::hamming: return m;
  }
  return 0;
}

/// log f(r | alpha, rho) = -(alpha/n) d(r, rho) - log Z_n(alpha).
inline double mallows_log_density(const Ranking& r, const Ranking& rho, double alpha, Metric metric,
                                  double logz) {
  if (!(alpha > 0.0)) throw ConfigError("mallows_log_density: alpha must be positive");
  return -(alpha / r.size()) * static_cast<double>(distance(metric, r, rho)) - logz;
}

/// "preferred ≺ other": the assessor ranked `preferred` above `other`.
struct PreferencePair {
  int preferred = 0;
  int other = 0;
  friend bool operator==(const PreferencePair&, const PreferencePair&) = default;
  friend auto operator<=>(const PreferencePair&, const PreferencePair&) = default;
};

struct PreferenceSet {
  int assessor_id = 0;
  std::vector<PreferencePair> pairs;

  /// Throws DataError on self-comparisons, out-of-range items, repeated pairs.
  void validate(int n_items) const {
    if (pairs.size() > static_cast<std::size_t>(n_items) * static_cast<std::size_t>(n_items - 1) / 2)
      throw DataError("assessor " + std::to_string(assessor_id) + ": more pairs than n(n-1)/2");
    std::vector<char> seen(static_cast<std::size_t>(n_items) * static_cast<std::size_t>(n_items), 0);
    for (const auto& p : pairs) {
      if (p.preferred == p.other)
        throw DataError("assessor " + std::to_string(assessor_id) + ": self-comparison of item " +
                        std::to_string(p.preferred + 1));
      if (p.preferred < 0 || p.other < 0 || p.preferred >= n_items || p.other >= n_items)
        throw DataError("assessor " + std::to_string(assessor_id) + ": item index out of range");
      const auto lo = static_cast<std::size_t>(std::min(p.preferred, p.other));
      const auto hi = static_cast<std::size_t>(std::max(p.preferred, p.other));
      char& flag = seen[lo * static_cast<std::size_t>(n_items) + hi];
      if (flag)
        throw DataError("assessor " + std::to_string(assessor_id) + ": pair {" +
                        std::to_string(lo + 1) + "," + std::to_string(hi + 1) + "} appears twice");
      flag = 1;
    }
  }
};

struct Dataset {
  int n_items = 0;
  std::vector<PreferenceSet> preference_sets;

  int n_assessors() const noexcept { return static_cast<int>(preference_sets.size()); }

  std::int64_t total_pairs() const noexcept {
    std::int64_t m = 0;
    for (const auto& s : preference_sets) m += static_cast<std::int64_t>(s.pairs.size());
    return m;
  }

  void validate() const {
    if (n_items < 2) throw DataError("dataset needs at least 2 items");
    if (preference_sets.empty()) throw DataError("dataset has no assessors");
    for (const auto& s : preference_sets) s.validate(n_items);
  }
};

struct TransitivityReport {
  bool is_transitive = true;
  std::optional<std::vector<PreferencePair>> closure;  // present iff acyclic
  std::optional<std::vector<int>> cycle_witness;        // items a→b→…→a, first not repeated
};

/// Builds the preference digraph (edge preferred → other). Acyclic graphs get
/// their transitive closure (sorted); cyclic graphs get the first DFS
/// back-edge cycle.
inline TransitivityReport analyze_transitivity(const PreferenceSet& b, int n) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (const auto& p : b.pairs) adj[static_cast<std::size_t>(p.preferred)].push_back(p.other);

  // Iterative three-colour DFS so deep chains cannot overflow the stack.
  enum : char { white, grey, black };
  std::vector<char> colour(static_cast<std::size_t>(n), white);
  std::vector<int> parent(static_cast<std::size_t>(n), -1);
  TransitivityReport report;
  for (int root = 0; root < n && report.is_transitive; ++root) {
    if (colour[static_cast<std::size_t>(root)] != white) continue;
    std::vector<std::pair<int, std::size_t>> stack{{root, 0}};
    colour[static_cast<std::size_t>(root)] = grey;
    while (!stack.empty() && report.is_transitive) {
      auto& [node, next] = stack.back();
      const auto& out = adj[static_cast<std::size_t>(node)];
      if (next == out.size()) {
        colour[static_cast<std::size_t>(node)] = black;
        stack.pop_back();
        continue;
      }
      const int child = out[next++];
      if (colour[static_cast<std::size_t>(child)] == grey) {
        std::vector<int> cyc;
        for (int v = node; v != child; v = parent[static_cast<std::size_t>(v)]) cyc.push_back(v);
        cyc.push_back(child);
        std::reverse(cyc.begin(), cyc.end());
        report.is_transitive = false;
        report.cycle_witness = std::move(cyc);
      } else if (colour[static_cast<std::size_t>(child)] == white) {
        colour[static_cast<std::size_t>(child)] = grey;
        parent[static_cast<std::size_t>(child)] = node;
        stack.emplace_back(child, 0);
      }
    }
  }
  if (!report.is_transitive) return report;

  std::vector<PreferencePair> closure;
  std::vector<char> reached(static_cast<std::size_t>(n));
  for (int src = 0; src < n; ++src) {
    std::fill(reached.begin(), reached.end(), 0);
    std::vector<int> todo{src};
    while (!todo.empty()) {
      const int v = todo.back();
      todo.pop_back();
      for (int w : adj[static_cast<std::size_t>(v)]) {
        if (reached[static_cast<std::size_t>(w)]) continue;
        reached[static_cast<std::size_t>(w)] = 1;
        todo.push_back(w);
      }
    }
    for (int dst = 0; dst < n; ++dst)
      if (reached[static_cast<std::size_t>(dst)]) closure.push_back({src, dst});
  }
  report.closure = std::move(closure);
  return report;
}

}  // namespace mallows
