#pragma once

// Mallows partition function Z_n(alpha) = sum_{r in P_n} exp(-(alpha/n) d(r, 1_n)).
//
// Three routes: closed forms (Kendall, Cayley, Hamming), exact distance
// frequency counting, and importance sampling. LogZTable packages whichever
// route applies into a callable used by the sampler.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "mallows/error.hpp"
#include "mallows/permset.hpp"
#include "mallows/rng.hpp"

namespace mallows {

using BigInt = boost::multiprecision::cpp_int;

/// Largest n for which exact_counts is attempted, per metric.
constexpr int exact_count_limit(Metric m) noexcept {
  return (m == Metric::footrule || m == Metric::spearman) ? 14 : 100;
}

constexpr bool has_closed_form(Metric m) noexcept {
  return m == Metric::kendall || m == Metric::cayley || m == Metric::hamming;
}

namespace detail {

inline double log_sum_exp(const std::vector<double>& terms) {
  std::size_t arg = 0;
  for (std::size_t i = 1; i < terms.size(); ++i)
    if (terms[i] > terms[arg]) arg = i;
  if (terms.empty() || !std::isfinite(terms[arg])) return terms.empty() ? -std::numeric_limits<double>::infinity() : terms[arg];
  // log1p keeps full relative precision when the largest term dominates.
  const double top = terms[arg];
  double rest = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i)
    if (i != arg) rest += std::exp(terms[i] - top);
  return top + std::log1p(rest);
}

inline double log_big(const BigInt& x) {
  // cpp_int converts exactly enough for the log; beyond double range split off powers of two.
  const auto bits = static_cast<long>(boost::multiprecision::msb(x));
  if (bits < 1000) return std::log(x.convert_to<double>());
  const long shift = bits - 900;
  BigInt top = x >> shift;
  return std::log(top.convert_to<double>()) + static_cast<double>(shift) * std::numbers::ln2;
}

inline double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

}  // namespace detail

/// Number of permutations at each achievable distance from the identity.
struct DistanceCounts {
  Metric metric = Metric::footrule;
  int n = 0;
  std::map<std::int64_t, BigInt> counts;

  BigInt total() const {
    BigInt t = 0;
    for (const auto& [d, c] : counts) t += c;
    return t;
  }
};

/// Closed-form log Z for Kendall, Cayley and Hamming.
inline double closed_form_logz(Metric metric, int n, double alpha) {
  if (!has_closed_form(metric))
    throw ConfigError("closed_form_logz: no closed form for " + std::string(to_string(metric)));
  if (alpha < 0.0) throw ConfigError("closed_form_logz: alpha must be non-negative");
  const double t = alpha / n;
  switch (metric) {
    case Metric::kendall: {
      // prod_{i=1}^{n} (1 - e^{-i t}) / (1 - e^{-t}); each factor -> i as t -> 0.
      double s = 0.0;
      for (int i = 1; i <= n; ++i) {
        if (t == 0.0) {
          s += std::log(static_cast<double>(i));
        } else {
          s += std::log(-std::expm1(-i * t)) - std::log(-std::expm1(-t));
        }
      }
      return s;
    }
    case Metric::cayley: {
      double s = 0.0;
      for (int i = 1; i < n; ++i) s += std::log1p(i * std::exp(-t));
      return s;
    }
    case Metric::hamming: {
      // sum_k C(n,k) D_k e^{-t k}, with D_k = (k-1)(D_{k-1} + D_{k-2}) the derangement numbers.
      constexpr double neg_inf = -std::numeric_limits<double>::infinity();
      std::vector<double> log_d(static_cast<std::size_t>(n + 1), neg_inf);
      log_d[0] = 0.0;
      for (int k = 2; k <= n; ++k)
        log_d[static_cast<std::size_t>(k)] =
            std::log(static_cast<double>(k - 1)) +
            detail::log_sum_exp({log_d[static_cast<std::size_t>(k - 1)], log_d[static_cast<std::size_t>(k - 2)]});
      std::vector<double> terms;
      for (int k = 0; k <= n; ++k) {
        const double log_binom =
            detail::log_factorial(n) - detail::log_factorial(k) - detail::log_factorial(n - k);
        terms.push_back(log_binom + log_d[static_cast<std::size_t>(k)] - t * k);
      }
      return detail::log_sum_exp(terms);
    }
    default: break;
  }
  return 0.0;
}

namespace detail {

// Subset DP for positional metrics: item i (in order) takes an unused rank r,
// paying cost(i, r). State = (mask of used ranks, accumulated distance),
// processed one popcount layer at a time.
inline std::map<std::int64_t, BigInt> positional_counts(Metric metric, int n) {
  auto cost = [metric](int item, int rank) -> std::int64_t {
    const std::int64_t diff = item - rank;
    return metric == Metric::footrule ? std::abs(diff) : diff * diff;
  };
  const std::int64_t dmax = max_distance(metric, n);
  const std::uint32_t full = (1u << n) - 1u;
  std::vector<std::vector<std::uint64_t>> dp(std::size_t{1} << n);
  dp[0].assign(static_cast<std::size_t>(dmax + 1), 0);
  dp[0][0] = 1;
  for (int layer = 0; layer < n; ++layer) {
    // Gosper's hack over masks with `layer` bits set.
    std::uint32_t mask = layer == 0 ? 0u : (1u << layer) - 1u;
    for (;;) {
      auto& row = dp[mask];
      if (!row.empty()) {
        std::int64_t hi = dmax;
        while (hi > 0 && row[static_cast<std::size_t>(hi)] == 0) --hi;
        for (int r = 0; r < n; ++r) {
          if (mask & (1u << r)) continue;
          auto& next = dp[mask | (1u << r)];
          if (next.empty()) next.assign(static_cast<std::size_t>(dmax + 1), 0);
          const std::int64_t c = cost(layer, r);
          for (std::int64_t d = 0; d <= hi; ++d)
            next[static_cast<std::size_t>(d + c)] += row[static_cast<std::size_t>(d)];
        }
        std::vector<std::uint64_t>().swap(row);
      }
      if (layer == 0) break;
      const std::uint32_t lowest = mask & (~mask + 1u);
      const std::uint32_t ripple = mask + lowest;
      if (ripple > full || ripple == 0) break;
      mask = ripple | (((ripple ^ mask) >> 2) / lowest);
      if (mask > full) break;
    }
  }
  std::map<std::int64_t, BigInt> out;
  const auto& last = dp[full];
  for (std::size_t d = 0; d < last.size(); ++d)
    if (last[d]) out[static_cast<std::int64_t>(d)] = BigInt(last[d]);
  return out;
}

// Mahonian numbers: permutations of n with k inversions.
inline std::map<std::int64_t, BigInt> kendall_counts(int n) {
  std::vector<BigInt> row{1};
  for (int m = 2; m <= n; ++m) {
    const std::size_t width = row.size() + static_cast<std::size_t>(m - 1);
    std::vector<BigInt> next(width, 0);
    // next[k] = sum_{j=0}^{m-1} row[k-j], via a sliding window.
    BigInt window = 0;
    for (std::size_t k = 0; k < width; ++k) {
      if (k < row.size()) window += row[k];
      if (k >= static_cast<std::size_t>(m) && k - static_cast<std::size_t>(m) < row.size())
        window -= row[k - static_cast<std::size_t>(m)];
      next[k] = window;
    }
    row = std::move(next);
  }
  std::map<std::int64_t, BigInt> out;
  for (std::size_t k = 0; k < row.size(); ++k) out[static_cast<std::int64_t>(k)] = row[k];
  return out;
}

// Unsigned Stirling numbers of the first kind: c(n, n-d) permutations at Cayley distance d.
inline std::map<std::int64_t, BigInt> cayley_counts(int n) {
  std::vector<BigInt> c{1};  // c(0, 0)
  for (int m = 1; m <= n; ++m) {
    std::vector<BigInt> next(static_cast<std::size_t>(m + 1), 0);
    for (int k = 1; k <= m; ++k) {
      BigInt v = c[static_cast<std::size_t>(k - 1)];
      if (k < m) v += BigInt(m - 1) * c[static_cast<std::size_t>(k)];
      next[static_cast<std::size_t>(k)] = v;
    }
    c = std::move(next);
  }
  std::map<std::int64_t, BigInt> out;
  for (int k = 1; k <= n; ++k) out[n - k] = c[static_cast<std::size_t>(k)];
  return out;
}

inline std::map<std::int64_t, BigInt> hamming_counts(int n) {
  std::vector<BigInt> derange(static_cast<std::size_t>(n + 1), 0);
  derange[0] = 1;
  for (int k = 2; k <= n; ++k)
    derange[static_cast<std::size_t>(k)] =
        BigInt(k - 1) * (derange[static_cast<std::size_t>(k - 1)] + derange[static_cast<std::size_t>(k - 2)]);
  std::map<std::int64_t, BigInt> out;
  BigInt binom = 1;
  for (int k = 0; k <= n; ++k) {
    if (k > 0) binom = binom * (n - k + 1) / k;
    if (derange[static_cast<std::size_t>(k)] != 0) out[k] = binom * derange[static_cast<std::size_t>(k)];
  }
  return out;
}

}  // namespace detail

/// Exact distance frequencies from the identity. Throws ConfigError above
/// exact_count_limit(metric); such cases need importance sampling.
inline DistanceCounts exact_counts(Metric metric, int n) {
  if (n < 1) throw ConfigError("exact_counts: n must be positive");
  if (n > exact_count_limit(metric))
    throw ConfigError("exact_counts: n=" + std::to_string(n) + " exceeds the exact limit " +
                      std::to_string(exact_count_limit(metric)) + " for " +
                      std::string(to_string(metric)) + "; use importance sampling");
  DistanceCounts out{metric, n, {}};
  switch (metric) {
    case Metric::footrule:
    case Metric::spearman: out.counts = detail::positional_counts(metric, n); break;
    case Metric::kendall: out.counts = detail::kendall_counts(n); break;
    case Metric::cayley: out.counts = detail::cayley_counts(n); break;
    case Metric::hamming: out.counts = detail::hamming_counts(n); break;
  }
  return out;
}

/// log sum_d counts[d] e^{-alpha d / n}, in the log domain.
inline double exact_logz(const DistanceCounts& counts, double alpha) {
  std::vector<double> terms;
  terms.reserve(counts.counts.size());
  for (const auto& [d, c] : counts.counts)
    terms.push_back(detail::log_big(c) - alpha * static_cast<double>(d) / counts.n);
  return detail::log_sum_exp(terms);
}

enum class LogZMethod { exact, closed_form, importance_sampling };

constexpr std::string_view to_string(LogZMethod m) noexcept {
  switch (m) {
    case LogZMethod::exact: return "exact";
    case LogZMethod::closed_form: return "closed_form";
    case LogZMethod::importance_sampling: return "importance_sampling";
  }
  return "?";
}

inline LogZMethod parse_logz_method(std::string_view s) {
  for (auto m : {LogZMethod::exact, LogZMethod::closed_form, LogZMethod::importance_sampling})
    if (to_string(m) == s) return m;
  throw DataError("unknown log Z method '" + std::string(s) + "'");
}

/// Cached log Z_n(alpha) over [0, grid.back()].
///
/// Exact and closed-form tables evaluate directly at any alpha inside the
/// grid range; importance-sampling tables interpolate log Z linearly between
/// grid points. `covers()` tells the sampler whether alpha is in range.
class LogZTable {
 public:
  LogZTable() = default;

  Metric metric() const noexcept { return metric_; }
  int n() const noexcept { return n_; }
  LogZMethod method() const noexcept { return method_; }
  const std::vector<double>& grid() const noexcept { return grid_; }
  const std::vector<double>& logz() const noexcept { return logz_; }
  /// Per-grid-point standard error of log Z (importance sampling only).
  const std::vector<double>& std_error() const noexcept { return se_; }
  double alpha_max() const noexcept { return grid_.empty() ? 0.0 : grid_.back(); }

  bool covers(double alpha) const noexcept { return alpha >= 0.0 && alpha <= alpha_max(); }

  double operator()(double alpha) const {
    if (!covers(alpha))
      throw NumericError("log Z requested at alpha=" + std::to_string(alpha) +
                         " outside the table range [0, " + std::to_string(alpha_max()) + "]");
    switch (method_) {
      case LogZMethod::closed_form: return closed_form_logz(metric_, n_, alpha);
      case LogZMethod::exact: return eval_counts(alpha);
      case LogZMethod::importance_sampling: return interpolate(alpha);
    }
    return 0.0;
  }

  static LogZTable from_counts(const DistanceCounts& counts, std::vector<double> grid) {
    LogZTable t;
    t.metric_ = counts.metric;
    t.n_ = counts.n;
    t.method_ = LogZMethod::exact;
    for (const auto& [d, c] : counts.counts) t.log_counts_.emplace_back(d, detail::log_big(c));
    t.counts_ = counts;
    t.grid_ = std::move(grid);
    for (double a : t.grid_) t.logz_.push_back(t.eval_counts(a));
    return t;
  }

  static LogZTable from_closed_form(Metric metric, int n, std::vector<double> grid) {
    LogZTable t;
    t.metric_ = metric;
    t.n_ = n;
    t.method_ = LogZMethod::closed_form;
    t.grid_ = std::move(grid);
    for (double a : t.grid_) t.logz_.push_back(closed_form_logz(metric, n, a));
    return t;
  }

  static LogZTable from_estimates(Metric metric, int n, std::vector<double> grid,
                                  std::vector<double> logz, std::vector<double> se) {
    if (grid.empty() || grid.size() != logz.size() || grid.size() != se.size())
      throw DataError("log Z table: grid/logz/se size mismatch");
    if (!std::is_sorted(grid.begin(), grid.end())) throw DataError("log Z table: grid not sorted");
    LogZTable t;
    t.metric_ = metric;
    t.n_ = n;
    t.method_ = LogZMethod::importance_sampling;
    t.grid_ = std::move(grid);
    t.logz_ = std::move(logz);
    t.se_ = std::move(se);
    return t;
  }

  /// Versioned text serialization (see write/read below).
  void write(std::ostream& os) const;
  static LogZTable read(std::istream& is);

 private:
  double eval_counts(double alpha) const {
    std::vector<double> terms;
    terms.reserve(log_counts_.size());
    for (const auto& [d, lc] : log_counts_) terms.push_back(lc - alpha * static_cast<double>(d) / n_);
    return detail::log_sum_exp(terms);
  }

  double interpolate(double alpha) const {
    auto it = std::upper_bound(grid_.begin(), grid_.end(), alpha);
    if (it == grid_.begin()) return logz_.front();
    if (it == grid_.end()) return logz_.back();
    const auto hi = static_cast<std::size_t>(it - grid_.begin());
    const auto lo = hi - 1;
    const double w = (alpha - grid_[lo]) / (grid_[hi] - grid_[lo]);
    return (1.0 - w) * logz_[lo] + w * logz_[hi];
  }

  Metric metric_ = Metric::footrule;
  int n_ = 0;
  LogZMethod method_ = LogZMethod::exact;
  std::vector<double> grid_;
  std::vector<double> logz_;
  std::vector<double> se_;
  std::vector<std::pair<std::int64_t, double>> log_counts_;
  std::optional<DistanceCounts> counts_;
};

enum class IsProposal {
  /// Items visited in random order; each takes a free rank with probability
  /// proportional to exp(-(alpha/n) * cost(item, rank)).
  pseudo_likelihood,
  /// Uniform permutations, one shared batch of draws for the whole grid.
  uniform,
};

/// Importance-sampling estimate of log Z on a grid.
inline LogZTable is_logz(Metric metric, int n, const std::vector<double>& alpha_grid,
                         std::int64_t n_samples, std::uint64_t seed,
                         IsProposal proposal = IsProposal::pseudo_likelihood) {
  if (alpha_grid.empty()) throw ConfigError("is_logz: empty alpha grid");
  if (n_samples < 1) throw ConfigError("is_logz: need at least one sample");
  const bool positional =
      metric == Metric::footrule || metric == Metric::spearman || metric == Metric::hamming;
  if (!positional) proposal = IsProposal::uniform;

  const Ranking identity = Ranking::identity(n);
  const double log_nfact = detail::log_factorial(n);
  const auto K = static_cast<double>(n_samples);

  // log mean of exp(lw) and the delta-method standard error of that log mean.
  auto summarize = [K](const std::vector<double>& lw) -> std::pair<double, double> {
    double top = -std::numeric_limits<double>::infinity();
    for (double x : lw) top = std::max(top, x);
    double s1 = 0.0, s2 = 0.0;
    for (double x : lw) {
      const double e = std::exp(x - top);
      s1 += e;
      s2 += e * e;
    }
    const double mean = s1 / K;
    const double var = std::max(0.0, s2 / K - mean * mean);
    const double se = (mean > 0.0 && K > 1) ? std::sqrt(var / (K - 1.0)) / mean : 0.0;
    return {top + std::log(mean), se};
  };

  std::vector<double> logz, se;
  if (proposal == IsProposal::uniform) {
    Rng rng(seed);
    std::vector<std::int64_t> dists(static_cast<std::size_t>(n_samples));
    for (auto& d : dists) d = distance(metric, Ranking::random(n, rng), identity);
    std::vector<double> lw(dists.size());
    for (double a : alpha_grid) {
      for (std::size_t k = 0; k < dists.size(); ++k) lw[k] = -(a / n) * static_cast<double>(dists[k]);
      auto [lm, s] = summarize(lw);
      logz.push_back(log_nfact + lm);
      se.push_back(s);
    }
    return LogZTable::from_estimates(metric, n, alpha_grid, std::move(logz), std::move(se));
  }

  auto cost = [metric](int item, int rank) -> double {
    const double diff = item - rank;
    switch (metric) {
      case Metric::footrule: return std::abs(diff);
      case Metric::spearman: return diff * diff;
      default: return diff != 0.0 ? 1.0 : 0.0;
    }
  };
  std::vector<int> items(static_cast<std::size_t>(n));
  std::vector<int> free_ranks;
  std::vector<double> logp;
  std::vector<double> lw(static_cast<std::size_t>(n_samples));
  for (std::size_t gi = 0; gi < alpha_grid.size(); ++gi) {
    const double a = alpha_grid[gi];
    Rng rng(derive_seed(seed, gi));
    for (auto& w : lw) {
      for (int i = 0; i < n; ++i) items[static_cast<std::size_t>(i)] = i;
      rng.shuffle(items);
      free_ranks.resize(static_cast<std::size_t>(n));
      for (int r = 0; r < n; ++r) free_ranks[static_cast<std::size_t>(r)] = r;
      double log_q = 0.0, total_cost = 0.0;
      for (int item : items) {
        logp.resize(free_ranks.size());
        for (std::size_t k = 0; k < free_ranks.size(); ++k) logp[k] = -(a / n) * cost(item, free_ranks[k]);
        const double norm = detail::log_sum_exp(logp);
        const std::size_t pick = rng.categorical_log(logp);
        log_q += logp[pick] - norm;
        total_cost += cost(item, free_ranks[pick]);
        free_ranks.erase(free_ranks.begin() + static_cast<std::ptrdiff_t>(pick));
      }
      w = -(a / n) * total_cost - log_q;
    }
    auto [lm, s] = summarize(lw);
    logz.push_back(lm);
    se.push_back(s);
  }
  return LogZTable::from_estimates(metric, n, alpha_grid, std::move(logz), std::move(se));
}

inline std::vector<double> make_alpha_grid(double alpha_max, double grid_step) {
  if (!(alpha_max > 0.0) || !(grid_step > 0.0))
    throw ConfigError("alpha grid: alpha_max and grid_step must be positive");
  std::vector<double> grid;
  const auto steps = static_cast<std::int64_t>(std::ceil(alpha_max / grid_step - 1e-9));
  for (std::int64_t k = 0; k <= steps; ++k) grid.push_back(std::min(alpha_max, k * grid_step));
  return grid;
}

struct TableOptions {
  double alpha_max = 40.0;
  double grid_step = 0.1;
  std::int64_t is_samples = 2000;
  std::uint64_t seed = 1;
};

/// Closed form where available, exact counting where feasible, otherwise
/// importance sampling.
inline LogZTable build_table(Metric metric, int n, const TableOptions& opt = {}) {
  auto grid = make_alpha_grid(opt.alpha_max, opt.grid_step);
  if (has_closed_form(metric)) return LogZTable::from_closed_form(metric, n, std::move(grid));
  if (n <= exact_count_limit(metric)) return LogZTable::from_counts(exact_counts(metric, n), std::move(grid));
  return is_logz(metric, n, grid, opt.is_samples, opt.seed);
}

// Text format:
//   mallows-logz 1
//   metric <name>
//   n <int>
//   method <exact|closed_form|importance_sampling>
//   counts <k>            (exact only; followed by k lines "<distance> <count>")
//   grid <m>              (followed by m lines "<alpha> <logz> <se>")
inline void LogZTable::write(std::ostream& os) const {
  os << "mallows-logz 1\n";
  os << "metric " << to_string(metric_) << "\n";
  os << "n " << n_ << "\n";
  os << "method " << to_string(method_) << "\n";
  if (method_ == LogZMethod::exact) {
    os << "counts " << counts_->counts.size() << "\n";
    for (const auto& [d, c] : counts_->counts) os << d << " " << c << "\n";
  }
  os << "grid " << grid_.size() << "\n";
  char buf[128];
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", grid_[i], logz_[i], se_.empty() ? 0.0 : se_[i]);
    os << buf;
  }
}

inline LogZTable LogZTable::read(std::istream& is) {
  auto expect = [&is](const char* key) {
    std::string k;
    if (!(is >> k) || k != key) throw DataError(std::string("log Z cache: expected '") + key + "'");
  };
  expect("mallows-logz");
  int version = 0;
  is >> version;
  if (version != 1) throw DataError("log Z cache: unsupported version " + std::to_string(version));
  std::string word;
  expect("metric");
  is >> word;
  const Metric metric = parse_metric(word);
  expect("n");
  int n = 0;
  is >> n;
  expect("method");
  is >> word;
  const LogZMethod method = parse_logz_method(word);
  DistanceCounts counts{metric, n, {}};
  if (method == LogZMethod::exact) {
    expect("counts");
    std::size_t k = 0;
    is >> k;
    for (std::size_t i = 0; i < k; ++i) {
      std::int64_t d;
      std::string c;
      if (!(is >> d >> c)) throw DataError("log Z cache: truncated counts");
      counts.counts[d] = BigInt(c);
    }
  }
  expect("grid");
  std::size_t m = 0;
  is >> m;
  std::vector<double> grid(m), logz(m), se(m);
  for (std::size_t i = 0; i < m; ++i)
    if (!(is >> grid[i] >> logz[i] >> se[i])) throw DataError("log Z cache: truncated grid");
  switch (method) {
    case LogZMethod::exact: return from_counts(counts, std::move(grid));
    case LogZMethod::closed_form: return from_closed_form(metric, n, std::move(grid));
    case LogZMethod::importance_sampling:
      return from_estimates(metric, n, std::move(grid), std::move(logz), std::move(se));
  }
  return {};
}

}  // namespace mallows
