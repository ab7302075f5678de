#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <ostream>
#include <vector>

#include <fxt/mining.hpp>
#include <fxt/oracle.hpp>
#include <fxt/rational.hpp>
#include <fxt/serialize.hpp>
#include <fxt/transactions.hpp>
#include <fxt/tree.hpp>

namespace fxt {

struct LatencySample {
  std::size_t tree_size = 0;  // transactions inserted when the window closed
  std::chrono::nanoseconds median{0};
  std::chrono::nanoseconds p95{0};
};

struct TimedQuery {
  Ratio min_support;
  std::chrono::nanoseconds elapsed{0};
};

struct BenchReport {
  std::size_t n_transactions = 0;
  std::chrono::nanoseconds build_wall_time{0};
  std::vector<LatencySample> per_insert_latency;  // tree sizes increasing
  std::size_t node_count = 0;
  std::size_t serialized_bytes = 0;
  std::vector<TimedQuery> mine_times;      // tree queries
  std::vector<TimedQuery> baseline_times;  // Apriori reruns over the log
};

struct BenchConfig {
  std::size_t n_transactions = 10000;
  std::size_t alphabet_size = 100;
  std::size_t avg_len = 15;
  std::uint64_t seed = 1;
  std::vector<Ratio> supports;
  bool run_baseline = false;
};

namespace detail {
inline std::chrono::nanoseconds percentile(std::vector<std::chrono::nanoseconds> v,
                                           double q) {
  if (v.empty()) return std::chrono::nanoseconds{0};
  auto idx = static_cast<std::size_t>(q * static_cast<double>(v.size() - 1));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(idx),
                   v.end());
  return v[idx];
}

/// 1-2-5 series sample points up to n.
inline std::vector<std::size_t> sample_sizes(std::size_t n) {
  std::vector<std::size_t> sizes;
  for (std::size_t decade = 1;; decade *= 10) {
    for (std::size_t mult : {std::size_t{1}, std::size_t{2}, std::size_t{5}}) {
      const std::size_t s = decade * mult;
      if (s > n) return sizes;
      sizes.push_back(s);
    }
  }
}
}  // namespace detail

/// Builds the tree from a synthetic log, timing every insertion, then mines
/// at each support; with the baseline enabled, also times a from-scratch
/// Apriori run per support. All non-timing fields are deterministic for a
/// given seed.
inline BenchReport run_bench(const BenchConfig& config) {
  using clock = std::chrono::steady_clock;

  BenchReport report;
  report.n_transactions = config.n_transactions;

  const TransactionLog log =
      generate_synthetic(config.seed, config.n_transactions,
                         config.alphabet_size, config.avg_len);

  Fxt tree;
  std::vector<std::chrono::nanoseconds> latencies;
  latencies.reserve(log.size());
  const auto build_start = clock::now();
  for (const auto& t : log.transactions) {
    const auto t0 = clock::now();
    tree.insert(t);
    latencies.push_back(
        std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - t0));
  }
  report.build_wall_time = std::chrono::duration_cast<std::chrono::nanoseconds>(
      clock::now() - build_start);

  // Latency windows ending at each sample size: inserts (s - w, s].
  for (std::size_t s : detail::sample_sizes(log.size())) {
    const std::size_t w = std::min(s, std::max<std::size_t>(16, s / 8));
    std::vector<std::chrono::nanoseconds> window(
        latencies.begin() + static_cast<std::ptrdiff_t>(s - w),
        latencies.begin() + static_cast<std::ptrdiff_t>(s));
    LatencySample sample;
    sample.tree_size = s;
    sample.median = detail::percentile(window, 0.5);
    sample.p95 = detail::percentile(std::move(window), 0.95);
    report.per_insert_latency.push_back(sample);
  }

  report.node_count = tree.node_count();
  report.serialized_bytes = dump_fxt(tree, FxtFormat::paper_compatible).size();

  for (Ratio s : config.supports) {
    const auto t0 = clock::now();
    const auto itemsets = frequent_itemsets(tree, s);
    const auto elapsed =
        std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - t0);
    (void)itemsets;
    report.mine_times.push_back(TimedQuery{s, elapsed});
  }

  if (config.run_baseline && !log.empty()) {
    for (Ratio s : config.supports) {
      const auto t0 = clock::now();
      const auto frequent = apriori_frequent(log, s);
      const auto elapsed = std::chrono::duration_cast<std::chrono::nanoseconds>(
          clock::now() - t0);
      (void)frequent;
      report.baseline_times.push_back(TimedQuery{s, elapsed});
    }
  }
  return report;
}

/// Uniform three-column CSV: kind,key,value.
inline void write_bench_csv(const BenchReport& report, std::ostream& out) {
  out << "kind,key,value\n";
  out << "summary,n_transactions," << report.n_transactions << '\n';
  out << "summary,build_wall_ns," << report.build_wall_time.count() << '\n';
  out << "summary,node_count," << report.node_count << '\n';
  out << "summary,serialized_bytes," << report.serialized_bytes << '\n';
  for (const auto& s : report.per_insert_latency) {
    out << "latency_median_ns," << s.tree_size << ',' << s.median.count()
        << '\n';
    out << "latency_p95_ns," << s.tree_size << ',' << s.p95.count() << '\n';
  }
  for (const auto& q : report.mine_times)
    out << "mine_ns," << format_ratio(q.min_support) << ',' << q.elapsed.count()
        << '\n';
  for (const auto& q : report.baseline_times)
    out << "baseline_ns," << format_ratio(q.min_support) << ','
        << q.elapsed.count() << '\n';
}

/// Per-insert latency data in gnuplot's whitespace format.
inline void write_bench_plot_data(const BenchReport& report,
                                  std::ostream& out) {
  out << "# tree_size median_ns p95_ns\n";
  for (const auto& s : report.per_insert_latency)
    out << s.tree_size << ' ' << s.median.count() << ' ' << s.p95.count()
        << '\n';
}

}  // namespace fxt
