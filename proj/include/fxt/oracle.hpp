#pragma once

#include <algorithm>
#include <map>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <fxt/mining.hpp>
#include <fxt/rational.hpp>
#include <fxt/transactions.hpp>
#include <fxt/tree.hpp>

namespace fxt {

/// Number of transactions in the log containing every item of the itemset.
/// Plain linear scan, no indexing; this is the ground truth everything else
/// is checked against.
inline std::uint64_t exact_count(const TransactionLog& log,
                                 std::span<const Item> itemset) {
  if (!is_normalized(itemset))
    throw std::invalid_argument("exact_count: itemset must be normalized");
  std::uint64_t count = 0;
  for (const auto& t : log.transactions) {
    if (std::includes(t.items.begin(), t.items.end(), itemset.begin(),
                      itemset.end()))
      ++count;
  }
  return count;
}

inline std::uint64_t exact_count(const TransactionLog& log,
                                 const std::vector<Item>& itemset) {
  return exact_count(log, std::span<const Item>(itemset.data(), itemset.size()));
}

struct FrequentCount {
  std::vector<Item> itemset;
  std::uint64_t count = 0;
};

/// Classical level-wise Apriori over the retained log: candidate generation
/// by join + prune, support counting by transaction scan. Returns every
/// itemset whose support meets min_support (inclusive), sorted by size then
/// lexicographically. Intentionally unoptimized; it is the recompute-from-
/// scratch baseline the tree is compared against.
inline std::vector<FrequentCount> apriori_frequent(const TransactionLog& log,
                                                   Ratio min_support) {
  if (log.empty())
    throw std::invalid_argument(
        "apriori_frequent: support is undefined on an empty log");
  const std::uint64_t n = log.size();

  std::vector<FrequentCount> result;

  // Level 1: count every distinct item.
  std::map<Item, std::uint64_t> singles;
  for (const auto& t : log.transactions)
    for (const auto& item : t.items) ++singles[item];

  std::vector<std::vector<Item>> level;
  for (const auto& [item, count] : singles) {
    if (meets_threshold(count, n, min_support)) {
      level.push_back({item});
      result.push_back(FrequentCount{{item}, count});
    }
  }

  while (!level.empty()) {
    // Join: pairs sharing all but their last item, combined in sorted order.
    std::vector<std::vector<Item>> candidates;
    for (std::size_t i = 0; i < level.size(); ++i) {
      for (std::size_t j = i + 1; j < level.size(); ++j) {
        const auto& a = level[i];
        const auto& b = level[j];
        if (!std::equal(a.begin(), a.end() - 1, b.begin(), b.end() - 1)) break;
        std::vector<Item> joined = a;
        joined.push_back(b.back());
        // Prune: every (k-1)-subset must be frequent.
        bool keep = true;
        for (std::size_t skip = 0; keep && skip + 1 < joined.size(); ++skip) {
          std::vector<Item> sub;
          for (std::size_t m = 0; m < joined.size(); ++m)
            if (m != skip) sub.push_back(joined[m]);
          keep = std::binary_search(level.begin(), level.end(), sub);
        }
        if (keep) candidates.push_back(std::move(joined));
      }
    }
    if (candidates.empty()) break;

    std::vector<std::uint64_t> counts(candidates.size(), 0);
    for (const auto& t : log.transactions) {
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        if (std::includes(t.items.begin(), t.items.end(),
                          candidates[c].begin(), candidates[c].end()))
          ++counts[c];
      }
    }

    level.clear();
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (meets_threshold(counts[c], n, min_support)) {
        result.push_back(FrequentCount{candidates[c], counts[c]});
        level.push_back(std::move(candidates[c]));
      }
    }
    std::sort(level.begin(), level.end());
  }

  std::sort(result.begin(), result.end(),
            [](const FrequentCount& a, const FrequentCount& b) {
              if (a.itemset.size() != b.itemset.size())
                return a.itemset.size() < b.itemset.size();
              return a.itemset < b.itemset;
            });
  return result;
}

// ---------------------------------------------------------------------------
// Soundness verification
// ---------------------------------------------------------------------------

/// A tree counter exceeding the exact count. The construction algorithm can
/// undercount after path-split histories but must never overcount, so this is
/// always an implementation bug.
class OvercountError : public std::logic_error {
  using std::logic_error::logic_error;
};

struct SoundnessDiscrepancy {
  std::vector<Item> path;
  std::uint64_t fxt_counter = 0;
  std::uint64_t exact = 0;
};

struct SoundnessReport {
  std::size_t total_paths = 0;
  std::size_t exact_paths = 0;
  std::vector<SoundnessDiscrepancy> discrepancies;  // undercounts only

  bool clean() const noexcept { return discrepancies.empty(); }
};

namespace detail {
inline void verify_node(const Fxt& tree, const FxtNode& node,
                        const TransactionLog& log, std::vector<Item>& path,
                        SoundnessReport& report) {
  path.push_back(tree.name_of(node));
  const std::uint64_t exact = exact_count(log, path);
  ++report.total_paths;
  if (node.counter() == exact) {
    ++report.exact_paths;
  } else if (node.counter() < exact) {
    report.discrepancies.push_back(
        SoundnessDiscrepancy{path, node.counter(), exact});
  } else {
    throw OvercountError("path " + path_string(path) + " has counter " +
                         std::to_string(node.counter()) +
                         " but only " + std::to_string(exact) +
                         " transactions contain it");
  }
  for (const FxtNode* child : node.children())
    verify_node(tree, *child, log, path, report);
  path.pop_back();
}
}  // namespace detail

/// Compares every materialized path's counter with its exact count over the
/// log the tree was built from. Undercounts are reported; an overcount throws
/// OvercountError.
inline SoundnessReport verify_soundness(const Fxt& tree,
                                        const TransactionLog& log) {
  SoundnessReport report;
  if (tree.root_counter() != log.size())
    throw std::invalid_argument(
        "verify_soundness: root counter " +
        std::to_string(tree.root_counter()) +
        " does not match the log size " + std::to_string(log.size()) +
        "; the tree was not built from this log");
  std::vector<Item> path;
  for (const FxtNode* b : tree.breadth())
    detail::verify_node(tree, *b, log, path, report);
  return report;
}

inline void write_soundness_csv(const SoundnessReport& report,
                                std::ostream& out) {
  out << "path,fxt_counter,exact_count\n";
  for (const auto& d : report.discrepancies) {
    out << csv_field(path_string(d.path)) << ',' << d.fxt_counter << ','
        << d.exact << '\n';
  }
}

inline std::string soundness_summary(const SoundnessReport& report) {
  std::string s = "paths: " + std::to_string(report.total_paths) +
                  ", exact: " + std::to_string(report.exact_paths) +
                  ", undercounts: " + std::to_string(report.discrepancies.size());
  return s;
}

}  // namespace fxt
