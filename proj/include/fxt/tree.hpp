#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <fxt/transactions.hpp>

namespace fxt {

namespace detail {
/// Set-of-labels fingerprint over a node's root path. Bits are label ids
/// modulo 128; the containment test is exact while a tree has fewer than 128
/// distinct items and a conservative prefilter beyond that.
struct PathBits {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;

  static PathBits bit(std::int32_t label) {
    PathBits b;
    const auto i = static_cast<std::uint32_t>(label) % 128u;
    (i < 64 ? b.lo : b.hi) |= std::uint64_t{1} << (i % 64u);
    return b;
  }

  PathBits operator|(PathBits other) const {
    return PathBits{lo | other.lo, hi | other.hi};
  }

  bool contains(PathBits sub) const {
    return (lo & sub.lo) == sub.lo && (hi & sub.hi) == sub.hi;
  }
};
}  // namespace detail

/// One labeled, counted node of the tree. Nodes are owned by their Fxt and
/// mutated only through it.
class FxtNode {
 public:
  std::int32_t label() const noexcept { return label_; }
  std::uint64_t counter() const noexcept { return counter_; }
  const FxtNode* parent() const noexcept { return parent_; }
  /// 1 for breadth nodes (root children), increasing downward.
  std::uint32_t depth() const noexcept { return depth_; }
  std::span<const FxtNode* const> children() const noexcept {
    return {const_cast<const FxtNode* const*>(children_.data()),
            children_.size()};
  }

 private:
  friend class Fxt;

  FxtNode* find_child(std::int32_t label) const {
    for (FxtNode* c : children_) {
      if (c->label_ == label) return c;
    }
    return nullptr;
  }

  std::int32_t label_ = -1;
  std::uint32_t depth_ = 0;
  std::uint64_t counter_ = 0;
  FxtNode* parent_ = nullptr;
  detail::PathBits path_bits_;
  std::vector<FxtNode*> children_;
};

/// Frequency tree over sorted transactions. The root carries the number of
/// inserted transactions; breadth nodes carry exact per-item occurrence
/// counts; deeper nodes carry the (possibly undercounted, never overcounted)
/// number of transactions containing the itemset spelled by their root path.
///
/// Writers must be serialized; queries and serialization may share a tree
/// only while no insertion is running. The tree is movable but not copyable;
/// clone() produces an independent snapshot.
class Fxt {
 public:
  Fxt() {
    root_.label_ = -1;
    root_.depth_ = 0;
  }

  Fxt(Fxt&&) noexcept = default;
  Fxt& operator=(Fxt&&) noexcept = default;
  Fxt(const Fxt&) = delete;
  Fxt& operator=(const Fxt&) = delete;

  std::uint64_t root_counter() const noexcept { return root_.counter_; }
  std::size_t node_count() const noexcept { return node_count_; }
  std::span<const FxtNode* const> breadth() const noexcept {
    return root_.children();
  }
  const FxtNode* root() const noexcept { return &root_; }

  const std::string& label_name(std::int32_t label) const {
    return names_.at(static_cast<std::size_t>(label));
  }

  const std::string& name_of(const FxtNode& node) const {
    return label_name(node.label_);
  }

  /// Root-to-node item labels.
  std::vector<Item> path_of(const FxtNode& node) const {
    std::vector<Item> path;
    for (const FxtNode* n = &node; n != nullptr && n->depth_ > 0;
         n = n->parent_)
      path.push_back(label_name(n->label_));
    std::reverse(path.begin(), path.end());
    return path;
  }

  /// Inserts one transaction: increments the root counter, then applies the
  /// breadth, depth, and other-paths steps. The combined effect is that every
  /// existing node whose label path is a subsequence of the items is
  /// incremented exactly once, and the transaction's own sorted path is
  /// materialized. id/time never influence the tree.
  void insert(const NormalizedTransaction& t) {
    if (!is_normalized(t.items))
      throw std::invalid_argument(
          "transaction \"" + t.id +
          "\" is not normalized (items must be strictly increasing)");
    for (const auto& item : t.items) {
      if (item.empty())
        throw std::invalid_argument("transaction \"" + t.id +
                                    "\": empty item label");
    }

    ++root_.counter_;

    const std::size_t n = t.items.size();
    ids_buf_.clear();
    for (const auto& item : t.items) ids_buf_.push_back(intern(item));
    const std::span<const std::int32_t> ids(ids_buf_.data(), n);

    increment_or_create_breadth(ids);
    increment_or_create_depth(ids);
    update_other_paths(ids);
  }

  /// Node reached by following `path` from the root, or nullptr. The path
  /// must be non-empty and strictly increasing.
  const FxtNode* node_at(std::span<const Item> path) const {
    if (path.empty())
      throw std::invalid_argument("node_at: path must be non-empty");
    for (std::size_t i = 1; i < path.size(); ++i) {
      if (!(path[i - 1] < path[i]))
        throw std::invalid_argument(
            "node_at: path must be strictly increasing");
    }
    const FxtNode* node = &root_;
    for (const auto& item : path) {
      auto it = ids_.find(std::string_view(item));
      if (it == ids_.end()) return nullptr;
      node = node->find_child(it->second);
      if (node == nullptr) return nullptr;
    }
    return node;
  }

  const FxtNode* node_at(const std::vector<Item>& path) const {
    return node_at(std::span<const Item>(path.data(), path.size()));
  }

  /// Deep copy; the snapshot mechanism for concurrent readers.
  Fxt clone() const {
    Fxt copy;
    copy.root_.counter_ = root_.counter_;
    for (const FxtNode* b : root_.children_) copy.copy_subtree(nullptr, *this, b);
    return copy;
  }

  // --- Deserialization support -------------------------------------------
  // These bypass the insertion algorithm but preserve every structural
  // invariant, so a loaded tree behaves exactly like a built one.

  void set_root_counter(std::uint64_t value) noexcept {
    root_.counter_ = value;
  }

  /// Adds a child with a given counter under `parent` (nullptr for the root).
  /// Rejects duplicate siblings, labels not strictly greater than the
  /// parent's, and zero counters.
  FxtNode* restore_child(FxtNode* parent, const Item& name,
                         std::uint64_t counter) {
    if (name.empty())
      throw std::invalid_argument("item name must be non-empty");
    if (counter == 0)
      throw std::invalid_argument("item node \"" + name +
                                  "\" must have counter >= 1");
    FxtNode* target = parent == nullptr ? &root_ : parent;
    if (target != &root_ && !(label_name(target->label_) < name))
      throw std::invalid_argument("child \"" + name +
                                  "\" must sort after its parent \"" +
                                  label_name(target->label_) + "\"");
    const std::int32_t id = intern(name);
    if (target->find_child(id) != nullptr)
      throw std::invalid_argument("duplicate sibling \"" + name + "\"");
    FxtNode* node = create_child(target, id);
    node->counter_ = counter;
    return node;
  }

 private:
  using PathBits = detail::PathBits;

  struct IndexEntry {
    PathBits bits;
    FxtNode* node;
  };

  std::int32_t intern(const Item& name) {
    auto it = ids_.find(std::string_view(name));
    if (it != ids_.end()) return it->second;
    const auto id = static_cast<std::int32_t>(names_.size());
    names_.push_back(name);
    ids_.emplace(std::string_view(names_.back()), id);
    if (names_.size() > 128) bits_exact_ = false;
    return id;
  }

  static std::uint64_t pair_key(std::int32_t ancestor, std::int32_t label) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(ancestor))
            << 32) |
           static_cast<std::uint32_t>(label);
  }

  FxtNode* create_child(FxtNode* parent, std::int32_t label) {
    arena_.emplace_back();
    FxtNode* node = &arena_.back();
    node->label_ = label;
    node->parent_ = parent == &root_ ? nullptr : parent;
    node->depth_ = parent->depth_ + 1;
    node->path_bits_ = parent->path_bits_ | PathBits::bit(label);
    parent->children_.push_back(node);
    ++node_count_;
    // Depth nodes join the ancestor/label pair index that backs the max+1
    // initialization lookup.
    for (const FxtNode* a = node->parent_; a != nullptr; a = a->parent_)
      pair_index_[pair_key(a->label_, label)].push_back(
          IndexEntry{node->path_bits_, node});
    return node;
  }

  // Step 2: every item of the transaction gets its breadth node incremented
  // or created at 1. Breadth counters are exact occurrence counts.
  void increment_or_create_breadth(std::span<const std::int32_t> ids) {
    for (std::int32_t id : ids) {
      FxtNode* child = root_.find_child(id);
      if (child != nullptr) {
        ++child->counter_;
      } else {
        create_child(&root_, id)->counter_ = 1;
      }
    }
  }

  // Step 3: materializes the transaction's own path. Existing nodes along it
  // are incremented; a missing node labeled x after prefix (i1..ik) starts at
  // one more than the largest counter among existing nodes labeled x lying
  // under the in-order descendant pattern i1 // ... // ik // x.
  void increment_or_create_depth(std::span<const std::int32_t> ids) {
    if (ids.size() < 2) return;
    FxtNode* node = root_.find_child(ids[0]);
    for (std::size_t k = 1; k < ids.size(); ++k) {
      const std::int32_t x = ids[k];
      FxtNode* next = node->find_child(x);
      if (next != nullptr) {
        ++next->counter_;
      } else {
        const std::uint64_t m = max_pattern_counter(ids.first(k), x);
        next = create_child(node, x);
        next->counter_ = m + 1;
      }
      node = next;
    }
  }

  /// Largest counter among existing nodes labeled x whose root path contains
  /// every prefix item (order is implied: paths and prefixes are both
  /// strictly increasing). 0 when no node matches.
  std::uint64_t max_pattern_counter(std::span<const std::int32_t> prefix,
                                    std::int32_t x) const {
    // A matching node appears in the pair list of each of its path items, so
    // scanning the shortest (prefix item, x) list sees every match.
    const std::vector<IndexEntry>* candidates = nullptr;
    for (std::int32_t a : prefix) {
      auto it = pair_index_.find(pair_key(a, x));
      if (it == pair_index_.end()) return 0;
      if (candidates == nullptr || it->second.size() < candidates->size())
        candidates = &it->second;
    }
    PathBits required;
    for (std::int32_t a : prefix) required = required | PathBits::bit(a);

    std::uint64_t best = 0;
    for (const IndexEntry& entry : *candidates) {
      if (!entry.bits.contains(required)) continue;
      if (!bits_exact_ && !path_contains(entry.node, prefix)) continue;
      best = std::max(best, entry.node->counter_);
    }
    return best;
  }

  static bool path_contains(const FxtNode* node,
                            std::span<const std::int32_t> prefix) {
    std::size_t remaining = prefix.size();
    for (const FxtNode* a = node->parent_; a != nullptr && remaining > 0;
         a = a->parent_) {
      if (std::find(prefix.begin(), prefix.end(), a->label_) != prefix.end())
        --remaining;
    }
    return remaining == 0;
  }

  // Step 4: every node already in the tree whose label path is a subsequence
  // (length >= 2) of the transaction and is not the transaction's own path
  // gets one more count. No nodes are created.
  void update_other_paths(std::span<const std::int32_t> ids) {
    if (ids.size() < 2) return;
    member_.assign(names_.size(), false);
    for (std::int32_t id : ids) member_[static_cast<std::size_t>(id)] = true;
    walk_other_paths(&root_, ids, true);
  }

  void walk_other_paths(FxtNode* node, std::span<const std::int32_t> ids,
                        bool on_prefix) {
    for (FxtNode* child : node->children_) {
      if (!member_[static_cast<std::size_t>(child->label_)]) continue;
      const bool child_on_prefix = on_prefix && child->depth_ <= ids.size() &&
                                   child->label_ == ids[child->depth_ - 1];
      if (child->depth_ >= 2 && !child_on_prefix) ++child->counter_;
      walk_other_paths(child, ids, child_on_prefix);
    }
  }

  void copy_subtree(FxtNode* parent, const Fxt& src, const FxtNode* node) {
    FxtNode* copied =
        restore_child(parent, src.label_name(node->label_), node->counter_);
    for (const FxtNode* c : node->children_) copy_subtree(copied, src, c);
  }

  FxtNode root_;
  std::deque<FxtNode> arena_;
  std::size_t node_count_ = 0;

  std::deque<std::string> names_;  // stable storage backing the views in ids_
  std::unordered_map<std::string_view, std::int32_t> ids_;
  bool bits_exact_ = true;

  std::unordered_map<std::uint64_t, std::vector<IndexEntry>> pair_index_;

  // Scratch buffers reused across insertions.
  std::vector<std::int32_t> ids_buf_;
  std::vector<char> member_;
};

}  // namespace fxt
