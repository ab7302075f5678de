#pragma once

#include <cassert>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <fxt/rational.hpp>
#include <fxt/tree.hpp>
#include <fxt/xml.hpp>

namespace fxt {

struct FrequentItemset {
  std::vector<Item> path;  // root-to-node labels, strictly increasing
  std::uint64_t count = 0;
  Ratio support;  // count / root_counter
};

/// Association rule body => head with head a single item (the shape the tree
/// traversal produces; multi-item heads are out of scope).
struct Rule {
  std::vector<Item> body;
  Item head;
  std::uint64_t count = 0;  // transactions counted for body + head
  Ratio support;            // count / root_counter
  Ratio confidence;         // count / count(body)
};

struct MiningParams {
  Ratio min_support;
  Ratio min_confidence;
};

/// Support of an itemset read straight off the tree: counter at the path
/// over the root counter, or nullopt when the path was never materialized
/// (the tree cannot answer those; exact answers come from the oracle).
inline std::optional<Ratio> support_of(const Fxt& tree,
                                       std::span<const Item> itemset) {
  if (tree.root_counter() == 0)
    throw std::domain_error("support is undefined on an empty tree");
  const FxtNode* node = tree.node_at(itemset);
  if (node == nullptr) return std::nullopt;
  return Ratio{node->counter(), tree.root_counter()};
}

inline std::optional<Ratio> support_of(const Fxt& tree,
                                       const std::vector<Item>& itemset) {
  return support_of(tree, std::span<const Item>(itemset.data(), itemset.size()));
}

namespace detail {
inline void collect_frequent(const Fxt& tree, const FxtNode& node,
                             Ratio min_support, std::vector<Item>& path,
                             std::vector<FrequentItemset>& out) {
  if (!meets_threshold(node.counter(), tree.root_counter(), min_support))
    return;  // Apriori property: no descendant can pass either
  path.push_back(tree.name_of(node));
  out.push_back(FrequentItemset{path, node.counter(),
                                Ratio{node.counter(), tree.root_counter()}});
  for (const FxtNode* child : node.children()) {
    assert(child->counter() <= node.counter());
    collect_frequent(tree, *child, min_support, path, out);
  }
  path.pop_back();
}
}  // namespace detail

/// All materialized paths whose support meets min_support (inclusive), in
/// pre-order with children in insertion order. Children of a failing node
/// are pruned. Complete over materialized paths only; the oracle module
/// gives the full answer.
inline std::vector<FrequentItemset> frequent_itemsets(const Fxt& tree,
                                                      Ratio min_support) {
  std::vector<FrequentItemset> out;
  if (tree.root_counter() == 0) return out;
  std::vector<Item> path;
  for (const FxtNode* b : tree.breadth())
    detail::collect_frequent(tree, *b, min_support, path, out);
  return out;
}

namespace detail {
inline void collect_rules(const Fxt& tree, const FxtNode& parent,
                          const MiningParams& params, std::vector<Item>& body,
                          std::vector<Rule>& out) {
  body.push_back(tree.name_of(parent));
  for (const FxtNode* child : parent.children()) {
    // Descend only while the child's support holds up (Apriori pruning);
    // the confidence test gates emission alone.
    if (!meets_threshold(child->counter(), tree.root_counter(),
                         params.min_support))
      continue;
    const Ratio support{child->counter(), tree.root_counter()};
    const Ratio confidence{child->counter(), parent.counter()};
    if (confidence >= params.min_confidence)
      out.push_back(Rule{body, tree.name_of(*child), child->counter(), support,
                         confidence});
    collect_rules(tree, *child, params, body, out);
  }
  body.pop_back();
}
}  // namespace detail

/// One candidate rule per parent->child edge below the root: body is the path
/// to the parent, head is the child item, support counter(child)/N and
/// confidence counter(child)/counter(parent). Emitted iff both thresholds
/// hold (inclusive).
inline std::vector<Rule> association_rules(const Fxt& tree,
                                           const MiningParams& params) {
  std::vector<Rule> out;
  if (tree.root_counter() == 0) return out;
  std::vector<Item> body;
  for (const FxtNode* b : tree.breadth())
    detail::collect_rules(tree, *b, params, body, out);
  return out;
}

/// The reverse rule head => body, looked up on the tree: support is unchanged
/// (the sorted union path carries count(X u Y)); confidence divides by the
/// head's own breadth count. Returns nullopt when the head's path (or the
/// union path) is not materialized, or when the body has more than one item —
/// the reversed rule would need a multi-item head, which rules here never
/// have.
inline std::optional<Rule> reverse_rule(const Fxt& tree, const Rule& rule) {
  if (rule.body.size() != 1) return std::nullopt;
  if (tree.root_counter() == 0)
    throw std::domain_error("support is undefined on an empty tree");

  std::vector<Item> union_path = rule.body;
  union_path.push_back(rule.head);
  std::sort(union_path.begin(), union_path.end());
  const FxtNode* union_node = tree.node_at(union_path);
  if (union_node == nullptr) return std::nullopt;

  const std::vector<Item> head_path{rule.head};
  const FxtNode* head_node = tree.node_at(head_path);
  if (head_node == nullptr) return std::nullopt;

  Rule reversed;
  reversed.body = head_path;
  reversed.head = rule.body.front();
  reversed.count = union_node->counter();
  reversed.support = Ratio{union_node->counter(), tree.root_counter()};
  reversed.confidence = Ratio{union_node->counter(), head_node->counter()};
  return reversed;
}

// ---------------------------------------------------------------------------
// Result serialization (XML-shaped text and CSV)
// ---------------------------------------------------------------------------

inline std::string path_string(std::span<const Item> path) {
  std::string out;
  for (const auto& item : path) {
    out += '/';
    out += item;
  }
  return out;
}

inline std::string path_string(const std::vector<Item>& path) {
  return path_string(std::span<const Item>(path.data(), path.size()));
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

inline void write_frequent_xml(const std::vector<FrequentItemset>& itemsets,
                               std::ostream& out) {
  for (const auto& f : itemsets) {
    out << "<frequent path=\"" << xml::escape_attr(path_string(f.path))
        << "\" count=\"" << f.count << "\" support=\""
        << format_ratio(f.support) << "\"/>\n";
  }
}

inline void write_frequent_csv(const std::vector<FrequentItemset>& itemsets,
                               std::ostream& out) {
  out << "path,count,support\n";
  for (const auto& f : itemsets) {
    out << csv_field(path_string(f.path)) << ',' << f.count << ','
        << format_ratio(f.support) << '\n';
  }
}

inline void write_rules_xml(const std::vector<Rule>& rules,
                            std::ostream& out) {
  for (const auto& r : rules) {
    out << "<rule body=\"" << xml::escape_attr(path_string(r.body))
        << "\" head=\"" << xml::escape_attr(r.head) << "\" support=\""
        << format_ratio(r.support) << "\" confidence=\""
        << format_ratio(r.confidence) << "\"/>\n";
  }
}

inline void write_rules_csv(const std::vector<Rule>& rules,
                            std::ostream& out) {
  out << "body,head,support,confidence\n";
  for (const auto& r : rules) {
    out << csv_field(path_string(r.body)) << ',' << csv_field(r.head) << ','
        << format_ratio(r.support) << ',' << format_ratio(r.confidence)
        << '\n';
  }
}

}  // namespace fxt
