#pragma once

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

#include <fxt/tree.hpp>
#include <fxt/xml.hpp>

namespace fxt {

/// Tree document formats.
///  - paper_compatible: one element per item name (<A counter="2">), which
///    requires every item name to be a valid XML element name.
///  - canonical: one generic element per node (<node item="A" counter="2">),
///    no restriction on item names.
/// Both use a <root counter="N"> element, UTF-8, and LF line endings;
/// children appear in insertion order.
enum class FxtFormat { paper_compatible, canonical };

namespace detail {
inline void dump_node(const Fxt& tree, const FxtNode& node, FxtFormat format,
                      int indent, std::ostream& out) {
  const std::string& name = tree.name_of(node);
  out << std::string(static_cast<std::size_t>(indent) * 2, ' ');
  if (format == FxtFormat::paper_compatible) {
    if (!xml::is_valid_element_name(name))
      throw xml::SerializeError(
          "item \"" + name +
          "\" is not a valid XML element name; use the canonical format");
    out << '<' << name;
  } else {
    out << "<node item=\"" << xml::escape_attr(name) << '"';
  }
  out << " counter=\"" << node.counter() << '"';
  if (node.children().empty()) {
    out << "/>\n";
    return;
  }
  out << ">\n";
  for (const FxtNode* child : node.children())
    dump_node(tree, *child, format, indent + 1, out);
  out << std::string(static_cast<std::size_t>(indent) * 2, ' ') << "</"
      << (format == FxtFormat::paper_compatible ? name : std::string("node"))
      << ">\n";
}
}  // namespace detail

inline void dump_fxt(const Fxt& tree, FxtFormat format, std::ostream& out) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  if (tree.breadth().empty()) {
    out << "<root counter=\"" << tree.root_counter() << "\"/>\n";
    return;
  }
  out << "<root counter=\"" << tree.root_counter() << "\">\n";
  for (const FxtNode* b : tree.breadth())
    detail::dump_node(tree, *b, format, 1, out);
  out << "</root>\n";
}

inline std::string dump_fxt(const Fxt& tree, FxtFormat format) {
  std::ostringstream out;
  dump_fxt(tree, format, out);
  return out.str();
}

namespace detail {
inline std::uint64_t parse_counter(const xml::Event& ev,
                                   std::string_view what) {
  const std::string* raw = ev.attr("counter");
  if (raw == nullptr)
    throw xml::ParseError(ev.offset, std::string(what) +
                                         " is missing its counter attribute");
  std::string_view s = *raw;
  if (!s.empty() && s.front() == '-')
    throw xml::ParseError(ev.offset, std::string(what) +
                                         " has a negative counter \"" + *raw +
                                         "\"");
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw xml::ParseError(ev.offset, std::string(what) +
                                         " has a malformed counter \"" + *raw +
                                         "\"");
  return value;
}
}  // namespace detail

/// Loads a tree document in either format (they may even be mixed; a node is
/// canonical when it is a <node> element carrying an item attribute).
/// load_fxt(dump_fxt(t)) reproduces t's structure and counters exactly.
inline Fxt load_fxt(std::istream& in) {
  xml::Reader reader(in);
  Fxt tree;

  xml::Event ev = reader.next();
  if (ev.kind == xml::EventKind::end_of_input)
    throw xml::ParseError(ev.offset, "empty document; expected <root>");
  if (ev.kind != xml::EventKind::start_element || ev.name != "root")
    throw xml::ParseError(ev.offset, "expected a <root> element");
  tree.set_root_counter(detail::parse_counter(ev, "<root>"));

  std::vector<FxtNode*> stack;  // open item nodes; empty means under root
  for (;;) {
    ev = reader.next();
    switch (ev.kind) {
      case xml::EventKind::start_element: {
        std::string item;
        if (ev.name == "node") {
          const std::string* attr = ev.attr("item");
          if (attr == nullptr)
            throw xml::ParseError(ev.offset,
                                  "<node> is missing its item attribute");
          item = *attr;
        } else {
          item = ev.name;
        }
        const std::uint64_t counter =
            detail::parse_counter(ev, "node \"" + item + "\"");
        FxtNode* parent = stack.empty() ? nullptr : stack.back();
        try {
          stack.push_back(tree.restore_child(parent, item, counter));
        } catch (const std::invalid_argument& e) {
          throw xml::ParseError(ev.offset, e.what());
        }
        break;
      }
      case xml::EventKind::end_element:
        if (ev.name == "root") {
          // The reader guarantees proper nesting; root closes last.
          xml::Event tail = reader.next();
          if (tail.kind != xml::EventKind::end_of_input)
            throw xml::ParseError(tail.offset,
                                  "content after the closing </root>");
          return tree;
        }
        stack.pop_back();
        break;
      case xml::EventKind::text:
        throw xml::ParseError(ev.offset,
                              "unexpected character data in a tree document");
      case xml::EventKind::end_of_input:
        throw xml::ParseError(ev.offset, "document ended before </root>");
    }
  }
}

inline Fxt load_fxt(std::string_view document) {
  std::istringstream in{std::string(document)};
  return load_fxt(in);
}

}  // namespace fxt
