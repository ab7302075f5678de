#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fxt::xml {

/// Parse failure with the byte offset where it was detected.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t offset, const std::string& what)
      : std::runtime_error("byte " + std::to_string(offset) + ": " + what),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

enum class EventKind { start_element, end_element, text, end_of_input };

struct Attribute {
  std::string name;
  std::string value;
};

struct Event {
  EventKind kind = EventKind::end_of_input;
  std::string name;                     // element name (start/end)
  std::vector<Attribute> attributes;    // start_element only
  std::string text;                     // text payload
  std::size_t offset = 0;               // byte offset where the event begins

  const std::string* attr(std::string_view attr_name) const {
    for (const auto& a : attributes) {
      if (a.name == attr_name) return &a.value;
    }
    return nullptr;
  }
};

inline bool is_space(int c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n';
}

// ---------------------------------------------------------------------------
// UTF-8 and character class helpers
// ---------------------------------------------------------------------------

/// Decodes one code point starting at `pos`; advances `pos`. Returns -1 on
/// malformed input.
inline long utf8_decode(std::string_view s, std::size_t& pos) {
  if (pos >= s.size()) return -1;
  const auto b0 = static_cast<unsigned char>(s[pos]);
  auto cont = [&](std::size_t i) {
    return pos + i < s.size() &&
           (static_cast<unsigned char>(s[pos + i]) & 0xC0u) == 0x80u;
  };
  auto bits = [&](std::size_t i) {
    return static_cast<long>(static_cast<unsigned char>(s[pos + i]) & 0x3Fu);
  };
  if (b0 < 0x80u) {
    pos += 1;
    return b0;
  }
  if ((b0 & 0xE0u) == 0xC0u && cont(1)) {
    long cp = ((b0 & 0x1Fl) << 6) | bits(1);
    pos += 2;
    return cp < 0x80 ? -1 : cp;
  }
  if ((b0 & 0xF0u) == 0xE0u && cont(1) && cont(2)) {
    long cp = ((b0 & 0x0Fl) << 12) | (bits(1) << 6) | bits(2);
    pos += 3;
    if (cp < 0x800 || (cp >= 0xD800 && cp <= 0xDFFF)) return -1;
    return cp;
  }
  if ((b0 & 0xF8u) == 0xF0u && cont(1) && cont(2) && cont(3)) {
    long cp = ((b0 & 0x07l) << 18) | (bits(1) << 12) | (bits(2) << 6) | bits(3);
    pos += 4;
    return (cp < 0x10000 || cp > 0x10FFFF) ? -1 : cp;
  }
  return -1;
}

inline void utf8_encode(long cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

/// Characters XML 1.0 can carry at all (even as character references).
inline bool is_valid_xml_char(long cp) {
  return cp == 0x9 || cp == 0xA || cp == 0xD ||
         (cp >= 0x20 && cp <= 0xD7FF) || (cp >= 0xE000 && cp <= 0xFFFD) ||
         (cp >= 0x10000 && cp <= 0x10FFFF);
}

namespace detail {
struct CpRange {
  long lo, hi;
};

inline constexpr CpRange kNameStartRanges[] = {
    {':', ':'},        {'A', 'Z'},        {'_', '_'},        {'a', 'z'},
    {0xC0, 0xD6},      {0xD8, 0xF6},      {0xF8, 0x2FF},     {0x370, 0x37D},
    {0x37F, 0x1FFF},   {0x200C, 0x200D},  {0x2070, 0x218F},  {0x2C00, 0x2FEF},
    {0x3001, 0xD7FF},  {0xF900, 0xFDCF},  {0xFDF0, 0xFFFD},  {0x10000, 0xEFFFF},
};

inline constexpr CpRange kNameExtraRanges[] = {
    {'-', '-'}, {'.', '.'}, {'0', '9'}, {0xB7, 0xB7},
    {0x300, 0x36F}, {0x203F, 0x2040},
};

inline bool in_ranges(long cp, const CpRange* ranges, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (cp >= ranges[i].lo && cp <= ranges[i].hi) return true;
  }
  return false;
}
}  // namespace detail

inline bool is_name_start_char(long cp) {
  return detail::in_ranges(cp, detail::kNameStartRanges,
                           std::size(detail::kNameStartRanges));
}

inline bool is_name_char(long cp) {
  return is_name_start_char(cp) ||
         detail::in_ranges(cp, detail::kNameExtraRanges,
                           std::size(detail::kNameExtraRanges));
}

/// True iff `name` satisfies the XML 1.0 Name production (so it can be used
/// verbatim as an element name).
inline bool is_valid_element_name(std::string_view name) {
  if (name.empty()) return false;
  std::size_t pos = 0;
  bool first = true;
  while (pos < name.size()) {
    long cp = utf8_decode(name, pos);
    if (cp < 0) return false;
    if (first ? !is_name_start_char(cp) : !is_name_char(cp)) return false;
    first = false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Escaping for writers
// ---------------------------------------------------------------------------

class SerializeError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {
inline void escape_into(std::string_view s, bool attribute, std::string& out) {
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t start = pos;
    long cp = utf8_decode(s, pos);
    if (cp < 0) throw SerializeError("invalid UTF-8 in text: \"" + std::string(s) + "\"");
    if (!is_valid_xml_char(cp))
      throw SerializeError("character U+" + std::to_string(cp) +
                           " cannot be represented in XML");
    switch (cp) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"':
        if (attribute) out += "&quot;"; else out.push_back('"');
        break;
      case 0x9: case 0xA: case 0xD:
        if (attribute) {
          out += "&#" + std::to_string(cp) + ";";
        } else {
          out.push_back(static_cast<char>(cp));
        }
        break;
      default:
        out.append(s, start, pos - start);
    }
  }
}
}  // namespace detail

inline std::string escape_text(std::string_view s) {
  std::string out;
  detail::escape_into(s, false, out);
  return out;
}

inline std::string escape_attr(std::string_view s) {
  std::string out;
  detail::escape_into(s, true, out);
  return out;
}

// ---------------------------------------------------------------------------
// Pull parser
// ---------------------------------------------------------------------------

/// Streaming event reader over a byte stream. Handles the XML subset used by
/// the transaction-log and tree document formats: elements, attributes,
/// character data, CDATA, comments, processing instructions, and the five
/// named entities plus numeric character references. DTDs are rejected.
///
/// Multiple top-level elements are accepted (transaction logs are fragments
/// without a document root); callers that need a single root enforce it
/// themselves. Whitespace-only character data is not reported.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(&in) {}

  std::size_t offset() const noexcept { return consumed_ + pos_; }

  /// High-water mark of buffered character data, in bytes. Parsing holds one
  /// text run or tag at a time, so this stays near the largest single token
  /// regardless of document size.
  std::size_t peak_token_bytes() const noexcept { return peak_token_; }

  Event next() {
    if (!pending_.empty()) {
      Event ev = std::move(pending_.front());
      pending_.pop_front();
      return ev;
    }
    std::string text;
    bool significant = false;
    std::size_t text_offset = offset();

    for (;;) {
      int c = peek();
      if (c < 0) {
        if (!open_.empty())
          throw ParseError(offset(), "unexpected end of input; <" +
                                         open_.back() + "> is not closed");
        if (significant)
          throw ParseError(text_offset, "character data outside of any element");
        return Event{EventKind::end_of_input, {}, {}, {}, offset()};
      }
      if (c != '<') {
        if (text.empty()) text_offset = offset();
        read_text_run(text, significant);
        note_token(text.size());
        continue;
      }

      std::size_t markup_offset = offset();
      get();  // '<'
      int d = peek();
      if (d == '?') {
        skip_until("?>", markup_offset);
        continue;
      }
      if (d == '!') {
        get();
        if (try_consume("--")) {
          skip_until("-->", markup_offset);
          continue;
        }
        if (try_consume("[CDATA[")) {
          read_cdata(text, markup_offset);
          significant = true;
          note_token(text.size());
          continue;
        }
        throw ParseError(markup_offset, "unsupported markup (DTDs are not accepted)");
      }

      Event ev;
      if (d == '/') {
        get();
        ev = parse_end_tag(markup_offset);
      } else {
        ev = parse_start_tag(markup_offset);
      }
      if (significant) {
        pending_.push_back(std::move(ev));
        return Event{EventKind::text, {}, {}, std::move(text), text_offset};
      }
      return ev;
    }
  }

 private:
  void note_token(std::size_t n) {
    if (n > peak_token_) peak_token_ = n;
  }

  void refill() {
    consumed_ += len_;
    pos_ = 0;
    in_->read(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    len_ = static_cast<std::size_t>(in_->gcount());
  }

  int peek() {
    if (pos_ == len_) {
      refill();
      if (len_ == 0) return -1;
    }
    return static_cast<unsigned char>(buf_[pos_]);
  }

  int get() {
    int c = peek();
    if (c >= 0) ++pos_;
    return c;
  }

  void skip_ws() {
    while (is_space(peek())) get();
  }

  bool try_consume(std::string_view lit) {
    // Only used after '<!'; literals fit well inside one buffer refill, so a
    // char-by-char match with manual backtrack over the current buffer works.
    for (std::size_t i = 0; i < lit.size(); ++i) {
      if (peek() != lit[i]) {
        pos_ -= i;  // matched chars all came from the current buffer
        return false;
      }
      get();
    }
    return true;
  }

  void skip_until(std::string_view terminator, std::size_t start) {
    std::size_t matched = 0;
    for (;;) {
      int c = get();
      if (c < 0)
        throw ParseError(start, "unterminated markup (expected \"" +
                                    std::string(terminator) + "\")");
      matched = (c == terminator[matched]) ? matched + 1
                : (c == terminator[0])     ? 1
                                           : 0;
      if (matched == terminator.size()) return;
    }
  }

  void read_cdata(std::string& text, std::size_t start) {
    std::string run;
    for (;;) {
      int c = get();
      if (c < 0) throw ParseError(start, "unterminated CDATA section");
      run.push_back(static_cast<char>(c));
      if (run.size() >= 3 && run.compare(run.size() - 3, 3, "]]>") == 0) {
        run.resize(run.size() - 3);
        text += run;
        return;
      }
    }
  }

  void read_text_run(std::string& text, bool& significant) {
    for (;;) {
      int c = peek();
      if (c < 0 || c == '<') return;
      if (c == '&') {
        decode_entity(text);
        significant = true;
        continue;
      }
      get();
      text.push_back(static_cast<char>(c));
      if (!is_space(c)) significant = true;
    }
  }

  void decode_entity(std::string& out) {
    std::size_t start = offset();
    get();  // '&'
    std::string name;
    for (;;) {
      int c = get();
      if (c < 0 || name.size() > 12)
        throw ParseError(start, "malformed entity reference");
      if (c == ';') break;
      name.push_back(static_cast<char>(c));
    }
    if (name == "amp") { out.push_back('&'); return; }
    if (name == "lt") { out.push_back('<'); return; }
    if (name == "gt") { out.push_back('>'); return; }
    if (name == "quot") { out.push_back('"'); return; }
    if (name == "apos") { out.push_back('\''); return; }
    if (!name.empty() && name[0] == '#') {
      long cp = 0;
      bool ok = name.size() > 1;
      if (name.size() > 2 && (name[1] == 'x' || name[1] == 'X')) {
        for (std::size_t i = 2; i < name.size() && ok; ++i) {
          int digit = hex_digit(name[i]);
          ok = digit >= 0 && cp <= 0x10FFFF;
          cp = cp * 16 + digit;
        }
      } else {
        for (std::size_t i = 1; i < name.size() && ok; ++i) {
          ok = name[i] >= '0' && name[i] <= '9' && cp <= 0x10FFFF;
          cp = cp * 10 + (name[i] - '0');
        }
      }
      if (!ok || !is_valid_xml_char(cp))
        throw ParseError(start, "invalid character reference &" + name + ";");
      utf8_encode(cp, out);
      return;
    }
    throw ParseError(start, "unknown entity &" + name + ";");
  }

  static int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  }

  std::string read_name(std::size_t start) {
    std::string name;
    for (;;) {
      int c = peek();
      if (c < 0 || is_space(c) || c == '>' || c == '/' || c == '=' ||
          c == '"' || c == '\'')
        break;
      get();
      name.push_back(static_cast<char>(c));
    }
    if (name.empty()) throw ParseError(start, "expected a name");
    note_token(name.size());
    return name;
  }

  Event parse_end_tag(std::size_t start) {
    std::string name = read_name(offset());
    skip_ws();
    if (get() != '>') throw ParseError(start, "malformed closing tag </" + name);
    if (open_.empty() || open_.back() != name)
      throw ParseError(start, "closing tag </" + name + "> does not match <" +
                                  (open_.empty() ? "nothing" : open_.back()) +
                                  ">");
    open_.pop_back();
    return Event{EventKind::end_element, std::move(name), {}, {}, start};
  }

  Event parse_start_tag(std::size_t start) {
    Event ev;
    ev.kind = EventKind::start_element;
    ev.offset = start;
    ev.name = read_name(start);
    for (;;) {
      skip_ws();
      int c = peek();
      if (c < 0) throw ParseError(start, "unterminated tag <" + ev.name);
      if (c == '>') {
        get();
        open_.push_back(ev.name);
        return ev;
      }
      if (c == '/') {
        get();
        if (get() != '>')
          throw ParseError(start, "malformed empty-element tag <" + ev.name);
        pending_.push_back(
            Event{EventKind::end_element, ev.name, {}, {}, offset()});
        return ev;
      }
      Attribute attr;
      std::size_t attr_offset = offset();
      attr.name = read_name(attr_offset);
      skip_ws();
      if (get() != '=')
        throw ParseError(attr_offset, "attribute " + attr.name + " has no value");
      skip_ws();
      int quote = get();
      if (quote != '"' && quote != '\'')
        throw ParseError(attr_offset, "attribute value must be quoted");
      for (;;) {
        int v = peek();
        if (v < 0 || v == '<')
          throw ParseError(attr_offset, "unterminated attribute value");
        if (v == quote) {
          get();
          break;
        }
        if (v == '&') {
          decode_entity(attr.value);
          continue;
        }
        get();
        attr.value.push_back(static_cast<char>(v));
      }
      note_token(attr.value.size());
      if (ev.attr(attr.name) != nullptr)
        throw ParseError(attr_offset, "duplicate attribute " + attr.name);
      ev.attributes.push_back(std::move(attr));
    }
  }

  std::istream* in_;
  std::array<char, 16384> buf_{};
  std::size_t len_ = 0;
  std::size_t pos_ = 0;
  std::size_t consumed_ = 0;
  std::vector<std::string> open_;
  std::deque<Event> pending_;
  std::size_t peak_token_ = 0;
};

}  // namespace fxt::xml
