#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <fxt/xml.hpp>

namespace fxt {

/// Event label. Items are totally ordered by code-point lexicographic
/// comparison, which is exactly std::string's operator<.
using Item = std::string;

/// A transaction as read from a log: items in arrival order, possibly
/// duplicated.
struct RawTransaction {
  std::string id;
  std::string time;
  std::vector<Item> items;
};

/// A transaction ready for insertion: items strictly increasing.
struct NormalizedTransaction {
  std::vector<Item> items;
  std::string id;
  std::string time;
};

/// Retained, arrival-ordered log. Used by the oracle and benchmarks; the tree
/// itself never needs it.
struct TransactionLog {
  std::vector<NormalizedTransaction> transactions;

  std::size_t size() const noexcept { return transactions.size(); }
  bool empty() const noexcept { return transactions.empty(); }
};

using TransactionSink = std::function<void(NormalizedTransaction)>;

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

/// Sorts and deduplicates the item list; id and time pass through unchanged.
/// Empty item labels are rejected, naming the transaction.
inline NormalizedTransaction normalize(RawTransaction raw) {
  for (const auto& item : raw.items) {
    if (item.empty())
      throw std::invalid_argument("transaction \"" + raw.id +
                                  "\": empty item label");
  }
  std::sort(raw.items.begin(), raw.items.end());
  raw.items.erase(std::unique(raw.items.begin(), raw.items.end()),
                  raw.items.end());
  return NormalizedTransaction{std::move(raw.items), std::move(raw.id),
                               std::move(raw.time)};
}

inline bool is_normalized(std::span<const Item> items) {
  for (std::size_t i = 1; i < items.size(); ++i) {
    if (!(items[i - 1] < items[i])) return false;
  }
  return true;
}

/// Checks the "YYYY-MM-DD HH:MM:SS" shape used by the log format. The value
/// is carried as opaque text otherwise.
inline bool is_valid_timestamp(std::string_view s) {
  static constexpr std::string_view pattern = "dddd-dd-dd dd:dd:dd";
  if (s.size() != pattern.size()) return false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (pattern[i] == 'd') {
      if (s[i] < '0' || s[i] > '9') return false;
    } else if (s[i] != pattern[i]) {
      return false;
    }
  }
  auto field = [&](std::size_t pos, std::size_t len) {
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) v = v * 10 + (s[i] - '0');
    return v;
  };
  int month = field(5, 2), day = field(8, 2);
  int hour = field(11, 2), minute = field(14, 2), second = field(17, 2);
  return month >= 1 && month <= 12 && day >= 1 && day <= 31 && hour <= 23 &&
         minute <= 59 && second <= 59;
}

// ---------------------------------------------------------------------------
// XML log format
// ---------------------------------------------------------------------------

/// Streaming parse of the transaction-log XML format: transaction elements
/// with id/time attributes and item children. Accepts both a bare fragment
/// and a document wrapped in a root element; memory stays proportional to a
/// single transaction. Each parsed transaction is normalized and handed to
/// the sink in document order.
inline void parse_transactions_xml(std::istream& in,
                                   const TransactionSink& sink) {
  xml::Reader reader(in);
  bool in_transaction = false;
  bool in_item = false;
  RawTransaction current;
  std::string item_text;

  auto trimmed = [](const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && xml::is_space(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && xml::is_space(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
  };

  for (;;) {
    xml::Event ev = reader.next();
    switch (ev.kind) {
      case xml::EventKind::end_of_input:
        return;
      case xml::EventKind::start_element:
        if (ev.name == "transaction") {
          if (in_transaction)
            throw xml::ParseError(ev.offset,
                                  "nested <transaction> elements");
          const std::string* id = ev.attr("id");
          if (id == nullptr || id->empty())
            throw xml::ParseError(
                ev.offset, "<transaction> element is missing its id attribute");
          const std::string* time = ev.attr("time");
          if (time != nullptr && !time->empty() && !is_valid_timestamp(*time))
            throw xml::ParseError(ev.offset,
                                  "transaction \"" + *id +
                                      "\": time attribute is not of the form "
                                      "YYYY-MM-DD HH:MM:SS");
          current = RawTransaction{*id, time ? *time : std::string(), {}};
          in_transaction = true;
        } else if (ev.name == "item") {
          if (!in_transaction || in_item)
            throw xml::ParseError(ev.offset,
                                  "<item> outside of a <transaction>");
          in_item = true;
          item_text.clear();
        } else if (in_transaction) {
          throw xml::ParseError(ev.offset, "unexpected <" + ev.name +
                                               "> inside <transaction>");
        }
        // Other elements outside transactions are treated as wrappers.
        break;
      case xml::EventKind::end_element:
        if (ev.name == "item" && in_item) {
          current.items.push_back(trimmed(item_text));
          in_item = false;
        } else if (ev.name == "transaction" && in_transaction) {
          in_transaction = false;
          sink(normalize(std::move(current)));
        }
        break;
      case xml::EventKind::text:
        if (in_item) {
          item_text += ev.text;
        } else if (in_transaction) {
          throw xml::ParseError(ev.offset,
                                "unexpected character data inside <transaction>");
        }
        break;
    }
  }
}

inline TransactionLog parse_transactions_xml(std::istream& in) {
  TransactionLog log;
  parse_transactions_xml(
      in, [&](NormalizedTransaction t) { log.transactions.push_back(std::move(t)); });
  return log;
}

/// Re-serialization in the log's XML format. Attribute order is fixed: id,
/// then time (omitted when empty).
inline void write_transactions_xml(const TransactionLog& log,
                                   std::ostream& out) {
  for (const auto& t : log.transactions) {
    out << "<transaction id=\"" << xml::escape_attr(t.id) << '"';
    if (!t.time.empty()) out << " time=\"" << xml::escape_attr(t.time) << '"';
    if (t.items.empty()) {
      out << "/>\n";
      continue;
    }
    out << ">\n ";
    for (std::size_t i = 0; i < t.items.size(); ++i) {
      if (i > 0) out << ' ';
      out << "<item>" << xml::escape_text(t.items[i]) << "</item>";
    }
    out << "\n</transaction>\n";
  }
}

// ---------------------------------------------------------------------------
// Plain-text adapter
// ---------------------------------------------------------------------------

/// One transaction per line, whitespace-separated items, with an optional
/// "id,timestamp," prefix (detected by the presence of two commas). Blank
/// lines are skipped; transactions without a prefix get their 1-based ordinal
/// as id. Item labels containing commas need the XML format.
inline void parse_transactions_text(std::istream& in,
                                    const TransactionSink& sink) {
  std::string line;
  std::size_t ordinal = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    bool blank = std::all_of(line.begin(), line.end(), [](unsigned char c) {
      return xml::is_space(c);
    });
    if (blank) continue;
    ++ordinal;

    RawTransaction raw;
    std::string_view rest = line;
    std::size_t first = line.find(',');
    std::size_t second = first == std::string::npos
                             ? std::string::npos
                             : line.find(',', first + 1);
    if (second != std::string::npos) {
      raw.id = line.substr(0, first);
      raw.time = line.substr(first + 1, second - first - 1);
      if (!raw.time.empty() && !is_valid_timestamp(raw.time))
        throw std::invalid_argument("transaction \"" + raw.id +
                                    "\": timestamp is not of the form "
                                    "YYYY-MM-DD HH:MM:SS");
      rest = std::string_view(line).substr(second + 1);
    } else {
      raw.id = std::to_string(ordinal);
    }

    std::size_t pos = 0;
    while (pos < rest.size()) {
      while (pos < rest.size() && xml::is_space(rest[pos])) ++pos;
      std::size_t start = pos;
      while (pos < rest.size() && !xml::is_space(rest[pos])) ++pos;
      if (pos > start) raw.items.emplace_back(rest.substr(start, pos - start));
    }
    sink(normalize(std::move(raw)));
  }
}

inline TransactionLog parse_transactions_text(std::istream& in) {
  TransactionLog log;
  parse_transactions_text(
      in, [&](NormalizedTransaction t) { log.transactions.push_back(std::move(t)); });
  return log;
}

inline void write_transactions_text(const TransactionLog& log,
                                    std::ostream& out) {
  for (const auto& t : log.transactions) {
    out << t.id << ',' << t.time << ',';
    for (std::size_t i = 0; i < t.items.size(); ++i) {
      if (i > 0) out << ' ';
      out << t.items[i];
    }
    out << '\n';
  }
}

enum class LogFormat { xml, text };

/// Sniffs the input: a log whose first non-whitespace byte is '<' is XML.
inline LogFormat detect_log_format(std::istream& in) {
  for (;;) {
    int c = in.peek();
    if (c == std::istream::traits_type::eof()) return LogFormat::xml;
    if (!xml::is_space(c)) return c == '<' ? LogFormat::xml : LogFormat::text;
    in.get();
  }
}

inline void parse_transactions(std::istream& in, LogFormat format,
                               const TransactionSink& sink) {
  if (format == LogFormat::xml) {
    parse_transactions_xml(in, sink);
  } else {
    parse_transactions_text(in, sink);
  }
}

// ---------------------------------------------------------------------------
// Synthetic logs
// ---------------------------------------------------------------------------

namespace detail {
/// Uniform integer on [0, n) by rejection, so results depend only on the
/// mt19937_64 stream and not on the standard library's distribution choices.
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    std::uint64_t r = rng();
    if (r >= threshold) return r % n;
  }
}

inline std::string synthetic_item_name(std::size_t index, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "I%0*zu", width, index);
  return buf;
}

inline std::string synthetic_timestamp(std::size_t index) {
  using namespace std::chrono;
  const auto base = sys_days(year{2011} / 4 / 10) + hours{9} + minutes{16};
  const auto tp = base + seconds{20 * static_cast<long long>(index)};
  const auto day = floor<days>(tp);
  const year_month_day ymd{day};
  const hh_mm_ss<seconds> hms{tp - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02ld:%02ld:%02ld",
                static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()),
                static_cast<long>(hms.hours().count()),
                static_cast<long>(hms.minutes().count()),
                static_cast<long>(hms.seconds().count()));
  return buf;
}
}  // namespace detail

/// Deterministic synthetic log. Transaction lengths are uniform on
/// [1, 2*avg_len - 1] (mean avg_len), clamped to the alphabet size; items are
/// drawn uniformly without replacement. Item names sort in index order.
inline TransactionLog generate_synthetic(std::uint64_t seed,
                                         std::size_t n_transactions,
                                         std::size_t alphabet_size,
                                         std::size_t avg_len) {
  if (avg_len < 1)
    throw std::invalid_argument("avg_len must be at least 1");
  if (avg_len > alphabet_size)
    throw std::invalid_argument("avg_len exceeds the alphabet size");

  int width = 1;
  for (std::size_t v = alphabet_size > 0 ? alphabet_size - 1 : 0; v >= 10;
       v /= 10)
    ++width;
  std::vector<Item> alphabet(alphabet_size);
  for (std::size_t i = 0; i < alphabet_size; ++i)
    alphabet[i] = detail::synthetic_item_name(i, width);

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> pool(alphabet_size);
  std::iota(pool.begin(), pool.end(), 0);

  TransactionLog log;
  log.transactions.reserve(n_transactions);
  for (std::size_t i = 0; i < n_transactions; ++i) {
    std::size_t len = 1 + detail::bounded(rng, 2 * avg_len - 1);
    len = std::min(len, alphabet_size);
    // Partial Fisher-Yates over the persistent pool.
    RawTransaction raw;
    raw.id = std::to_string(i + 1);
    raw.time = detail::synthetic_timestamp(i);
    raw.items.reserve(len);
    for (std::size_t k = 0; k < len; ++k) {
      std::size_t j = k + detail::bounded(rng, alphabet_size - k);
      std::swap(pool[k], pool[j]);
      raw.items.push_back(alphabet[pool[k]]);
    }
    log.transactions.push_back(normalize(std::move(raw)));
  }
  return log;
}

}  // namespace fxt
