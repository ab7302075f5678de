#pragma once

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fxt {

/// Exact non-negative rational, kept unreduced so counts stay visible
/// (support 2/6 is stored as num=2, den=6). Comparisons cross-multiply in
/// 128-bit arithmetic; nothing here ever rounds.
struct Ratio {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  friend bool operator==(Ratio a, Ratio b) {
    return static_cast<unsigned __int128>(a.num) * b.den ==
           static_cast<unsigned __int128>(b.num) * a.den;
  }

  friend bool operator<(Ratio a, Ratio b) {
    return static_cast<unsigned __int128>(a.num) * b.den <
           static_cast<unsigned __int128>(b.num) * a.den;
  }

  friend bool operator<=(Ratio a, Ratio b) { return !(b < a); }
  friend bool operator>=(Ratio a, Ratio b) { return !(a < b); }
  friend bool operator!=(Ratio a, Ratio b) { return !(a == b); }

  double to_double() const {
    return static_cast<double>(num) / static_cast<double>(den);
  }
};

/// num/den >= threshold, exactly.
inline bool meets_threshold(std::uint64_t num, std::uint64_t den,
                            Ratio threshold) {
  return static_cast<unsigned __int128>(num) * threshold.den >=
         static_cast<unsigned __int128>(threshold.num) * den;
}

/// Parses a plain decimal ("0.25", "1", ".5") into an exact ratio over a
/// power of ten. Rejects anything else, and anything outside [0, max].
inline Ratio parse_decimal_ratio(std::string_view s,
                                 std::string_view what = "value") {
  auto fail = [&]() -> Ratio {
    throw std::invalid_argument(std::string(what) + " \"" + std::string(s) +
                                "\" is not a plain decimal in [0,1]");
  };
  if (s.empty()) return fail();
  std::uint64_t num = 0;
  std::uint64_t den = 1;
  bool any_digit = false;
  bool seen_point = false;
  for (char c : s) {
    if (c == '.') {
      if (seen_point) return fail();
      seen_point = true;
      continue;
    }
    if (c < '0' || c > '9') return fail();
    if (num > (UINT64_MAX - 9) / 10 || (seen_point && den > UINT64_MAX / 10))
      throw std::invalid_argument(std::string(what) + " \"" + std::string(s) +
                                  "\" has too many digits");
    num = num * 10 + static_cast<std::uint64_t>(c - '0');
    if (seen_point) den *= 10;
    any_digit = true;
  }
  if (!any_digit) return fail();
  return Ratio{num, den};
}

/// Decimal rendering for reports; display only, never used in comparisons.
inline std::string format_ratio(Ratio r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", r.to_double());
  return buf;
}

}  // namespace fxt
