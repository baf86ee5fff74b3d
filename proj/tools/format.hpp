#pragma once

// Number formatting shared by the JSON and CSV writers: JSON carries 10
// significant digits, CSV 6.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "json.hpp"

namespace twoclass::cli {

inline constexpr int kJsonDigits = 10;
inline constexpr int kCsvDigits = 6;

inline std::string format_sig(double x, int digits) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

/// x rounded to `digits` significant digits. The result prints (shortest
/// round-trip form) with at most that many digits.
inline double round_sig(double x, int digits) {
  if (!std::isfinite(x) || x == 0.0) return x;
  return std::strtod(format_sig(x, digits).c_str(), nullptr);
}

/// JSON value for a measure; non-finite values become null.
inline nlohmann::json json_number(double x) {
  if (!std::isfinite(x)) return nullptr;
  if (x == 0.0) return 0.0;
  return round_sig(x, kJsonDigits);
}

inline std::string csv_number(double x) {
  return format_sig(x == 0.0 ? 0.0 : x, kCsvDigits);
}

/// Quotes a CSV cell when it contains a separator, quote or newline.
inline std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace twoclass::cli
