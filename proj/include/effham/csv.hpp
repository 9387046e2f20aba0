#pragma once
// CSV emission with locale-independent, round-trip-exact number formatting.

#include <charconv>
#include <cstddef>
#include <string>
#include <system_error>
#include <vector>

#include "effham/error.hpp"
#include "effham/scan.hpp"

namespace effham::io {

/// Formats with 17 significant digits via std::to_chars: shortest exact
/// representation independent of the global locale.
inline std::string format_number(double v) {
  char buf[48];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  if (res.ec != std::errc{}) throw Error(ErrorCode::IoError, "number formatting failed");
  return std::string(buf, res.ptr);
}

inline void append_csv_row(std::string& out, const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out.push_back(',');
    out += format_number(values[i]);
  }
  out.push_back('\n');
}

/// Row-major cell dump of a completed scan; failed cells carry NaN values.
inline std::string scan_to_csv(const ScanGrid& grid) {
  std::string out = "gamma1_T,dgamma1_T,Gamma,one_minus_F\n";
  for (const ScanCell& c : grid.cells) {
    append_csv_row(out, {c.gamma1_end, c.dgamma1_end, c.gamma_char, c.one_minus_f});
  }
  return out;
}

}  // namespace effham::io
