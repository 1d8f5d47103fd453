#pragma once

#include <array>
#include <charconv>
#include <string>

namespace nlshape {

/// Shortest round-trip decimal form ("inf", "nan" for non-finite values).
inline std::string format_number(double value) {
  std::array<char, 64> buffer{};
  const auto [end, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  return std::string(buffer.data(), end);
}

}  // namespace nlshape
