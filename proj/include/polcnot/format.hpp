#pragma once
// Shortest round-trip decimal rendering shared by scenario and CSV writers.

#include <charconv>
#include <cstdint>
#include <string>
#include <system_error>

namespace polcnot {

inline std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

inline std::string format_count(std::uint64_t value) { return std::to_string(value); }

}  // namespace polcnot
