#pragma once

#include <charconv>
#include <string>

namespace riskclt {

/// Shortest decimal text that parses back to exactly `v`.
inline std::string shortest(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, end) : std::string("nan");
}

}  // namespace riskclt
