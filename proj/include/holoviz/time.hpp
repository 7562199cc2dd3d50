#pragma once

#include <cmath>
#include <compare>
#include <cstdint>

namespace holoviz {

/// Timestamp with nanosecond resolution, serialized as a {secs, nsecs} pair.
struct Stamp {
  std::int64_t nanoseconds = 0;

  static Stamp from_parts(std::int64_t secs, std::int64_t nsecs) { return Stamp{secs * 1'000'000'000LL + nsecs}; }
  static Stamp from_seconds(double s) { return Stamp{static_cast<std::int64_t>(std::llround(s * 1e9))}; }

  std::int64_t secs() const { return nanoseconds / 1'000'000'000LL; }
  std::int64_t nsecs() const { return nanoseconds % 1'000'000'000LL; }
  double seconds() const { return static_cast<double>(nanoseconds) * 1e-9; }
  bool is_zero() const { return nanoseconds == 0; }

  friend auto operator<=>(const Stamp&, const Stamp&) = default;
};

inline double seconds_between(Stamp from, Stamp to) { return static_cast<double>(to.nanoseconds - from.nanoseconds) * 1e-9; }

}  // namespace holoviz
