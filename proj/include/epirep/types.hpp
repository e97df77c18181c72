#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace epirep {

using NodeId = std::uint32_t;
using ChunkId = std::uint32_t;
using ClusterId = std::uint32_t;
using SessionId = std::uint64_t;
using Tick = std::int64_t;

/// Sentinel for "no deadline" on ticks.
inline constexpr Tick kNever = std::numeric_limits<Tick>::max();

/// Sentinel for an unbounded (non delay-sensitive) streaming deadline.
inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double k) const { return {x * k, y * k}; }
  constexpr bool operator==(const Vec2&) const = default;

  double norm() const { return std::sqrt(x * x + y * y); }
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

}  // namespace epirep
