#pragma once

// binary32 add / divide / square root under an explicit rounding mode,
// without touching the host floating-point environment.
//
// Each operation computes a double approximation, then walks to the two
// adjacent binary32 values bracketing the exact result using an exact sign
// test of (exact - candidate). All candidates and midpoints have at most 25
// significant bits, so the products and differences below are exact in
// double or carry a correct sign after one rounding.

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

namespace distillfuzz {

enum class RoundingMode : std::uint8_t {
  kNearestEven = 0,
  kTowardZero = 1,
  kDown = 2,
  kUp = 3,
  kNearestMaxMagnitude = 4,
};

// Valid rm field (0..4, 7) to its mode; 7 is the dynamic mode.
constexpr RoundingMode resolve_rounding_mode(std::uint8_t rm) {
  return rm == 7 ? RoundingMode::kNearestEven : static_cast<RoundingMode>(rm);
}

inline constexpr std::uint32_t kCanonicalNan = 0x7FC00000u;

inline std::uint32_t f32_bits(float f) { return std::bit_cast<std::uint32_t>(f); }
inline float f32_from_bits(std::uint32_t b) { return std::bit_cast<float>(b); }

namespace b32_detail {

// 2^128: one binary32 ulp above FLT_MAX, standing in for "overflowed".
inline constexpr double kOverflow = 0x1.0p128;
inline constexpr double kMax = static_cast<double>(std::numeric_limits<float>::max());

inline double next_up(double x) {
  if (x == kMax) return kOverflow;
  if (x == -kOverflow) return -kMax;
  return static_cast<double>(std::nextafter(static_cast<float>(x), std::numeric_limits<float>::infinity()));
}

inline double next_down(double x) {
  if (x == -kMax) return -kOverflow;
  if (x == kOverflow) return kMax;
  return static_cast<double>(std::nextafter(static_cast<float>(x), -std::numeric_limits<float>::infinity()));
}

inline float to_float(double x) {
  if (x >= kOverflow) return std::numeric_limits<float>::infinity();
  if (x <= -kOverflow) return -std::numeric_limits<float>::infinity();
  return static_cast<float>(x);
}

inline constexpr float kMaxF = std::numeric_limits<float>::max();

inline int sgn(double x) { return (x > 0) - (x < 0); }

inline bool mantissa_even(double x) {
  if (x == kOverflow || x == -kOverflow) return true;
  return (f32_bits(static_cast<float>(x)) & 1u) == 0;
}

// sign_of(c) returns sign(exact - c); exact is known to be nonzero and
// finite, and approx carries its sign.
template <class SignOf>
float round_exact(double approx, SignOf sign_of, RoundingMode mode) {
  constexpr float kInf = std::numeric_limits<float>::infinity();
  const bool positive = approx > 0;

  if (std::abs(approx) >= kMax) {
    const int s = sign_of(positive ? kOverflow : -kOverflow);
    if (positive ? s >= 0 : s <= 0) {
      switch (mode) {
        case RoundingMode::kTowardZero: return positive ? kMaxF : -kMaxF;
        case RoundingMode::kDown: return positive ? kMaxF : -kInf;
        case RoundingMode::kUp: return positive ? kInf : -kMaxF;
        default: return positive ? kInf : -kInf;
      }
    }
  }

  double c = static_cast<double>(static_cast<float>(approx));
  if (std::isinf(c)) c = std::copysign(kMax, c);
  const int s = sign_of(c);
  if (s == 0) return to_float(c);

  double lo, hi;
  if (s > 0) {
    lo = c;
    hi = next_up(c);
    while (sign_of(hi) > 0) {
      lo = hi;
      hi = next_up(hi);
    }
    if (sign_of(hi) == 0) return to_float(hi);
  } else {
    hi = c;
    lo = next_down(c);
    while (sign_of(lo) < 0) {
      hi = lo;
      lo = next_down(lo);
    }
    if (sign_of(lo) == 0) return to_float(lo);
  }

  // lo < exact < hi, adjacent in binary32 extended by ±2^128.
  auto finish = [&](double r) -> float {
    if (r == 0) return positive ? 0.0f : -0.0f;
    return to_float(r);
  };
  switch (mode) {
    case RoundingMode::kTowardZero: return finish(positive ? lo : hi);
    case RoundingMode::kDown: return finish(lo);
    case RoundingMode::kUp: return finish(hi);
    case RoundingMode::kNearestEven:
    case RoundingMode::kNearestMaxMagnitude: {
      const double mid = lo / 2 + hi / 2;
      const int m = sign_of(mid);
      if (m > 0) return finish(hi);
      if (m < 0) return finish(lo);
      if (mode == RoundingMode::kNearestMaxMagnitude) return finish(positive ? hi : lo);
      return finish(mantissa_even(lo) ? lo : hi);
    }
  }
  return finish(lo);
}

}  // namespace b32_detail

inline float fp_add(float a, float b, RoundingMode mode) {
  if (std::isnan(a) || std::isnan(b)) return f32_from_bits(kCanonicalNan);
  if (std::isinf(a) || std::isinf(b)) {
    if (std::isinf(a) && std::isinf(b) && std::signbit(a) != std::signbit(b))
      return f32_from_bits(kCanonicalNan);
    return std::isinf(a) ? a : b;
  }
  const double da = a, db = b;
  const double s = da + db;
  const double bb = s - da;
  const double err = (da - (s - bb)) + (db - bb);
  if (s == 0 && err == 0) {
    if (std::signbit(a) && std::signbit(b)) return -0.0f;
    return mode == RoundingMode::kDown ? -0.0f : 0.0f;
  }
  return b32_detail::round_exact(
      s, [&](double c) { return b32_detail::sgn((s - c) + err); }, mode);
}

inline float fp_div(float a, float b, RoundingMode mode) {
  if (std::isnan(a) || std::isnan(b)) return f32_from_bits(kCanonicalNan);
  const bool neg = std::signbit(a) != std::signbit(b);
  if (std::isinf(a)) {
    if (std::isinf(b)) return f32_from_bits(kCanonicalNan);
    return neg ? -std::numeric_limits<float>::infinity() : std::numeric_limits<float>::infinity();
  }
  if (std::isinf(b)) return neg ? -0.0f : 0.0f;
  if (b == 0) {
    if (a == 0) return f32_from_bits(kCanonicalNan);
    return neg ? -std::numeric_limits<float>::infinity() : std::numeric_limits<float>::infinity();
  }
  if (a == 0) return neg ? -0.0f : 0.0f;
  const double da = a, db = b;
  const int bsign = db > 0 ? 1 : -1;
  return b32_detail::round_exact(
      da / db, [&](double c) { return bsign * b32_detail::sgn(std::fma(-c, db, da)); }, mode);
}

inline float fp_sqrt(float a, RoundingMode mode) {
  if (std::isnan(a)) return f32_from_bits(kCanonicalNan);
  if (a == 0) return a;
  if (a < 0) return f32_from_bits(kCanonicalNan);
  if (std::isinf(a)) return a;
  const double da = a;
  return b32_detail::round_exact(
      std::sqrt(da), [&](double c) { return b32_detail::sgn(std::fma(-c, c, da)); }, mode);
}

// Canonicalize NaN payloads so bitwise state comparison is meaningful.
inline std::uint32_t canonical_bits(float f) {
  return std::isnan(f) ? kCanonicalNan : f32_bits(f);
}

}  // namespace distillfuzz
