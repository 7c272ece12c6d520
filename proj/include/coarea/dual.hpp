#pragma once

// First-order dual numbers for forward-mode differentiation: (v, d) with
// d carrying the derivative of v along one seeded input direction. One
// evaluation pass per coordinate yields an exact gradient (up to roundoff).

#include <cmath>

namespace coarea {

struct Dual {
  double v = 0.0;  // value
  double d = 0.0;  // directional derivative
};

constexpr Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
constexpr Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
constexpr Dual operator-(Dual a) { return {-a.v, -a.d}; }
constexpr Dual operator*(Dual a, Dual b) {
  return {a.v * b.v, a.d * b.v + a.v * b.d};
}
constexpr Dual operator/(Dual a, Dual b) {
  return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
}

inline Dual sin(Dual a) { return {std::sin(a.v), std::cos(a.v) * a.d}; }
inline Dual cos(Dual a) { return {std::cos(a.v), -std::sin(a.v) * a.d}; }
inline Dual exp(Dual a) {
  double e = std::exp(a.v);
  return {e, e * a.d};
}
// Callers check a.v > 0 / a.v >= 0 before log and sqrt.
inline Dual log(Dual a) { return {std::log(a.v), a.d / a.v}; }
inline Dual sqrt(Dual a) {
  double r = std::sqrt(a.v);
  return {r, a.v == 0.0 ? 0.0 : a.d / (2.0 * r)};
}
inline Dual tanh(Dual a) {
  double t = std::tanh(a.v);
  return {t, (1.0 - t * t) * a.d};
}

inline double value_of(double x) { return x; }
inline double value_of(Dual x) { return x.v; }
inline double deriv_of(double) { return 0.0; }
inline double deriv_of(Dual x) { return x.d; }

}  // namespace coarea
