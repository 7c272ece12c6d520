#pragma once

// Small dense helpers on runtime-dimension vectors, plus compensated
// summation and a pivoted determinant. Dimensions here are tiny (the
// ambient n), so everything is plain loops over std::vector storage.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace coarea {

using Vec = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline Vec scaled(std::span<const double> a, double s) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] * s;
  return r;
}

inline void axpy(double alpha, std::span<const double> x, Vec& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline double dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

// Kahan-compensated accumulator. Reductions in this library sum in a fixed
// order so results are reproducible; compensation keeps them accurate.
class KahanSum {
 public:
  void add(double x) {
    double y = x - c_;
    double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

// Determinant of a dense m x m matrix (row-major), by LU with partial
// pivoting. m is n or n-1 here, i.e. single digits.
inline double det(std::vector<double> m, int dim) {
  double sign = 1.0;
  for (int col = 0; col < dim; ++col) {
    int piv = col;
    double best = std::fabs(m[col * dim + col]);
    for (int r = col + 1; r < dim; ++r) {
      double v = std::fabs(m[r * dim + col]);
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best == 0.0) return 0.0;
    if (piv != col) {
      for (int k = 0; k < dim; ++k) std::swap(m[piv * dim + k], m[col * dim + k]);
      sign = -sign;
    }
    double d = m[col * dim + col];
    for (int r = col + 1; r < dim; ++r) {
      double factor = m[r * dim + col] / d;
      for (int k = col; k < dim; ++k) m[r * dim + k] -= factor * m[col * dim + k];
    }
  }
  double p = sign;
  for (int i = 0; i < dim; ++i) p *= m[i * dim + i];
  return p;
}

}  // namespace coarea
