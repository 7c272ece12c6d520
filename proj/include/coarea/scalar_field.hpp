#pragma once

// A parsed scalar expression over R^n with exact first derivatives.
// Immutable after construction; evaluation from multiple threads is safe.

#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "coarea/expr.hpp"
#include "coarea/vec.hpp"

namespace coarea {

class ScalarField {
 public:
  ScalarField(std::string_view source, int dim)
      : root_(parse_expression(source, dim)), dim_(dim) {}

  int dim() const { return dim_; }

  double eval(std::span<const double> x) const {
    return detail::eval_node<double>(*root_,
                                     [&](int i) { return x[static_cast<std::size_t>(i)]; });
  }

  // Gradient by forward-mode dual arithmetic, one pass per coordinate.
  Vec grad(std::span<const double> x) const {
    Vec g(static_cast<std::size_t>(dim_));
    for (int seed = 0; seed < dim_; ++seed) {
      Dual r = detail::eval_node<Dual>(*root_, [&](int i) {
        return Dual{x[static_cast<std::size_t>(i)], i == seed ? 1.0 : 0.0};
      });
      g[static_cast<std::size_t>(seed)] = r.d;
    }
    return g;
  }

  double grad_norm(std::span<const double> x) const { return norm(grad(x)); }

  std::string to_string() const { return print_expr(*root_); }

 private:
  std::shared_ptr<const Node> root_;
  int dim_;
};

inline ScalarField parse_field(std::string_view source, int dim) {
  return ScalarField(source, dim);
}

}  // namespace coarea
