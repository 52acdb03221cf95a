#pragma once

#include <cstddef>
#include <vector>

namespace netmech {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule of the given order on [-1, 1] (Newton iteration on P_n).
QuadratureRule gauss_legendre(std::size_t order);

/// The same rule mapped onto [lo, hi].
QuadratureRule gauss_legendre(std::size_t order, double lo, double hi);

} // namespace netmech
