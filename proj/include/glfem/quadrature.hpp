#pragma once

#include <vector>

#include "glfem/mesh.hpp"

namespace glfem {

/// Symmetric quadrature rule on the reference triangle {(0,0),(1,0),(0,1)}.
/// Weights sum to the reference area 1/2.
struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int exact_degree = 0;
};

/// Returns the smallest tabulated rule with exact_degree >= min_degree.
/// Tabulated: degrees 1 (1 pt), 2 (3 pt), 4 (6 pt), 6 (12 pt), 8 (16 pt).
/// Throws ConfigError beyond degree 10 guard or past the table.
const QuadratureRule& quadrature(int min_degree);

}  // namespace glfem
