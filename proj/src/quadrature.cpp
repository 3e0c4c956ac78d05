#include "glfem/quadrature.hpp"

#include <array>
#include <string>

#include "glfem/error.hpp"

namespace glfem {

namespace {

// Orbits of the symmetry group of the triangle in barycentric coordinates.
void add_center(QuadratureRule& r, double w) {
  r.points.push_back({1.0 / 3.0, 1.0 / 3.0});
  r.weights.push_back(w);
}

// (a, b, b) with a + 2b = 1: three permutations.
void add_orbit3(QuadratureRule& r, double a, double w) {
  const double b = 0.5 * (1.0 - a);
  r.points.push_back({a, b});
  r.points.push_back({b, a});
  r.points.push_back({b, b});
  for (int i = 0; i < 3; ++i) r.weights.push_back(w);
}

// (a, b, c) all distinct with a + b + c = 1: six permutations.
void add_orbit6(QuadratureRule& r, double a, double b, double w) {
  const double c = 1.0 - a - b;
  r.points.push_back({a, b});
  r.points.push_back({b, a});
  r.points.push_back({a, c});
  r.points.push_back({c, a});
  r.points.push_back({b, c});
  r.points.push_back({c, b});
  for (int i = 0; i < 6; ++i) r.weights.push_back(w);
}

// Weights below are final (they sum to the reference area 1/2).

QuadratureRule make_degree1() {
  QuadratureRule r;
  r.exact_degree = 1;
  add_center(r, 0.5);
  return r;
}

QuadratureRule make_degree2() {
  QuadratureRule r;
  r.exact_degree = 2;
  add_orbit3(r, 2.0 / 3.0, 1.0 / 6.0);
  return r;
}

// Dunavant degree-4 rule, 6 points.
QuadratureRule make_degree4() {
  QuadratureRule r;
  r.exact_degree = 4;
  add_orbit3(r, 0.10810301816807023, 0.11169079483900573);
  add_orbit3(r, 0.81684757298045851, 0.054975871827660934);
  return r;
}

// Dunavant degree-6 rule, 12 points.
QuadratureRule make_degree6() {
  QuadratureRule r;
  r.exact_degree = 6;
  add_orbit3(r, 0.87382197101699554, 0.025422453185103408);
  add_orbit3(r, 0.50142650965817916, 0.058393137863189683);
  add_orbit6(r, 0.63650249912139865, 0.31035245103378441, 0.041425537809186788);
  return r;
}

// Dunavant degree-8 rule, 16 points.
QuadratureRule make_degree8() {
  QuadratureRule r;
  r.exact_degree = 8;
  add_center(r, 0.072157803838893584);
  add_orbit3(r, 0.081414823414553688, 0.047545817133642312);
  add_orbit3(r, 0.65886138449647959, 0.051608685267359125);
  add_orbit3(r, 0.89890554336593805, 0.016229248811599040);
  add_orbit6(r, 0.0083947774099576053, 0.26311282963463811, 0.013615157087217497);
  return r;
}

}  // namespace

const QuadratureRule& quadrature(int min_degree) {
  if (min_degree > 10)
    throw ConfigError("quadrature degree " + std::to_string(min_degree) + " beyond guard 10");
  static const QuadratureRule d1 = make_degree1();
  static const QuadratureRule d2 = make_degree2();
  static const QuadratureRule d4 = make_degree4();
  static const QuadratureRule d6 = make_degree6();
  static const QuadratureRule d8 = make_degree8();
  if (min_degree <= 1) return d1;
  if (min_degree <= 2) return d2;
  if (min_degree <= 4) return d4;
  if (min_degree <= 6) return d6;
  if (min_degree <= 8) return d8;
  throw ConfigError("no tabulated quadrature rule of degree " + std::to_string(min_degree));
}

}  // namespace glfem
