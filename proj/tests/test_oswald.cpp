#include <doctest.h>

#include <cmath>

#include "glfem/oswald.hpp"
#include "glfem/quadrature.hpp"
#include "support/oracles.hpp"

using namespace glfem;

namespace {
constexpr double kPi = 3.14159265358979323846;

LocalEvaluator sin_sin() {
  return smooth_evaluator(
      [](Vec2 x) { return cplx(std::sin(kPi * x.x) * std::sin(kPi * x.y), 0.0); },
      [](Vec2 x) {
        return std::array<cplx, 2>{
            cplx(kPi * std::cos(kPi * x.x) * std::sin(kPi * x.y), 0.0),
            cplx(kPi * std::sin(kPi * x.x) * std::cos(kPi * x.y), 0.0)};
      });
}

LocalEvaluator sin_x() {
  return smooth_evaluator([](Vec2 x) { return cplx(std::sin(kPi * x.x), 0.0); },
                          [](Vec2 x) {
                            return std::array<cplx, 2>{
                                cplx(kPi * std::cos(kPi * x.x), 0.0), cplx(0.0, 0.0)};
                          });
}

// Broken L2/H1 errors of v - Pi_K v summed over elements.
std::array<double, 2> broken_projection_error(const LocalEvaluator& v, const FESpace& s) {
  const QuadratureRule& rule = quadrature(2 * s.degree() + 4);
  const auto table = tabulate_basis(s.degree(), rule);
  double l2 = 0.0, h1 = 0.0;
  for (std::size_t k = 0; k < s.mesh().element_count(); ++k) {
    const auto c = elementwise_h1_projection(v, k, s);
    const auto em = s.mesh().element_map(k);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double w = rule.weights[q] * em.det_B;
      const auto& bv = table.at_point[q];
      cplx pv(0.0, 0.0), pgx(0.0, 0.0), pgy(0.0, 0.0);
      for (int l = 0; l < bv.count; ++l) {
        pv += bv.values[l] * c[l];
        const Vec2 g = em.push_gradient(bv.gradients[l]);
        pgx += g.x * c[l];
        pgy += g.y * c[l];
      }
      cplx vv, vg[2];
      v(k, em.map(rule.points[q]), &vv, vg);
      l2 += w * std::norm(vv - pv);
      h1 += w * (std::norm(vg[0] - pgx) + std::norm(vg[1] - pgy));
    }
  }
  return {std::sqrt(l2), std::sqrt(h1)};
}

std::array<double, 2> interpolation_error(const ComplexField& ih, const LocalEvaluator& v) {
  const FESpace& s = ih.space();
  const QuadratureRule& rule = quadrature(2 * s.degree() + 4);
  double l2 = 0.0, h1 = 0.0;
  for (std::size_t k = 0; k < s.mesh().element_count(); ++k) {
    const auto em = s.mesh().element_map(k);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double w = rule.weights[q] * em.det_B;
      cplx iv, ig[2];
      ih.eval_on_element(k, rule.points[q], &iv, ig);
      cplx vv, vg[2];
      v(k, em.map(rule.points[q]), &vv, vg);
      l2 += w * std::norm(vv - iv);
      h1 += w * (std::norm(vg[0] - ig[0]) + std::norm(vg[1] - ig[1]));
    }
  }
  return {std::sqrt(l2), std::sqrt(h1)};
}

double h1_seminorm(const ComplexField& f) {
  const FESpace& s = f.space();
  const QuadratureRule& rule = quadrature(2 * s.degree());
  double h1 = 0.0;
  for (std::size_t k = 0; k < s.mesh().element_count(); ++k) {
    const auto em = s.mesh().element_map(k);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      cplx g[2];
      f.eval_on_element(k, rule.points[q], nullptr, g);
      h1 += rule.weights[q] * em.det_B * (std::norm(g[0]) + std::norm(g[1]));
    }
  }
  return std::sqrt(h1);
}

}  // namespace

TEST_CASE("projection reproduces local polynomials") {
  for (int degree : {1, 2}) {
    auto space = FESpace::build(Mesh::build_uniform(2), degree);
    // A global polynomial of matching degree, nodal-interpolated exactly.
    const auto poly = nodal_interpolate(
        [degree](Vec2 x) {
          const double quad = degree == 2 ? 0.5 * x.x * x.x - 0.25 * x.x * x.y : 0.0;
          return cplx(2.0 + x.x - 3.0 * x.y + quad, 0.5 * x.y + quad);
        },
        space);
    const auto ev = field_evaluator(poly);
    for (std::size_t k = 0; k < space->mesh().element_count(); k += 3) {
      const auto coeff = elementwise_h1_projection(ev, k, *space);
      const std::uint32_t* dofs = space->element_dofs(k);
      for (int l = 0; l < space->dofs_per_element(); ++l)
        CHECK(std::abs(coeff[l] - poly[dofs[l]]) <= 1e-12);
    }
  }
}

TEST_CASE("projection mean constraint") {
  auto space = FESpace::build(Mesh::build_uniform(3), 2);
  const auto v = sin_sin();
  const QuadratureRule& rule = quadrature(8);
  const auto table = tabulate_basis(2, rule);
  for (std::size_t k = 0; k < space->mesh().element_count(); k += 17) {
    const auto c = elementwise_h1_projection(v, k, *space);
    const auto em = space->mesh().element_map(k);
    cplx defect(0.0, 0.0);
    double vnorm = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double w = rule.weights[q] * em.det_B;
      cplx vv;
      v(k, em.map(rule.points[q]), &vv, nullptr);
      cplx pv(0.0, 0.0);
      for (int l = 0; l < table.count; ++l) pv += table.at_point[q].values[l] * c[l];
      defect += w * (vv - pv);
      vnorm += w * std::norm(vv);
    }
    const double area = 0.5 * em.det_B;
    CHECK(std::abs(defect) <= 1e-13 * area * std::max(1.0, std::sqrt(vnorm)));
  }
}

TEST_CASE("projection error decreases at order p") {
  for (int degree : {1, 2}) {
    std::vector<double> errs;
    for (int level : {2, 3, 4, 5}) {
      auto space = FESpace::build(Mesh::build_uniform(level), degree);
      errs.push_back(broken_projection_error(sin_x(), *space)[1]);
    }
    for (std::size_t i = 1; i < errs.size(); ++i) {
      const double eoc = std::log2(errs[i - 1] / errs[i]);
      CHECK(eoc >= degree - 0.2);
    }
  }
}

TEST_CASE("poincare constant is uniform over elements") {
  // ||v - Pi_K v||_L2(K) <= C h_K |v - Pi_K v|_H1(K) with one C for all
  // elements and several test functions (h_K = element diameter).
  auto space = FESpace::build(Mesh::build_uniform(3), 1);
  const double h_k = std::sqrt(2.0) * space->mesh().cell_size();
  std::vector<LocalEvaluator> tests;
  tests.push_back(sin_sin());
  tests.push_back(sin_x());
  tests.push_back(smooth_evaluator([](Vec2 x) { return cplx(std::exp(x.x - x.y), 0.0); },
                                   [](Vec2 x) {
                                     const double e = std::exp(x.x - x.y);
                                     return std::array<cplx, 2>{cplx(e, 0), cplx(-e, 0)};
                                   }));
  tests.push_back(smooth_evaluator([](Vec2 x) { return cplx(x.x * x.x * x.y, x.y * x.y); },
                                   [](Vec2 x) {
                                     return std::array<cplx, 2>{cplx(2 * x.x * x.y, 0),
                                                                cplx(x.x * x.x, 2 * x.y)};
                                   }));
  tests.push_back(smooth_evaluator([](Vec2 x) { return cplx(std::cos(3 * x.x + x.y), 0.0); },
                                   [](Vec2 x) {
                                     const double s = -std::sin(3 * x.x + x.y);
                                     return std::array<cplx, 2>{cplx(3 * s, 0), cplx(s, 0)};
                                   }));

  const QuadratureRule& rule = quadrature(6);
  const auto table = tabulate_basis(1, rule);
  const double C = 0.5;
  for (const auto& v : tests) {
    for (std::size_t k = 0; k < space->mesh().element_count(); ++k) {
      const auto c = elementwise_h1_projection(v, k, *space);
      const auto em = space->mesh().element_map(k);
      double l2 = 0.0, h1 = 0.0;
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const double w = rule.weights[q] * em.det_B;
        cplx vv, vg[2];
        v(k, em.map(rule.points[q]), &vv, vg);
        cplx pv(0.0, 0.0), pgx(0.0, 0.0), pgy(0.0, 0.0);
        for (int l = 0; l < table.count; ++l) {
          pv += table.at_point[q].values[l] * c[l];
          const Vec2 g = em.push_gradient(table.at_point[q].gradients[l]);
          pgx += g.x * c[l];
          pgy += g.y * c[l];
        }
        l2 += w * std::norm(vv - pv);
        h1 += w * (std::norm(vg[0] - pgx) + std::norm(vg[1] - pgy));
      }
      CHECK(std::sqrt(l2) <= C * h_k * std::sqrt(h1) + 1e-15);
    }
  }
}

TEST_CASE("oswald reproduces discrete fields and constants") {
  for (int degree : {1, 2}) {
    auto space = FESpace::build(Mesh::build_uniform(2), degree);
    const auto vh = testing::random_field(space, 5);
    const auto ih = oswald_interpolate(field_evaluator(vh), space);
    for (std::size_t j = 0; j < vh.size(); ++j) CHECK(std::abs(ih[j] - vh[j]) <= 1e-12);

    const auto ones = oswald_interpolate(
        smooth_evaluator([](Vec2) { return cplx(1.0, 0.0); },
                         [](Vec2) { return std::array<cplx, 2>{cplx(0, 0), cplx(0, 0)}; }),
        space);
    for (std::size_t j = 0; j < ones.size(); ++j)
      CHECK(std::abs(ones[j] - cplx(1.0, 0.0)) <= 1e-13);
  }
}

TEST_CASE("oswald stability in the energy seminorm") {
  const auto v = sin_sin();
  const double v_h1 = kPi * std::sqrt(0.5);  // |sin sin|_H1 = pi / sqrt 2
  for (int degree : {1, 2}) {
    for (int level = 2; level <= 5; ++level) {
      auto space = FESpace::build(Mesh::build_uniform(level), degree);
      const auto ih = oswald_interpolate(v, space);
      CHECK(h1_seminorm(ih) <= 5.0 * v_h1);
    }
  }
}

TEST_CASE("oswald approximation order") {
  const auto v = sin_sin();
  for (int degree : {1, 2}) {
    std::vector<double> errs;
    for (int level = 3; level <= 5; ++level) {
      auto space = FESpace::build(Mesh::build_uniform(level), degree);
      const auto ih = oswald_interpolate(v, space);
      const auto e = interpolation_error(ih, v);
      const double h = space->mesh().cell_size();
      errs.push_back(e[0] / h + e[1]);
    }
    for (std::size_t i = 1; i < errs.size(); ++i)
      CHECK(std::log2(errs[i - 1] / errs[i]) >= degree - 0.2);
  }
}

TEST_CASE("dirichlet variant zeroes masked nodes") {
  auto space = FESpace::build(Mesh::build_uniform(2), 1);
  std::vector<bool> mask(space->dof_count(), false);
  for (std::size_t j = 0; j < space->dof_count(); ++j) {
    const Vec2 x = space->dof_point(j);
    if (x.x == 0.0) mask[j] = true;  // left edge as Gamma_D
  }
  const auto ih = oswald_interpolate(
      smooth_evaluator([](Vec2) { return cplx(1.0, 0.0); },
                       [](Vec2) { return std::array<cplx, 2>{cplx(0, 0), cplx(0, 0)}; }),
      space, &mask);
  for (std::size_t j = 0; j < space->dof_count(); ++j) {
    if (mask[j])
      CHECK(ih[j] == cplx(0.0, 0.0));
    else
      CHECK(std::abs(ih[j] - cplx(1.0, 0.0)) <= 1e-13);
  }
}
