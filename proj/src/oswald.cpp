#include "glfem/oswald.hpp"

#include <Eigen/Dense>

#include "glfem/error.hpp"
#include "glfem/parallel.hpp"
#include "glfem/quadrature.hpp"

namespace glfem {

LocalEvaluator smooth_evaluator(std::function<cplx(Vec2)> value,
                                std::function<std::array<cplx, 2>(Vec2)> gradient) {
  return [value = std::move(value), gradient = std::move(gradient)](
             std::size_t, Vec2 x, cplx* v, cplx g[2]) {
    if (v) *v = value(x);
    if (g) {
      const auto gr = gradient(x);
      g[0] = gr[0];
      g[1] = gr[1];
    }
  };
}

LocalEvaluator field_evaluator(const ComplexField& f) {
  return [&f](std::size_t k, Vec2 x, cplx* v, cplx g[2]) {
    const auto em = f.space().mesh().element_map(k);
    f.eval_on_element(k, em.unmap(x), v, g);
  };
}

std::vector<cplx> elementwise_h1_projection(const LocalEvaluator& v, std::size_t k,
                                            const FESpace& s) {
  const int p = s.degree();
  const int nd = s.dofs_per_element();
  const QuadratureRule& rule = quadrature(2 * p + 4);
  const auto em = s.mesh().element_map(k);
  const auto basis = tabulate_basis(p, rule);

  // Saddle system [[S, m], [m^T, 0]] [c; mu] = [g; mean(v)].
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nd + 1, nd + 1);
  Eigen::VectorXd rhs_re = Eigen::VectorXd::Zero(nd + 1);
  Eigen::VectorXd rhs_im = Eigen::VectorXd::Zero(nd + 1);

  std::vector<Vec2> pg(nd);
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const double w = rule.weights[q] * em.det_B;
    const auto& bv = basis.at_point[q];
    for (int a = 0; a < nd; ++a) pg[a] = em.push_gradient(bv.gradients[a]);
    const Vec2 x = em.map(rule.points[q]);
    cplx vv;
    cplx vg[2];
    v(k, x, &vv, vg);
    for (int a = 0; a < nd; ++a) {
      for (int b = a; b < nd; ++b) {
        const double sab = w * dot(pg[a], pg[b]);
        A(a, b) += sab;
        if (b != a) A(b, a) += sab;
      }
      A(a, nd) += w * bv.values[a];
      const cplx ga = w * (vg[0] * pg[a].x + vg[1] * pg[a].y);
      rhs_re(a) += ga.real();
      rhs_im(a) += ga.imag();
    }
    rhs_re(nd) += w * vv.real();
    rhs_im(nd) += w * vv.imag();
  }
  for (int a = 0; a < nd; ++a) A(nd, a) = A(a, nd);

  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const Eigen::VectorXd cre = lu.solve(rhs_re);
  const Eigen::VectorXd cim = lu.solve(rhs_im);
  if (!cre.allFinite() || !cim.allFinite())
    throw NumericalError("elementwise_h1_projection: singular local system");

  std::vector<cplx> c(nd);
  for (int a = 0; a < nd; ++a) c[a] = cplx(cre(a), cim(a));
  return c;
}

ComplexField oswald_interpolate(const LocalEvaluator& v, std::shared_ptr<const FESpace> s,
                                const std::vector<bool>* dirichlet_mask) {
  const std::size_t nel = s->mesh().element_count();
  const int nd = s->dofs_per_element();
  const std::size_t n = s->dof_count();

  // Per-element nodal values of Pi_K v, then averaged per dof.
  std::vector<cplx> nodal(nel * nd);
  const FESpace& space = *s;
  parallel_chunks(nel, 256, [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t k = b; k < e; ++k) {
      const auto c = elementwise_h1_projection(v, k, space);
      // The local basis is nodal, so coefficients are the node values.
      for (int a = 0; a < nd; ++a) nodal[k * nd + a] = c[a];
    }
  });

  std::vector<cplx> sum(n, cplx(0.0, 0.0));
  std::vector<std::uint32_t> count(n, 0);
  for (std::size_t k = 0; k < nel; ++k) {
    const std::uint32_t* dofs = space.element_dofs(k);
    for (int a = 0; a < nd; ++a) {
      sum[dofs[a]] += nodal[k * nd + a];
      ++count[dofs[a]];
    }
  }

  ComplexField out(s);
  for (std::size_t j = 0; j < n; ++j) {
    if (dirichlet_mask && (*dirichlet_mask)[j]) {
      out[j] = cplx(0.0, 0.0);
      continue;
    }
    out[j] = sum[j] / static_cast<double>(count[j]);
  }
  return out;
}

}  // namespace glfem
