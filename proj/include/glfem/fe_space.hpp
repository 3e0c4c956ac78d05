#pragma once

#include <array>
#include <complex>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include "glfem/mesh.hpp"
#include "glfem/quadrature.hpp"

namespace glfem {

using cplx = std::complex<double>;

/// Values and reference gradients of the local Lagrange basis at one point.
struct BasisEval {
  std::array<double, 6> values{};
  std::array<Vec2, 6> gradients{};
  int count = 0;
};

/// Lagrange basis (and reference-gradient) evaluation on the reference
/// triangle. P1: barycentric hat functions at the vertices. P2: quadratic
/// nodal functions at the vertices and edge midpoints (locals 3,4,5 are the
/// midpoints of edges 01, 12, 02).
BasisEval eval_basis(int degree, Vec2 ref);

/// Precomputed basis tables at the points of a quadrature rule.
struct BasisTable {
  std::vector<BasisEval> at_point;  // one entry per quadrature point
  int count = 0;                    // local dofs (3 or 6)
};

BasisTable tabulate_basis(int degree, const QuadratureRule& rule);

/// P_p complex Lagrange space on a uniform Mesh, p in {1,2}.
/// Dofs are numbered lexicographically by (y,x) on the (2^l·p + 1)² grid of
/// nodal points; immutable after construction.
class FESpace {
public:
  static std::shared_ptr<const FESpace> build(std::shared_ptr<const Mesh> mesh, int degree);

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
  int degree() const { return degree_; }
  std::size_t dof_count() const { return dof_count_; }
  int dofs_per_element() const { return degree_ == 1 ? 3 : 6; }
  Vec2 dof_point(std::size_t j) const;
  const std::uint32_t* element_dofs(std::size_t k) const {
    return element_dofs_.data() + k * dofs_per_element();
  }

  /// Side length of the nodal-point grid (p·2^l + 1).
  int grid_side() const { return grid_side_; }

private:
  FESpace(std::shared_ptr<const Mesh> mesh, int degree);

  std::shared_ptr<const Mesh> mesh_;
  int degree_;
  int grid_side_;
  std::size_t dof_count_;
  std::vector<std::uint32_t> element_dofs_;
};

/// Discrete complex state u_h: one coefficient per dof (Lagrange property:
/// point value at dof j equals coefficients[j]).
class ComplexField {
public:
  ComplexField() = default;
  explicit ComplexField(std::shared_ptr<const FESpace> space)
      : space_(std::move(space)), coeff_(space_->dof_count(), cplx(0.0, 0.0)) {}

  const FESpace& space() const { return *space_; }
  std::shared_ptr<const FESpace> space_ptr() const { return space_; }
  std::size_t size() const { return coeff_.size(); }
  cplx& operator[](std::size_t j) { return coeff_[j]; }
  const cplx& operator[](std::size_t j) const { return coeff_[j]; }
  std::vector<cplx>& coefficients() { return coeff_; }
  const std::vector<cplx>& coefficients() const { return coeff_; }

  /// Real layout of length 2N: all real parts, then all imaginary parts.
  std::vector<double> real_layout() const;
  void set_from_real_layout(const std::vector<double>& xy);

  /// Evaluates the field (value, gradient) at a reference point of element k.
  void eval_on_element(std::size_t k, Vec2 ref, cplx* value, cplx grad[2]) const;

  /// Evaluates at an arbitrary point of the closed domain.
  cplx eval(Vec2 x) const;

  /// Text dump "glfield v1" / "p=<p> level=<l> N=<N>" / N lines "re im".
  /// Lines beginning with '#' after the data block are ignored on load.
  void dump(std::ostream& os) const;
  static ComplexField load(std::istream& is, std::shared_ptr<const FESpace> space);

private:
  std::shared_ptr<const FESpace> space_;
  std::vector<cplx> coeff_;
};

/// Nodal interpolation: coefficients[j] = f(dof_point(j)). Throws InputError
/// on a non-finite value, naming the node location.
ComplexField nodal_interpolate(const std::function<cplx(Vec2)>& f,
                               std::shared_ptr<const FESpace> space);

/// Exact re-representation of a coarse field on a nested finer space (same
/// or higher degree). Throws StructuralError for non-nested spaces.
ComplexField prolongate(const ComplexField& coarse, std::shared_ptr<const FESpace> fine);

/// Sparse prolongation operator coarse -> fine as CSR-like row data:
/// fine coefficient i = sum_j weight[i][j] * coarse coefficient col[i][j].
struct Prolongation {
  std::size_t rows = 0, cols = 0;
  std::vector<std::uint32_t> row_offset;
  std::vector<std::uint32_t> col;
  std::vector<double> weight;

  std::vector<cplx> apply(const std::vector<cplx>& coarse) const;
  /// Transpose action (restriction of linear functionals).
  std::vector<cplx> apply_transpose(const std::vector<cplx>& fine) const;
};

Prolongation build_prolongation(const FESpace& coarse, const FESpace& fine);

}  // namespace glfem
