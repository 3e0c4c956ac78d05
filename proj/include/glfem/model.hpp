#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "glfem/fe_space.hpp"
#include "glfem/sparse.hpp"

namespace glfem {

/// Magnetic vector potential A : Omega -> R².
class MagneticPotential {
public:
  enum class Preset { zero, paper_trig, custom };

  static MagneticPotential zero() { return MagneticPotential(Preset::zero, nullptr); }
  /// A(x,y) = sqrt(2) (sin(pi x) cos(pi y), -cos(pi x) sin(pi y)):
  /// divergence-free with vanishing normal trace on the unit square.
  static MagneticPotential paper_trig() { return MagneticPotential(Preset::paper_trig, nullptr); }
  static MagneticPotential custom(std::function<Vec2(Vec2)> fn) {
    return MagneticPotential(Preset::custom, std::move(fn));
  }
  static MagneticPotential from_name(const std::string& name);

  Preset preset() const { return preset_; }
  const char* name() const;
  Vec2 operator()(Vec2 x) const;

private:
  MagneticPotential(Preset p, std::function<Vec2(Vec2)> fn)
      : preset_(p), fn_(std::move(fn)) {}
  Preset preset_;
  std::function<Vec2(Vec2)> fn_;
};

struct ModelParams {
  double kappa = 1.0;  // requires kappa >= 1
  MagneticPotential potential = MagneticPotential::zero();
};

/// Nodal interpolation of a named starting state: "const_phase" (4/5 + 3i/5),
/// "linear" (i + x1 - 1/2), "vortex" ((x1 + i x2) exp(-|x|^2/2)).
ComplexField initial_guess(const std::string& preset, std::shared_ptr<const FESpace> space);

/// Assembles every Ginzburg-Landau quantity on one space: the energy E, the
/// residual of E', the real 2N Hessian form of E'', the state-adaptive inner
/// product (.,.)_{X,z} with its right-hand side, plus mass and stiffness.
/// Quadrature degree is max(4p, 2p+4); the potential is evaluated directly at
/// quadrature points. One instance is immutable configuration plus cached
/// geometry; assembly calls are const and thread-compatible.
class Assembler {
public:
  Assembler(std::shared_ptr<const FESpace> space, ModelParams params);

  const FESpace& space() const { return *space_; }
  std::shared_ptr<const FESpace> space_ptr() const { return space_; }
  const ModelParams& params() const { return params_; }
  const QuadratureRule& rule() const { return *rule_; }

  /// E(u) = 1/2 ∫ |i/kappa grad u + A u|² + 1/2 (|u|²-1)² dx  (>= 0).
  double energy(const ComplexField& u) const;

  /// Complex residual g with g_j = <E'(u), phi_j> + i <E'(u), i phi_j>, so
  /// <E'(u), v> = sum_j Re(g_j conj(v_j)).
  std::vector<cplx> gradient(const ComplexField& u) const;

  /// Coefficients c of the quartic q(tau) = E(u + tau d) = sum c_l tau^l.
  std::array<double, 5> quartic_coeffs(const ComplexField& u, const ComplexField& d) const;

  /// Real symmetric 2N operator of <E''(u) z, w> in [Re; Im] layout.
  RealSymOp hessian(const ComplexField& u) const;

  /// Hermitian N x N matrix of (v,w)_{X,z} and the right-hand side
  /// ((1 + |A|²) z, phi_j). The matrix is written into this assembler's
  /// reusable storage (pattern fixed, values refreshed).
  const HermitianOp& xz_matrix(const ComplexField& z) const;
  std::vector<cplx> xz_rhs(const ComplexField& z) const;

  const HermitianOp& mass() const;
  const HermitianOp& stiffness() const;

  /// Real 2N block-diagonal operator diag(B, B) from a real-valued Hermitian
  /// matrix (mass, stiffness or combinations thereof).
  RealSymOp real_block_diag(const HermitianOp& B) const;

  /// Real 2N operator of (.,.)_{X,z} (used as eigenproblem preconditioner).
  RealSymOp xz_real_operator(const ComplexField& z) const;

  std::size_t dof_count() const { return space_->dof_count(); }

private:
  struct QpData;  // cached per-(element, quadrature point) geometry

  void element_fields(std::size_t k, const ComplexField& u, cplx* values, cplx* grads) const;

  std::shared_ptr<const FESpace> space_;
  ModelParams params_;
  const QuadratureRule* rule_;
  BasisTable basis_;
  // Pushed physical basis gradients per element type (lower/upper), per
  // quadrature point, per local dof.
  std::vector<Vec2> pushed_grad_[2];
  std::vector<double> wdet_;          // quadrature weight times |det B|
  std::vector<double> a_x_, a_y_, a_sq_;  // potential values at all qps
  std::unique_ptr<ElementPattern> pattern_;
  std::unique_ptr<DofGather> dof_gather_;
  std::vector<cplx> xz_fixed_;  // (1/k²)K + i Q + 2|A|² mass values
  mutable HermitianOp xz_;      // reusable matrix storage
  mutable std::vector<double> local_scratch_;
  mutable std::vector<double> xz_mass_vals_;
  mutable std::unique_ptr<HermitianOp> mass_, stiffness_;
};

}  // namespace glfem
