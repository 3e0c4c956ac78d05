#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "glfem/fe_space.hpp"

namespace glfem {

/// Evaluates a function (value and gradient) at a physical point, restricted
/// to a given element. The element argument disambiguates piecewise data on
/// shared edges.
using LocalEvaluator =
    std::function<void(std::size_t element, Vec2 physical, cplx* value, cplx grad[2])>;

/// Wraps a globally smooth function given by value and gradient callables.
LocalEvaluator smooth_evaluator(std::function<cplx(Vec2)> value,
                                std::function<std::array<cplx, 2>(Vec2)> gradient);

/// Wraps a finite element field (evaluated through its own element-local
/// polynomials, so edge quadrature points are unambiguous).
LocalEvaluator field_evaluator(const ComplexField& f);

/// Element-wise H¹ orthogonal projection Pi_K v in the local nodal basis of
/// element k: (v - Pi_K v, 1)_K = 0 and (grad(v - Pi_K v), grad w)_K = 0 for
/// all local polynomials w. Solved as a (nd+1) Lagrange-multiplier system.
std::vector<cplx> elementwise_h1_projection(const LocalEvaluator& v, std::size_t k,
                                            const FESpace& s);

/// Oswald quasi-interpolation: each dof coefficient is the arithmetic mean of
/// (Pi_K v)(a) over the elements containing the node a. With a boundary mask
/// (size N, true = constrained), masked nodes are set to zero instead
/// (Dirichlet variant); the main pipeline passes none.
ComplexField oswald_interpolate(const LocalEvaluator& v, std::shared_ptr<const FESpace> s,
                                const std::vector<bool>* dirichlet_mask = nullptr);

}  // namespace glfem
