#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "glfem/sparse.hpp"

namespace glfem {

/// Result of a smallest-eigenpair computation for H x = lambda M x.
struct EigenReport {
  std::vector<double> eigenvalues;               // ascending
  std::vector<std::vector<double>> eigenvectors;  // M-orthonormal
  std::vector<double> residual_norms;             // ||Hx - lambda Mx|| / ||x||_M
  int iterations = 0;
};

struct CgResult {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Preconditioned conjugate gradient with diagonal preconditioner for an SPD
/// (or HPD) operator. x holds the initial guess on entry and the solution on
/// return; the true residual contract ||b - Ax|| <= rel_tol ||b|| is
/// re-verified before returning. Throws NumericalError on NaN or
/// ConvergenceError when max_iter is exhausted.
template <typename Scalar>
CgResult solve_spd(const SparseSymOp<Scalar>& A, const std::vector<Scalar>& b,
                   std::vector<Scalar>& x, double rel_tol, int max_iter);

/// Convenience overload starting from x = 0.
template <typename Scalar>
std::vector<Scalar> solve_spd(const SparseSymOp<Scalar>& A, const std::vector<Scalar>& b,
                              double rel_tol, int max_iter);

using LinearOperator = std::function<void(const std::vector<double>&, std::vector<double>&)>;

struct EigenOptions {
  int k = 1;                    // requested pairs (<= 10)
  double tol = 1e-8;            // residual bound ||Hx - lambda Mx|| / ||x||_M
  int max_iter = 600;
  int guard = 3;                // extra block vectors beyond k
  std::uint64_t seed = 20250810;  // initial block RNG seed
  LinearOperator precond;       // approximate inverse of H's SPD principal part
  std::vector<std::vector<double>> constraints;  // deflated directions
  LinearOperator constraint_metric;  // metric for the deflation (default: M)
};

/// Runs a fixed number of diagonally preconditioned CG iterations (no
/// convergence contract); used to build eigensolver preconditioners.
void cg_fixed_iterations(const RealSymOp& A, const std::vector<double>& b,
                         std::vector<double>& x, int iters);

/// Locally optimal block preconditioned CG for the k smallest eigenpairs of
/// the symmetric pencil (H, M) with M symmetric positive definite. H and M
/// are given as operator callbacks so assembled CSR, block layouts, and
/// matrix-free compositions can all be used.
EigenReport smallest_eigenpairs(const LinearOperator& H, const LinearOperator& M,
                                std::size_t dim, const EigenOptions& opts);

/// CSR convenience wrapper.
EigenReport smallest_eigenpairs(const RealSymOp& H, const RealSymOp& M, int k, double tol);

}  // namespace glfem
