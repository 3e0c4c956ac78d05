#include "glfem/solvers.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

namespace glfem {

namespace {

template <typename Scalar>
double real_dot(const std::vector<Scalar>& a, const std::vector<Scalar>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if constexpr (std::is_same_v<Scalar, cplx>)
      s += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    else
      s += a[i] * b[i];
  }
  return s;
}

template <typename Scalar>
double norm2(const std::vector<Scalar>& a) {
  return std::sqrt(real_dot(a, a));
}

}  // namespace

template <typename Scalar>
CgResult solve_spd(const SparseSymOp<Scalar>& A, const std::vector<Scalar>& b,
                   std::vector<Scalar>& x, double rel_tol, int max_iter) {
  if (b.size() != A.dim) throw StructuralError("solve_spd: rhs size mismatch");
  if (x.size() != A.dim) x.assign(A.dim, Scalar(0));
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    x.assign(A.dim, Scalar(0));
    return {0, 0.0};
  }

  std::vector<double> inv_diag = A.diagonal();
  for (auto& d : inv_diag) d = d > 0.0 ? 1.0 / d : 1.0;

  CgResult res;
  std::vector<Scalar> r(A.dim), z(A.dim), p(A.dim), Ap(A.dim);

  // Outer defect-correction sweeps: the inner recurrence residual drifts
  // from the true one near machine precision, so restart from the true
  // residual until the contract holds.
  for (int sweep = 0; sweep < 5 && res.iterations < max_iter; ++sweep) {
    A.apply(x.data(), r.data());
    for (std::size_t i = 0; i < A.dim; ++i) r[i] = b[i] - r[i];
    res.relative_residual = norm2(r) / bnorm;
    if (res.relative_residual <= rel_tol) return res;

    for (std::size_t i = 0; i < A.dim; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = real_dot(r, z);
    double rnorm = norm2(r);
    while (res.iterations < max_iter && rnorm > 0.5 * rel_tol * bnorm) {
      A.apply(p.data(), Ap.data());
      const double pAp = real_dot(p, Ap);
      if (!(pAp > 0.0) || !std::isfinite(pAp))
        throw NumericalError("solve_spd: operator not positive definite (p'Ap = " +
                             std::to_string(pAp) + ")");
      const double alpha = rz / pAp;
      for (std::size_t i = 0; i < A.dim; ++i) {
        x[i] += Scalar(alpha) * p[i];
        r[i] -= Scalar(alpha) * Ap[i];
      }
      for (std::size_t i = 0; i < A.dim; ++i) z[i] = inv_diag[i] * r[i];
      const double rz_new = real_dot(r, z);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t i = 0; i < A.dim; ++i) p[i] = z[i] + Scalar(beta) * p[i];
      rnorm = norm2(r);
      if (!std::isfinite(rnorm)) throw NumericalError("solve_spd: NaN residual");
      ++res.iterations;
    }
  }

  std::vector<Scalar> true_r = A.apply(x);
  for (std::size_t i = 0; i < true_r.size(); ++i) true_r[i] = b[i] - true_r[i];
  res.relative_residual = norm2(true_r) / bnorm;
  if (res.relative_residual > rel_tol) {
    std::ostringstream msg;
    msg << "solve_spd: residual " << res.relative_residual << " above tolerance " << rel_tol
        << " after " << res.iterations << " iterations";
    throw ConvergenceError(msg.str());
  }
  return res;
}

template <typename Scalar>
std::vector<Scalar> solve_spd(const SparseSymOp<Scalar>& A, const std::vector<Scalar>& b,
                              double rel_tol, int max_iter) {
  std::vector<Scalar> x(A.dim, Scalar(0));
  solve_spd(A, b, x, rel_tol, max_iter);
  return x;
}

template CgResult solve_spd<double>(const SparseSymOp<double>&, const std::vector<double>&,
                                    std::vector<double>&, double, int);
template CgResult solve_spd<cplx>(const SparseSymOp<cplx>&, const std::vector<cplx>&,
                                  std::vector<cplx>&, double, int);
template std::vector<double> solve_spd<double>(const SparseSymOp<double>&,
                                               const std::vector<double>&, double, int);
template std::vector<cplx> solve_spd<cplx>(const SparseSymOp<cplx>&, const std::vector<cplx>&,
                                           double, int);

void cg_fixed_iterations(const RealSymOp& A, const std::vector<double>& b,
                         std::vector<double>& x, int iters) {
  std::vector<double> inv_diag = A.diagonal();
  for (auto& v : inv_diag) v = v > 0.0 ? 1.0 / v : 1.0;
  x.assign(A.dim, 0.0);
  std::vector<double> r = b, z(A.dim), p(A.dim), Ap(A.dim);
  for (std::size_t i = 0; i < A.dim; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = 0.0;
  for (std::size_t i = 0; i < A.dim; ++i) rz += r[i] * z[i];
  for (int it = 0; it < iters && rz > 0.0; ++it) {
    A.apply(p.data(), Ap.data());
    double pAp = 0.0;
    for (std::size_t i = 0; i < A.dim; ++i) pAp += p[i] * Ap[i];
    if (!(pAp > 0.0) || !std::isfinite(pAp)) break;
    const double alpha = rz / pAp;
    for (std::size_t i = 0; i < A.dim; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
    }
    double rz_new = 0.0;
    for (std::size_t i = 0; i < A.dim; ++i) {
      z[i] = inv_diag[i] * r[i];
      rz_new += r[i] * z[i];
    }
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < A.dim; ++i) p[i] = z[i] + beta * p[i];
  }
}

namespace {
using Mat = Eigen::MatrixXd;
}  // namespace

EigenReport smallest_eigenpairs(const LinearOperator& H, const LinearOperator& M,
                                std::size_t dim, const EigenOptions& opts) {
  const int k = opts.k;
  if (k < 1 || k > 10) throw ConfigError("smallest_eigenpairs: k must be in 1..10");
  const int m = std::min<std::size_t>(k + opts.guard, dim);

  std::vector<double> tmp_in(dim), tmp_out(dim);
  auto apply_op = [&](const LinearOperator& op, const Mat& X) {
    Mat Y(dim, X.cols());
    for (int c = 0; c < X.cols(); ++c) {
      Eigen::Map<Eigen::VectorXd>(tmp_in.data(), dim) = X.col(c);
      op(tmp_in, tmp_out);
      Y.col(c) = Eigen::Map<const Eigen::VectorXd>(tmp_out.data(), dim);
    }
    return Y;
  };

  // Projector against the constraint vectors, orthogonal in the constraint
  // metric (defaults to the pencil's M).
  Mat Y, MY;
  Eigen::MatrixXd YtMY_inv;
  if (!opts.constraints.empty()) {
    Y.resize(dim, opts.constraints.size());
    for (std::size_t c = 0; c < opts.constraints.size(); ++c)
      Y.col(c) = Eigen::Map<const Eigen::VectorXd>(opts.constraints[c].data(), dim);
    MY = apply_op(opts.constraint_metric ? opts.constraint_metric : M, Y);
    YtMY_inv = (Y.transpose() * MY).inverse();
  }
  auto project_constraints = [&](Mat& X) {
    if (Y.cols() == 0) return;
    X -= Y * (YtMY_inv * (MY.transpose() * X));
  };

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat X(dim, m);
  for (std::size_t i = 0; i < dim; ++i)
    for (int c = 0; c < m; ++c) X(i, c) = gauss(rng);
  project_constraints(X);

  // M-orthonormalizes the columns of X in place; returns retained count.
  auto m_orthonormalize = [&](Mat& V) -> int {
    Mat MV = apply_op(M, V);
    int kept = 0;
    for (int c = 0; c < V.cols(); ++c) {
      Eigen::VectorXd v = V.col(c);
      for (int rep = 0; rep < 2; ++rep)
        for (int j = 0; j < kept; ++j) {
          const double proj = MV.col(j).dot(v);
          v -= proj * V.col(j);
        }
      // Recompute M v for the norm after projection.
      Eigen::Map<Eigen::VectorXd>(tmp_in.data(), dim) = v;
      M(tmp_in, tmp_out);
      const double nrm = std::sqrt(std::max(0.0, v.dot(Eigen::Map<const Eigen::VectorXd>(
                                                     tmp_out.data(), dim))));
      if (nrm < 1e-10) continue;  // drop dependent direction
      v /= nrm;
      V.col(kept) = v;
      Eigen::Map<Eigen::VectorXd>(tmp_in.data(), dim) = v;
      M(tmp_in, tmp_out);
      MV.col(kept) = Eigen::Map<const Eigen::VectorXd>(tmp_out.data(), dim);
      ++kept;
    }
    V.conservativeResize(Eigen::NoChange, kept);
    return kept;
  };

  m_orthonormalize(X);
  if (X.cols() < k) throw NumericalError("smallest_eigenpairs: initial block degenerate");

  Mat P(dim, 0);
  EigenReport report;
  Eigen::VectorXd theta;

  for (int it = 0; it < opts.max_iter; ++it) {
    Mat HX = apply_op(H, X), MX = apply_op(M, X);

    // Ritz values of current X for residuals.
    {
      Mat hx = X.transpose() * HX;
      Mat mx = X.transpose() * MX;
      Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(0.5 * (hx + hx.transpose()),
                                                       0.5 * (mx + mx.transpose()));
      theta = es.eigenvalues();
      Mat C = es.eigenvectors();
      X = X * C;
      HX = HX * C;
      MX = MX * C;
    }

    // Residuals R = HX - MX diag(theta); columns are M-normalized already.
    Mat R = HX - MX * theta.asDiagonal();
    report.residual_norms.assign(k, 0.0);
    bool converged = true;
    for (int c = 0; c < k; ++c) {
      report.residual_norms[c] = R.col(c).norm();
      if (report.residual_norms[c] > opts.tol) converged = false;
    }
    report.iterations = it;
    if (converged || it == opts.max_iter - 1) {
      report.eigenvalues.assign(theta.data(), theta.data() + k);
      report.eigenvectors.assign(k, std::vector<double>(dim));
      for (int c = 0; c < k; ++c)
        Eigen::Map<Eigen::VectorXd>(report.eigenvectors[c].data(), dim) = X.col(c);
      if (!converged)
        throw ConvergenceError("smallest_eigenpairs: residual " +
                               std::to_string(*std::max_element(report.residual_norms.begin(),
                                                                report.residual_norms.end())) +
                               " above tolerance after " + std::to_string(opts.max_iter) +
                               " iterations");
      return report;
    }

    // Preconditioned residuals.
    Mat W(dim, X.cols());
    for (int c = 0; c < X.cols(); ++c) {
      Eigen::Map<Eigen::VectorXd>(tmp_in.data(), dim) = R.col(c);
      if (opts.precond)
        opts.precond(tmp_in, tmp_out);
      else
        tmp_out = tmp_in;
      W.col(c) = Eigen::Map<const Eigen::VectorXd>(tmp_out.data(), dim);
    }
    project_constraints(W);

    Mat XW(dim, X.cols() + W.cols() + P.cols());
    XW.leftCols(X.cols()) = X;
    XW.middleCols(X.cols(), W.cols()) = W;
    if (P.cols() > 0) XW.rightCols(P.cols()) = P;
    // Orthonormalize the combined block; keep the leading X columns intact.
    const int kept = m_orthonormalize(XW);
    if (kept < k) throw NumericalError("smallest_eigenpairs: search space collapsed");
    Mat Sfull = XW.leftCols(kept);

    Mat HS = apply_op(H, Sfull), MS = apply_op(M, Sfull);
    Mat hS = Sfull.transpose() * HS;
    Mat mS = Sfull.transpose() * MS;
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(0.5 * (hS + hS.transpose()),
                                                     0.5 * (mS + mS.transpose()));
    const int take = std::min<int>(m, kept);
    Mat C = es.eigenvectors().leftCols(take);
    Mat Xnew = Sfull * C;

    // LOBPCG direction: same combination with the X-block rows removed.
    Mat Cp = C;
    Cp.topRows(X.cols()).setZero();
    P = Sfull * Cp;

    X = Xnew;
    project_constraints(X);
  }
  throw ConvergenceError("smallest_eigenpairs: iteration limit");
}

EigenReport smallest_eigenpairs(const RealSymOp& H, const RealSymOp& M, int k, double tol) {
  EigenOptions opts;
  opts.k = k;
  opts.tol = tol;

  // Default preconditioner: a few CG passes on the shifted operator
  // H + sigma M, which stays usable when H itself is singular.
  const auto dh = H.diagonal();
  const auto dm = M.diagonal();
  double ratio = 0.0;
  for (std::size_t i = 0; i < H.dim; ++i)
    ratio = std::max(ratio, dm[i] > 0.0 ? dh[i] / dm[i] : 0.0);
  const double sigma = 0.01 * std::max(ratio, 1e-30);
  RealSymOp shifted = H;
  {
    // Merge sigma * M into a copy of H (patterns may differ: rebuild).
    TripletBuilder<double> tb(H.dim);
    for (std::size_t i = 0; i < H.dim; ++i)
      for (std::uint32_t s = H.row_offset[i]; s < H.row_offset[i + 1]; ++s)
        tb.add(static_cast<std::uint32_t>(i), H.col[s], H.val[s]);
    for (std::size_t i = 0; i < M.dim; ++i)
      for (std::uint32_t s = M.row_offset[i]; s < M.row_offset[i + 1]; ++s)
        tb.add(static_cast<std::uint32_t>(i), M.col[s], sigma * M.val[s]);
    shifted = tb.build();
  }
  opts.precond = [shifted = std::move(shifted)](const std::vector<double>& r,
                                                std::vector<double>& out) {
    cg_fixed_iterations(shifted, r, out, 30);
  };

  auto Hop = [&H](const std::vector<double>& x, std::vector<double>& y) {
    y.resize(x.size());
    H.apply(x.data(), y.data());
  };
  auto Mop = [&M](const std::vector<double>& x, std::vector<double>& y) {
    y.resize(x.size());
    M.apply(x.data(), y.data());
  };
  return smallest_eigenpairs(Hop, Mop, H.dim, opts);
}

}  // namespace glfem
