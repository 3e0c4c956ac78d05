#include "glfem/optimizer.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace glfem {

namespace {

double real_dot(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
  return s;
}

double eval_poly(const std::array<double, 5>& c, double t) {
  return c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * c[4])));
}

double eval_dpoly(const std::array<double, 5>& c, double t) {
  return c[1] + t * (2 * c[2] + t * (3 * c[3] + t * 4 * c[4]));
}

// Real roots of q'(t) = c1 + 2 c2 t + 3 c3 t^2 + 4 c4 t^3 via the companion
// matrix, polished by Newton on q'.
std::vector<double> stationary_points(const std::array<double, 5>& c) {
  const double a3 = 4 * c[4], a2 = 3 * c[3], a1 = 2 * c[2], a0 = c[1];
  std::vector<double> roots;
  const double scale = std::max({std::abs(a3), std::abs(a2), std::abs(a1), std::abs(a0)});
  if (scale == 0.0) return roots;
  if (std::abs(a3) > 1e-14 * scale) {
    Eigen::Matrix3d comp = Eigen::Matrix3d::Zero();
    comp(0, 2) = -a0 / a3;
    comp(1, 2) = -a1 / a3;
    comp(2, 2) = -a2 / a3;
    comp(1, 0) = 1.0;
    comp(2, 1) = 1.0;
    const Eigen::EigenSolver<Eigen::Matrix3d> es(comp);
    for (int i = 0; i < 3; ++i) {
      const auto ev = es.eigenvalues()(i);
      if (std::abs(ev.imag()) < 1e-9 * (1.0 + std::abs(ev.real())))
        roots.push_back(ev.real());
    }
  } else if (std::abs(a2) > 1e-14 * scale) {
    const double disc = a1 * a1 - 4 * a2 * a0;
    if (disc >= 0.0) {
      const double r = std::sqrt(disc);
      roots.push_back((-a1 + r) / (2 * a2));
      roots.push_back((-a1 - r) / (2 * a2));
    }
  } else if (std::abs(a1) > 0.0) {
    roots.push_back(-a0 / a1);
  }
  const double d2scale = std::abs(a1) + std::abs(2 * a2) + std::abs(3 * a3);
  for (double& t : roots) {
    for (int it = 0; it < 3; ++it) {
      const double f = eval_dpoly(c, t);
      const double df = 2 * c[2] + t * (6 * c[3] + t * 12 * c[4]);
      if (std::abs(df) < 1e-300 || !std::isfinite(f)) break;
      const double step = f / df;
      if (!std::isfinite(step) || std::abs(step) > 1.0 + std::abs(t)) break;
      t -= step;
    }
    (void)d2scale;
  }
  return roots;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(energy_tol > 0.0) || !(grad_tol > 0.0) || !(linear_rel_tol > 0.0) ||
      !(eigen_tol > 0.0))
    throw ConfigError("solver tolerances must be positive");
  if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
  if (escape_max < 0) throw ConfigError("escape_max must be >= 0");
}

const char* to_string(StateClass c) {
  switch (c) {
    case StateClass::minimizer: return "minimizer";
    case StateClass::saddle: return "saddle";
    case StateClass::degenerate: return "degenerate";
    default: return "unverified";
  }
}

LineSearchResult line_search_quartic(const Assembler& asm_, const ComplexField& u,
                                     const ComplexField& d, bool whole_line) {
  double dnorm = 0.0;
  for (const auto& c : d.coefficients()) dnorm += std::norm(c);
  if (dnorm == 0.0) throw InputError("line_search_quartic: zero direction");

  LineSearchResult res;
  res.coeffs = asm_.quartic_coeffs(u, d);
  const auto roots = stationary_points(res.coeffs);

  double best_tau = 0.0, best_q = res.coeffs[0];
  bool found = false;
  for (double t : roots) {
    if (!whole_line && t <= 0.0) continue;
    const double q = eval_poly(res.coeffs, t);
    if (!found || q < best_q) {
      best_tau = t;
      best_q = q;
      found = true;
    }
  }
  res.tau = best_tau;
  res.q_at_tau = best_q;
  res.descent = found && best_q < res.coeffs[0];
  return res;
}

double pr_beta(double gg_current, double g_dot_prev_metric, double denom_prev) {
  if (!(denom_prev > 0.0)) return 0.0;
  return std::max(0.0, (gg_current - g_dot_prev_metric) / denom_prev);
}

EigenReport verify_minimizer(const Assembler& asm_, const ComplexField& u, double eigen_tol,
                             std::uint64_t seed) {
  const RealSymOp H = asm_.hessian(u);
  const RealSymOp M = asm_.real_block_diag(asm_.mass());
  const RealSymOp X = asm_.xz_real_operator(u);

  EigenOptions opts;
  opts.k = 2;
  opts.tol = eigen_tol;
  opts.seed = seed;
  opts.max_iter = 2000;
  opts.precond = [&X](const std::vector<double>& r, std::vector<double>& out) {
    cg_fixed_iterations(X, r, out, 25);
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

StateClass classify(const EigenReport& rep, double class_tol) {
  if (rep.eigenvalues.size() < 2) return StateClass::unverified;
  const double l1 = rep.eigenvalues[0], l2 = rep.eigenvalues[1];
  if (l1 < -class_tol) return StateClass::saddle;
  if (l2 > class_tol) return StateClass::minimizer;
  return StateClass::degenerate;
}

ComplexField saddle_escape(const Assembler& asm_, const ComplexField& u,
                           const std::vector<double>& direction) {
  ComplexField w(asm_.space_ptr());
  w.set_from_real_layout(direction);

  const auto ls = line_search_quartic(asm_, u, w, /*whole_line=*/true);
  // q''(0) = <E''(u) w, w> = 2 c2: reject directions of nonnegative curvature.
  if (2.0 * ls.coeffs[2] >= 0.0)
    throw InputError("saddle_escape: direction has nonnegative curvature");
  const double decrease = ls.coeffs[0] - ls.q_at_tau;
  if (!ls.descent || !(decrease > 0.0))
    throw NumericalError("saddle_escape: no energy decrease along the given direction");

  ComplexField out = u;
  for (std::size_t j = 0; j < out.size(); ++j) out[j] += ls.tau * w[j];
  return out;
}

namespace {

struct NcgLoopResult {
  double energy = 0.0;
  double final_diff = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

NcgLoopResult ncg_loop(const Assembler& asm_, const SolverConfig& cfg, ComplexField& u,
                       int iter_offset) {
  const std::size_t n = u.size();
  NcgLoopResult out;
  double energy = asm_.energy(u);
  out.energy = energy;

  std::vector<cplx> delta = u.coefficients();  // warm start
  std::vector<cplx> d_prev, g_prev;
  double denom_prev = 0.0;
  bool have_prev = false;
  ComplexField dir(asm_.space_ptr());

  for (int it = 0; it < cfg.max_iter; ++it) {
    out.iterations = it + 1;
    const HermitianOp& M = asm_.xz_matrix(u);
    const std::vector<cplx> rhs = asm_.xz_rhs(u);
    solve_spd(M, rhs, delta, cfg.linear_rel_tol, cfg.linear_max_iter);

    std::vector<cplx> g(n);
    for (std::size_t j = 0; j < n; ++j) g[j] = delta[j] - u[j];
    const std::vector<cplx> Mg = M.apply(g);
    const double gg = real_dot(g, Mg);
    out.residual = std::sqrt(std::max(0.0, gg));
    if (out.residual < cfg.grad_tol) {
      out.converged = true;
      return out;
    }

    double beta = 0.0;
    const bool forced_restart = cfg.restart_period > 0 && it > 0 &&
                                (it % cfg.restart_period) == 0;
    if (have_prev && !forced_restart)
      beta = pr_beta(gg, real_dot(g_prev, Mg), denom_prev);

    if (beta > 0.0) {
      for (std::size_t j = 0; j < n; ++j) dir[j] = g[j] + beta * d_prev[j];
    } else {
      for (std::size_t j = 0; j < n; ++j) dir[j] = g[j];
    }

    LineSearchResult ls = line_search_quartic(asm_, u, dir);
    if (!ls.descent && beta > 0.0) {
      beta = 0.0;
      for (std::size_t j = 0; j < n; ++j) dir[j] = g[j];
      ls = line_search_quartic(asm_, u, dir);
    }
    if (!ls.descent) {
      // The preconditioned gradient itself admits no decrease: numerically at
      // a stationary point.
      out.converged = true;
      return out;
    }

    for (std::size_t j = 0; j < n; ++j) u[j] += ls.tau * dir[j];
    const double energy_new = ls.q_at_tau;
    const double diff = energy - energy_new;
    out.final_diff = diff;
    if (cfg.iteration_log) {
      auto& os = *cfg.iteration_log;
      os.precision(16);
      os << (iter_offset + it) << "," << energy_new << "," << diff << "," << beta << ","
         << ls.tau << "," << out.residual << "\n";
    }
    energy = energy_new;
    out.energy = energy;

    g_prev = std::move(g);
    d_prev.assign(dir.coefficients().begin(), dir.coefficients().end());
    denom_prev = gg;
    have_prev = true;

    if (std::abs(diff) < cfg.energy_tol) {
      out.converged = true;
      return out;
    }
  }
  return out;  // not converged: caller raises NcgFailure
}

}  // namespace

MinimizerResult ncg_minimize(const Assembler& asm_, const SolverConfig& cfg,
                             const ComplexField* start) {
  cfg.validate();
  ComplexField u = start ? *start : initial_guess(cfg.init_preset, asm_.space_ptr());
  double unorm = 0.0;
  for (const auto& c : u.coefficients()) unorm += std::norm(c);
  if (unorm == 0.0) throw InputError("ncg_minimize: initial state must be nonzero");

  MinimizerResult result;
  result.state = u;
  int iter_total = 0;
  int escapes = 0;

  for (;;) {
    NcgLoopResult loop = ncg_loop(asm_, cfg, u, iter_total);
    iter_total += loop.iterations;
    result.state = u;
    result.energy = asm_.energy(u);
    result.iterations = iter_total;
    result.escapes_used = escapes;
    result.final_energy_diff = loop.final_diff;
    result.residual = loop.residual;
    if (!loop.converged)
      throw NcgFailure("ncg_minimize: iteration limit (" + std::to_string(cfg.max_iter) +
                           ") reached",
                       result);
    if (!cfg.verify) {
      result.classification = StateClass::unverified;
      return result;
    }

    const EigenReport rep = verify_minimizer(asm_, u, cfg.eigen_tol, cfg.seed);
    result.eigenvalues = rep.eigenvalues;
    // Near-converged states carry O(residual) noise in lambda_1; widen the
    // classification band accordingly.
    const double tol_eff = std::max(cfg.class_tol, 10.0 * loop.residual);
    result.classification = classify(rep, tol_eff);
    if (result.classification != StateClass::saddle || escapes >= cfg.escape_max)
      return result;

    try {
      u = saddle_escape(asm_, u, rep.eigenvectors[0]);
    } catch (const Error&) {
      // No usable descent along the negative direction: report as saddle.
      return result;
    }
    ++escapes;
  }
}

MinimizerResult ncg_minimize(std::shared_ptr<const FESpace> space, const ModelParams& params,
                             const SolverConfig& cfg, const ComplexField* start) {
  const Assembler asm_(std::move(space), params);
  return ncg_minimize(asm_, cfg, start);
}

}  // namespace glfem
