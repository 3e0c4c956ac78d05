#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include "glfem/model.hpp"
#include "glfem/solvers.hpp"

namespace glfem {

struct SolverConfig {
  double energy_tol = 1e-15;   // |E(u^{n+1}) - E(u^n)| stopping rule
  double grad_tol = 1e-9;      // X-metric dual-norm safeguard
  int max_iter = 20000;
  double linear_rel_tol = 1e-12;  // delta-solve tolerance
  int linear_max_iter = 200000;
  int escape_max = 5;
  int restart_period = 200;    // forced beta = 0 cadence
  std::string init_preset = "const_phase";
  double eigen_tol = 1e-8;     // verification eigensolver residual bound
  double class_tol = 1e-8;     // |lambda_1| threshold for classification
  std::uint64_t seed = 20250810;
  bool verify = true;          // spectrum check + saddle escapes
  std::ostream* iteration_log = nullptr;  // CSV: iter,energy,energy_diff,beta,tau,residual

  void validate() const;
};

enum class StateClass { minimizer, saddle, degenerate, unverified };

const char* to_string(StateClass c);

struct MinimizerResult {
  ComplexField state;
  double energy = 0.0;
  int iterations = 0;
  int escapes_used = 0;
  double final_energy_diff = 0.0;
  double residual = 0.0;  // X-dual norm of E'(state)
  std::vector<double> eigenvalues;  // two smallest of E'' (mass metric), if verified
  StateClass classification = StateClass::unverified;
};

/// Thrown when the iteration budget is exhausted; carries the last state.
class NcgFailure : public ConvergenceError {
public:
  NcgFailure(const std::string& what, MinimizerResult last)
      : ConvergenceError(what), last_state(std::move(last)) {}
  MinimizerResult last_state;
};

struct LineSearchResult {
  double tau = 0.0;
  std::array<double, 5> coeffs{};  // q(t) = E(u + t d) = sum coeffs[l] t^l
  bool descent = false;            // a strictly decreasing positive step exists
  double q_at_tau = 0.0;
};

/// Exact minimization of the quartic q(t) = E(u + t d). With
/// whole_line = false only stationary points t > 0 are admitted (descent
/// search); with whole_line = true the global minimizer over R is returned
/// (escape step; both signs admissible). Throws InputError for d = 0.
LineSearchResult line_search_quartic(const Assembler& asm_, const ComplexField& u,
                                     const ComplexField& d, bool whole_line = false);

/// Polak-Ribiere coefficient with clipping at zero:
/// beta = max(0, num / denom), where num = (g_n, g_n - g_{n-1})_{X,u_n} and
/// denom = (g_{n-1}, g_{n-1})_{X,u_{n-1}} is carried from the previous
/// iteration. Returns 0 with restart semantics when denom vanishes.
double pr_beta(double gg_current, double g_dot_prev_metric, double denom_prev);

/// Two smallest mass-generalized eigenpairs of E''(u).
EigenReport verify_minimizer(const Assembler& asm_, const ComplexField& u,
                             double eigen_tol = 1e-8, std::uint64_t seed = 20250810);

StateClass classify(const EigenReport& rep, double class_tol);

/// One optimal-length step along the eigenvector direction of a negative
/// eigenvalue (real 2N layout). Throws InputError if the direction has
/// nonnegative curvature, NumericalError if no energy decrease is found.
ComplexField saddle_escape(const Assembler& asm_, const ComplexField& u,
                           const std::vector<double>& direction);

/// Energy-adaptive nonlinear CG (steps: delta-solve in (.,.)_{X,u_n},
/// Polak-Ribiere direction update, exact quartic line search, iterate
/// update), followed by spectrum verification and up to escape_max saddle
/// escapes with restarts.
MinimizerResult ncg_minimize(std::shared_ptr<const FESpace> space, const ModelParams& params,
                             const SolverConfig& cfg,
                             const ComplexField* start = nullptr);

/// Variant reusing a prebuilt assembler (cheaper for repeated solves).
MinimizerResult ncg_minimize(const Assembler& asm_, const SolverConfig& cfg,
                             const ComplexField* start = nullptr);

}  // namespace glfem
