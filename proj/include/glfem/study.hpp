#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "glfem/optimizer.hpp"

namespace glfem {

/// Converged, spectrum-verified reference minimizer on a fine P2 space.
struct ReferenceSolution {
  ComplexField state;
  double energy = 0.0;
  double kappa = 0.0;
  int level = 0;
  std::string provenance;  // config hash + solver digest
};

/// One row of a convergence study.
struct StudyRecord {
  double kappa = 0.0;
  int degree = 0;
  int level = 0;
  double h = 0.0;
  double energy = 0.0;
  double energy_err = 0.0;
  double l2_err = 0.0;
  double h1semi_over_kappa = 0.0;
  double h1kappa_err = 0.0;
  double ba_l2_err = 0.0;
  double ba_h1kappa_err = 0.0;
  std::optional<double> eoc_energy;
  std::optional<double> eoc_l2;
  std::optional<double> eoc_h1kappa;
  std::string status = "ok";
};

struct StudyOptions {
  std::vector<double> kappas;
  std::vector<int> degrees{1, 2};
  int level_min = 3;
  int level_max = 6;
  int level_ref = 7;
  ModelParams base;  // kappa overwritten per sweep entry
  SolverConfig solver;
  bool homotopy = true;  // seed each level from the prolonged previous minimizer
};

/// Minimizer search over a deterministic start battery: the three generic
/// presets plus vortex-lattice seeds bracketing the applied-flux estimate.
/// Returns the lowest verified minimizer found.
MinimizerResult search_minimizer(const Assembler& asm_, const SolverConfig& cfg);

/// Computes the P2 reference minimizer at level_ref by a battery search at a
/// vortex-resolving level followed by nested-refinement homotopy, with
/// spectrum verification (and escapes) per level.
ReferenceSolution compute_reference(const ModelParams& params, int level_ref,
                                    const SolverConfig& cfg);

/// Phase factor alpha = ∫ u_ref conj(u_h) / |∫ u_ref conj(u_h)| and the
/// rotated field alpha * u_h (both fields on one space). Throws
/// NumericalError when the overlap integral vanishes.
std::pair<cplx, ComplexField> phase_align(const Assembler& asm_, const ComplexField& u_ref,
                                          const ComplexField& u_h);

struct ErrorNorms {
  double l2 = 0.0;
  double h1semi_over_kappa = 0.0;
  double h1kappa = 0.0;  // = l2 + h1semi_over_kappa
};

/// Quadrature-evaluated weighted error norms of u_ref - u_h on their common
/// space.
ErrorNorms error_norms(const Assembler& asm_, const ComplexField& u_ref,
                       const ComplexField& u_h);

/// H¹_kappa-projection of the (fine) reference onto the coarse space:
/// (1/kappa²)(grad(P_h u - u), grad v_h) + (P_h u - u, v_h) = 0 for all v_h.
ComplexField best_approximation(const Assembler& fine_asm, const ComplexField& u_ref,
                                std::shared_ptr<const FESpace> coarse_space);

/// Inverse coercivity constant rho(kappa) = 1 / lambda_min of E''(u) in the
/// H¹_kappa-metric generalized problem, restricted to the mass-orthogonal
/// complement of i*u (gauge deflation).
double estimate_rho(const Assembler& asm_, const ComplexField& u, double eigen_tol = 1e-8,
                    std::uint64_t seed = 20250810);

/// Full sweep: solve, prolong, align, measure, best-approximate, EOC.
/// Row failures are recorded in the status column and the run continues.
std::vector<StudyRecord> run_study(const StudyOptions& opts, const ReferenceSolution* ref = nullptr);

/// CSV with the exact column set; floats at 9 significant digits. Metadata
/// lines ("# key=value") precede the header.
void write_csv(std::ostream& os, const std::vector<StudyRecord>& rows,
               const std::vector<std::string>& metadata);

/// Experimental order of convergence log2(coarse/fine); empty unless both
/// errors are positive.
std::optional<double> eoc_log2(double coarse, double fine);

/// FNV-1a hash of a canonical config string (provenance records).
std::uint64_t config_hash(const std::string& canonical);

}  // namespace glfem
