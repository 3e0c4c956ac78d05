#include "glfem/study.hpp"

#include <cmath>
#include <optional>
#include <ostream>
#include <sstream>

#include "glfem/parallel.hpp"

namespace glfem {

namespace {
constexpr double kPi = 3.14159265358979323846;
}  // namespace

std::uint64_t config_hash(const std::string& canonical) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

// Complex overlap ∫ a conj(b) dx via the mass matrix.
cplx overlap(const Assembler& asm_, const ComplexField& a, const ComplexField& b) {
  const auto Ma = asm_.mass().apply(a.coefficients());
  cplx s(0.0, 0.0);
  for (std::size_t j = 0; j < Ma.size(); ++j) s += Ma[j] * std::conj(b[j]);
  return s;
}

std::array<double, 2> l2_h1_sq(const Assembler& asm_, const ComplexField& e) {
  // One sweep: ||e||² and |e|²_H1 from the stored mass and stiffness forms.
  const auto Me = asm_.mass().apply(e.coefficients());
  const auto Ke = asm_.stiffness().apply(e.coefficients());
  double l2 = 0.0, h1 = 0.0;
  for (std::size_t j = 0; j < Me.size(); ++j) {
    l2 += Me[j].real() * e[j].real() + Me[j].imag() * e[j].imag();
    h1 += Ke[j].real() * e[j].real() + Ke[j].imag() * e[j].imag();
  }
  return {std::max(0.0, l2), std::max(0.0, h1)};
}

int homotopy_start_level(double kappa, int level_target) {
  (void)kappa;
  return std::min(2, level_target);
}

// n vortex seeds on a staggered lattice inside the unit square.
std::vector<Vec2> lattice_points(int n) {
  std::vector<Vec2> pts;
  if (n <= 0) return pts;
  const int rows = std::max(1, static_cast<int>(std::lround(std::sqrt(double(n)))));
  const int base = n / rows, extra = n % rows;
  for (int r = 0; r < rows; ++r) {
    const int cols = base + (r < extra ? 1 : 0);
    const double y = (r + 0.5) / rows;
    for (int c = 0; c < cols; ++c) {
      const double stagger = (r % 2 == 1 && cols > 1) ? 0.5 / cols : 0.0;
      double x = (c + 0.5) / cols + stagger;
      if (x > 1.0) x -= 1.0;
      pts.push_back({x, y});
    }
  }
  return pts;
}

ComplexField vortex_lattice_start(std::shared_ptr<const FESpace> space,
                                  const std::vector<Vec2>& centers) {
  return nodal_interpolate(
      [&centers](Vec2 x) {
        cplx u(1.0, 0.0);
        for (const auto& c : centers) {
          const cplx z(x.x - c.x, x.y - c.y);
          u *= z / std::sqrt(1.0 + std::norm(z));
        }
        return u;
      },
      space);
}

// Expected vortex count from the applied flux of the trig potential:
// total flux 8 sqrt(2) / pi, so kappa * flux / (2 pi) quanta.
int flux_vortex_estimate(double kappa) {
  return static_cast<int>(std::lround(kappa * 8.0 * std::sqrt(2.0) / (2.0 * kPi * kPi)));
}

}  // namespace

MinimizerResult search_minimizer(const Assembler& asm_, const SolverConfig& cfg) {
  std::vector<ComplexField> starts;
  for (const char* preset : {"const_phase", "linear", "vortex"})
    starts.push_back(initial_guess(preset, asm_.space_ptr()));
  const int n_star = flux_vortex_estimate(asm_.params().kappa);
  for (int n = std::max(1, n_star - 3); n <= n_star + 3; ++n)
    starts.push_back(vortex_lattice_start(asm_.space_ptr(), lattice_points(n)));

  std::optional<MinimizerResult> best;
  for (const auto& start : starts) {
    try {
      MinimizerResult res = ncg_minimize(asm_, cfg, &start);
      if (res.classification != StateClass::minimizer) continue;
      if (!best || res.energy < best->energy) best = std::move(res);
    } catch (const Error&) {
      // A failed start is dropped; the battery continues.
    }
  }
  if (!best) throw NumericalError("search_minimizer: no start converged to a minimizer");
  return *best;
}

std::optional<double> eoc_log2(double coarse, double fine) {
  if (coarse > 0.0 && fine > 0.0) return std::log2(coarse / fine);
  return std::nullopt;
}

ReferenceSolution compute_reference(const ModelParams& params, int level_ref,
                                    const SolverConfig& cfg) {
  // Exploration at a level resolving the expected vortex structure
  // (h kappa <= 1/2), then homotopy up to the target level.
  const int explore_level = std::min(
      level_ref, std::max(3, static_cast<int>(std::ceil(std::log2(params.kappa))) + 1));
  MinimizerResult res;
  {
    auto space = FESpace::build(Mesh::build_uniform(explore_level), 2);
    const Assembler asm_(space, params);
    res = search_minimizer(asm_, cfg);
  }
  for (int l = explore_level + 1; l <= level_ref; ++l) {
    auto space = FESpace::build(Mesh::build_uniform(l), 2);
    const ComplexField lifted = prolongate(res.state, space);
    res = ncg_minimize(space, params, cfg, &lifted);
  }
  if (res.classification != StateClass::minimizer)
    throw NumericalError(std::string("compute_reference: state classified as ") +
                         to_string(res.classification));
  ReferenceSolution ref;
  ref.state = res.state;
  ref.energy = res.energy;
  ref.kappa = params.kappa;
  ref.level = level_ref;
  std::ostringstream prov;
  prov.precision(17);
  prov << "kappa=" << params.kappa << " potential=" << params.potential.name()
       << " p=2 level=" << level_ref << " init=" << cfg.init_preset
       << " energy_tol=" << cfg.energy_tol << " grad_tol=" << cfg.grad_tol;
  std::ostringstream digest;
  digest.precision(17);
  digest << res.energy << "|" << res.iterations << "|" << res.residual;
  prov << " config_hash=" << config_hash(prov.str())
       << " solver_digest=" << config_hash(digest.str());
  ref.provenance = prov.str();
  return ref;
}

std::pair<cplx, ComplexField> phase_align(const Assembler& asm_, const ComplexField& u_ref,
                                          const ComplexField& u_h) {
  if (u_ref.size() != u_h.size())
    throw StructuralError("phase_align: fields on different spaces");
  const cplx c = overlap(asm_, u_ref, u_h);
  const double mag = std::abs(c);
  double scale = 0.0;
  for (std::size_t j = 0; j < u_ref.size(); ++j) scale += std::norm(u_ref[j]);
  if (mag <= 1e-14 * std::sqrt(scale))
    throw NumericalError("phase_align: vanishing overlap integral (orthogonal phases)");
  const cplx alpha = c / mag;
  ComplexField aligned = u_h;
  for (std::size_t j = 0; j < aligned.size(); ++j) aligned[j] *= alpha;
  return {alpha, aligned};
}

ErrorNorms error_norms(const Assembler& asm_, const ComplexField& u_ref,
                       const ComplexField& u_h) {
  if (u_ref.size() != u_h.size()) throw StructuralError("error_norms: space mismatch");
  ComplexField e = u_ref;
  for (std::size_t j = 0; j < e.size(); ++j) e[j] -= u_h[j];
  const auto sq = l2_h1_sq(asm_, e);
  ErrorNorms out;
  out.l2 = std::sqrt(sq[0]);
  out.h1semi_over_kappa = std::sqrt(sq[1]) / asm_.params().kappa;
  out.h1kappa = out.l2 + out.h1semi_over_kappa;
  return out;
}

ComplexField best_approximation(const Assembler& fine_asm, const ComplexField& u_ref,
                                std::shared_ptr<const FESpace> coarse_space) {
  const double kappa = fine_asm.params().kappa;
  const double inv_k2 = 1.0 / (kappa * kappa);

  // rhs_j = (1/k²)(grad u, grad phi_j) + (u, phi_j) for coarse phi_j, computed
  // exactly through the nested prolongation transpose.
  const Prolongation P = build_prolongation(*coarse_space, fine_asm.space());
  std::vector<cplx> fine_action = fine_asm.stiffness().apply(u_ref.coefficients());
  const std::vector<cplx> Mu = fine_asm.mass().apply(u_ref.coefficients());
  for (std::size_t j = 0; j < fine_action.size(); ++j)
    fine_action[j] = inv_k2 * fine_action[j] + Mu[j];
  const std::vector<cplx> rhs = P.apply_transpose(fine_action);

  const Assembler coarse_asm(coarse_space, fine_asm.params());
  HermitianOp G = coarse_asm.stiffness();
  const HermitianOp& Mc = coarse_asm.mass();
  for (std::size_t s = 0; s < G.val.size(); ++s) G.val[s] = inv_k2 * G.val[s] + Mc.val[s];

  ComplexField out(coarse_space);
  out.coefficients() = solve_spd(G, rhs, 1e-12, 200000);
  return out;
}

double estimate_rho(const Assembler& asm_, const ComplexField& u, double eigen_tol,
                    std::uint64_t seed) {
  const RealSymOp H = asm_.hessian(u);

  // H¹_kappa Gram: mass + kappa^{-2} stiffness, block-diagonal over [Re; Im].
  const double inv_k2 = 1.0 / (asm_.params().kappa * asm_.params().kappa);
  HermitianOp Gc = asm_.stiffness();
  const HermitianOp& M = asm_.mass();
  for (std::size_t s = 0; s < Gc.val.size(); ++s)
    Gc.val[s] = inv_k2 * Gc.val[s] + M.val[s];
  const RealSymOp G = asm_.real_block_diag(Gc);
  const RealSymOp M2 = asm_.real_block_diag(M);
  const RealSymOp X = asm_.xz_real_operator(u);

  // Gauge direction i*u in real layout: [-Im u; Re u].
  std::vector<double> gauge(2 * u.size());
  for (std::size_t j = 0; j < u.size(); ++j) {
    gauge[j] = -u[j].imag();
    gauge[u.size() + j] = u[j].real();
  }

  EigenOptions opts;
  opts.k = 1;
  opts.tol = eigen_tol;
  opts.seed = seed;
  opts.max_iter = 3000;
  opts.constraints.push_back(std::move(gauge));
  opts.precond = [&X](const std::vector<double>& r, std::vector<double>& out) {
    cg_fixed_iterations(X, r, out, 25);
  };
  opts.constraint_metric = [&M2](const std::vector<double>& x, std::vector<double>& y) {
    y.resize(x.size());
    M2.apply(x.data(), y.data());
  };
  auto Hop = [&H](const std::vector<double>& x, std::vector<double>& y) {
    y.resize(x.size());
    H.apply(x.data(), y.data());
  };
  auto Gop = [&G](const std::vector<double>& x, std::vector<double>& y) {
    y.resize(x.size());
    G.apply(x.data(), y.data());
  };
  const EigenReport rep = smallest_eigenpairs(Hop, Gop, H.dim, opts);
  const double lmin = rep.eigenvalues.at(0);
  if (!(lmin > 0.0))
    throw NumericalError("estimate_rho: nonpositive smallest eigenvalue " +
                         std::to_string(lmin));
  return 1.0 / lmin;
}

std::vector<StudyRecord> run_study(const StudyOptions& opts, const ReferenceSolution* ref_in) {
  if (opts.level_ref < opts.level_max + 1)
    throw ConfigError("run_study: level_ref must exceed the largest study level");

  std::vector<StudyRecord> rows;
  for (double kappa : opts.kappas) {
    ModelParams params = opts.base;
    params.kappa = kappa;

    ReferenceSolution local_ref;
    const ReferenceSolution* ref = nullptr;
    if (ref_in && ref_in->kappa == kappa && ref_in->level == opts.level_ref) {
      ref = ref_in;
    } else {
      local_ref = compute_reference(params, opts.level_ref, opts.solver);
      ref = &local_ref;
    }
    const Assembler ref_asm(ref->state.space_ptr(), params);

    for (int degree : opts.degrees) {
      StudyRecord* prev = nullptr;
      ComplexField carry;
      for (int level = opts.level_min; level <= opts.level_max; ++level) {
        StudyRecord rec;
        rec.kappa = kappa;
        rec.degree = degree;
        rec.level = level;
        rec.h = std::ldexp(1.0, -level);
        try {
          auto space = FESpace::build(Mesh::build_uniform(level), degree);
          const Assembler asm_(space, params);
          MinimizerResult res;
          if (!opts.homotopy) {
            res = ncg_minimize(asm_, opts.solver, nullptr);
          } else if (carry.size() > 0) {
            const ComplexField lifted = prolongate(carry, space);
            res = ncg_minimize(asm_, opts.solver, &lifted);
          } else {
            // First level of a column (or restart after a failed row): the
            // start battery keeps the column in the reference's basin.
            res = search_minimizer(asm_, opts.solver);
          }
          if (res.classification == StateClass::saddle) rec.status = "saddle";
          carry = res.state;
          rec.energy = res.energy;
          rec.energy_err = std::abs(res.energy - ref->energy);

          const ComplexField lifted = prolongate(res.state, ref->state.space_ptr());
          const auto aligned = phase_align(ref_asm, ref->state, lifted);
          const ErrorNorms err = error_norms(ref_asm, ref->state, aligned.second);
          rec.l2_err = err.l2;
          rec.h1semi_over_kappa = err.h1semi_over_kappa;
          rec.h1kappa_err = err.h1kappa;

          const ComplexField ba = best_approximation(ref_asm, ref->state, space);
          const ComplexField ba_lifted = prolongate(ba, ref->state.space_ptr());
          const ErrorNorms ba_err = error_norms(ref_asm, ref->state, ba_lifted);
          rec.ba_l2_err = ba_err.l2;
          rec.ba_h1kappa_err = ba_err.h1kappa;

          if (prev && prev->status == "ok") {
            rec.eoc_energy = eoc_log2(prev->energy_err, rec.energy_err);
            rec.eoc_l2 = eoc_log2(prev->l2_err, rec.l2_err);
            rec.eoc_h1kappa = eoc_log2(prev->h1kappa_err, rec.h1kappa_err);
          }
        } catch (const Error& err) {
          rec.status = std::string("failed: ") + err.what();
          carry = ComplexField();
        }
        rows.push_back(rec);
        prev = &rows.back();
      }
    }
  }
  return rows;
}

void write_csv(std::ostream& os, const std::vector<StudyRecord>& rows,
               const std::vector<std::string>& metadata) {
  for (const auto& line : metadata) os << "# " << line << "\n";
  os << "kappa,p,level,h,energy,energy_err,l2_err,h1semi_over_kappa,h1kappa_err,"
        "ba_l2_err,ba_h1kappa_err,eoc_energy,eoc_l2,eoc_h1kappa,status\n";
  os.precision(9);
  auto opt = [&os](const std::optional<double>& v) {
    if (v) os << *v;
  };
  for (const auto& r : rows) {
    os << r.kappa << "," << r.degree << "," << r.level << "," << r.h << "," << r.energy
       << "," << r.energy_err << "," << r.l2_err << "," << r.h1semi_over_kappa << ","
       << r.h1kappa_err << "," << r.ba_l2_err << "," << r.ba_h1kappa_err << ",";
    opt(r.eoc_energy);
    os << ",";
    opt(r.eoc_l2);
    os << ",";
    opt(r.eoc_h1kappa);
    os << "," << r.status << "\n";
  }
}

}  // namespace glfem
