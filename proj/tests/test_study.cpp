#include <doctest.h>

#include <cmath>
#include <sstream>

#include "glfem/study.hpp"
#include "support/oracles.hpp"

using namespace glfem;

namespace {

Assembler flat_assembler(int level, int degree, double kappa) {
  auto space = FESpace::build(Mesh::build_uniform(level), degree);
  ModelParams mp;
  mp.kappa = kappa;
  return Assembler(space, mp);
}

}  // namespace

TEST_CASE("phase alignment") {
  auto space = FESpace::build(Mesh::build_uniform(3), 2);
  ModelParams mp;
  mp.kappa = 2.0;
  const Assembler asm_(space, mp);
  const auto u_ref = testing::random_field(space, 404);

  // u_h = i u_ref: alpha = -i rotates it back.
  {
    ComplexField uh = u_ref;
    for (std::size_t j = 0; j < uh.size(); ++j) uh[j] *= cplx(0.0, 1.0);
    const auto [alpha, aligned] = phase_align(asm_, u_ref, uh);
    CHECK(std::abs(alpha - cplx(0.0, -1.0)) <= 1e-13);
    for (std::size_t j = 0; j < aligned.size(); ++j)
      CHECK(std::abs(aligned[j] - u_ref[j]) <= 1e-13);
  }

  // General rotation comes back to exp(-i omega).
  {
    const double omega = 1.1;
    ComplexField uh = u_ref;
    const cplx rot = std::polar(1.0, omega);
    for (std::size_t j = 0; j < uh.size(); ++j) uh[j] *= rot;
    const auto [alpha, aligned] = phase_align(asm_, u_ref, uh);
    CHECK(std::abs(alpha - std::conj(rot)) <= 1e-13);

    // Post-alignment orthogonality: Re (aligned, i u_ref)_L2 = 0.
    const auto Ma = asm_.mass().apply(aligned.coefficients());
    cplx pair(0.0, 0.0);
    double scale = 0.0;
    for (std::size_t j = 0; j < Ma.size(); ++j) {
      pair += Ma[j] * std::conj(cplx(0.0, 1.0) * u_ref[j]);
      scale += std::abs(Ma[j]);
    }
    CHECK(std::abs(pair.real()) <= 1e-10 * std::max(1.0, scale));

    // Idempotence: aligning twice gives alpha = 1.
    const auto [alpha2, aligned2] = phase_align(asm_, u_ref, aligned);
    CHECK(std::abs(alpha2 - cplx(1.0, 0.0)) <= 1e-12);
  }

  // Identity alignment.
  {
    const auto [alpha, aligned] = phase_align(asm_, u_ref, u_ref);
    CHECK(std::abs(alpha - cplx(1.0, 0.0)) <= 1e-14);
  }

  // Orthogonal fields: vanishing overlap is an error.
  {
    auto p1 = FESpace::build(Mesh::build_uniform(2), 1);
    ModelParams flat;
    const Assembler asm1(p1, flat);
    const auto a = nodal_interpolate([](Vec2 x) { return cplx(x.x - 0.5, 0.0); }, p1);
    const auto b = nodal_interpolate([](Vec2) { return cplx(1.0, 0.0); }, p1);
    CHECK_THROWS_AS((void)phase_align(asm1, a, b), NumericalError);
  }
}

TEST_CASE("error norms with closed-form fields") {
  const auto asm_ = flat_assembler(4, 2, 2.0);
  auto space = asm_.space_ptr();

  const auto x_field = nodal_interpolate([](Vec2 x) { return cplx(x.x, 0.0); }, space);
  const ComplexField zero(space);

  const auto zero_err = error_norms(asm_, x_field, x_field);
  CHECK(zero_err.l2 == 0.0);
  CHECK(zero_err.h1semi_over_kappa == 0.0);
  CHECK(zero_err.h1kappa == 0.0);

  // u_ref = x, u_h = 0, kappa = 2: ||x|| = 1/sqrt 3, |x|_H1 / 2 = 1/2.
  const auto err = error_norms(asm_, x_field, zero);
  CHECK(err.l2 == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
  CHECK(err.h1semi_over_kappa == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(err.h1kappa == doctest::Approx(err.l2 + err.h1semi_over_kappa).epsilon(1e-14));
}

TEST_CASE("best approximation: projection identity and optimality") {
  auto fine_space = FESpace::build(Mesh::build_uniform(4), 2);
  auto coarse_space = FESpace::build(Mesh::build_uniform(2), 2);
  ModelParams mp;
  mp.kappa = 3.0;
  const Assembler fine_asm(fine_space, mp);

  // A field already in the coarse space projects to itself.
  const auto vc = testing::random_field(coarse_space, 88);
  const auto lifted = prolongate(vc, fine_space);
  const auto back = best_approximation(fine_asm, lifted, coarse_space);
  for (std::size_t j = 0; j < vc.size(); ++j) CHECK(std::abs(back[j] - vc[j]) <= 1e-11);

  // The projection beats the nodal interpolant in the induced norm.
  const auto smooth = nodal_interpolate(
      [](Vec2 x) {
        return cplx(std::sin(2.1 * x.x + 0.3) * std::cos(1.7 * x.y),
                    std::cos(2.9 * x.x) * std::sin(1.3 * x.y + 0.4));
      },
      fine_space);
  const auto ba = best_approximation(fine_asm, smooth, coarse_space);
  const auto ba_lifted = prolongate(ba, fine_space);
  const auto interp =
      nodal_interpolate([&smooth](Vec2 x) { return smooth.eval(x); }, coarse_space);
  const auto interp_lifted = prolongate(interp, fine_space);

  auto induced_norm_sq = [&fine_asm](const ComplexField& e) {
    const auto Me = fine_asm.mass().apply(e.coefficients());
    const auto Ke = fine_asm.stiffness().apply(e.coefficients());
    const double k2 = fine_asm.params().kappa * fine_asm.params().kappa;
    double s = 0.0;
    for (std::size_t j = 0; j < Me.size(); ++j) {
      s += Me[j].real() * e[j].real() + Me[j].imag() * e[j].imag();
      s += (Ke[j].real() * e[j].real() + Ke[j].imag() * e[j].imag()) / k2;
    }
    return s;
  };
  ComplexField e_ba = smooth, e_in = smooth;
  for (std::size_t j = 0; j < e_ba.size(); ++j) {
    e_ba[j] -= ba_lifted[j];
    e_in[j] -= interp_lifted[j];
  }
  CHECK(induced_norm_sq(e_ba) <= induced_norm_sq(e_in) + 1e-12);
}

TEST_CASE("rho estimate against dense oracle at the flat minimizer") {
  const auto asm_ = flat_assembler(3, 1, 1.0);
  auto space = asm_.space_ptr();
  const std::size_t n = space->dof_count();
  ComplexField one(space);
  for (std::size_t j = 0; j < n; ++j) one[j] = cplx(1.0, 0.0);

  const double rho = estimate_rho(asm_, one, 1e-9);
  CHECK(rho > 0.0);

  // Dense pencil restricted to the mass-orthogonal complement of i*u.
  ModelParams mp;
  mp.kappa = 1.0;
  const auto Hd = testing::dense_hessian(*space, mp, one, 4);
  Eigen::MatrixXd Md = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  Eigen::MatrixXd Gd = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  {
    const auto M = asm_.real_block_diag(asm_.mass());
    for (std::size_t i = 0; i < M.dim; ++i)
      for (std::uint32_t s = M.row_offset[i]; s < M.row_offset[i + 1]; ++s)
        Md(i, M.col[s]) = M.val[s];
    auto Gc = asm_.stiffness();
    const auto& Mc = asm_.mass();
    for (std::size_t s = 0; s < Gc.val.size(); ++s) Gc.val[s] += Mc.val[s];
    const auto G = asm_.real_block_diag(Gc);
    for (std::size_t i = 0; i < G.dim; ++i)
      for (std::uint32_t s = G.row_offset[i]; s < G.row_offset[i + 1]; ++s)
        Gd(i, G.col[s]) = G.val[s];
  }
  Eigen::VectorXd gauge = Eigen::VectorXd::Zero(2 * n);
  for (std::size_t j = 0; j < n; ++j) gauge(n + j) = 1.0;  // i*u for u = 1
  const Eigen::VectorXd mg = Md * gauge;
  const Eigen::MatrixXd P = Eigen::MatrixXd::Identity(2 * n, 2 * n) -
                            gauge * (mg.transpose() / gauge.dot(mg));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(P, Eigen::ComputeThinU);
  const Eigen::MatrixXd Q = svd.matrixU().leftCols(2 * n - 1);
  const Eigen::MatrixXd Hr = Q.transpose() * Hd * Q;
  const Eigen::MatrixXd Gr = Q.transpose() * Gd * Q;
  const auto [evals, evecs] = testing::dense_gevp(Hr, Gr);
  const double rho_dense = 1.0 / evals(0);
  CHECK(std::abs(rho - rho_dense) <= 1e-6 * rho_dense);
}

TEST_CASE("eoc arithmetic") {
  const auto e1 = eoc_log2(1.0, 0.25);
  REQUIRE(e1.has_value());
  CHECK(*e1 == doctest::Approx(2.0).epsilon(1e-15));
  const auto e2 = eoc_log2(0.25, 0.0625);
  REQUIRE(e2.has_value());
  CHECK(*e2 == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(!eoc_log2(0.0, 1.0).has_value());
}

TEST_CASE("study table shape, csv format, determinism") {
  StudyOptions opts;
  opts.kappas = {2.0};
  opts.degrees = {1, 2};
  opts.level_min = 2;
  opts.level_max = 3;
  opts.level_ref = 4;
  opts.base.kappa = 2.0;
  opts.base.potential = MagneticPotential::paper_trig();
  opts.solver.max_iter = 5000;

  const auto rows = run_study(opts);
  REQUIRE(rows.size() == 4);  // 2 degrees x 2 levels
  for (const auto& r : rows) {
    CHECK(r.status == "ok");
    CHECK(r.h == std::ldexp(1.0, -r.level));
    // Norm identity holds exactly on every record.
    CHECK(std::abs(r.h1kappa_err - (r.l2_err + r.h1semi_over_kappa)) <=
          1e-14 * std::max(1.0, r.h1kappa_err));
    // Projection optimality in the weighted norm.
    CHECK(r.ba_h1kappa_err <= r.h1kappa_err + 1e-12);
  }
  // EOC populated from the second row of each (kappa, p) group.
  CHECK(!rows[0].eoc_l2.has_value());
  CHECK(rows[1].eoc_l2.has_value());
  CHECK(!rows[2].eoc_l2.has_value());
  CHECK(rows[3].eoc_l2.has_value());

  std::ostringstream csv1, csv2;
  write_csv(csv1, rows, {"case=structural"});
  const std::string expected_header =
      "kappa,p,level,h,energy,energy_err,l2_err,h1semi_over_kappa,h1kappa_err,"
      "ba_l2_err,ba_h1kappa_err,eoc_energy,eoc_l2,eoc_h1kappa,status";
  CHECK(csv1.str().find(expected_header) != std::string::npos);

  // Re-running the identical study reproduces the bytes.
  const auto rows2 = run_study(opts);
  write_csv(csv2, rows2, {"case=structural"});
  CHECK(csv1.str() == csv2.str());

  // level_ref must exceed the largest study level.
  StudyOptions bad = opts;
  bad.level_ref = 3;
  CHECK_THROWS_AS((void)run_study(bad), ConfigError);
}
