#include "glfem/model.hpp"

#include <cmath>

#include "glfem/parallel.hpp"

namespace glfem {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

MagneticPotential MagneticPotential::from_name(const std::string& name) {
  if (name == "zero") return zero();
  if (name == "paper_trig") return paper_trig();
  throw ConfigError("unknown potential preset '" + name + "' (want zero|paper_trig)");
}

const char* MagneticPotential::name() const {
  switch (preset_) {
    case Preset::zero: return "zero";
    case Preset::paper_trig: return "paper_trig";
    default: return "custom";
  }
}

Vec2 MagneticPotential::operator()(Vec2 x) const {
  switch (preset_) {
    case Preset::zero:
      return {0.0, 0.0};
    case Preset::paper_trig: {
      const double r2 = std::sqrt(2.0);
      return {r2 * std::sin(kPi * x.x) * std::cos(kPi * x.y),
              -r2 * std::cos(kPi * x.x) * std::sin(kPi * x.y)};
    }
    default:
      return fn_(x);
  }
}

ComplexField initial_guess(const std::string& preset, std::shared_ptr<const FESpace> space) {
  if (preset == "const_phase")
    return nodal_interpolate([](Vec2) { return cplx(0.8, 0.6); }, std::move(space));
  if (preset == "linear")
    return nodal_interpolate([](Vec2 x) { return cplx(x.x - 0.5, 1.0); }, std::move(space));
  if (preset == "vortex")
    return nodal_interpolate(
        [](Vec2 x) {
          const double damp = std::exp(-0.5 * (x.x * x.x + x.y * x.y));
          return cplx(x.x * damp, x.y * damp);
        },
        std::move(space));
  throw ConfigError("unknown initial-guess preset '" + preset +
                    "' (want const_phase|linear|vortex)");
}

Assembler::Assembler(std::shared_ptr<const FESpace> space, ModelParams params)
    : space_(std::move(space)), params_(std::move(params)) {
  if (params_.kappa < 1.0) throw ConfigError("model requires kappa >= 1");
  const int p = space_->degree();
  rule_ = &quadrature(std::max(4 * p, 2 * p + 4));
  basis_ = tabulate_basis(p, *rule_);

  const Mesh& mesh = space_->mesh();
  const std::size_t nel = mesh.element_count();
  const std::size_t nqp = rule_->points.size();
  const int nd = space_->dofs_per_element();

  // All lower triangles share one affine matrix, all upper ones another;
  // push the reference gradients once per type.
  for (int type = 0; type < 2; ++type) {
    const auto em = mesh.element_map(type);
    pushed_grad_[type].resize(nqp * nd);
    for (std::size_t q = 0; q < nqp; ++q)
      for (int l = 0; l < nd; ++l)
        pushed_grad_[type][q * nd + l] = em.push_gradient(basis_.at_point[q].gradients[l]);
  }
  {
    const double det = mesh.element_map(0).det_B;
    wdet_.resize(nqp);
    for (std::size_t q = 0; q < nqp; ++q) wdet_[q] = rule_->weights[q] * det;
  }

  a_x_.resize(nel * nqp);
  a_y_.resize(nel * nqp);
  a_sq_.resize(nel * nqp);
  parallel_chunks(nel, kElementChunk, [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t k = b; k < e; ++k) {
      const auto em = mesh.element_map(k);
      for (std::size_t q = 0; q < nqp; ++q) {
        const Vec2 a = params_.potential(em.map(rule_->points[q]));
        a_x_[k * nqp + q] = a.x;
        a_y_[k * nqp + q] = a.y;
        a_sq_[k * nqp + q] = a.x * a.x + a.y * a.y;
      }
    }
  });

  pattern_ = std::make_unique<ElementPattern>(space_->dof_count(), nel, nd,
                                              space_->element_dofs(0));
  dof_gather_ = std::make_unique<DofGather>(space_->dof_count(), nel, nd,
                                            space_->element_dofs(0));

  // Fixed part of the X_z matrix: (1/kappa²) stiffness + skew magnetic
  // coupling + 2|A|² mass (|A|² appears in the covariant product and again in
  // the explicit zero-order weight).
  const double inv_k2 = 1.0 / (params_.kappa * params_.kappa);
  const double inv_k = 1.0 / params_.kappa;
  std::vector<cplx> locals(nel * nd * nd);
  parallel_chunks(nel, kElementChunk, [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t k = b; k < e; ++k) {
      cplx* L = locals.data() + k * nd * nd;
      const Vec2* pg = pushed_grad_[k % 2].data();
      for (int a = 0; a < nd; ++a)
        for (int bcol = a; bcol < nd; ++bcol) {
          double sym = 0.0, skew = 0.0;
          for (std::size_t q = 0; q < nqp; ++q) {
            const auto& bv = basis_.at_point[q];
            const Vec2 ga = pg[q * nd + a], gb = pg[q * nd + bcol];
            const double w = wdet_[q];
            sym += w * (inv_k2 * dot(ga, gb) +
                        2.0 * a_sq_[k * nqp + q] * bv.values[a] * bv.values[bcol]);
            // (1/kappa) A . (phi_a grad phi_b - phi_b grad phi_a), row a = test.
            skew += w * inv_k *
                    (a_x_[k * nqp + q] * (bv.values[a] * gb.x - bv.values[bcol] * ga.x) +
                     a_y_[k * nqp + q] * (bv.values[a] * gb.y - bv.values[bcol] * ga.y));
          }
          L[a * nd + bcol] = cplx(sym, skew);
          L[bcol * nd + a] = cplx(sym, -skew);  // exact Hermitian mirror
        }
    }
  });
  pattern_->gather(locals.data(), xz_fixed_);
  xz_ = pattern_->skeleton<cplx>();
  local_scratch_.resize(nel * nd * nd);
}

void Assembler::element_fields(std::size_t k, const ComplexField& u, cplx* values,
                               cplx* grads) const {
  const std::size_t nqp = rule_->points.size();
  const int nd = space_->dofs_per_element();
  const std::uint32_t* dofs = space_->element_dofs(k);
  const Vec2* pg = pushed_grad_[k % 2].data();
  for (std::size_t q = 0; q < nqp; ++q) {
    cplx v(0.0, 0.0), gx(0.0, 0.0), gy(0.0, 0.0);
    const auto& bv = basis_.at_point[q];
    for (int l = 0; l < nd; ++l) {
      const cplx c = u[dofs[l]];
      v += bv.values[l] * c;
      gx += pg[q * nd + l].x * c;
      gy += pg[q * nd + l].y * c;
    }
    values[q] = v;
    if (grads) {
      grads[2 * q] = gx;
      grads[2 * q + 1] = gy;
    }
  }
}

double Assembler::energy(const ComplexField& u) const {
  const std::size_t nel = space_->mesh().element_count();
  const std::size_t nqp = rule_->points.size();
  const double inv_k = 1.0 / params_.kappa;
  const std::size_t nchunks = chunk_count(nel, kElementChunk);
  std::vector<double> partial(nchunks, 0.0);

  parallel_chunks(nel, kElementChunk, [&](std::size_t b, std::size_t e, std::size_t chunk) {
    double acc = 0.0;
    std::vector<cplx> uv(nqp), ug(2 * nqp);
    for (std::size_t k = b; k < e; ++k) {
      element_fields(k, u, uv.data(), ug.data());
      for (std::size_t q = 0; q < nqp; ++q) {
        const double ax = a_x_[k * nqp + q], ay = a_y_[k * nqp + q];
        const cplx iu = cplx(0.0, inv_k);
        const cplx gu_x = iu * ug[2 * q] + ax * uv[q];
        const cplx gu_y = iu * ug[2 * q + 1] + ay * uv[q];
        const double s = std::norm(uv[q]) - 1.0;
        acc += wdet_[q] * (0.5 * (std::norm(gu_x) + std::norm(gu_y)) + 0.25 * s * s);
      }
    }
    partial[chunk] = acc;
  });

  double total = 0.0;
  for (double acc : partial) total += acc;
  return total;
}

std::array<double, 5> Assembler::quartic_coeffs(const ComplexField& u,
                                                const ComplexField& d) const {
  const std::size_t nel = space_->mesh().element_count();
  const std::size_t nqp = rule_->points.size();
  const double inv_k = 1.0 / params_.kappa;
  const std::size_t nchunks = chunk_count(nel, kElementChunk);
  std::vector<std::array<double, 5>> partial(nchunks, {0, 0, 0, 0, 0});

  parallel_chunks(nel, kElementChunk, [&](std::size_t b, std::size_t e, std::size_t chunk) {
    std::array<double, 5> acc{0, 0, 0, 0, 0};
    std::vector<cplx> uv(nqp), ug(2 * nqp), dv(nqp), dg(2 * nqp);
    for (std::size_t k = b; k < e; ++k) {
      element_fields(k, u, uv.data(), ug.data());
      element_fields(k, d, dv.data(), dg.data());
      for (std::size_t q = 0; q < nqp; ++q) {
        const double ax = a_x_[k * nqp + q], ay = a_y_[k * nqp + q];
        const cplx iu = cplx(0.0, inv_k);
        const cplx gu_x = iu * ug[2 * q] + ax * uv[q];
        const cplx gu_y = iu * ug[2 * q + 1] + ay * uv[q];
        const cplx gd_x = iu * dg[2 * q] + ax * dv[q];
        const cplx gd_y = iu * dg[2 * q + 1] + ay * dv[q];
        const double s = std::norm(uv[q]) - 1.0;
        const double r = uv[q].real() * dv[q].real() + uv[q].imag() * dv[q].imag();
        const double qq = std::norm(dv[q]);
        const double gu2 = std::norm(gu_x) + std::norm(gu_y);
        const double gd2 = std::norm(gd_x) + std::norm(gd_y);
        const double gud = (gu_x * std::conj(gd_x) + gu_y * std::conj(gd_y)).real();
        const double w = wdet_[q];
        acc[0] += w * (0.5 * gu2 + 0.25 * s * s);
        acc[1] += w * (gud + s * r);
        acc[2] += w * (0.5 * gd2 + r * r + 0.5 * s * qq);
        acc[3] += w * (r * qq);
        acc[4] += w * (0.25 * qq * qq);
      }
    }
    partial[chunk] = acc;
  });

  std::array<double, 5> total{0, 0, 0, 0, 0};
  for (const auto& acc : partial)
    for (int i = 0; i < 5; ++i) total[i] += acc[i];
  return total;
}

std::vector<cplx> Assembler::gradient(const ComplexField& u) const {
  const std::size_t nel = space_->mesh().element_count();
  const std::size_t nqp = rule_->points.size();
  const int nd = space_->dofs_per_element();
  const double inv_k = 1.0 / params_.kappa;
  std::vector<cplx> locals(nel * nd);

  parallel_chunks(nel, kElementChunk, [&](std::size_t b, std::size_t e, std::size_t) {
    std::vector<cplx> uv(nqp), ug(2 * nqp);
    for (std::size_t k = b; k < e; ++k) {
      element_fields(k, u, uv.data(), ug.data());
      cplx* L = locals.data() + k * nd;
      for (int l = 0; l < nd; ++l) L[l] = cplx(0.0, 0.0);
      const Vec2* pg = pushed_grad_[k % 2].data();
      for (std::size_t q = 0; q < nqp; ++q) {
        const double ax = a_x_[k * nqp + q], ay = a_y_[k * nqp + q];
        const cplx iu = cplx(0.0, inv_k);
        const cplx gu_x = iu * ug[2 * q] + ax * uv[q];
        const cplx gu_y = iu * ug[2 * q + 1] + ay * uv[q];
        const cplx nl = (std::norm(uv[q]) - 1.0) * uv[q];
        const auto& bv = basis_.at_point[q];
        const double w = wdet_[q];
        for (int l = 0; l < nd; ++l) {
          // Gu . conj(G phi_l) with phi_l real: conj part flips i/kappa.
          const Vec2 g = pg[q * nd + l];
          const cplx gphi_x = cplx(ax * bv.values[l], -inv_k * g.x);
          // conj(i/kappa grad phi + A phi) = A phi - i/kappa grad phi
          const cplx gphi_y = cplx(ay * bv.values[l], -inv_k * g.y);
          L[l] += w * (gu_x * gphi_x + gu_y * gphi_y + nl * bv.values[l]);
        }
      }
    }
  });

  std::vector<cplx> g;
  dof_gather_->gather(locals.data(), g);
  return g;
}

const HermitianOp& Assembler::xz_matrix(const ComplexField& z) const {
  const std::size_t nel = space_->mesh().element_count();
  const std::size_t nqp = rule_->points.size();
  const int nd = space_->dofs_per_element();

  parallel_chunks(nel, kElementChunk, [&](std::size_t b, std::size_t e, std::size_t) {
    std::vector<cplx> zv(nqp);
    for (std::size_t k = b; k < e; ++k) {
      element_fields(k, z, zv.data(), nullptr);
      double* L = local_scratch_.data() + k * nd * nd;
      for (int a = 0; a < nd; ++a)
        for (int bcol = a; bcol < nd; ++bcol) {
          double acc = 0.0;
          for (std::size_t q = 0; q < nqp; ++q) {
            const auto& bv = basis_.at_point[q];
            acc += wdet_[q] * std::norm(zv[q]) * bv.values[a] * bv.values[bcol];
          }
          L[a * nd + bcol] = acc;
          L[bcol * nd + a] = acc;
        }
    }
  });

  // Gather the |z|² mass into CSR slots, then add the fixed part.
  pattern_->gather(local_scratch_.data(), xz_mass_vals_);
  parallel_chunks(xz_fixed_.size(), 1 << 16, [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t v = b; v < e; ++v) xz_.val[v] = xz_fixed_[v] + xz_mass_vals_[v];
  });
  return xz_;
}

std::vector<cplx> Assembler::xz_rhs(const ComplexField& z) const {
  const std::size_t nel = space_->mesh().element_count();
  const std::size_t nqp = rule_->points.size();
  const int nd = space_->dofs_per_element();
  std::vector<cplx> locals(nel * nd);

  parallel_chunks(nel, kElementChunk, [&](std::size_t b, std::size_t e, std::size_t) {
    std::vector<cplx> zv(nqp);
    for (std::size_t k = b; k < e; ++k) {
      element_fields(k, z, zv.data(), nullptr);
      cplx* L = locals.data() + k * nd;
      for (int l = 0; l < nd; ++l) L[l] = cplx(0.0, 0.0);
      for (std::size_t q = 0; q < nqp; ++q) {
        const cplx f = wdet_[q] * (1.0 + a_sq_[k * nqp + q]) * zv[q];
        const auto& bv = basis_.at_point[q];
        for (int l = 0; l < nd; ++l) L[l] += f * bv.values[l];
      }
    }
  });

  std::vector<cplx> rhs;
  dof_gather_->gather(locals.data(), rhs);
  return rhs;
}

RealSymOp Assembler::hessian(const ComplexField& u) const {
  const std::size_t nel = space_->mesh().element_count();
  const std::size_t nqp = rule_->points.size();
  const int nd = space_->dofs_per_element();
  const std::size_t n = space_->dof_count();
  const double inv_k2 = 1.0 / (params_.kappa * params_.kappa);
  const double inv_k = 1.0 / params_.kappa;

  // Four N-pattern value arrays: RR, RI, IR, II blocks of the 2N operator.
  const std::size_t ndnd = static_cast<std::size_t>(nd) * nd;
  std::vector<double> lrr(nel * ndnd), lri(nel * ndnd), lir(nel * ndnd), lii(nel * ndnd);

  parallel_chunks(nel, kElementChunk, [&](std::size_t b, std::size_t e, std::size_t) {
    std::vector<cplx> uv(nqp);
    for (std::size_t k = b; k < e; ++k) {
      element_fields(k, u, uv.data(), nullptr);
      const Vec2* pg = pushed_grad_[k % 2].data();
      double* RR = lrr.data() + k * ndnd;
      double* RI = lri.data() + k * ndnd;
      double* IR = lir.data() + k * ndnd;
      double* II = lii.data() + k * ndnd;
      for (int a = 0; a < nd; ++a)
        for (int bcol = a; bcol < nd; ++bcol) {
          double sym = 0.0, skew = 0.0, w0 = 0.0, wr = 0.0, wi = 0.0;
          for (std::size_t q = 0; q < nqp; ++q) {
            const auto& bv = basis_.at_point[q];
            const Vec2 ga = pg[q * nd + a], gb = pg[q * nd + bcol];
            const double w = wdet_[q];
            const double pp = bv.values[a] * bv.values[bcol];
            sym += w * (inv_k2 * dot(ga, gb) + a_sq_[k * nqp + q] * pp);
            skew += w * inv_k *
                    (a_x_[k * nqp + q] * (bv.values[a] * gb.x - bv.values[bcol] * ga.x) +
                     a_y_[k * nqp + q] * (bv.values[a] * gb.y - bv.values[bcol] * ga.y));
            const cplx usq = uv[q] * uv[q];
            w0 += w * (2.0 * std::norm(uv[q]) - 1.0) * pp;
            wr += w * usq.real() * pp;
            wi += w * usq.imag() * pp;
          }
          // <E''(u) e_b, e_a> over {phi, i phi} directions:
          //   RR = P + W0 + Wr, RI = -Q + Wi, IR = Q + Wi, II = P + W0 - Wr
          RR[a * nd + bcol] = sym + w0 + wr;
          RR[bcol * nd + a] = sym + w0 + wr;
          II[a * nd + bcol] = sym + w0 - wr;
          II[bcol * nd + a] = sym + w0 - wr;
          RI[a * nd + bcol] = -skew + wi;
          RI[bcol * nd + a] = skew + wi;
          IR[a * nd + bcol] = skew + wi;
          IR[bcol * nd + a] = -skew + wi;
        }
    }
  });

  std::vector<double> vrr, vri, vir, vii;
  pattern_->gather(lrr.data(), vrr);
  pattern_->gather(lri.data(), vri);
  pattern_->gather(lir.data(), vir);
  pattern_->gather(lii.data(), vii);

  // Splice the four blocks into one 2N CSR.
  const auto& ro = pattern_->row_offset();
  const auto& co = pattern_->col();
  RealSymOp H;
  H.dim = 2 * n;
  H.row_offset.resize(2 * n + 1);
  H.col.resize(4 * co.size());
  H.val.resize(4 * co.size());
  H.row_offset[0] = 0;
  for (std::size_t j = 0; j < n; ++j)
    H.row_offset[j + 1] = H.row_offset[j] + 2 * (ro[j + 1] - ro[j]);
  for (std::size_t j = 0; j < n; ++j)
    H.row_offset[n + j + 1] = H.row_offset[n + j] + 2 * (ro[j + 1] - ro[j]);
  parallel_chunks(n, 8192, [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t j = b; j < e; ++j) {
      const std::uint32_t begin = ro[j], end = ro[j + 1];
      std::uint32_t out = H.row_offset[j];
      for (std::uint32_t s = begin; s < end; ++s, ++out) {
        H.col[out] = co[s];
        H.val[out] = vrr[s];
      }
      for (std::uint32_t s = begin; s < end; ++s, ++out) {
        H.col[out] = static_cast<std::uint32_t>(n) + co[s];
        H.val[out] = vri[s];
      }
      out = H.row_offset[n + j];
      for (std::uint32_t s = begin; s < end; ++s, ++out) {
        H.col[out] = co[s];
        H.val[out] = vir[s];
      }
      for (std::uint32_t s = begin; s < end; ++s, ++out) {
        H.col[out] = static_cast<std::uint32_t>(n) + co[s];
        H.val[out] = vii[s];
      }
    }
  });
  return H;
}

const HermitianOp& Assembler::mass() const {
  if (!mass_) {
    const std::size_t nel = space_->mesh().element_count();
    const std::size_t nqp = rule_->points.size();
    const int nd = space_->dofs_per_element();
    std::vector<double> locals(nel * nd * nd);
    parallel_chunks(nel, kElementChunk, [&](std::size_t b, std::size_t e, std::size_t) {
      for (std::size_t k = b; k < e; ++k) {
        double* L = locals.data() + k * nd * nd;
        for (int a = 0; a < nd; ++a)
          for (int bcol = a; bcol < nd; ++bcol) {
            double acc = 0.0;
            for (std::size_t q = 0; q < nqp; ++q) {
              const auto& bv = basis_.at_point[q];
              acc += wdet_[q] * bv.values[a] * bv.values[bcol];
            }
            L[a * nd + bcol] = acc;
            L[bcol * nd + a] = acc;
          }
      }
    });
    auto M = std::make_unique<HermitianOp>(pattern_->skeleton<cplx>());
    pattern_->gather(locals.data(), M->val);
    mass_ = std::move(M);
  }
  return *mass_;
}

const HermitianOp& Assembler::stiffness() const {
  if (!stiffness_) {
    const std::size_t nel = space_->mesh().element_count();
    const std::size_t nqp = rule_->points.size();
    const int nd = space_->dofs_per_element();
    std::vector<double> locals(nel * nd * nd);
    parallel_chunks(nel, kElementChunk, [&](std::size_t b, std::size_t e, std::size_t) {
      for (std::size_t k = b; k < e; ++k) {
        double* L = locals.data() + k * nd * nd;
        const Vec2* pg = pushed_grad_[k % 2].data();
        for (int a = 0; a < nd; ++a)
          for (int bcol = a; bcol < nd; ++bcol) {
            double acc = 0.0;
            for (std::size_t q = 0; q < nqp; ++q)
              acc += wdet_[q] * dot(pg[q * nd + a], pg[q * nd + bcol]);
            L[a * nd + bcol] = acc;
            L[bcol * nd + a] = acc;
          }
      }
    });
    auto K = std::make_unique<HermitianOp>(pattern_->skeleton<cplx>());
    pattern_->gather(locals.data(), K->val);
    stiffness_ = std::move(K);
  }
  return *stiffness_;
}

RealSymOp Assembler::real_block_diag(const HermitianOp& B) const {
  const std::size_t n = B.dim;
  RealSymOp R;
  R.dim = 2 * n;
  R.row_offset.resize(2 * n + 1);
  R.col.resize(2 * B.col.size());
  R.val.resize(2 * B.col.size());
  R.row_offset[0] = 0;
  for (std::size_t j = 0; j < n; ++j)
    R.row_offset[j + 1] = R.row_offset[j] + (B.row_offset[j + 1] - B.row_offset[j]);
  for (std::size_t j = 0; j < n; ++j)
    R.row_offset[n + j + 1] = R.row_offset[n + j] + (B.row_offset[j + 1] - B.row_offset[j]);
  for (std::size_t j = 0; j < n; ++j) {
    std::uint32_t out = R.row_offset[j];
    for (std::uint32_t s = B.row_offset[j]; s < B.row_offset[j + 1]; ++s, ++out) {
      R.col[out] = B.col[s];
      R.val[out] = B.val[s].real();
    }
    out = R.row_offset[n + j];
    for (std::uint32_t s = B.row_offset[j]; s < B.row_offset[j + 1]; ++s, ++out) {
      R.col[out] = static_cast<std::uint32_t>(n) + B.col[s];
      R.val[out] = B.val[s].real();
    }
  }
  return R;
}

RealSymOp Assembler::xz_real_operator(const ComplexField& z) const {
  const HermitianOp& M = xz_matrix(z);
  const std::size_t n = M.dim;
  // [Re; Im] layout of the Hermitian form: [[P, -Q], [Q, P]].
  RealSymOp R;
  R.dim = 2 * n;
  R.row_offset.resize(2 * n + 1);
  R.col.resize(4 * M.col.size());
  R.val.resize(4 * M.col.size());
  R.row_offset[0] = 0;
  for (std::size_t j = 0; j < n; ++j)
    R.row_offset[j + 1] = R.row_offset[j] + 2 * (M.row_offset[j + 1] - M.row_offset[j]);
  for (std::size_t j = 0; j < n; ++j)
    R.row_offset[n + j + 1] = R.row_offset[n + j] + 2 * (M.row_offset[j + 1] - M.row_offset[j]);
  for (std::size_t j = 0; j < n; ++j) {
    std::uint32_t out = R.row_offset[j];
    for (std::uint32_t s = M.row_offset[j]; s < M.row_offset[j + 1]; ++s) {
      R.col[out] = M.col[s];
      R.val[out++] = M.val[s].real();
    }
    for (std::uint32_t s = M.row_offset[j]; s < M.row_offset[j + 1]; ++s) {
      R.col[out] = static_cast<std::uint32_t>(n) + M.col[s];
      R.val[out++] = -M.val[s].imag();
    }
    out = R.row_offset[n + j];
    for (std::uint32_t s = M.row_offset[j]; s < M.row_offset[j + 1]; ++s) {
      R.col[out] = M.col[s];
      R.val[out++] = M.val[s].imag();
    }
    for (std::uint32_t s = M.row_offset[j]; s < M.row_offset[j + 1]; ++s) {
      R.col[out] = static_cast<std::uint32_t>(n) + M.col[s];
      R.val[out++] = M.val[s].real();
    }
  }
  return R;
}

}  // namespace glfem
