#include "glfem/fe_space.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "glfem/error.hpp"

namespace glfem {

BasisEval eval_basis(int degree, Vec2 ref) {
  const double l0 = 1.0 - ref.x - ref.y, l1 = ref.x, l2 = ref.y;
  BasisEval b;
  if (degree == 1) {
    b.count = 3;
    b.values = {l0, l1, l2};
    b.gradients[0] = {-1.0, -1.0};
    b.gradients[1] = {1.0, 0.0};
    b.gradients[2] = {0.0, 1.0};
    return b;
  }
  if (degree == 2) {
    b.count = 6;
    b.values = {l0 * (2 * l0 - 1), l1 * (2 * l1 - 1), l2 * (2 * l2 - 1),
                4 * l0 * l1,       4 * l1 * l2,       4 * l0 * l2};
    const Vec2 g0{-1.0, -1.0}, g1{1.0, 0.0}, g2{0.0, 1.0};
    b.gradients[0] = (4 * l0 - 1) * g0;
    b.gradients[1] = (4 * l1 - 1) * g1;
    b.gradients[2] = (4 * l2 - 1) * g2;
    b.gradients[3] = 4 * (l1 * g0 + l0 * g1);
    b.gradients[4] = 4 * (l2 * g1 + l1 * g2);
    b.gradients[5] = 4 * (l2 * g0 + l0 * g2);
    return b;
  }
  throw ConfigError("unsupported basis degree " + std::to_string(degree));
}

BasisTable tabulate_basis(int degree, const QuadratureRule& rule) {
  BasisTable t;
  t.count = degree == 1 ? 3 : 6;
  t.at_point.reserve(rule.points.size());
  for (const auto& p : rule.points) t.at_point.push_back(eval_basis(degree, p));
  return t;
}

FESpace::FESpace(std::shared_ptr<const Mesh> mesh, int degree)
    : mesh_(std::move(mesh)), degree_(degree) {
  const int n = mesh_->cells_per_side();
  grid_side_ = degree_ * n + 1;
  dof_count_ = static_cast<std::size_t>(grid_side_) * grid_side_;

  const int nd = dofs_per_element();
  element_dofs_.resize(mesh_->element_count() * nd);
  auto grid_id = [this](int i, int j) {
    return static_cast<std::uint32_t>(j * grid_side_ + i);
  };
  for (std::size_t k = 0; k < mesh_->element_count(); ++k) {
    const std::size_t cell = k / 2;
    const int ci = static_cast<int>(cell % n), cj = static_cast<int>(cell / n);
    const bool lower = (k % 2) == 0;  // vertices (i,j),(i+1,j),(i+1,j+1)
    std::uint32_t* dofs = element_dofs_.data() + k * nd;
    if (degree_ == 1) {
      if (lower) {
        dofs[0] = grid_id(ci, cj);
        dofs[1] = grid_id(ci + 1, cj);
        dofs[2] = grid_id(ci + 1, cj + 1);
      } else {
        dofs[0] = grid_id(ci, cj);
        dofs[1] = grid_id(ci + 1, cj + 1);
        dofs[2] = grid_id(ci, cj + 1);
      }
    } else {
      // Half-step grid: vertex (i,j) sits at grid node (2i, 2j).
      const int i2 = 2 * ci, j2 = 2 * cj;
      if (lower) {
        dofs[0] = grid_id(i2, j2);
        dofs[1] = grid_id(i2 + 2, j2);
        dofs[2] = grid_id(i2 + 2, j2 + 2);
        dofs[3] = grid_id(i2 + 1, j2);      // mid(v0,v1)
        dofs[4] = grid_id(i2 + 2, j2 + 1);  // mid(v1,v2)
        dofs[5] = grid_id(i2 + 1, j2 + 1);  // mid(v0,v2) = diagonal midpoint
      } else {
        dofs[0] = grid_id(i2, j2);
        dofs[1] = grid_id(i2 + 2, j2 + 2);
        dofs[2] = grid_id(i2, j2 + 2);
        dofs[3] = grid_id(i2 + 1, j2 + 1);  // mid(v0,v1) = diagonal midpoint
        dofs[4] = grid_id(i2 + 1, j2 + 2);  // mid(v1,v2)
        dofs[5] = grid_id(i2, j2 + 1);      // mid(v0,v2)
      }
    }
  }
}

std::shared_ptr<const FESpace> FESpace::build(std::shared_ptr<const Mesh> mesh, int degree) {
  if (!mesh) throw StructuralError("build_space: null mesh");
  if (degree != 1 && degree != 2)
    throw ConfigError("unsupported FE degree " + std::to_string(degree) + " (want 1 or 2)");
  return std::shared_ptr<const FESpace>(new FESpace(std::move(mesh), degree));
}

Vec2 FESpace::dof_point(std::size_t j) const {
  const double step = 1.0 / static_cast<double>(grid_side_ - 1);
  const std::size_t i = j % grid_side_, row = j / grid_side_;
  return {static_cast<double>(i) * step, static_cast<double>(row) * step};
}

std::vector<double> ComplexField::real_layout() const {
  std::vector<double> xy(2 * coeff_.size());
  for (std::size_t j = 0; j < coeff_.size(); ++j) {
    xy[j] = coeff_[j].real();
    xy[coeff_.size() + j] = coeff_[j].imag();
  }
  return xy;
}

void ComplexField::set_from_real_layout(const std::vector<double>& xy) {
  if (xy.size() != 2 * coeff_.size())
    throw StructuralError("real layout size mismatch");
  for (std::size_t j = 0; j < coeff_.size(); ++j)
    coeff_[j] = cplx(xy[j], xy[coeff_.size() + j]);
}

void ComplexField::eval_on_element(std::size_t k, Vec2 ref, cplx* value, cplx grad[2]) const {
  const auto b = eval_basis(space_->degree(), ref);
  const auto em = space_->mesh().element_map(k);
  const std::uint32_t* dofs = space_->element_dofs(k);
  cplx v(0.0, 0.0), gx(0.0, 0.0), gy(0.0, 0.0);
  for (int l = 0; l < b.count; ++l) {
    const cplx c = coeff_[dofs[l]];
    v += b.values[l] * c;
    const Vec2 g = em.push_gradient(b.gradients[l]);
    gx += g.x * c;
    gy += g.y * c;
  }
  if (value) *value = v;
  if (grad) {
    grad[0] = gx;
    grad[1] = gy;
  }
}

cplx ComplexField::eval(Vec2 x) const {
  const Mesh& m = space_->mesh();
  const int n = m.cells_per_side();
  const double h = m.cell_size();
  int ci = static_cast<int>(std::floor(x.x / h));
  int cj = static_cast<int>(std::floor(x.y / h));
  ci = std::min(std::max(ci, 0), n - 1);
  cj = std::min(std::max(cj, 0), n - 1);
  // Local cell coordinates decide the diagonal side (y <= x: lower triangle).
  const double lx = x.x / h - ci, ly = x.y / h - cj;
  const std::size_t k = 2 * (static_cast<std::size_t>(cj) * n + ci) + (ly <= lx ? 0 : 1);
  const auto em = m.element_map(k);
  cplx v;
  eval_on_element(k, em.unmap(x), &v, nullptr);
  return v;
}

void ComplexField::dump(std::ostream& os) const {
  os.precision(17);
  os << "glfield v1\n";
  os << "p=" << space_->degree() << " level=" << space_->mesh().level()
     << " N=" << coeff_.size() << "\n";
  for (const auto& c : coeff_) os << c.real() << " " << c.imag() << "\n";
}

ComplexField ComplexField::load(std::istream& is, std::shared_ptr<const FESpace> space) {
  std::string line;
  if (!std::getline(is, line) || line != "glfield v1")
    throw InputError("field load: bad magic line");
  int p = 0, level = 0;
  std::size_t n = 0;
  if (!std::getline(is, line)) throw InputError("field load: missing header");
  if (std::sscanf(line.c_str(), "p=%d level=%d N=%zu", &p, &level, &n) != 3)
    throw InputError("field load: malformed header: " + line);
  if (!space) {
    auto mesh = Mesh::build_uniform(level);
    space = FESpace::build(mesh, p);
  }
  if (p != space->degree() || level != space->mesh().level() || n != space->dof_count())
    throw InputError("field load: header does not match target space");
  ComplexField f(space);
  for (std::size_t j = 0; j < n; ++j) {
    double re, im;
    if (!(is >> re >> im)) throw InputError("field load: truncated data");
    f[j] = cplx(re, im);
  }
  return f;
}

ComplexField nodal_interpolate(const std::function<cplx(Vec2)>& f,
                               std::shared_ptr<const FESpace> space) {
  ComplexField out(space);
  for (std::size_t j = 0; j < space->dof_count(); ++j) {
    const Vec2 x = space->dof_point(j);
    const cplx v = f(x);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      std::ostringstream msg;
      msg << "nodal_interpolate: non-finite value at node (" << x.x << ", " << x.y << ")";
      throw InputError(msg.str());
    }
    out[j] = v;
  }
  return out;
}

Prolongation build_prolongation(const FESpace& coarse, const FESpace& fine) {
  if (fine.mesh().level() < coarse.mesh().level() || fine.degree() < coarse.degree())
    throw StructuralError("prolongation requires a nested finer target space");

  Prolongation P;
  P.rows = fine.dof_count();
  P.cols = coarse.dof_count();
  P.row_offset.assign(P.rows + 1, 0);

  const Mesh& cm = coarse.mesh();
  const int n = cm.cells_per_side();
  const double h = cm.cell_size();
  const int nd = coarse.dofs_per_element();

  std::vector<std::uint32_t> cols;
  std::vector<double> weights;
  cols.reserve(P.rows * nd);
  weights.reserve(P.rows * nd);

  for (std::size_t i = 0; i < P.rows; ++i) {
    const Vec2 x = fine.dof_point(i);
    int ci = std::min(std::max(static_cast<int>(std::floor(x.x / h)), 0), n - 1);
    int cj = std::min(std::max(static_cast<int>(std::floor(x.y / h)), 0), n - 1);
    const double lx = x.x / h - ci, ly = x.y / h - cj;
    const std::size_t k = 2 * (static_cast<std::size_t>(cj) * n + ci) + (ly <= lx ? 0 : 1);
    const auto em = cm.element_map(k);
    const auto b = eval_basis(coarse.degree(), em.unmap(x));
    const std::uint32_t* dofs = coarse.element_dofs(k);
    for (int l = 0; l < nd; ++l) {
      if (b.values[l] == 0.0) continue;
      cols.push_back(dofs[l]);
      weights.push_back(b.values[l]);
    }
    P.row_offset[i + 1] = static_cast<std::uint32_t>(cols.size());
  }
  P.col = std::move(cols);
  P.weight = std::move(weights);
  return P;
}

std::vector<cplx> Prolongation::apply(const std::vector<cplx>& coarse) const {
  if (coarse.size() != cols) throw StructuralError("prolongation apply: size mismatch");
  std::vector<cplx> out(rows, cplx(0.0, 0.0));
  for (std::size_t i = 0; i < rows; ++i) {
    cplx acc(0.0, 0.0);
    for (std::uint32_t e = row_offset[i]; e < row_offset[i + 1]; ++e)
      acc += weight[e] * coarse[col[e]];
    out[i] = acc;
  }
  return out;
}

std::vector<cplx> Prolongation::apply_transpose(const std::vector<cplx>& fine) const {
  if (fine.size() != rows) throw StructuralError("prolongation transpose: size mismatch");
  std::vector<cplx> out(cols, cplx(0.0, 0.0));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::uint32_t e = row_offset[i]; e < row_offset[i + 1]; ++e)
      out[col[e]] += weight[e] * fine[i];
  return out;
}

ComplexField prolongate(const ComplexField& coarse, std::shared_ptr<const FESpace> fine) {
  const auto P = build_prolongation(coarse.space(), *fine);
  ComplexField out(fine);
  out.coefficients() = P.apply(coarse.coefficients());
  return out;
}

}  // namespace glfem
