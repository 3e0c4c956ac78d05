#include "glfem/mesh.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "glfem/error.hpp"

namespace glfem {

Mesh::Mesh(int level)
    : level_(level),
      cells_per_side_(1 << level),
      cell_size_(1.0 / static_cast<double>(1 << level)) {
  const int n = cells_per_side_;
  const double h = cell_size_;
  vertices_.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) vertices_.push_back({i * h, j * h});

  elements_.reserve(2u * static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const std::uint32_t v00 = vertex_id(i, j);
      const std::uint32_t v10 = vertex_id(i + 1, j);
      const std::uint32_t v01 = vertex_id(i, j + 1);
      const std::uint32_t v11 = vertex_id(i + 1, j + 1);
      // Both triangles counterclockwise; shared edge is the cell diagonal.
      elements_.push_back({v00, v10, v11});
      elements_.push_back({v00, v11, v01});
    }
  }
}

std::shared_ptr<const Mesh> Mesh::build_uniform(int level) {
  if (level < 0) throw ConfigError("mesh level must be nonnegative");
  if (level > kMaxLevel)
    throw CapacityError("mesh level " + std::to_string(level) + " exceeds guard " +
                        std::to_string(kMaxLevel));
  return std::shared_ptr<const Mesh>(new Mesh(level));
}

std::shared_ptr<const Mesh> Mesh::refine(const std::shared_ptr<const Mesh>& m) {
  if (!m) throw StructuralError("refine: null mesh");
  auto child = build_uniform(m->level() + 1);
  const_cast<Mesh*>(child.get())->parent_ = m;
  return child;
}

ElementMap Mesh::element_map(std::size_t k) const {
  const auto& el = elements_.at(k);
  const Vec2 p0 = vertices_[el[0]], p1 = vertices_[el[1]], p2 = vertices_[el[2]];
  ElementMap em;
  em.element = k;
  em.offset = p0;
  em.B[0][0] = p1.x - p0.x;
  em.B[1][0] = p1.y - p0.y;
  em.B[0][1] = p2.x - p0.x;
  em.B[1][1] = p2.y - p0.y;
  em.det_B = em.B[0][0] * em.B[1][1] - em.B[0][1] * em.B[1][0];
  const double inv_det = 1.0 / em.det_B;
  // B^{-1} = 1/det [[B11, -B01], [-B10, B00]]; transpose of that below.
  em.Binv_T[0][0] = em.B[1][1] * inv_det;
  em.Binv_T[0][1] = -em.B[1][0] * inv_det;
  em.Binv_T[1][0] = -em.B[0][1] * inv_det;
  em.Binv_T[1][1] = em.B[0][0] * inv_det;
  return em;
}

double Mesh::element_area(std::size_t k) const {
  const auto& el = elements_.at(k);
  const Vec2 a = vertices_[el[0]], b = vertices_[el[1]], c = vertices_[el[2]];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

std::vector<std::size_t> Mesh::patch(std::size_t k) const {
  const auto& el = elements_.at(k);
  // Uniform grid: elements sharing a vertex with k lie in the 3x3 cell block
  // around k's cell. Scan those and keep vertex-sharers.
  const std::size_t cell = k / 2;
  const int ci = static_cast<int>(cell % cells_per_side_);
  const int cj = static_cast<int>(cell / cells_per_side_);
  std::vector<std::size_t> out;
  for (int dj = -1; dj <= 1; ++dj) {
    for (int di = -1; di <= 1; ++di) {
      const int i = ci + di, j = cj + dj;
      if (i < 0 || j < 0 || i >= cells_per_side_ || j >= cells_per_side_) continue;
      for (int t = 0; t < 2; ++t) {
        const std::size_t kk = 2 * (static_cast<std::size_t>(j) * cells_per_side_ + i) + t;
        const auto& other = elements_[kk];
        bool shares = false;
        for (auto a : el)
          for (auto b : other)
            if (a == b) shares = true;
        if (shares) out.push_back(kk);
      }
    }
  }
  return out;
}

void Mesh::dump(std::ostream& os) const {
  os.precision(17);
  os << "vertices " << vertices_.size() << "\n";
  for (const auto& v : vertices_) os << v.x << " " << v.y << "\n";
  os << "elements " << elements_.size() << "\n";
  for (const auto& el : elements_) os << el[0] << " " << el[1] << " " << el[2] << "\n";
}

std::shared_ptr<const Mesh> Mesh::load(std::istream& is) {
  std::string tag;
  std::size_t nv = 0;
  if (!(is >> tag >> nv) || tag != "vertices") throw InputError("mesh load: bad vertex header");
  // Only meshes produced by build_uniform round-trip: recover the level from
  // the vertex count and rebuild, then verify coordinates match.
  const auto side = static_cast<std::size_t>(std::lround(std::sqrt(double(nv)))) - 1;
  int level = 0;
  while ((std::size_t(1) << level) < side) ++level;
  if ((std::size_t(1) << level) != side || (side + 1) * (side + 1) != nv)
    throw InputError("mesh load: vertex count is not (2^l+1)^2");
  auto mesh = build_uniform(level);
  for (std::size_t v = 0; v < nv; ++v) {
    double x, y;
    if (!(is >> x >> y)) throw InputError("mesh load: truncated vertices");
    const Vec2 ref = mesh->vertex(v);
    if (x != ref.x || y != ref.y) throw InputError("mesh load: unexpected vertex coordinates");
  }
  std::size_t ne = 0;
  if (!(is >> tag >> ne) || tag != "elements" || ne != mesh->element_count())
    throw InputError("mesh load: bad element header");
  for (std::size_t k = 0; k < ne; ++k) {
    std::uint32_t a, b, c;
    if (!(is >> a >> b >> c)) throw InputError("mesh load: truncated elements");
    const auto& el = mesh->element(k);
    if (a != el[0] || b != el[1] || c != el[2])
      throw InputError("mesh load: unexpected element connectivity");
  }
  return mesh;
}

}  // namespace glfem
