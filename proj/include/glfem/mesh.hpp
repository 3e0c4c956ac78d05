#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

namespace glfem {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

/// Affine map F_K(x̂) = B x̂ + b from the reference triangle
/// {(0,0),(1,0),(0,1)} onto a physical element.
struct ElementMap {
  std::size_t element = 0;
  double B[2][2] = {{0, 0}, {0, 0}};
  Vec2 offset;
  double det_B = 0.0;       // = 2 * |K| > 0
  double Binv_T[2][2] = {{0, 0}, {0, 0}};  // inverse-transpose, for gradient push-forward

  Vec2 map(Vec2 ref) const {
    return {B[0][0] * ref.x + B[0][1] * ref.y + offset.x,
            B[1][0] * ref.x + B[1][1] * ref.y + offset.y};
  }
  Vec2 unmap(Vec2 phys) const {
    const double rx = phys.x - offset.x, ry = phys.y - offset.y;
    return {(B[1][1] * rx - B[0][1] * ry) / det_B, (-B[1][0] * rx + B[0][0] * ry) / det_B};
  }
  /// Push a reference gradient to the physical gradient: ∇φ = B^{-T} ∇̂φ̂.
  Vec2 push_gradient(Vec2 ref_grad) const {
    return {Binv_T[0][0] * ref_grad.x + Binv_T[0][1] * ref_grad.y,
            Binv_T[1][0] * ref_grad.x + Binv_T[1][1] * ref_grad.y};
  }
};

/// Uniform conforming triangulation of Ω = [0,1]², built by cutting a
/// 2^ℓ × 2^ℓ cell grid along the lower-left → upper-right diagonal.
/// Immutable after construction.
class Mesh {
public:
  using VertexIds = std::array<std::uint32_t, 3>;

  static constexpr int kMaxLevel = 12;

  /// Builds the level-ℓ mesh; throws CapacityError for level > kMaxLevel.
  static std::shared_ptr<const Mesh> build_uniform(int level);

  /// Builds the level+1 mesh with the parent link set.
  static std::shared_ptr<const Mesh> refine(const std::shared_ptr<const Mesh>& m);

  int level() const { return level_; }
  double cell_size() const { return cell_size_; }
  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t element_count() const { return elements_.size(); }
  Vec2 vertex(std::size_t v) const { return vertices_[v]; }
  const VertexIds& element(std::size_t k) const { return elements_[k]; }
  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<VertexIds>& elements() const { return elements_; }
  std::shared_ptr<const Mesh> parent() const { return parent_; }

  ElementMap element_map(std::size_t k) const;
  double element_area(std::size_t k) const;

  /// Patch 𝒯_h^K: indices of all elements sharing at least a vertex with k
  /// (k itself included).
  std::vector<std::size_t> patch(std::size_t k) const;

  /// Grid index of the vertex at (i·h, j·h).
  std::uint32_t vertex_id(int i, int j) const {
    return static_cast<std::uint32_t>(j * (cells_per_side_ + 1) + i);
  }
  int cells_per_side() const { return cells_per_side_; }

  /// True if m is this mesh or an iterated refinement ancestor chain exists
  /// between them (levels compared; all meshes of this type are nested).
  bool refines(const Mesh& coarser) const { return level_ >= coarser.level_; }

  /// Plain-text dump: "vertices N" / x y lines / "elements M" / i j k lines.
  void dump(std::ostream& os) const;
  static std::shared_ptr<const Mesh> load(std::istream& is);

private:
  explicit Mesh(int level);

  int level_;
  int cells_per_side_;
  double cell_size_;
  std::vector<Vec2> vertices_;
  std::vector<VertexIds> elements_;
  std::shared_ptr<const Mesh> parent_;
};

}  // namespace glfem
