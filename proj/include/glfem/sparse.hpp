#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <type_traits>
#include <vector>

#include "glfem/error.hpp"

namespace glfem {

using cplx = std::complex<double>;

/// Sparse symmetric operator in CSR form. Real instantiation is symmetric,
/// complex instantiation is Hermitian; the stored pattern covers the full
/// matrix (both triangles) and values satisfy the declared symmetry exactly.
template <typename Scalar>
struct SparseSymOp {
  static constexpr bool is_hermitian = std::is_same_v<Scalar, cplx>;

  std::size_t dim = 0;
  std::vector<std::uint32_t> row_offset;  // size dim + 1
  std::vector<std::uint32_t> col;
  std::vector<Scalar> val;

  std::size_t nnz() const { return col.size(); }

  /// y = A x. Throws StructuralError on dimension mismatch.
  void apply(const Scalar* x, Scalar* y) const;
  std::vector<Scalar> apply(const std::vector<Scalar>& x) const;

  /// Real diagonal (diagonal of a Hermitian matrix is real).
  std::vector<double> diagonal() const;

  /// Coordinate text export: one "i j re" / "i j re im" line per entry.
  void export_coordinate(std::ostream& os) const;

  /// max_ij |A_ij - conj(A_ji)|, for symmetry checks.
  double symmetry_defect() const;
};

using RealSymOp = SparseSymOp<double>;
using HermitianOp = SparseSymOp<cplx>;

/// spmv free function, mirroring the operator contract.
template <typename Scalar>
std::vector<Scalar> spmv(const SparseSymOp<Scalar>& A, const std::vector<Scalar>& x) {
  return A.apply(x);
}

/// Triplet accumulator for one-off assemblies. Duplicate entries are summed
/// in insertion order.
template <typename Scalar>
class TripletBuilder {
public:
  explicit TripletBuilder(std::size_t dim) : dim_(dim) {}
  void add(std::uint32_t i, std::uint32_t j, Scalar v) { entries_.push_back({i, j, v}); }
  SparseSymOp<Scalar> build() const;

private:
  struct Entry {
    std::uint32_t row, col;
    Scalar v;
  };
  std::size_t dim_;
  std::vector<Entry> entries_;
};

/// Fixed sparsity pattern plus a gather map from per-element local matrices
/// into CSR value slots. Rebuilding values for a new coefficient function is
/// a deterministic parallel pass (each slot sums its contributors in a fixed
/// order, independent of the thread count).
class ElementPattern {
public:
  /// dofs: per-element local->global map, nd entries per element.
  ElementPattern(std::size_t dof_count, std::size_t element_count, int nd,
                 const std::uint32_t* dofs);

  std::size_t dim() const { return dim_; }
  int nd() const { return nd_; }
  std::size_t element_count() const { return element_count_; }
  const std::vector<std::uint32_t>& row_offset() const { return row_offset_; }
  const std::vector<std::uint32_t>& col() const { return col_; }

  /// Sums local element matrices (row-major nd x nd per element) into CSR
  /// values. locals[e * nd * nd + a * nd + b] pairs local row a (test) with
  /// local col b (trial).
  template <typename Scalar, typename Local>
  void gather(const Local* locals, std::vector<Scalar>& values) const;

  /// Skeleton operator with zero values.
  template <typename Scalar>
  SparseSymOp<Scalar> skeleton() const {
    SparseSymOp<Scalar> A;
    A.dim = dim_;
    A.row_offset = row_offset_;
    A.col = col_;
    A.val.assign(col_.size(), Scalar(0));
    return A;
  }

private:
  std::size_t dim_;
  std::size_t element_count_;
  int nd_;
  std::vector<std::uint32_t> row_offset_;
  std::vector<std::uint32_t> col_;
  // For each CSR slot: contributing (element, local pair) list, flattened.
  std::vector<std::uint32_t> gather_offset_;
  std::vector<std::uint32_t> gather_elem_;
  std::vector<std::uint16_t> gather_pair_;
};

/// Per-dof contributor lists (transpose of the element-dof map), used to
/// merge per-element vector contributions deterministically.
class DofGather {
public:
  DofGather(std::size_t dof_count, std::size_t element_count, int nd,
            const std::uint32_t* dofs);

  /// out[j] = sum over contributors of locals[e * nd + a].
  template <typename Scalar>
  void gather(const Scalar* locals, std::vector<Scalar>& out) const;

private:
  std::size_t dof_count_;
  int nd_;
  std::vector<std::uint32_t> offset_;
  std::vector<std::uint32_t> elem_;
  std::vector<std::uint16_t> local_;
};

}  // namespace glfem
