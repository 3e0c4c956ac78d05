#include "glfem/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "glfem/parallel.hpp"

namespace glfem {

template <typename Scalar>
void SparseSymOp<Scalar>::apply(const Scalar* x, Scalar* y) const {
  parallel_chunks(dim, 4096, [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t i = b; i < e; ++i) {
      Scalar acc(0);
      for (std::uint32_t s = row_offset[i]; s < row_offset[i + 1]; ++s)
        acc += val[s] * x[col[s]];
      y[i] = acc;
    }
  });
}

template <typename Scalar>
std::vector<Scalar> SparseSymOp<Scalar>::apply(const std::vector<Scalar>& x) const {
  if (x.size() != dim) throw StructuralError("spmv: dimension mismatch");
  std::vector<Scalar> y(dim);
  apply(x.data(), y.data());
  return y;
}

template <typename Scalar>
std::vector<double> SparseSymOp<Scalar>::diagonal() const {
  std::vector<double> d(dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::uint32_t s = row_offset[i]; s < row_offset[i + 1]; ++s)
      if (col[s] == i) d[i] = std::real(val[s]);
  return d;
}

template <typename Scalar>
void SparseSymOp<Scalar>::export_coordinate(std::ostream& os) const {
  os.precision(17);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::uint32_t s = row_offset[i]; s < row_offset[i + 1]; ++s) {
      os << i << " " << col[s] << " " << std::real(val[s]);
      if constexpr (is_hermitian) os << " " << std::imag(val[s]);
      os << "\n";
    }
}

template <typename Scalar>
double SparseSymOp<Scalar>::symmetry_defect() const {
  // Builds a transposed copy and compares entrywise.
  std::vector<std::uint32_t> count(dim + 1, 0);
  for (auto c : col) ++count[c + 1];
  std::partial_sum(count.begin(), count.end(), count.begin());
  std::vector<std::uint32_t> tcol(col.size());
  std::vector<Scalar> tval(col.size());
  std::vector<std::uint32_t> cursor(count.begin(), count.end() - 1);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::uint32_t s = row_offset[i]; s < row_offset[i + 1]; ++s) {
      const std::uint32_t at = cursor[col[s]]++;
      tcol[at] = static_cast<std::uint32_t>(i);
      tval[at] = val[s];
    }
  double defect = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    // Rows of A and rows of A^T for index i are both sorted by column.
    std::uint32_t s = row_offset[i];
    for (std::uint32_t t = count[i]; t < count[i + 1]; ++t) {
      while (s < row_offset[i + 1] && col[s] < tcol[t]) ++s;
      Scalar a = (s < row_offset[i + 1] && col[s] == tcol[t]) ? val[s] : Scalar(0);
      Scalar b = tval[t];
      if constexpr (is_hermitian) b = std::conj(b);
      defect = std::max(defect, std::abs(a - b));
    }
  }
  return defect;
}

template struct SparseSymOp<double>;
template struct SparseSymOp<cplx>;

template <typename Scalar>
SparseSymOp<Scalar> TripletBuilder<Scalar>::build() const {
  std::vector<std::uint32_t> order(entries_.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (entries_[a].row != entries_[b].row) return entries_[a].row < entries_[b].row;
    return entries_[a].col < entries_[b].col;
  });
  SparseSymOp<Scalar> A;
  A.dim = dim_;
  A.row_offset.assign(dim_ + 1, 0);
  std::size_t idx = 0;
  while (idx < order.size()) {
    const auto& head = entries_[order[idx]];
    Scalar sum(0);
    do {
      sum += entries_[order[idx]].v;
      ++idx;
    } while (idx < order.size() && entries_[order[idx]].row == head.row &&
             entries_[order[idx]].col == head.col);
    A.col.push_back(head.col);
    A.val.push_back(sum);
    A.row_offset[head.row + 1] = static_cast<std::uint32_t>(A.col.size());
  }
  // Fill gaps for empty rows.
  for (std::size_t i = 1; i <= dim_; ++i)
    A.row_offset[i] = std::max(A.row_offset[i], A.row_offset[i - 1]);
  return A;
}

template class TripletBuilder<double>;
template class TripletBuilder<cplx>;

ElementPattern::ElementPattern(std::size_t dof_count, std::size_t element_count, int nd,
                               const std::uint32_t* dofs)
    : dim_(dof_count), element_count_(element_count), nd_(nd) {
  struct Slot {
    std::uint32_t row, col, elem;
    std::uint16_t pair;
  };
  std::vector<Slot> slots;
  slots.reserve(element_count * nd * nd);
  for (std::size_t e = 0; e < element_count; ++e) {
    const std::uint32_t* ed = dofs + e * nd;
    for (int a = 0; a < nd; ++a)
      for (int b = 0; b < nd; ++b)
        slots.push_back({ed[a], ed[b], static_cast<std::uint32_t>(e),
                         static_cast<std::uint16_t>(a * nd + b)});
  }
  std::stable_sort(slots.begin(), slots.end(), [](const Slot& x, const Slot& y) {
    if (x.row != y.row) return x.row < y.row;
    return x.col < y.col;
  });

  row_offset_.assign(dim_ + 1, 0);
  gather_offset_.clear();
  gather_offset_.push_back(0);
  gather_elem_.reserve(slots.size());
  gather_pair_.reserve(slots.size());
  for (std::size_t s = 0; s < slots.size(); ++s) {
    const bool new_slot = col_.empty() || s == 0 || slots[s].row != slots[s - 1].row ||
                          slots[s].col != slots[s - 1].col;
    if (new_slot) {
      col_.push_back(slots[s].col);
      row_offset_[slots[s].row + 1] = static_cast<std::uint32_t>(col_.size());
      gather_offset_.push_back(gather_offset_.back());
    }
    gather_elem_.push_back(slots[s].elem);
    gather_pair_.push_back(slots[s].pair);
    ++gather_offset_.back();
  }
  for (std::size_t i = 1; i <= dim_; ++i)
    row_offset_[i] = std::max(row_offset_[i], row_offset_[i - 1]);
}

template <typename Scalar, typename Local>
void ElementPattern::gather(const Local* locals, std::vector<Scalar>& values) const {
  values.resize(col_.size());
  const std::size_t ndnd = static_cast<std::size_t>(nd_) * nd_;
  parallel_chunks(col_.size(), 8192, [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t v = b; v < e; ++v) {
      Scalar acc(0);
      for (std::uint32_t g = gather_offset_[v]; g < gather_offset_[v + 1]; ++g)
        acc += Scalar(locals[gather_elem_[g] * ndnd + gather_pair_[g]]);
      values[v] = acc;
    }
  });
}

template void ElementPattern::gather<double, double>(const double*, std::vector<double>&) const;
template void ElementPattern::gather<cplx, cplx>(const cplx*, std::vector<cplx>&) const;
template void ElementPattern::gather<cplx, double>(const double*, std::vector<cplx>&) const;

DofGather::DofGather(std::size_t dof_count, std::size_t element_count, int nd,
                     const std::uint32_t* dofs)
    : dof_count_(dof_count), nd_(nd) {
  offset_.assign(dof_count + 1, 0);
  for (std::size_t e = 0; e < element_count; ++e)
    for (int a = 0; a < nd; ++a) ++offset_[dofs[e * nd + a] + 1];
  std::partial_sum(offset_.begin(), offset_.end(), offset_.begin());
  elem_.resize(offset_.back());
  local_.resize(offset_.back());
  std::vector<std::uint32_t> cursor(offset_.begin(), offset_.end() - 1);
  for (std::size_t e = 0; e < element_count; ++e)
    for (int a = 0; a < nd; ++a) {
      const std::uint32_t at = cursor[dofs[e * nd + a]]++;
      elem_[at] = static_cast<std::uint32_t>(e);
      local_[at] = static_cast<std::uint16_t>(a);
    }
}

template <typename Scalar>
void DofGather::gather(const Scalar* locals, std::vector<Scalar>& out) const {
  out.resize(dof_count_);
  parallel_chunks(dof_count_, 8192, [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t j = b; j < e; ++j) {
      Scalar acc(0);
      for (std::uint32_t g = offset_[j]; g < offset_[j + 1]; ++g)
        acc += locals[static_cast<std::size_t>(elem_[g]) * nd_ + local_[g]];
      out[j] = acc;
    }
  });
}

template void DofGather::gather<double>(const double*, std::vector<double>&) const;
template void DofGather::gather<cplx>(const cplx*, std::vector<cplx>&) const;

}  // namespace glfem
