#include "autost/sparse.hpp"

#include <algorithm>

#include "autost/errors.hpp"

namespace autost {

double SparseMatrix::at(std::size_t r, std::size_t c) const {
  for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
    if (col_idx[k] == c) return values[k];
  }
  return 0.0;
}

Tensor SparseMatrix::to_dense() const {
  Tensor out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) out(r, col_idx[k]) += values[k];
  }
  return out;
}

SparseMatrix sparse_from_triplets(std::size_t rows, std::size_t cols,
                                  std::vector<Triplet> triplets) {
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.row_ptr.assign(rows + 1, 0);
  for (std::size_t k = 0; k < triplets.size(); ++k) {
    const auto& t = triplets[k];
    if (t.row >= rows || t.col >= cols) {
      throw ShapeError("sparse_from_triplets: entry (" + std::to_string(t.row) + "," +
                       std::to_string(t.col) + ") outside [" + std::to_string(rows) + "x" +
                       std::to_string(cols) + "]");
    }
    if (!m.col_idx.empty() && k > 0 && triplets[k - 1].row == t.row &&
        triplets[k - 1].col == t.col) {
      m.values.back() += t.value;
      continue;
    }
    m.col_idx.push_back(t.col);
    m.values.push_back(t.value);
    ++m.row_ptr[t.row + 1];
  }
  for (std::size_t r = 0; r < rows; ++r) m.row_ptr[r + 1] += m.row_ptr[r];
  return m;
}

Tensor spmm(const SparseMatrix& a, const Tensor& x) {
  if (a.cols != x.rows()) {
    throw ShapeError("spmm: shape mismatch [" + std::to_string(a.rows) + "x" +
                     std::to_string(a.cols) + "] vs " + shape_string(x));
  }
  Tensor out(a.rows, x.cols());
  const std::size_t n = x.cols();
  for (std::size_t r = 0; r < a.rows; ++r) {
    double* o = out.row(r).data();
    for (std::size_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      const double v = a.values[k];
      const double* xr = x.row(a.col_idx[k]).data();
      for (std::size_t j = 0; j < n; ++j) o[j] += v * xr[j];
    }
  }
  return out;
}

Tensor spmm_t(const SparseMatrix& a, const Tensor& x) {
  if (a.rows != x.rows()) {
    throw ShapeError("spmm_t: shape mismatch [" + std::to_string(a.rows) + "x" +
                     std::to_string(a.cols) + "]^T vs " + shape_string(x));
  }
  Tensor out(a.cols, x.cols());
  const std::size_t n = x.cols();
  for (std::size_t r = 0; r < a.rows; ++r) {
    const double* xr = x.row(r).data();
    for (std::size_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      const double v = a.values[k];
      double* o = out.row(a.col_idx[k]).data();
      for (std::size_t j = 0; j < n; ++j) o[j] += v * xr[j];
    }
  }
  return out;
}

}  // namespace autost
