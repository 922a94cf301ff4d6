#pragma once

#include <cstddef>
#include <vector>

#include "autost/tensor.hpp"

namespace autost {

/// Compressed sparse row matrix. Only used as a constant left operand
/// (graph adjacency) in products with dense tensors.
struct SparseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr;  // rows + 1 entries
  std::vector<std::size_t> col_idx;
  std::vector<double> values;

  std::size_t nnz() const noexcept { return values.size(); }
  /// Entry lookup by scanning the row; fine for tests and small graphs.
  double at(std::size_t r, std::size_t c) const;
  Tensor to_dense() const;
};

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Builds CSR from triplets; duplicates are summed and columns sorted.
SparseMatrix sparse_from_triplets(std::size_t rows, std::size_t cols,
                                  std::vector<Triplet> triplets);

/// A * X
Tensor spmm(const SparseMatrix& a, const Tensor& x);
/// A^T * X
Tensor spmm_t(const SparseMatrix& a, const Tensor& x);

}  // namespace autost
