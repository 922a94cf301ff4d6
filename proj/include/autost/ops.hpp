#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "autost/sparse.hpp"
#include "autost/tape.hpp"

// Differentiable operations on tape Vars. Every op validates shapes and
// throws ShapeError naming both operands on mismatch.
namespace autost {

Var add(Var a, Var b);
Var sub(Var a, Var b);
/// Element-wise product.
Var mul(Var a, Var b);
/// x + bias, where bias is [1 x cols] and broadcast over rows.
Var add_row(Var x, Var bias);
Var scale(Var a, double factor);

Var matmul(Var a, Var b);
/// a * b^T
Var matmul_nt(Var a, Var b);
Var transpose(Var a);
/// A * x for a constant sparse A.
Var spmm(std::shared_ptr<const SparseMatrix> a, Var x);

/// Subgradient at exactly 0 is 0.
Var relu(Var a);
Var sigmoid(Var a);
/// log(1 + exp(a)), evaluated stably.
Var softplus(Var a);
/// Throws ContractError on non-positive input.
Var log(Var a);
Var exp(Var a);

/// Row-wise softmax with max subtraction.
Var softmax_rows(Var a);
Var log_softmax_rows(Var a);

Var concat_cols(const std::vector<Var>& parts);
/// Columns [begin, end).
Var slice_cols(Var a, std::size_t begin, std::size_t end);
Var gather_rows(Var a, std::vector<std::size_t> rows);

/// Sum of all entries as a 1x1 tensor.
Var sum(Var a);
Var mean(Var a);
/// [rows x 1] sums of each row.
Var row_sum(Var a);
/// Diagonal of a square matrix as [n x 1].
Var diag(Var a);

/// Rows scaled to unit norm; zero rows stay zero (with zero gradient).
Var normalize_rows(Var a);
/// Row-wise cosine of aligned rows, [rows x 1]. Zero vectors give 0.
Var cosine_similarity(Var a, Var b);
/// All-pairs cosine, entry (i, j) = cos(a_i, b_j).
Var cosine_matrix(Var a, Var b);

}  // namespace autost
