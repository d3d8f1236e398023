#pragma once

#include <optional>
#include <vector>

#include "frist/fr_operators.hpp"
#include "frist/types.hpp"

namespace frist {

/// Keeps the s largest-magnitude entries (ties: lowest index), zeros the rest.
Vector project_sparse(const Vector& b, int s);

/// Indices of the s entries project_sparse keeps, in selection order.
std::vector<int> top_indices(const Vector& b, int s);

/// Entry j survives iff |b_j| >= tau.
Vector hard_threshold(const Vector& b, double tau);

/// Keeps the s largest-magnitude entries of the whole matrix
/// (ties: column-major order).
Matrix global_threshold(const Matrix& m, long s);
CMatrix global_threshold(const CMatrix& m, long s);

/// -log|det W| + ||W||_F^2, or nullopt when W is singular.
std::optional<double> regularizer(const Matrix& w);

/// ||W Phi y - H_s(W Phi y)||^2
double sparsification_error(const Matrix& w, const FROperator& op, const Vector& y, int s);

/// Energy outside the s largest-magnitude entries of `coeffs`.
double tail_energy(const Vector& coeffs, int s);

struct SparseCodeSet {
  Matrix codes;             // n x N
  std::vector<int> labels;  // index into the operator list
};

enum class ObjectiveStatus { ok, singular_transform, sparsity_barrier };

struct ObjectiveValue {
  ObjectiveStatus status = ObjectiveStatus::ok;
  double value = 0.0;
  double fidelity = 0.0;
  double regularization = 0.0;

  bool finite() const { return status == ObjectiveStatus::ok; }
};

/// Sum_i ||W Phi_{labels_i} Y_i - X_i||^2 + lambda Q(W). When `sparsity` is
/// given, any column of X with more nonzeros reports the sparsity barrier.
ObjectiveValue objective(const Matrix& w, const SparseCodeSet& codes, const Matrix& y,
                         const std::vector<FROperator>& ops, double lambda,
                         std::optional<int> sparsity = std::nullopt);

/// Orthonormal 1D DCT-II matrix (rows are basis vectors).
Matrix dct1_matrix(int size);

/// Orthonormal separable 2D DCT for row-major vectorized square patches.
Matrix dct_matrix(int patch_side);

/// Ratio of the largest to smallest singular value.
double condition_number(const Matrix& w);

}  // namespace frist
