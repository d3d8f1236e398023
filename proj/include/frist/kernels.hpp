#pragma once

// Data-parallel per-patch kernels. Each OpenMP kernel has a plain serial
// counterpart (suffix _reference) that the tests and the benchmark compare
// against. Work is split into fixed-size column blocks, so the output does not
// depend on the number of threads.

#include <span>
#include <vector>

#include "frist/fr_operators.hpp"
#include "frist/types.hpp"

namespace frist {

enum class Exec { serial, parallel };

/// Sets the OpenMP worker count (<= 0 leaves the runtime default).
void set_num_threads(int threads);
int max_threads();

/// Runs fn(i) for i in [0, count). Iterations must be independent.
template <typename Fn>
void for_each_index(Exec exec, long count, Fn&& fn) {
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (long i = 0; i < count; ++i) fn(i);
  } else {
    for (long i = 0; i < count; ++i) fn(i);
  }
}

/// Sparse coding and clustering under a per-patch l0 constraint: every column
/// is assigned to the operator with the smallest sparsification error (lowest
/// index on ties) and coded as H_s(W Phi_k y).
struct ClusterResult {
  std::vector<int> labels;
  Vector errors;  // sparsification error at the chosen operator
  Matrix codes;
};

/// `sparsity` holds one level per column.
ClusterResult cluster_patches(const Matrix& y, const Matrix& w, const std::vector<FROperator>& ops,
                              std::span<const int> sparsity);
ClusterResult cluster_patches_reference(const Matrix& y, const Matrix& w,
                                        const std::vector<FROperator>& ops,
                                        std::span<const int> sparsity);

/// Clustering under the l0 penalty: minimizes
/// ||b - T_tau(b)||^2 + tau^2 ||T_tau(b)||_0 with b = W Phi_k y.
struct PenaltyClusterResult {
  std::vector<int> labels;
  Vector objectives;
  Matrix codes;
};

/// Per-column penalty objective for the coefficient vector b.
double penalty_value(const Vector& b, double tau);

PenaltyClusterResult penalty_cluster_patches(const Matrix& y, const Matrix& w,
                                             const std::vector<FROperator>& ops, double tau);
PenaltyClusterResult penalty_cluster_patches_reference(const Matrix& y, const Matrix& w,
                                                       const std::vector<FROperator>& ops,
                                                       double tau);

/// Columns of y rotated by their assigned operators: [Phi_{l_1} y_1 | ...].
Matrix rotate_columns(const Matrix& y, const std::vector<FROperator>& ops,
                      const std::vector<int>& labels, Exec exec = Exec::parallel);

/// Number of patches per operator.
std::vector<long> cluster_sizes(const std::vector<int>& labels, std::size_t num_ops);

}  // namespace frist
