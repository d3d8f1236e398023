#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "frist/fr_operators.hpp"
#include "frist/sparse_transform.hpp"
#include "frist/types.hpp"

namespace frist {

/// Parent transform, its selected flip/rotation operators and the
/// hyperparameters it was trained with.
struct FristModel {
  Matrix parent;
  std::vector<FROperator> operators;
  double lambda0 = 3.1e-3;
  int sparsity = 10;
  int patch_side = 8;
  int num_angles = 32;

  int dim() const { return patch_side * patch_side; }
};

enum class InitKind { dct, klt, identity, random_gaussian };

InitKind parse_init(const std::string& name);
std::string to_string(InitKind kind);

struct LearnConfig {
  int target_operators = 2;  // K
  int num_angles = 0;        // 0 = 4 * patch_side
  int patch_side = 8;
  int sparsity = 10;
  double lambda0 = 3.1e-3;
  int max_iters = 100;
  double tol_objective = 1e-8;  // <= 0 disables the early stop
  InitKind init = InitKind::dct;
  std::uint64_t seed = 0;
  double init_stddev = 0.2;
  /// Restrict the candidate list to the identity (a single square transform).
  bool identity_only = false;
};

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;
  double sparsification_error = 0.0;
  double condition_number = 0.0;
  int active_operators = 0;
  std::vector<long> cluster_sizes;
};

struct LearnTrace {
  std::vector<IterationRecord> iterations;
  bool early_stopped = false;
  /// First iteration whose operator set equals the final one.
  int fixed_operators_from = 1;
};

struct LearnResult {
  FristModel model;
  LearnTrace trace;
  SparseCodeSet codes;  // codes and labels from the last clustering step
};

/// Sparse coding and clustering for a fixed parent transform.
SparseCodeSet sparse_code_and_cluster(const Matrix& y, const Matrix& w,
                                      const std::vector<FROperator>& ops, int sparsity);

/// Closed-form minimizer of ||W Yr - X||_F^2 + lambda Q(W) where Yr holds
/// the patches already rotated by their assigned operators.
Matrix transform_update(const Matrix& rotated, const Matrix& codes, double lambda);

/// Indices (ascending) of the operators kept after one elimination round.
std::vector<int> eliminate_clusters(const std::vector<long>& cluster_sizes, int target);

/// Initial parent transform for the given training data.
Matrix initial_transform(const Matrix& y, int patch_side, InitKind kind, std::uint64_t seed,
                         double stddev);

/// Alternating sparse coding/clustering and transform update.
LearnResult learn(const Matrix& y, const LearnConfig& config);

/// Least-squares patch estimate Phi_k^T W^{-1} x.
Vector reconstruct_patch(const FristModel& model, const Vector& code, int label);

/// Reconstructs all columns; throws SingularTransformError if W is singular.
Matrix reconstruct_patches(const FristModel& model, const SparseCodeSet& codes);

/// Lambda scaling: lambda0 * ||Y||_F^2.
inline double scaled_lambda(double lambda0, const Matrix& y) { return lambda0 * y.squaredNorm(); }

}  // namespace frist
