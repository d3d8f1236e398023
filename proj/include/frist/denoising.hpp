#pragma once

#include <vector>

#include "frist/fr_operators.hpp"
#include "frist/image.hpp"
#include "frist/kernels.hpp"
#include "frist/types.hpp"
#include "frist/variant.hpp"

namespace frist {

struct DenoiseConfig {
  double sigma = 10.0;
  int operators = 64;  // K
  int patch_side = 8;
  int num_angles = 0;  // 0 = 4 * patch_side
  double error_constant = 1.04;  // C
  double tau0 = 0.01;            // fidelity weight tau = tau0 / sigma
  double lambda0 = 3.1e-3;
  int iters_per_pass = 12;
  int passes = 2;
  double sigma_decay = 0.7;
  int stride = 1;
  int initial_sparsity = 10;
  ModelVariant variant = ModelVariant::frist;
};

/// Least-squares patch restoration in the rotated frame:
///   u = (tau I + W^T W)^{-1} (tau v + W^T H_s(W v)).
/// The inverse is factored once per transform.
class PatchRestorer {
 public:
  PatchRestorer(const Matrix& w, double tau);

  /// Direct evaluation for sparsity s.
  Vector restore(const Vector& v, int s) const;

  struct Search {
    int sparsity = 0;
    Vector restored;  // rotated frame
  };
  /// Smallest s whose restoration satisfies ||v - u||^2 <= max_error (n if
  /// none does). The support grows one coefficient at a time.
  Search search(const Vector& v, double max_error) const;

  const Matrix& transform() const { return w_; }
  double tau() const { return tau_; }

 private:
  Matrix w_;
  double tau_;
  Matrix noisy_gain_;  // tau (tau I + W^T W)^{-1}
  Matrix code_gain_;   // (tau I + W^T W)^{-1} W^T
};

/// Phi^T (tau I + W^T W)^{-1} (tau v + W^T H_s(W v)) for a rotated patch v.
Vector patch_restore(const Matrix& w, const FROperator& op, const Vector& v, int s, double tau);

struct SparsitySearchResult {
  int sparsity = 0;
  Vector patch;  // original (unrotated) frame
};

/// Smallest s meeting ||v - Phi y||^2 <= n C^2 sigma^2.
SparsitySearchResult sparsity_search(const Matrix& w, const FROperator& op, const Vector& v,
                                     double tau, double sigma, double error_constant);

struct DenoisePassInfo {
  double sigma = 0.0;
  double mean_sparsity = 0.0;
  int active_operators = 0;
  std::vector<long> cluster_sizes;
};

/// One pass: clustering, sparsity update and transform update repeated
/// iters_per_pass times, then patch restoration, clipping and averaging.
Image denoise_pass(const Image& noisy, const DenoiseConfig& config, double sigma_pass,
                   DenoisePassInfo* info = nullptr, Exec exec = Exec::parallel);

/// Passes chained with sigma * sigma_decay^(pass - 1).
Image denoise(const Image& noisy, const DenoiseConfig& config,
              std::vector<DenoisePassInfo>* info = nullptr, Exec exec = Exec::parallel);

}  // namespace frist
