#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "frist/fr_operators.hpp"
#include "frist/image.hpp"
#include "frist/kernels.hpp"
#include "frist/types.hpp"
#include "frist/variant.hpp"

namespace frist {

struct InpaintConfig {
  double sigma = 0.0;  // 0 = noiseless (exact constraints on measured pixels)
  double tau_base = 1.5;
  double gamma0 = 3.0;  // gamma = gamma0 / sigma
  int operators = 64;
  int patch_side = 8;
  int num_angles = 0;
  double lambda0 = 3.1e-3;
  int iters = 10;
  int passes = 3;
  int stride = 1;
  ModelVariant variant = ModelVariant::frist;
};

struct PenaltyCode {
  int label = 0;
  Vector code;
  double value = 0.0;
};

/// argmin_k ||b_k - T_tau(b_k)||^2 + tau^2 ||T_tau(b_k)||_0 with b_k = W Phi_k y.
PenaltyCode penalty_cluster(const Matrix& w, const std::vector<FROperator>& ops, const Vector& y,
                            double tau);

struct InpaintedPatch {
  Vector patch;
  bool ill_posed = false;  // rank-deficient W restricted to the missing set
};

/// Exact-constraint reconstruction: measured pixels are kept, the missing
/// ones solve min ||W Phi y - x||^2. `available` is per pixel of the patch.
InpaintedPatch inpaint_patch_noiseless(const Matrix& w, const FROperator& op, const Vector& measured,
                                       std::span<const std::uint8_t> available, const Vector& code);

/// Solves min ||W Phi y - x||^2 + gamma ||P y - z||^2 through the Woodbury
/// identity around (W^T W)^{-1}, or around (W^T W + gamma I)^{-1} when more
/// than half the pixels are measured.
class RobustInpainter {
 public:
  RobustInpainter(const Matrix& w, double gamma);

  Vector reconstruct(const FROperator& op, const Vector& measured,
                     std::span<const std::uint8_t> available, const Vector& code) const;

 private:
  Matrix w_;
  double gamma_;
  Matrix base_inverse_;     // (W^T W)^{-1}
  Matrix shifted_inverse_;  // (W^T W + gamma I)^{-1}
};

Vector inpaint_patch_robust(const Matrix& w, const FROperator& op, const Vector& measured,
                            std::span<const std::uint8_t> available, const Vector& code,
                            double gamma);

/// Inverse-distance-squared fill of the missing pixels from nearby available
/// ones; available pixels are copied.
Image interpolate_missing(const Image& image, const Mask& mask);

/// Exactly round(fraction * H * W) available pixels, chosen by seed.
Mask random_mask(int height, int width, double available_fraction, std::uint64_t seed);

/// Missing pixels set to zero.
Image apply_mask(const Image& image, const Mask& mask);

struct InpaintInfo {
  double tau = 0.0;
  double gamma = 0.0;
  long ill_posed_patches = 0;
  int active_operators = 0;
};

Image inpaint(const Image& corrupted, const Mask& mask, const InpaintConfig& config,
              InpaintInfo* info = nullptr, Exec exec = Exec::parallel);

}  // namespace frist
