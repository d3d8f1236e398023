#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "frist/fr_operators.hpp"
#include "frist/image.hpp"
#include "frist/kernels.hpp"
#include "frist/types.hpp"

namespace frist {

/// Undersampled k-space: z[m] is the sample at row-major frequency index
/// samples[m] (unique, ascending).
struct KSpaceData {
  int height = 0;
  int width = 0;
  std::vector<long> samples;
  CVector z;

  long size() const { return static_cast<long>(samples.size()); }
  long pixels() const { return static_cast<long>(height) * width; }
};

/// Samples of the unitary spectrum of `image` at the given indices.
KSpaceData sample_kspace(const ComplexImage& image, std::vector<long> samples);
/// Full H x W spectrum with unsampled entries zero, and the matching mask.
ComplexImage to_full_kspace(const KSpaceData& data);
Mask sample_mask(const KSpaceData& data);
/// Inverse of to_full_kspace/sample_mask.
KSpaceData from_full_kspace(const ComplexImage& full, const Mask& mask);

/// Unitary 2D DFT (both directions scaled by 1/sqrt(H W)).
ComplexImage dft2(const ComplexImage& image);
ComplexImage idft2(const ComplexImage& spectrum);

/// Inverse DFT with unsampled frequencies set to zero.
ComplexImage zero_filled(const KSpaceData& data);

enum class MaskScheme { cartesian, random2d };
MaskScheme parse_mask_scheme(const std::string& name);

/// Variable-density sampling pattern with P(select) proportional to
/// (1 + d)^-2, d the normalized distance of a frequency (or row) from DC.
/// DC is always sampled.
std::vector<long> make_mask(int height, int width, MaskScheme scheme, double acceleration,
                            std::uint64_t seed);

struct MriConfig {
  int operators = 16;  // K
  int patch_side = 6;
  int num_angles = 0;  // 0 = 4 * patch_side
  double s_fraction = 0.05;
  double mu = 0.0;             // <= 0 selects default_mu
  double energy_bound = 0.0;   // L; <= 0 selects default_energy_bound
  int iters = 30;
  int rampup_iters = 0;        // <= 0 selects ceil(iters / 3)
  bool identity_only = false;  // single unitary transform, no flips/rotations
};

/// Fidelity weight 1e6 / (H W). Both terms of the objective scale with the
/// squared signal level, so the weight itself is scale free.
double default_mu(const KSpaceData& data);
/// 1.05 ||F_u^H z|| sqrt(P / M).
double default_energy_bound(const KSpaceData& data);

/// For each operator k the matrix [W Phi_k p_i]_i is thresholded globally to
/// s entries; patch i goes to argmin_k of its residual energy (lowest k on
/// ties). `residuals`, when given, receives the K x N matrix SE_k^i.
std::vector<int> approximate_cluster(const CMatrix& w, const std::vector<FROperator>& ops,
                                     const CMatrix& patches, long s, Matrix* residuals = nullptr,
                                     Exec exec = Exec::parallel);

/// Columns rotated by their assigned operators.
CMatrix rotate_columns(const CMatrix& patches, const std::vector<FROperator>& ops,
                       const std::vector<int>& labels);

/// Global s-term threshold of [W Phi_{l_i} p_i]_i.
CMatrix mri_sparse_code(const CMatrix& w, const std::vector<FROperator>& ops,
                        const std::vector<int>& labels, const CMatrix& patches, long s);

/// argmin over unitary W of ||W A - X||_F: V S^H from A X^H = S Sigma V^H.
CMatrix unitary_update(const CMatrix& rotated, const CMatrix& codes);

/// Sum_i R_i^T Phi_{l_i}^T W^H x_i over the wrap-around stride-1 grid.
ComplexImage back_project(const CMatrix& codes, const std::vector<int>& labels, const CMatrix& w,
                          const std::vector<FROperator>& ops, int patch_side, int height, int width);

struct ImageUpdateResult {
  ComplexImage image;
  double rho = 0.0;          // multiplier of the energy bound; 0 when inactive
  bool constrained = false;
  int newton_iters = 0;
  bool bisection = false;    // Newton failed to converge
};

/// Minimizes sum_i ||W Phi_{l_i} R_i y - x_i||^2 + mu ||F_u y - z||^2 subject
/// to ||y|| <= L. Patches are the wrap-around stride-1 set (sum R_i^T R_i = nI),
/// so the normal equation is diagonal in the Fourier domain.
ImageUpdateResult image_update(const CMatrix& codes, const std::vector<int>& labels, const CMatrix& w,
                               const std::vector<FROperator>& ops, int patch_side,
                               const KSpaceData& data, double mu, double energy_bound);

struct MriIteration {
  int iteration = 0;
  long sparsity = 0;
  double objective = 0.0;
  double unitarity_error = 0.0;  // ||W^H W - I||_F after the transform update
  double rho = 0.0;
  double image_norm = 0.0;
  int active_operators = 0;
};

struct MriResult {
  ComplexImage image;
  CMatrix transform;
  std::vector<FROperator> operators;
  std::vector<MriIteration> trace;
  double mu = 0.0;
  double energy_bound = 0.0;
};

/// State after the image update of one iteration. References are valid only
/// during the callback.
struct MriIterate {
  int iteration;
  long sparsity;
  const CMatrix& codes;
  const std::vector<int>& labels;
  const CMatrix& transform;
  const std::vector<FROperator>& operators;
  const ImageUpdateResult& update;
};
using MriObserver = std::function<void(const MriIterate&)>;

MriResult reconstruct(const KSpaceData& data, const MriConfig& config, Exec exec = Exec::parallel,
                      const MriObserver& observer = {});

/// ||W^H W - I||_F
double unitarity_error(const CMatrix& w);

}  // namespace frist
