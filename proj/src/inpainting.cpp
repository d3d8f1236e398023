#include "frist/inpainting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "frist/learning.hpp"
#include "frist/log.hpp"
#include "frist/patches.hpp"
#include "frist/sparse_transform.hpp"
#include "frist/synthetic.hpp"

namespace frist {

namespace {

void check_patch(const Matrix& w, const Vector& measured, std::span<const std::uint8_t> available,
                 const Vector& code) {
  const auto n = w.cols();
  if (measured.size() != n || code.size() != w.rows() || static_cast<Eigen::Index>(available.size()) != n)
    throw ConfigError("patch, mask and code lengths must match the transform");
}

// Rotated-frame membership: rotated[mapping[j]] = available[j].
std::vector<std::uint8_t> rotate_mask(const FROperator& op, std::span<const std::uint8_t> available) {
  std::vector<std::uint8_t> out(available.size());
  op.perm.apply(available, std::span<std::uint8_t>(out));
  return out;
}

Vector masked(const Vector& v, std::span<const std::uint8_t> available) {
  Vector out = v;
  for (Eigen::Index j = 0; j < v.size(); ++j)
    if (!available[j]) out[j] = 0.0;
  return out;
}

Matrix symmetric_inverse(const Matrix& a) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) throw SingularTransformError();
  return llt.solve(Matrix::Identity(a.rows(), a.cols()));
}

}  // namespace

PenaltyCode penalty_cluster(const Matrix& w, const std::vector<FROperator>& ops, const Vector& y,
                            double tau) {
  if (ops.empty()) throw ConfigError("empty operator list");
  if (!(tau > 0)) throw ConfigError("penalty threshold must be positive");
  PenaltyCode best;
  Vector best_b;
  for (std::size_t k = 0; k < ops.size(); ++k) {
    const Vector b = w * apply(ops[k], y);
    const double v = penalty_value(b, tau);
    if (k == 0 || v < best.value) {
      best.value = v;
      best.label = static_cast<int>(k);
      best_b = b;
    }
  }
  best.code = hard_threshold(best_b, tau);
  return best;
}

InpaintedPatch inpaint_patch_noiseless(const Matrix& w, const FROperator& op, const Vector& measured,
                                       std::span<const std::uint8_t> available, const Vector& code) {
  check_patch(w, measured, available, code);
  const Vector z = masked(measured, available);
  const auto rot_avail = rotate_mask(op, available);
  std::vector<int> missing;
  for (std::size_t j = 0; j < rot_avail.size(); ++j)
    if (!rot_avail[j]) missing.push_back(static_cast<int>(j));

  InpaintedPatch out;
  out.patch = z;
  if (missing.empty()) return out;

  const Vector rotated = apply(op, z);
  const Vector rhs = code - w * rotated;
  Matrix w_missing(w.rows(), static_cast<Eigen::Index>(missing.size()));
  for (std::size_t j = 0; j < missing.size(); ++j) w_missing.col(j) = w.col(missing[j]);
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(w_missing);
  out.ill_posed = cod.rank() < static_cast<Eigen::Index>(missing.size());
  const Vector xi_missing = cod.solve(rhs);

  Vector xi = Vector::Zero(w.cols());
  for (std::size_t j = 0; j < missing.size(); ++j) xi[missing[j]] = xi_missing[j];
  const Vector correction = apply_transpose(op, xi);
  // measured pixels receive an exact zero correction
  for (Eigen::Index j = 0; j < z.size(); ++j)
    if (!available[j]) out.patch[j] = correction[j];
  return out;
}

RobustInpainter::RobustInpainter(const Matrix& w, double gamma) : w_(w), gamma_(gamma) {
  if (!(gamma > 0)) throw ConfigError("gamma must be positive");
  const Matrix gram = w.transpose() * w;
  base_inverse_ = symmetric_inverse(gram);
  Matrix shifted = gram;
  shifted.diagonal().array() += gamma;
  shifted_inverse_ = symmetric_inverse(shifted);
}

Vector RobustInpainter::reconstruct(const FROperator& op, const Vector& measured,
                                    std::span<const std::uint8_t> available, const Vector& code) const {
  check_patch(w_, measured, available, code);
  const Eigen::Index n = w_.cols();
  const auto rot_avail = rotate_mask(op, available);
  const Vector z_rot = apply(op, masked(measured, available));
  const Vector rhs = w_.transpose() * code + gamma_ * z_rot;  // z_rot is zero off the support

  std::vector<int> measured_idx, missing_idx;
  for (Eigen::Index j = 0; j < n; ++j) (rot_avail[j] ? measured_idx : missing_idx).push_back(static_cast<int>(j));
  const auto q = static_cast<Eigen::Index>(measured_idx.size());

  Vector u;
  if (2 * q <= n) {
    // (A + gamma P)^{-1} with A^{-1} = B: B - B_U^T (I/gamma + B_UU)^{-1} B_U
    u = base_inverse_ * rhs;
    if (q > 0) {
      Matrix rows(q, n);
      Matrix core(q, q);
      for (Eigen::Index a = 0; a < q; ++a) {
        rows.row(a) = base_inverse_.row(measured_idx[a]);
        for (Eigen::Index b = 0; b < q; ++b) core(a, b) = base_inverse_(measured_idx[a], measured_idx[b]);
      }
      core.diagonal().array() += 1.0 / gamma_;
      const Vector t = core.llt().solve(rows * rhs);
      u -= rows.transpose() * t;
    }
  } else {
    // (A + gamma I - gamma (I - P))^{-1} with (A + gamma I)^{-1} = B':
    // B' + B'_M^T (I/gamma - B'_MM)^{-1} B'_M over the missing set M
    u = shifted_inverse_ * rhs;
    const auto m = static_cast<Eigen::Index>(missing_idx.size());
    if (m > 0) {
      Matrix rows(m, n);
      Matrix core(m, m);
      for (Eigen::Index a = 0; a < m; ++a) {
        rows.row(a) = shifted_inverse_.row(missing_idx[a]);
        for (Eigen::Index b = 0; b < m; ++b) core(a, b) = -shifted_inverse_(missing_idx[a], missing_idx[b]);
      }
      core.diagonal().array() += 1.0 / gamma_;
      const Vector t = core.llt().solve(rows * rhs);
      u += rows.transpose() * t;
    }
  }
  return apply_transpose(op, u);
}

Vector inpaint_patch_robust(const Matrix& w, const FROperator& op, const Vector& measured,
                            std::span<const std::uint8_t> available, const Vector& code,
                            double gamma) {
  return RobustInpainter(w, gamma).reconstruct(op, measured, available, code);
}

Image interpolate_missing(const Image& image, const Mask& mask) {
  if (!image.same_shape(mask)) throw ConfigError("mask and image dimensions differ");
  long available = 0;
  for (auto m : mask.pixels) available += m != 0;
  if (available == 0) throw ConfigError("mask has no available pixels");
  Image out = image;
  const int h = image.height;
  const int w = image.width;
  const int max_radius = std::max(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (mask.at(r, c)) continue;
      double acc = 0.0, weight = 0.0;
      int found = 0;
      for (int radius = 2; found < 4 && radius <= 2 * max_radius; radius *= 2) {
        acc = weight = 0.0;
        found = 0;
        for (int rr = std::max(0, r - radius); rr <= std::min(h - 1, r + radius); ++rr) {
          for (int cc = std::max(0, c - radius); cc <= std::min(w - 1, c + radius); ++cc) {
            if (!mask.at(rr, cc)) continue;
            const double d2 = static_cast<double>((rr - r) * (rr - r) + (cc - c) * (cc - c));
            acc += image.at(rr, cc) / d2;
            weight += 1.0 / d2;
            ++found;
          }
        }
      }
      out.at(r, c) = acc / weight;
    }
  }
  return out;
}

Mask random_mask(int height, int width, double available_fraction, std::uint64_t seed) {
  if (!(available_fraction >= 0.0 && available_fraction <= 1.0))
    throw ConfigError("available fraction must lie in [0, 1]");
  const std::size_t total = static_cast<std::size_t>(height) * width;
  const auto keep = static_cast<std::size_t>(std::llround(available_fraction * static_cast<double>(total)));
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = total; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  Mask m(height, width, 0);
  for (std::size_t i = 0; i < keep; ++i) m.pixels[order[i]] = 1;
  return m;
}

Image apply_mask(const Image& image, const Mask& mask) {
  if (!image.same_shape(mask)) throw ConfigError("mask and image dimensions differ");
  Image out = image;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!mask.pixels[i]) out.pixels[i] = 0.0;
  return out;
}

Image inpaint(const Image& corrupted, const Mask& mask, const InpaintConfig& config, InpaintInfo* info,
              Exec exec) {
  if (!corrupted.same_shape(mask)) throw ConfigError("mask and image dimensions differ");
  if (!(config.tau_base > 0)) throw ConfigError("tau_base must be positive");
  if (config.sigma < 0) throw ConfigError("sigma must be nonnegative");
  if (config.sigma > 0 && !(config.gamma0 > 0)) throw ConfigError("gamma0 must be positive");
  if (config.passes < 1 || config.iters < 0) throw ConfigError("passes must be >= 1");
  if (config.operators < 1) throw ConfigError("operator count must be >= 1");

  const int side = config.patch_side;
  const int n = side * side;
  const int num_angles = config.num_angles > 0 ? config.num_angles : default_num_angles(side);
  long missing = 0;
  for (auto m : mask.pixels) missing += m == 0;
  if (missing == 0) return corrupted;

  const Image measured = apply_mask(corrupted, mask);
  const double tau = config.tau_base * static_cast<double>(missing) / static_cast<double>(mask.size());
  const bool noiseless = config.sigma == 0.0;
  const double gamma = noiseless ? 0.0 : config.gamma0 / config.sigma;

  Image mask_image(mask.height, mask.width);
  for (std::size_t i = 0; i < mask.size(); ++i) mask_image.pixels[i] = mask.pixels[i] ? 1.0 : 0.0;
  const PatchSet measured_patches = extract(measured, side, config.stride, false);
  const PatchSet mask_patches = extract(mask_image, side, config.stride, false);
  const long count = measured_patches.count();
  std::vector<std::uint8_t> avail(static_cast<std::size_t>(n) * count);
  for (long i = 0; i < count; ++i)
    for (int j = 0; j < n; ++j) avail[static_cast<std::size_t>(i) * n + j] = mask_patches.data(j, i) != 0.0;

  std::vector<FROperator> ops;
  int target = 1;
  if (config.variant == ModelVariant::frist) {
    ops = enumerate_candidates(side, num_angles);
    target = std::min<int>(config.operators, static_cast<int>(ops.size()));
  } else {
    ops.push_back(make_operator(0, false, num_angles, side));
  }
  Matrix w = dct_matrix(side);
  Image current = interpolate_missing(measured, mask);
  long ill_posed = 0;
  auto cluster = [&](const Matrix& y) {
    return exec == Exec::parallel ? penalty_cluster_patches(y, w, ops, tau)
                                  : penalty_cluster_patches_reference(y, w, ops, tau);
  };

  for (int pass = 0; pass < config.passes; ++pass) {
    PatchSet patches = extract(current, side, config.stride, false);
    const double lambda = scaled_lambda(config.lambda0, patches.data);
    for (int it = 0; it < config.iters; ++it) {
      const auto coded = cluster(patches.data);
      if (config.variant != ModelVariant::dct)
        w = transform_update(rotate_columns(patches.data, ops, coded.labels, exec), coded.codes, lambda);
      if (static_cast<int>(ops.size()) > target) {
        const auto kept = eliminate_clusters(cluster_sizes(coded.labels, ops.size()), target);
        std::vector<FROperator> next;
        for (int k : kept) next.push_back(ops[k]);
        ops = std::move(next);
      }
    }
    const auto coded = cluster(patches.data);
    std::vector<char> flags(count, 0);
    if (noiseless) {
      for_each_index(exec, count, [&](long i) {
        const std::span<const std::uint8_t> a(avail.data() + static_cast<std::size_t>(i) * n, n);
        auto r = inpaint_patch_noiseless(w, ops[coded.labels[i]], measured_patches.data.col(i), a,
                                         coded.codes.col(i));
        flags[i] = r.ill_posed;
        patches.data.col(i) = r.patch;
      });
    } else {
      const RobustInpainter solver(w, gamma);
      for_each_index(exec, count, [&](long i) {
        const std::span<const std::uint8_t> a(avail.data() + static_cast<std::size_t>(i) * n, n);
        patches.data.col(i) =
            solver.reconstruct(ops[coded.labels[i]], measured_patches.data.col(i), a, coded.codes.col(i));
      });
    }
    ill_posed = std::accumulate(flags.begin(), flags.end(), 0L);
    for_each_index(exec, count, [&](long i) { clamp_intensity_inplace(patches.data.col(i)); });
    current = aggregate(patches).image;
    if (noiseless) {
      for (std::size_t p = 0; p < current.size(); ++p)
        if (mask.pixels[p]) current.pixels[p] = measured.pixels[p];
    }
    log_debug("inpaint pass " + std::to_string(pass + 1) + " done");
  }
  if (ill_posed > 0) log_warn(std::to_string(ill_posed) + " patches had a rank-deficient missing-pixel system");

  if (info) {
    info->tau = tau;
    info->gamma = gamma;
    info->ill_posed_patches = ill_posed;
    info->active_operators = static_cast<int>(ops.size());
  }
  return current;
}

}  // namespace frist
