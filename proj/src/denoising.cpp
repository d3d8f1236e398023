#include "frist/denoising.hpp"

#include <cmath>

#include <Eigen/Cholesky>

#include "frist/learning.hpp"
#include "frist/log.hpp"
#include "frist/patches.hpp"
#include "frist/sparse_transform.hpp"

namespace frist {

PatchRestorer::PatchRestorer(const Matrix& w, double tau) : w_(w), tau_(tau) {
  if (!(tau > 0)) throw ConfigError("fidelity weight must be positive");
  const Eigen::Index n = w.cols();
  Matrix normal = w.transpose() * w;
  normal.diagonal().array() += tau;
  Eigen::LLT<Matrix> llt(normal);
  if (llt.info() != Eigen::Success) throw NumericalError("restoration system is not positive definite");
  noisy_gain_ = llt.solve(Matrix::Identity(n, n)) * tau;
  code_gain_ = llt.solve(Matrix(w.transpose()));
}

Vector PatchRestorer::restore(const Vector& v, int s) const {
  const Vector code = project_sparse(w_ * v, s);
  return noisy_gain_ * v + code_gain_ * code;
}

PatchRestorer::Search PatchRestorer::search(const Vector& v, double max_error) const {
  const int n = static_cast<int>(v.size());
  const Vector coeffs = w_ * v;
  const auto order = top_indices(coeffs, n);
  Search out;
  out.restored = noisy_gain_ * v;
  for (int s = 0; s < n; ++s) {
    if ((v - out.restored).squaredNorm() <= max_error) {
      out.sparsity = s;
      return out;
    }
    const int j = order[s];
    out.restored += coeffs[j] * code_gain_.col(j);
  }
  out.sparsity = n;
  return out;
}

Vector patch_restore(const Matrix& w, const FROperator& op, const Vector& v, int s, double tau) {
  const PatchRestorer r(w, tau);
  return apply_transpose(op, r.restore(v, s));
}

SparsitySearchResult sparsity_search(const Matrix& w, const FROperator& op, const Vector& v,
                                     double tau, double sigma, double error_constant) {
  if (!(sigma > 0) || !(error_constant > 0)) throw ConfigError("sigma and C must be positive");
  const PatchRestorer r(w, tau);
  const double bound = static_cast<double>(v.size()) * error_constant * error_constant * sigma * sigma;
  auto found = r.search(v, bound);
  return {found.sparsity, apply_transpose(op, found.restored)};
}

namespace {

void validate(const DenoiseConfig& c) {
  if (!(c.sigma > 0)) throw ConfigError("sigma must be positive");
  if (!(c.error_constant > 0)) throw ConfigError("C must be positive");
  if (!(c.tau0 > 0)) throw ConfigError("tau0 must be positive");
  if (!(c.lambda0 > 0)) throw ConfigError("lambda0 must be positive");
  if (c.passes < 1 || c.iters_per_pass < 0) throw ConfigError("passes must be >= 1");
  if (c.operators < 1) throw ConfigError("operator count must be >= 1");
  const int n = c.patch_side * c.patch_side;
  if (c.initial_sparsity < 0 || c.initial_sparsity > n) throw ConfigError("initial sparsity out of range");
}

struct RestoreStep {
  std::vector<int> labels;
  std::vector<int> sparsity;
  Matrix rotated_noisy;
  Matrix estimates;  // original frame
};

RestoreStep cluster_and_restore(const Matrix& noisy, const Matrix& estimates, const Matrix& w,
                                const std::vector<FROperator>& ops, const std::vector<int>& levels,
                                double tau, double bound, Exec exec) {
  RestoreStep step;
  auto cl = exec == Exec::parallel ? cluster_patches(estimates, w, ops, levels)
                                   : cluster_patches_reference(estimates, w, ops, levels);
  step.labels = std::move(cl.labels);
  step.rotated_noisy = rotate_columns(noisy, ops, step.labels, exec);
  step.sparsity.assign(noisy.cols(), 0);
  step.estimates.resize(noisy.rows(), noisy.cols());
  const PatchRestorer restorer(w, tau);
  for_each_index(exec, noisy.cols(), [&](long i) {
    const auto found = restorer.search(step.rotated_noisy.col(i), bound);
    step.sparsity[i] = found.sparsity;
    ops[step.labels[i]].perm.apply_transpose(
        std::span<const double>(found.restored.data(), found.restored.size()),
        std::span<double>(step.estimates.col(i).data(), step.estimates.rows()));
  });
  return step;
}

}  // namespace

Image denoise_pass(const Image& noisy, const DenoiseConfig& config, double sigma_pass,
                   DenoisePassInfo* info, Exec exec) {
  validate(config);
  if (!(sigma_pass > 0)) throw ConfigError("pass sigma must be positive");
  const int side = config.patch_side;
  const int n = side * side;
  const int num_angles = config.num_angles > 0 ? config.num_angles : default_num_angles(side);

  PatchSet patches = extract(noisy, side, config.stride, false);
  const Matrix noisy_patches = patches.data;
  const long count = patches.count();

  std::vector<FROperator> ops;
  int target = 1;
  if (config.variant == ModelVariant::frist) {
    ops = enumerate_candidates(side, num_angles);
    target = std::min<int>(config.operators, static_cast<int>(ops.size()));
  } else {
    ops.push_back(make_operator(0, false, num_angles, side));
  }

  Matrix w = dct_matrix(side);
  const double tau = config.tau0 / sigma_pass;
  const double bound = n * config.error_constant * config.error_constant * sigma_pass * sigma_pass;
  const double lambda = scaled_lambda(config.lambda0, noisy_patches);
  std::vector<int> levels(count, config.initial_sparsity);
  Matrix estimates = noisy_patches;

  for (int it = 0; it < config.iters_per_pass; ++it) {
    RestoreStep step = cluster_and_restore(noisy_patches, estimates, w, ops, levels, tau, bound, exec);
    levels = step.sparsity;
    estimates = std::move(step.estimates);
    if (config.variant != ModelVariant::dct) {
      const Matrix rotated = rotate_columns(estimates, ops, step.labels, exec);
      Matrix codes(n, count);
      for_each_index(exec, count, [&](long i) {
        codes.col(i) = project_sparse(w * step.rotated_noisy.col(i), levels[i]);
      });
      w = transform_update(rotated, codes, lambda);
    }
    if (static_cast<int>(ops.size()) > target) {
      const auto kept = eliminate_clusters(cluster_sizes(step.labels, ops.size()), target);
      std::vector<FROperator> next;
      for (int k : kept) next.push_back(ops[k]);
      ops = std::move(next);
    }
  }

  RestoreStep last = cluster_and_restore(noisy_patches, estimates, w, ops, levels, tau, bound, exec);
  patches.data = std::move(last.estimates);
  for_each_index(exec, count, [&](long i) { clamp_intensity_inplace(patches.data.col(i)); });

  if (info) {
    info->sigma = sigma_pass;
    double acc = 0.0;
    for (int s : last.sparsity) acc += s;
    info->mean_sparsity = acc / static_cast<double>(count);
    info->active_operators = static_cast<int>(ops.size());
    info->cluster_sizes = cluster_sizes(last.labels, ops.size());
  }
  return clamp_intensity(aggregate(patches).image);
}

Image denoise(const Image& noisy, const DenoiseConfig& config, std::vector<DenoisePassInfo>* info,
              Exec exec) {
  validate(config);
  Image current = noisy;
  double sigma = config.sigma;
  for (int pass = 1; pass <= config.passes; ++pass) {
    DenoisePassInfo pass_info;
    current = denoise_pass(current, config, sigma, &pass_info, exec);
    log_debug("denoise pass " + std::to_string(pass) + " sigma " + std::to_string(sigma) +
              " mean sparsity " + std::to_string(pass_info.mean_sparsity));
    if (info) info->push_back(std::move(pass_info));
    sigma *= config.sigma_decay;
  }
  return current;
}

}  // namespace frist
