#include "frist/learning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "frist/kernels.hpp"
#include "frist/log.hpp"

namespace frist {

namespace {

// Flip singular-vector pairs so the largest-magnitude entry of each left
// vector is positive. W-hat is unchanged; traces become reproducible.
void fix_svd_signs(Matrix& left, Matrix& right) {
  for (Eigen::Index j = 0; j < left.cols(); ++j) {
    Eigen::Index arg = 0;
    left.col(j).cwiseAbs().maxCoeff(&arg);
    if (left(arg, j) < 0) {
      left.col(j) *= -1.0;
      right.col(j) *= -1.0;
    }
  }
}

void fix_row_signs(Matrix& rows) {
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    Eigen::Index arg = 0;
    rows.row(i).cwiseAbs().maxCoeff(&arg);
    if (rows(i, arg) < 0) rows.row(i) *= -1.0;
  }
}

}  // namespace

InitKind parse_init(const std::string& name) {
  if (name == "dct") return InitKind::dct;
  if (name == "klt") return InitKind::klt;
  if (name == "identity") return InitKind::identity;
  if (name == "random" || name == "random_gaussian") return InitKind::random_gaussian;
  throw ConfigError("unknown initialization '" + name + "'");
}

std::string to_string(InitKind kind) {
  switch (kind) {
    case InitKind::dct: return "dct";
    case InitKind::klt: return "klt";
    case InitKind::identity: return "identity";
    case InitKind::random_gaussian: return "random";
  }
  return "?";
}

SparseCodeSet sparse_code_and_cluster(const Matrix& y, const Matrix& w,
                                      const std::vector<FROperator>& ops, int sparsity) {
  if (sparsity < 0 || sparsity > y.rows()) throw ConfigError("sparsity level out of range");
  const std::vector<int> levels(y.cols(), sparsity);
  auto r = cluster_patches(y, w, ops, levels);
  return SparseCodeSet{std::move(r.codes), std::move(r.labels)};
}

Matrix transform_update(const Matrix& rotated, const Matrix& codes, double lambda) {
  if (!(lambda > 0)) throw ConfigError("lambda must be positive");
  if (rotated.rows() != codes.rows() || rotated.cols() != codes.cols())
    throw ConfigError("patch and code matrices differ in shape");
  const Eigen::Index n = rotated.rows();

  Matrix gram = Matrix::Identity(n, n) * lambda;
  gram.selfadjointView<Eigen::Lower>().rankUpdate(rotated);
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) throw NumericalError("Cholesky factorization failed");
  const Matrix lower = llt.matrixL();

  // L^{-1} Yr X^T = S Sigma V^T
  Matrix cross = rotated * codes.transpose();
  lower.triangularView<Eigen::Lower>().solveInPlace(cross);
  Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix left = svd.matrixU();
  Matrix right = svd.matrixV();
  fix_svd_signs(left, right);
  const Vector sigma = svd.singularValues();
  const Vector diag = 0.5 * (sigma.array() + (sigma.array().square() + 2.0 * lambda).sqrt());

  // S^T L^{-1} = (L^{-T} S)^T
  Matrix st_linv = left;
  lower.transpose().triangularView<Eigen::Upper>().solveInPlace(st_linv);
  return right * diag.asDiagonal() * st_linv.transpose();
}

std::vector<int> eliminate_clusters(const std::vector<long>& cluster_sizes, int target) {
  const int len = static_cast<int>(cluster_sizes.size());
  if (target < 1) throw ConfigError("operator target must be >= 1");
  std::vector<int> order(len);
  std::iota(order.begin(), order.end(), 0);
  if (len <= target) return order;
  const int remove = std::min(len / 2, len - target);
  // smallest clusters first; among equal sizes the higher index goes first
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (cluster_sizes[a] != cluster_sizes[b]) return cluster_sizes[a] < cluster_sizes[b];
    return a > b;
  });
  std::vector<int> kept(order.begin() + remove, order.end());
  std::sort(kept.begin(), kept.end());
  return kept;
}

Matrix initial_transform(const Matrix& y, int patch_side, InitKind kind, std::uint64_t seed,
                         double stddev) {
  const int n = patch_side * patch_side;
  switch (kind) {
    case InitKind::dct:
      return dct_matrix(patch_side);
    case InitKind::identity:
      return Matrix::Identity(n, n);
    case InitKind::random_gaussian: {
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> dist(0.0, stddev);
      Matrix w(n, n);
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) w(i, j) = dist(rng);
      return w;
    }
    case InitKind::klt: {
      if (y.rows() != n) throw ConfigError("training data dimension does not match patch size");
      const Vector mean = y.rowwise().mean();
      const Matrix centered = y.colwise() - mean;
      const Matrix cov = centered * centered.transpose() / std::max<Eigen::Index>(1, y.cols());
      Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
      // eigenvalues ascending; rows of the KLT in descending order
      Matrix w = eig.eigenvectors().rowwise().reverse().transpose();
      fix_row_signs(w);
      return w;
    }
  }
  throw ConfigError("unknown initialization");
}

LearnResult learn(const Matrix& y, const LearnConfig& config) {
  const int side = config.patch_side;
  const int n = side * side;
  if (y.rows() != n) throw ConfigError("training data rows must equal patch_side^2");
  if (y.cols() == 0) throw ConfigError("no training data");
  if (y.squaredNorm() == 0.0) throw ConfigError("training data has zero energy");
  if (config.max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (config.sparsity < 0 || config.sparsity > n) throw ConfigError("sparsity out of range");
  if (!(config.lambda0 > 0)) throw ConfigError("lambda0 must be positive");
  const int num_angles = config.num_angles > 0 ? config.num_angles : default_num_angles(side);
  if (y.cols() < n)
    log_warn("training set has fewer patches (" + std::to_string(y.cols()) +
             ") than the signal dimension (" + std::to_string(n) + ")");

  std::vector<FROperator> ops;
  int target = config.target_operators;
  if (config.identity_only) {
    ops.push_back(make_operator(0, false, num_angles, side));
    target = 1;
  } else {
    ops = enumerate_candidates(side, num_angles);
    if (target < 1 || target > static_cast<int>(ops.size()))
      throw ConfigError("operator target must lie in [1, 2 * num_angles]");
  }

  const double lambda = scaled_lambda(config.lambda0, y);
  Matrix w = initial_transform(y, side, config.init, config.seed, config.init_stddev);

  LearnResult result;
  auto& trace = result.trace;
  int small_steps = 0;
  double previous = 0.0;
  bool codes_stale = false;
  for (int it = 1; it <= config.max_iters; ++it) {
    SparseCodeSet codes = sparse_code_and_cluster(y, w, ops, config.sparsity);
    const Matrix rotated = rotate_columns(y, ops, codes.labels);
    w = transform_update(rotated, codes.codes, lambda);

    const ObjectiveValue f = objective(w, codes, y, ops, lambda, config.sparsity);
    if (!f.finite()) throw NumericalError("objective diverged at iteration " + std::to_string(it));

    IterationRecord rec;
    rec.iteration = it;
    rec.objective = f.value;
    rec.sparsification_error = f.fidelity;
    rec.condition_number = condition_number(w);
    rec.active_operators = static_cast<int>(ops.size());
    rec.cluster_sizes = cluster_sizes(codes.labels, ops.size());
    log_debug("iter " + std::to_string(it) + " objective " + std::to_string(f.value) +
              " operators " + std::to_string(ops.size()));

    const bool was_final = static_cast<int>(ops.size()) <= target;
    const auto sizes = rec.cluster_sizes;
    trace.iterations.push_back(std::move(rec));
    result.codes = std::move(codes);
    codes_stale = false;

    if (!was_final) {
      const auto kept = eliminate_clusters(sizes, target);
      std::vector<FROperator> next;
      next.reserve(kept.size());
      for (int k : kept) next.push_back(ops[k]);
      ops = std::move(next);
      if (static_cast<int>(ops.size()) <= target) trace.fixed_operators_from = it + 1;
      codes_stale = true;
    } else if (config.tol_objective > 0 && it > 1) {
      const double rel = (previous - f.value) / std::max(std::abs(previous), 1e-300);
      small_steps = rel < config.tol_objective ? small_steps + 1 : 0;
      if (small_steps >= 3) {
        trace.early_stopped = true;
        previous = f.value;
        break;
      }
    }
    previous = f.value;
  }

  // the last round eliminated operators the stored labels may refer to
  if (codes_stale) result.codes = sparse_code_and_cluster(y, w, ops, config.sparsity);

  result.model.parent = std::move(w);
  result.model.operators = std::move(ops);
  result.model.lambda0 = config.lambda0;
  result.model.sparsity = config.sparsity;
  result.model.patch_side = side;
  result.model.num_angles = num_angles;
  return result;
}

Vector reconstruct_patch(const FristModel& model, const Vector& code, int label) {
  if (label < 0 || label >= static_cast<int>(model.operators.size()))
    throw ConfigError("label references no operator");
  Eigen::FullPivLU<Matrix> lu(model.parent);
  if (!lu.isInvertible()) throw SingularTransformError();
  return apply_transpose(model.operators[label], Vector(lu.solve(code)));
}

Matrix reconstruct_patches(const FristModel& model, const SparseCodeSet& codes) {
  Eigen::FullPivLU<Matrix> lu(model.parent);
  if (!lu.isInvertible()) throw SingularTransformError();
  const Matrix rotated = lu.solve(codes.codes);
  Matrix out(rotated.rows(), rotated.cols());
  for_each_index(Exec::parallel, rotated.cols(), [&](long i) {
    model.operators.at(codes.labels[i]).perm.apply_transpose(
        std::span<const double>(rotated.col(i).data(), rotated.rows()),
        std::span<double>(out.col(i).data(), out.rows()));
  });
  return out;
}

}  // namespace frist
