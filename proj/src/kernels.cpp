#include "frist/kernels.hpp"

#include <algorithm>
#include <cmath>

#include <omp.h>

#include "frist/sparse_transform.hpp"

namespace frist {

namespace {

constexpr long kBlock = 256;

// W Phi_k applied to a column block. Permuting first keeps exact ties exact:
// identical rotated patches give bitwise identical coefficients.
void child_times(const Matrix& w, const FROperator& op, const Eigen::Ref<const Matrix>& yb,
                 Matrix& rotated, Matrix& z) {
  const long n = yb.rows();
  for (long c = 0; c < yb.cols(); ++c)
    op.perm.apply(std::span<const double>(yb.col(c).data(), n), std::span<double>(rotated.col(c).data(), n));
  z.noalias() = w * rotated;
}

void check_inputs(const Matrix& y, const Matrix& w, const std::vector<FROperator>& ops) {
  if (y.cols() == 0) throw ConfigError("no patches to code");
  if (ops.empty()) throw ConfigError("empty operator list");
  if (w.cols() != y.rows()) throw ConfigError("transform/patch dimension mismatch");
}

}  // namespace

void set_num_threads(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

int max_threads() { return omp_get_max_threads(); }

ClusterResult cluster_patches(const Matrix& y, const Matrix& w, const std::vector<FROperator>& ops,
                              std::span<const int> sparsity) {
  check_inputs(y, w, ops);
  const long count = y.cols();
  if (static_cast<long>(sparsity.size()) != count) throw ConfigError("one sparsity level per patch");
  const long n = w.rows();

  ClusterResult out;
  out.labels.assign(count, 0);
  out.errors = Vector::Zero(count);
  out.codes = Matrix::Zero(n, count);
  const long blocks = (count + kBlock - 1) / kBlock;

#pragma omp parallel for schedule(dynamic)
  for (long b = 0; b < blocks; ++b) {
    const long start = b * kBlock;
    const long width = std::min(kBlock, count - start);
    const auto yb = y.middleCols(start, width);
    Matrix best_coeffs(n, width);
    std::vector<double> best_err(width, 0.0);
    Matrix z(n, width), rotated(n, width);
    for (std::size_t k = 0; k < ops.size(); ++k) {
      child_times(w, ops[k], yb, rotated, z);
      for (long c = 0; c < width; ++c) {
        const double e = tail_energy(z.col(c), sparsity[start + c]);
        if (k == 0 || e < best_err[c]) {
          best_err[c] = e;
          best_coeffs.col(c) = z.col(c);
          out.labels[start + c] = static_cast<int>(k);
        }
      }
    }
    for (long c = 0; c < width; ++c) {
      out.errors[start + c] = best_err[c];
      out.codes.col(start + c) = project_sparse(best_coeffs.col(c), sparsity[start + c]);
    }
  }
  return out;
}

ClusterResult cluster_patches_reference(const Matrix& y, const Matrix& w,
                                        const std::vector<FROperator>& ops,
                                        std::span<const int> sparsity) {
  check_inputs(y, w, ops);
  const long count = y.cols();
  if (static_cast<long>(sparsity.size()) != count) throw ConfigError("one sparsity level per patch");
  ClusterResult out;
  out.labels.assign(count, 0);
  out.errors = Vector::Zero(count);
  out.codes = Matrix::Zero(w.rows(), count);
  for (long i = 0; i < count; ++i) {
    const Vector yi = y.col(i);
    double best = 0.0;
    for (std::size_t k = 0; k < ops.size(); ++k) {
      const double e = sparsification_error(w, ops[k], yi, sparsity[i]);
      if (k == 0 || e < best) {
        best = e;
        out.labels[i] = static_cast<int>(k);
      }
    }
    out.errors[i] = best;
    out.codes.col(i) = project_sparse(w * apply(ops[out.labels[i]], yi), sparsity[i]);
  }
  return out;
}

double penalty_value(const Vector& b, double tau) {
  const double t2 = tau * tau;
  double v = 0.0;
  for (Eigen::Index j = 0; j < b.size(); ++j) {
    const double a = std::abs(b[j]);
    v += a >= tau ? t2 : a * a;
  }
  return v;
}

PenaltyClusterResult penalty_cluster_patches(const Matrix& y, const Matrix& w,
                                             const std::vector<FROperator>& ops, double tau) {
  check_inputs(y, w, ops);
  if (!(tau > 0)) throw ConfigError("penalty threshold must be positive");
  const long count = y.cols();
  const long n = w.rows();

  PenaltyClusterResult out;
  out.labels.assign(count, 0);
  out.objectives = Vector::Zero(count);
  out.codes = Matrix::Zero(n, count);
  const long blocks = (count + kBlock - 1) / kBlock;

#pragma omp parallel for schedule(dynamic)
  for (long b = 0; b < blocks; ++b) {
    const long start = b * kBlock;
    const long width = std::min(kBlock, count - start);
    const auto yb = y.middleCols(start, width);
    Matrix best_coeffs(n, width);
    std::vector<double> best(width, 0.0);
    Matrix z(n, width), rotated(n, width);
    for (std::size_t k = 0; k < ops.size(); ++k) {
      child_times(w, ops[k], yb, rotated, z);
      for (long c = 0; c < width; ++c) {
        const double v = penalty_value(z.col(c), tau);
        if (k == 0 || v < best[c]) {
          best[c] = v;
          best_coeffs.col(c) = z.col(c);
          out.labels[start + c] = static_cast<int>(k);
        }
      }
    }
    for (long c = 0; c < width; ++c) {
      out.objectives[start + c] = best[c];
      out.codes.col(start + c) = hard_threshold(best_coeffs.col(c), tau);
    }
  }
  return out;
}

PenaltyClusterResult penalty_cluster_patches_reference(const Matrix& y, const Matrix& w,
                                                       const std::vector<FROperator>& ops,
                                                       double tau) {
  check_inputs(y, w, ops);
  if (!(tau > 0)) throw ConfigError("penalty threshold must be positive");
  const long count = y.cols();
  PenaltyClusterResult out;
  out.labels.assign(count, 0);
  out.objectives = Vector::Zero(count);
  out.codes = Matrix::Zero(w.rows(), count);
  for (long i = 0; i < count; ++i) {
    const Vector yi = y.col(i);
    double best = 0.0;
    Vector best_b;
    for (std::size_t k = 0; k < ops.size(); ++k) {
      const Vector b = w * apply(ops[k], yi);
      const Vector x = hard_threshold(b, tau);
      const double v = (b - x).squaredNorm() + tau * tau * static_cast<double>((x.array() != 0.0).count());
      if (k == 0 || v < best) {
        best = v;
        best_b = b;
        out.labels[i] = static_cast<int>(k);
      }
    }
    out.objectives[i] = best;
    out.codes.col(i) = hard_threshold(best_b, tau);
  }
  return out;
}

Matrix rotate_columns(const Matrix& y, const std::vector<FROperator>& ops,
                      const std::vector<int>& labels, Exec exec) {
  if (static_cast<long>(labels.size()) != y.cols()) throw ConfigError("one label per patch");
  Matrix out(y.rows(), y.cols());
  for_each_index(exec, y.cols(), [&](long i) {
    const auto& p = ops[labels[i]].perm;
    p.apply(std::span<const double>(y.col(i).data(), y.rows()),
            std::span<double>(out.col(i).data(), out.rows()));
  });
  return out;
}

std::vector<long> cluster_sizes(const std::vector<int>& labels, std::size_t num_ops) {
  std::vector<long> sizes(num_ops, 0);
  for (int l : labels) ++sizes.at(l);
  return sizes;
}

}  // namespace frist
