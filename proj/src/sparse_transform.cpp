#include "frist/sparse_transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/LU>
#include <Eigen/SVD>

namespace frist {

namespace {

template <typename Mat, typename Mag>
Mat global_threshold_impl(const Mat& m, long s, Mag magnitude) {
  const long total = m.size();
  if (s < 0 || s > total) throw ConfigError("global sparsity budget out of range");
  if (s == total) return m;
  Mat out = Mat::Zero(m.rows(), m.cols());
  if (s == 0) return out;
  std::vector<long> idx(total);
  std::iota(idx.begin(), idx.end(), 0L);
  const auto* data = m.data();  // column-major
  auto before = [&](long a, long b) {
    const double ma = magnitude(data[a]);
    const double mb = magnitude(data[b]);
    return ma > mb || (ma == mb && a < b);
  };
  std::nth_element(idx.begin(), idx.begin() + (s - 1), idx.end(), before);
  for (long i = 0; i < s; ++i) out.data()[idx[i]] = data[idx[i]];
  return out;
}

}  // namespace

std::vector<int> top_indices(const Vector& b, int s) {
  const int n = static_cast<int>(b.size());
  if (s < 0 || s > n) throw ConfigError("sparsity level out of range");
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  auto before = [&](int a, int c) {
    const double ma = std::abs(b[a]);
    const double mc = std::abs(b[c]);
    return ma > mc || (ma == mc && a < c);
  };
  std::partial_sort(idx.begin(), idx.begin() + s, idx.end(), before);
  idx.resize(s);
  return idx;
}

Vector project_sparse(const Vector& b, int s) {
  if (s == b.size()) return b;
  Vector out = Vector::Zero(b.size());
  for (int i : top_indices(b, s)) out[i] = b[i];
  return out;
}

Vector hard_threshold(const Vector& b, double tau) {
  if (tau < 0) throw ConfigError("threshold must be nonnegative");
  Vector out = b;
  for (Eigen::Index j = 0; j < b.size(); ++j)
    if (std::abs(b[j]) < tau) out[j] = 0.0;
  return out;
}

Matrix global_threshold(const Matrix& m, long s) {
  return global_threshold_impl(m, s, [](double v) { return std::abs(v); });
}

CMatrix global_threshold(const CMatrix& m, long s) {
  return global_threshold_impl(m, s, [](const Complex& v) { return std::norm(v); });
}

std::optional<double> regularizer(const Matrix& w) {
  if (w.rows() != w.cols()) throw ConfigError("regularizer needs a square transform");
  if (!w.allFinite()) return std::nullopt;
  Eigen::FullPivLU<Matrix> lu(w);
  if (!lu.isInvertible()) return std::nullopt;
  double log_abs_det = 0.0;
  const Matrix& packed = lu.matrixLU();
  for (Eigen::Index i = 0; i < packed.rows(); ++i) log_abs_det += std::log(std::abs(packed(i, i)));
  return -log_abs_det + w.squaredNorm();
}

double tail_energy(const Vector& coeffs, int s) {
  const int n = static_cast<int>(coeffs.size());
  if (s >= n) return 0.0;
  std::vector<double> sq(n);
  for (int i = 0; i < n; ++i) sq[i] = coeffs[i] * coeffs[i];
  // the n - s smallest squares are exactly the discarded energy
  std::nth_element(sq.begin(), sq.begin() + (n - s), sq.end());
  double e = 0.0;
  for (int i = 0; i < n - s; ++i) e += sq[i];
  return e;
}

double sparsification_error(const Matrix& w, const FROperator& op, const Vector& y, int s) {
  const Vector coeffs = w * apply(op, y);
  if (s < 0 || s > coeffs.size()) throw ConfigError("sparsity level out of range");
  return tail_energy(coeffs, s);
}

ObjectiveValue objective(const Matrix& w, const SparseCodeSet& codes, const Matrix& y,
                         const std::vector<FROperator>& ops, double lambda,
                         std::optional<int> sparsity) {
  if (codes.codes.cols() != y.cols() || static_cast<Eigen::Index>(codes.labels.size()) != y.cols())
    throw ConfigError("code/label/data column counts disagree");
  ObjectiveValue out;
  if (sparsity) {
    for (Eigen::Index i = 0; i < codes.codes.cols(); ++i) {
      if ((codes.codes.col(i).array() != 0.0).count() > *sparsity) {
        out.status = ObjectiveStatus::sparsity_barrier;
        out.value = std::numeric_limits<double>::infinity();
        return out;
      }
    }
  }
  const auto q = regularizer(w);
  if (!q) {
    out.status = ObjectiveStatus::singular_transform;
    out.value = std::numeric_limits<double>::infinity();
    return out;
  }
  std::vector<Matrix> children;
  children.reserve(ops.size());
  for (const auto& op : ops) children.push_back(child_transform(w, op));
  double fid = 0.0;
  for (Eigen::Index i = 0; i < y.cols(); ++i) {
    const int k = codes.labels[i];
    if (k < 0 || k >= static_cast<int>(ops.size())) throw ConfigError("label references no operator");
    fid += (children[k] * y.col(i) - codes.codes.col(i)).squaredNorm();
  }
  out.fidelity = fid;
  out.regularization = lambda * *q;
  out.value = fid + out.regularization;
  return out;
}

Matrix dct1_matrix(int size) {
  if (size < 1) throw ConfigError("DCT size must be >= 1");
  Matrix c(size, size);
  const double pi = std::acos(-1.0);
  for (int k = 0; k < size; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / size);
    for (int i = 0; i < size; ++i) c(k, i) = scale * std::cos(pi * (2 * i + 1) * k / (2.0 * size));
  }
  return c;
}

Matrix dct_matrix(int patch_side) {
  const Matrix c = dct1_matrix(patch_side);
  const int n = patch_side * patch_side;
  Matrix w(n, n);
  // row-major vec(C P C^T) = (C kron C) vec(P)
  for (int a = 0; a < patch_side; ++a)
    for (int b = 0; b < patch_side; ++b)
      for (int i = 0; i < patch_side; ++i)
        for (int j = 0; j < patch_side; ++j) w(a * patch_side + b, i * patch_side + j) = c(a, i) * c(b, j);
  return w;
}

double condition_number(const Matrix& w) {
  Eigen::JacobiSVD<Matrix> svd(w);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 1.0;
  const double smallest = sv[sv.size() - 1];
  if (smallest == 0.0) return std::numeric_limits<double>::infinity();
  return sv[0] / smallest;
}

}  // namespace frist
