#include "frist/fr_operators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace frist {

namespace {

constexpr double kDistanceTolerance = 1e-12;

template <typename Vec>
Vec permute(const Permutation& p, const Vec& v, bool transpose) {
  if (v.size() != p.size())
    throw ConfigError("operator/patch length mismatch: " + std::to_string(v.size()) +
                      " vs " + std::to_string(p.size()));
  Vec out(v.size());
  using Scalar = typename Vec::Scalar;
  std::span<const Scalar> in(v.data(), static_cast<std::size_t>(v.size()));
  std::span<Scalar> dst(out.data(), static_cast<std::size_t>(out.size()));
  if (transpose)
    p.apply_transpose(in, dst);
  else
    p.apply(in, dst);
  return out;
}

template <typename Mat>
Mat permute_columns(const Mat& w, const FROperator& op) {
  if (w.cols() != op.dim()) throw ConfigError("transform/operator dimension mismatch");
  // (W Phi)[:, j] = W[:, mapping[j]]
  Mat out(w.rows(), w.cols());
  const auto m = op.perm.mapping();
  for (Eigen::Index j = 0; j < w.cols(); ++j) out.col(j) = w.col(m[j]);
  return out;
}

// Greedy nearest-free-cell assignment of continuously rotated pixel centers.
std::vector<int> greedy_rotation(double theta, int side) {
  const int n = side * side;
  const double half = 0.5 * (side - 1);
  const double ct = std::cos(theta);
  const double st = std::sin(theta);

  std::vector<double> tr(n), tc(n);  // rotated continuous (row, col)
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      const double x = c - half;
      const double y = half - r;
      const double xr = x * ct - y * st;
      const double yr = x * st + y * ct;
      tr[r * side + c] = half - yr;
      tc[r * side + c] = xr + half;
    }
  }

  std::vector<int> mapping(n, -1);
  std::vector<char> cell_taken(n, 0);
  std::vector<char> source_done(n, 0);

  auto nearest_free = [&](int src, double& best_d) {
    int best = -1;
    best_d = 0.0;
    for (int cell = 0; cell < n; ++cell) {
      if (cell_taken[cell]) continue;
      const double dr = tr[src] - cell / side;
      const double dc = tc[src] - cell % side;
      const double d = dr * dr + dc * dc;
      if (best < 0 || d < best_d - kDistanceTolerance) {
        best = cell;
        best_d = d;
      }
    }
    return best;
  };

  for (int round = 0; round < n; ++round) {
    int pick = -1;
    int pick_cell = -1;
    double pick_d = 0.0;
    for (int src = 0; src < n; ++src) {
      if (source_done[src]) continue;
      double d = 0.0;
      const int cell = nearest_free(src, d);
      if (pick < 0 || d < pick_d - kDistanceTolerance) {
        pick = src;
        pick_cell = cell;
        pick_d = d;
      }
    }
    mapping[pick] = pick_cell;
    source_done[pick] = 1;
    cell_taken[pick_cell] = 1;
  }
  return mapping;
}

}  // namespace

Permutation::Permutation(std::vector<int> mapping) : mapping_(std::move(mapping)) {
  std::vector<char> seen(mapping_.size(), 0);
  for (int m : mapping_) {
    if (m < 0 || m >= size() || seen[m]) throw ConfigError("mapping is not a bijection");
    seen[m] = 1;
  }
}

Permutation Permutation::identity(int n) {
  std::vector<int> m(n);
  for (int i = 0; i < n; ++i) m[i] = i;
  return Permutation(std::move(m));
}

bool Permutation::is_identity() const {
  for (int i = 0; i < size(); ++i)
    if (mapping_[i] != i) return false;
  return true;
}

Permutation compose(const Permutation& second, const Permutation& first) {
  if (second.size() != first.size()) throw ConfigError("permutation size mismatch");
  std::vector<int> m(first.size());
  for (int j = 0; j < first.size(); ++j) m[j] = second.mapping_[first.mapping_[j]];
  return Permutation(std::move(m));
}

Permutation Permutation::transpose() const {
  std::vector<int> m(mapping_.size());
  for (int j = 0; j < size(); ++j) m[mapping_[j]] = j;
  return Permutation(std::move(m));
}

Permutation build_flip(int patch_side) {
  if (patch_side < 1) throw ConfigError("patch_side must be >= 1");
  std::vector<int> m(patch_side * patch_side);
  for (int r = 0; r < patch_side; ++r)
    for (int c = 0; c < patch_side; ++c) m[r * patch_side + c] = r * patch_side + (patch_side - 1 - c);
  return Permutation(std::move(m));
}

Permutation build_rotation(int angle_index, int num_angles, int patch_side) {
  if (patch_side < 1) throw ConfigError("patch_side must be >= 1");
  if (num_angles < 4 || num_angles % 4 != 0)
    throw ConfigError("number of angles must be a positive multiple of 4");
  if (angle_index < 0 || angle_index >= num_angles)
    throw ConfigError("angle index " + std::to_string(angle_index) + " out of range");

  const int s = patch_side;
  std::vector<int> m(s * s);
  if ((4 * angle_index) % num_angles == 0) {
    const int quarter = 4 * angle_index / num_angles;
    for (int r = 0; r < s; ++r) {
      for (int c = 0; c < s; ++c) {
        int dr = r, dc = c;
        switch (quarter) {
          case 1: dr = s - 1 - c; dc = r; break;
          case 2: dr = s - 1 - r; dc = s - 1 - c; break;
          case 3: dr = c; dc = s - 1 - r; break;
          default: break;
        }
        m[r * s + c] = dr * s + dc;
      }
    }
    return Permutation(std::move(m));
  }
  const double theta = 2.0 * std::numbers::pi * angle_index / num_angles;
  return Permutation(greedy_rotation(theta, s));
}

FROperator make_operator(int angle_index, bool flip, int num_angles, int patch_side) {
  FROperator op;
  op.angle_index = angle_index;
  op.flip = flip;
  op.num_angles = num_angles;
  op.patch_side = patch_side;
  Permutation rot = build_rotation(angle_index, num_angles, patch_side);
  op.perm = flip ? compose(rot, build_flip(patch_side)) : std::move(rot);
  return op;
}

std::vector<FROperator> enumerate_candidates(int patch_side, int num_angles) {
  std::vector<FROperator> ops;
  ops.reserve(2 * num_angles);
  for (int q = 0; q < num_angles; ++q) {
    ops.push_back(make_operator(q, false, num_angles, patch_side));
    ops.push_back(make_operator(q, true, num_angles, patch_side));
  }
  return ops;
}

Vector apply(const FROperator& op, const Vector& v) { return permute(op.perm, v, false); }
Vector apply_transpose(const FROperator& op, const Vector& v) { return permute(op.perm, v, true); }
CVector apply(const FROperator& op, const CVector& v) { return permute(op.perm, v, false); }
CVector apply_transpose(const FROperator& op, const CVector& v) { return permute(op.perm, v, true); }

Matrix child_transform(const Matrix& w, const FROperator& op) { return permute_columns(w, op); }
CMatrix child_transform(const CMatrix& w, const FROperator& op) { return permute_columns(w, op); }

}  // namespace frist
