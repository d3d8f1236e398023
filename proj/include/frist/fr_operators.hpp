#pragma once

#include <span>
#include <vector>

#include "frist/types.hpp"

namespace frist {

/// Permutation of {0..n-1}. mapping()[j] is the row holding the single 1 in
/// column j of the permutation matrix, so applying it moves entry j to
/// position mapping()[j].
class Permutation {
 public:
  Permutation() = default;
  /// Throws ConfigError unless `mapping` is a bijection.
  explicit Permutation(std::vector<int> mapping);

  static Permutation identity(int n);

  int size() const { return static_cast<int>(mapping_.size()); }
  std::span<const int> mapping() const { return mapping_; }
  bool is_identity() const;

  /// out[mapping[j]] = in[j]
  template <typename Scalar>
  void apply(std::span<const Scalar> in, std::span<Scalar> out) const {
    for (std::size_t j = 0; j < mapping_.size(); ++j) out[mapping_[j]] = in[j];
  }
  /// out[j] = in[mapping[j]]
  template <typename Scalar>
  void apply_transpose(std::span<const Scalar> in, std::span<Scalar> out) const {
    for (std::size_t j = 0; j < mapping_.size(); ++j) out[j] = in[mapping_[j]];
  }

  /// The product first * ... i.e. `second` applied after `first`.
  friend Permutation compose(const Permutation& second, const Permutation& first);
  Permutation transpose() const;

  bool operator==(const Permutation&) const = default;

 private:
  std::vector<int> mapping_;
};

/// Left-to-right flip of a patch_side x patch_side patch (row-major).
Permutation build_flip(int patch_side);

/// Interpolation-free rotation by angle_index * 360 / num_angles degrees,
/// counter-clockwise. Multiples of 90 degrees are exact; other angles use a
/// deterministic greedy nearest-free-cell assignment.
Permutation build_rotation(int angle_index, int num_angles, int patch_side);

/// Flip-and-rotation operator: the flip (if any) is applied first.
struct FROperator {
  int angle_index = 0;
  bool flip = false;
  int num_angles = 4;
  int patch_side = 1;
  Permutation perm;

  int dim() const { return patch_side * patch_side; }
  bool operator==(const FROperator& o) const {
    return angle_index == o.angle_index && flip == o.flip &&
           num_angles == o.num_angles && patch_side == o.patch_side;
  }
};

FROperator make_operator(int angle_index, bool flip, int num_angles, int patch_side);

/// All 2 * num_angles operators ordered by angle, unflipped before flipped.
/// The first one is the identity.
std::vector<FROperator> enumerate_candidates(int patch_side, int num_angles);

/// Default angle count for a patch side: 4 * patch_side.
inline int default_num_angles(int patch_side) { return 4 * patch_side; }

Vector apply(const FROperator& op, const Vector& v);
Vector apply_transpose(const FROperator& op, const Vector& v);
CVector apply(const FROperator& op, const CVector& v);
CVector apply_transpose(const FROperator& op, const CVector& v);

/// Columns permuted so that child_transform(W, op) * y == W * apply(op, y).
Matrix child_transform(const Matrix& w, const FROperator& op);
CMatrix child_transform(const CMatrix& w, const FROperator& op);

}  // namespace frist
