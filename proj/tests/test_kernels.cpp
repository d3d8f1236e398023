#include <doctest.h>

#include <algorithm>
#include <vector>

#include "frist/kernels.hpp"
#include "frist/sparse_transform.hpp"
#include "oracles.hpp"

using namespace frist;

namespace {

struct Problem {
  Matrix y;
  Matrix w;
  std::vector<FROperator> ops;
  std::vector<int> sparsity;
};

// 600 columns span several 256-column blocks plus a partial one.
Problem make_problem(std::uint64_t seed) {
  Rng rng(seed);
  Problem p;
  p.ops = enumerate_candidates(4, 16);
  p.w = oracle::well_conditioned(rng, 16, 0.6);
  p.y = oracle::gaussian_matrix(rng, 16, 600);
  // duplicated columns create exact ties between operators
  for (int i = 0; i < 600; i += 7) p.y.col(i).setConstant(1.0);
  for (int i = 0; i < 600; ++i) p.sparsity.push_back(oracle::uniform_int(rng, 0, 16));
  return p;
}

}  // namespace

// The blocked kernel multiplies whole blocks while the reference works column
// by column, so the two agree to rounding. Labels may only differ where two
// operators tie to rounding.
template <typename Result>
void check_against_reference(const Result& par, const Result& ref, const Vector& par_values,
                             const Vector& ref_values) {
  for (std::size_t i = 0; i < ref.labels.size(); ++i) {
    CHECK(par_values[i] == doctest::Approx(ref_values[i]).epsilon(1e-12).scale(1.0));
    if (par.labels[i] == ref.labels[i])
      CHECK((par.codes.col(i) - ref.codes.col(i)).norm() <= 1e-12 * (1 + ref.codes.col(i).norm()));
  }
}

TEST_CASE("cluster_patches is independent of the thread count and matches the serial reference") {
  const Problem p = make_problem(1);
  const auto ref = cluster_patches_reference(p.y, p.w, p.ops, p.sparsity);
  set_num_threads(1);
  const auto single = cluster_patches(p.y, p.w, p.ops, p.sparsity);
  check_against_reference(single, ref, single.errors, ref.errors);
  long same = 0;
  for (std::size_t i = 0; i < ref.labels.size(); ++i) same += single.labels[i] == ref.labels[i];
  CHECK(same >= 590);
  // constant patches look the same under every operator: label 0
  for (int i = 0; i < 600; i += 7) CHECK(single.labels[i] == 0);
  for (int threads : {2, 3, 8}) {
    set_num_threads(threads);
    const auto par = cluster_patches(p.y, p.w, p.ops, p.sparsity);
    CHECK(par.labels == single.labels);
    CHECK(par.codes == single.codes);
    CHECK(par.errors == single.errors);
  }
  set_num_threads(0);
}

TEST_CASE("cluster_patches reference agrees with a per-column exhaustive scan") {
  const Problem p = make_problem(2);
  const auto ref = cluster_patches_reference(p.y, p.w, p.ops, p.sparsity);
  std::vector<Matrix> perms;
  for (const auto& op : p.ops) perms.push_back(oracle::permutation_matrix(op));
  for (int i = 0; i < 600; i += 5) {
    std::vector<double> errs;
    for (std::size_t k = 0; k < p.ops.size(); ++k) {
      const Vector b = p.w * Vector(perms[k] * p.y.col(i));
      errs.push_back((b - oracle::brute_project_sparse(b, p.sparsity[i])).squaredNorm());
    }
    const double best = *std::min_element(errs.begin(), errs.end());
    // lowest index among the minimizers, up to rounding in the error sums
    int first = 0;
    while (errs[first] > best * (1 + 1e-12) + 1e-300) ++first;
    CHECK(ref.labels[i] == first);
    CHECK(ref.errors[i] == doctest::Approx(best).epsilon(1e-12).scale(1.0));
    const Vector chosen = p.w * Vector(perms[ref.labels[i]] * p.y.col(i));
    CHECK(ref.codes.col(i) == oracle::brute_project_sparse(chosen, p.sparsity[i]));
  }
}

TEST_CASE("penalty clustering matches the serial reference and an exhaustive scan") {
  const Problem p = make_problem(3);
  const double tau = 0.9;
  const auto ref = penalty_cluster_patches_reference(p.y, p.w, p.ops, tau);
  set_num_threads(1);
  const auto single = penalty_cluster_patches(p.y, p.w, p.ops, tau);
  check_against_reference(single, ref, single.objectives, ref.objectives);
  for (int i = 0; i < 600; i += 7) CHECK(single.labels[i] == 0);
  for (int threads : {2, 5}) {
    set_num_threads(threads);
    const auto par = penalty_cluster_patches(p.y, p.w, p.ops, tau);
    CHECK(par.labels == single.labels);
    CHECK(par.codes == single.codes);
    CHECK(par.objectives == single.objectives);
  }
  set_num_threads(0);

  for (int i = 0; i < 600; i += 11) {
    double best = 1e300;
    for (const auto& op : p.ops) {
      const Vector b = p.w * Vector(oracle::permutation_matrix(op) * p.y.col(i));
      const Vector x = oracle::brute_hard_threshold(b, tau);
      long nnz = 0;
      for (Eigen::Index j = 0; j < x.size(); ++j) nnz += x[j] != 0.0;
      best = std::min(best, (b - x).squaredNorm() + tau * tau * nnz);
    }
    CHECK(ref.objectives[i] == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("penalty value") {
  Vector b(4);
  b << 3, -1, 0.5, 2;
  // keeps 3 and 2 at cost 4 each, drops the rest at 1 + 0.25
  CHECK(penalty_value(b, 2.0) == doctest::Approx(9.25).epsilon(1e-14));
  CHECK(penalty_value(b, 0.0) == 0.0);
}

TEST_CASE("rotate_columns and cluster sizes") {
  const Problem p = make_problem(4);
  std::vector<int> labels(600);
  Rng rng(5);
  for (auto& l : labels) l = oracle::uniform_int(rng, 0, static_cast<int>(p.ops.size()) - 1);
  const Matrix serial = rotate_columns(p.y, p.ops, labels, Exec::serial);
  set_num_threads(3);
  CHECK(rotate_columns(p.y, p.ops, labels, Exec::parallel) == serial);
  set_num_threads(0);
  for (int i = 0; i < 600; i += 13)
    CHECK(serial.col(i) == oracle::permutation_matrix(p.ops[labels[i]]) * p.y.col(i));

  const auto sizes = cluster_sizes(labels, p.ops.size());
  long total = 0;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    total += sizes[k];
    CHECK(sizes[k] == std::count(labels.begin(), labels.end(), static_cast<int>(k)));
  }
  CHECK(total == 600);
  CHECK_THROWS(cluster_sizes({0, 3}, 3));
}
