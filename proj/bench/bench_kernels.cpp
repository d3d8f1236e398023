// Serial reference kernels against their OpenMP versions.
// Args: patch side, patch count. Threads follow OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "frist/kernels.hpp"
#include "frist/sparse_transform.hpp"

using namespace frist;

namespace {

struct Problem {
  Matrix y, w;
  std::vector<FROperator> ops;
  std::vector<int> levels, labels;
};

Problem make_problem(int side, int count) {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> normal;
  const int n = side * side;
  Problem p;
  p.y = Matrix::NullaryExpr(n, count, [&] { return normal(gen); });
  p.w = dct_matrix(side);
  p.ops = enumerate_candidates(side, default_num_angles(side));
  p.levels.assign(count, n / 6 + 1);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(p.ops.size()) - 1);
  for (int i = 0; i < count; ++i) p.labels.push_back(pick(gen));
  return p;
}

template <bool Parallel>
void cluster(benchmark::State& state) {
  const Problem p = make_problem(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) {
    auto r = Parallel ? cluster_patches(p.y, p.w, p.ops, p.levels)
                      : cluster_patches_reference(p.y, p.w, p.ops, p.levels);
    benchmark::DoNotOptimize(r.codes.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

template <bool Parallel>
void penalty_cluster(benchmark::State& state) {
  const Problem p = make_problem(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) {
    auto r = Parallel ? penalty_cluster_patches(p.y, p.w, p.ops, 0.5)
                      : penalty_cluster_patches_reference(p.y, p.w, p.ops, 0.5);
    benchmark::DoNotOptimize(r.codes.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

template <Exec E>
void rotate(benchmark::State& state) {
  const Problem p = make_problem(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) {
    Matrix r = rotate_columns(p.y, p.ops, p.labels, E);
    benchmark::DoNotOptimize(r.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

}  // namespace

BENCHMARK(cluster<false>)->Args({4, 4096})->Args({8, 2048})->Unit(benchmark::kMillisecond);
BENCHMARK(cluster<true>)->Args({4, 4096})->Args({8, 2048})->Unit(benchmark::kMillisecond);
BENCHMARK(penalty_cluster<false>)->Args({4, 4096})->Args({8, 2048})->Unit(benchmark::kMillisecond);
BENCHMARK(penalty_cluster<true>)->Args({4, 4096})->Args({8, 2048})->Unit(benchmark::kMillisecond);
BENCHMARK(rotate<Exec::serial>)->Args({8, 16384})->Unit(benchmark::kMicrosecond);
BENCHMARK(rotate<Exec::parallel>)->Args({8, 16384})->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
