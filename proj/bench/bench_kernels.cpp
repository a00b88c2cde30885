// Serial reference loops vs the OpenMP kernels at the shapes the toy
// encoders actually hit. Thread count follows OMP_NUM_THREADS.
#include <benchmark/benchmark.h>

#include <vector>

#include "botdna/kernels.hpp"
#include "botdna/rng.hpp"

namespace {

std::vector<double> random_buffer(std::size_t n, std::uint64_t seed) {
  botdna::Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

using Gemm = void (*)(std::size_t, std::size_t, std::size_t, const double*, const double*,
                      double*);

// m x k times k x n: the second vision convolution (d_v x 144 by 144 x 256).
template <Gemm F>
void BM_gemm_nn(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const std::size_t k = 144, n = 256;
  const auto a = random_buffer(m * k, 1);
  const auto b = random_buffer(k * n, 2);
  std::vector<double> c(m * n);
  for (auto _ : state) {
    F(m, k, n, a.data(), b.data(), c.data());
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * m * k * n));
}

// Weight gradient of the same layer: dy [m, 256] times cols^T.
template <Gemm F>
void BM_gemm_nt(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const std::size_t k = 256, n = 144;
  const auto a = random_buffer(m * k, 3);
  const auto b = random_buffer(n * k, 4);
  std::vector<double> c(m * n);
  for (auto _ : state) {
    F(m, k, n, a.data(), b.data(), c.data());
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * m * k * n));
}

// Input gradient: W^T dy with W [m, 144], dy [m, 256].
template <Gemm F>
void BM_gemm_tn(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const std::size_t k = 144, n = 256;
  const auto a = random_buffer(m * k, 5);
  const auto b = random_buffer(m * n, 6);
  std::vector<double> c(k * n);
  for (auto _ : state) {
    F(m, k, n, a.data(), b.data(), c.data());
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * m * k * n));
}

using Im2col = void (*)(std::size_t, std::size_t, std::size_t, const double*, double*);

template <Im2col F>
void BM_im2col(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const std::size_t ch = 16;
  const auto x = random_buffer(ch * side * side, 7);
  std::vector<double> cols(ch * 9 * side * side);
  for (auto _ : state) {
    F(ch, side, side, x.data(), cols.data());
    benchmark::DoNotOptimize(cols.data());
  }
}

}  // namespace

BENCHMARK(BM_gemm_nn<botdna::kernels::serial::gemm_nn>)->Name("gemm_nn/serial")->Arg(256)->Arg(512);
BENCHMARK(BM_gemm_nn<botdna::kernels::gemm_nn>)->Name("gemm_nn/omp")->Arg(256)->Arg(512);
BENCHMARK(BM_gemm_nt<botdna::kernels::serial::gemm_nt>)->Name("gemm_nt/serial")->Arg(256)->Arg(512);
BENCHMARK(BM_gemm_nt<botdna::kernels::gemm_nt>)->Name("gemm_nt/omp")->Arg(256)->Arg(512);
BENCHMARK(BM_gemm_tn<botdna::kernels::serial::gemm_tn>)->Name("gemm_tn/serial")->Arg(256)->Arg(512);
BENCHMARK(BM_gemm_tn<botdna::kernels::gemm_tn>)->Name("gemm_tn/omp")->Arg(256)->Arg(512);
BENCHMARK(BM_im2col<botdna::kernels::serial::im2col3x3>)->Name("im2col/serial")->Arg(14)->Arg(16);
BENCHMARK(BM_im2col<botdna::kernels::im2col3x3>)->Name("im2col/omp")->Arg(14)->Arg(16);

BENCHMARK_MAIN();
