#pragma once

#include <cstddef>

// Dense inner loops used by the autodiff ops. All routines accumulate into
// their output. The parallel versions split work by output row only, so each
// output element is produced by a single thread in a fixed order and results
// are bit-identical for any thread count.
namespace botdna::kernels {

// C[m,n] += A[m,k] * B[k,n]
void gemm_nn(std::size_t m, std::size_t k, std::size_t n, const double* a,
             const double* b, double* c);
// C[k,n] += A[m,k]^T * B[m,n]
void gemm_tn(std::size_t m, std::size_t k, std::size_t n, const double* a,
             const double* b, double* c);
// C[m,n] += A[m,k] * B[n,k]^T
void gemm_nt(std::size_t m, std::size_t k, std::size_t n, const double* a,
             const double* b, double* c);

// 3x3 patches with zero padding 1: x[ch,h,w] -> cols[ch*9, h*w].
void im2col3x3(std::size_t ch, std::size_t h, std::size_t w, const double* x,
               double* cols);
// Adjoint of im2col3x3: dx[ch,h,w] += scatter(cols).
void col2im3x3(std::size_t ch, std::size_t h, std::size_t w,
               const double* cols, double* dx);

// Textbook loops kept as the reference for tests and benchmarks.
namespace serial {
void gemm_nn(std::size_t m, std::size_t k, std::size_t n, const double* a,
             const double* b, double* c);
void gemm_tn(std::size_t m, std::size_t k, std::size_t n, const double* a,
             const double* b, double* c);
void gemm_nt(std::size_t m, std::size_t k, std::size_t n, const double* a,
             const double* b, double* c);
void im2col3x3(std::size_t ch, std::size_t h, std::size_t w, const double* x,
               double* cols);
void col2im3x3(std::size_t ch, std::size_t h, std::size_t w,
               const double* cols, double* dx);
}  // namespace serial

}  // namespace botdna::kernels
