#include "botdna/kernels.hpp"

#include <cstdint>

namespace botdna::kernels {

namespace {

// Below this many multiply-adds the fork/join costs more than it saves.
constexpr std::size_t kParallelWork = 1 << 15;

inline void row_nn(std::size_t i, std::size_t k, std::size_t n,
                   const double* a, const double* b, double* c) {
  double* out = c + i * n;
  for (std::size_t p = 0; p < k; ++p) {
    const double av = a[i * k + p];
    if (av == 0.0) continue;
    const double* brow = b + p * n;
    for (std::size_t j = 0; j < n; ++j) out[j] += av * brow[j];
  }
}

inline void row_tn(std::size_t p, std::size_t m, std::size_t k, std::size_t n,
                   const double* a, const double* b, double* c) {
  double* out = c + p * n;
  for (std::size_t i = 0; i < m; ++i) {
    const double av = a[i * k + p];
    if (av == 0.0) continue;
    const double* brow = b + i * n;
    for (std::size_t j = 0; j < n; ++j) out[j] += av * brow[j];
  }
}

inline void row_nt(std::size_t i, std::size_t k, std::size_t n,
                   const double* a, const double* b, double* c) {
  const double* arow = a + i * k;
  // Four interleaved partial sums let the compiler vectorise the reduction
  // while keeping a fixed summation order.
  const std::size_t k4 = k - k % 4;
  for (std::size_t j = 0; j < n; ++j) {
    const double* brow = b + j * k;
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    for (std::size_t p = 0; p < k4; p += 4) {
      s0 += arow[p] * brow[p];
      s1 += arow[p + 1] * brow[p + 1];
      s2 += arow[p + 2] * brow[p + 2];
      s3 += arow[p + 3] * brow[p + 3];
    }
    double s = (s0 + s1) + (s2 + s3);
    for (std::size_t p = k4; p < k; ++p) s += arow[p] * brow[p];
    c[i * n + j] += s;
  }
}

}  // namespace

void gemm_nn(std::size_t m, std::size_t k, std::size_t n, const double* a,
             const double* b, double* c) {
  const auto rows = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static) if (m * k * n >= kParallelWork && m > 1)
  for (std::int64_t i = 0; i < rows; ++i) row_nn(static_cast<std::size_t>(i), k, n, a, b, c);
}

void gemm_tn(std::size_t m, std::size_t k, std::size_t n, const double* a,
             const double* b, double* c) {
  const auto rows = static_cast<std::int64_t>(k);
#pragma omp parallel for schedule(static) if (m * k * n >= kParallelWork && k > 1)
  for (std::int64_t p = 0; p < rows; ++p) row_tn(static_cast<std::size_t>(p), m, k, n, a, b, c);
}

void gemm_nt(std::size_t m, std::size_t k, std::size_t n, const double* a,
             const double* b, double* c) {
  const auto rows = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static) if (m * k * n >= kParallelWork && m > 1)
  for (std::int64_t i = 0; i < rows; ++i) row_nt(static_cast<std::size_t>(i), k, n, a, b, c);
}

void im2col3x3(std::size_t ch, std::size_t h, std::size_t w, const double* x,
               double* cols) {
  const auto rows = static_cast<std::int64_t>(ch * 9);
  const std::size_t hw = h * w;
#pragma omp parallel for schedule(static) if (ch * 9 * hw >= kParallelWork)
  for (std::int64_t r = 0; r < rows; ++r) {
    const std::size_t c = static_cast<std::size_t>(r) / 9;
    const int dy = static_cast<int>(r % 9) / 3 - 1;
    const int dx = static_cast<int>(r % 3) - 1;
    double* out = cols + static_cast<std::size_t>(r) * hw;
    for (std::size_t y = 0; y < h; ++y) {
      const auto sy = static_cast<std::int64_t>(y) + dy;
      for (std::size_t xx = 0; xx < w; ++xx) {
        const auto sx = static_cast<std::int64_t>(xx) + dx;
        const bool inside = sy >= 0 && sy < static_cast<std::int64_t>(h) &&
                            sx >= 0 && sx < static_cast<std::int64_t>(w);
        out[y * w + xx] = inside ? x[(c * h + sy) * w + sx] : 0.0;
      }
    }
  }
}

void col2im3x3(std::size_t ch, std::size_t h, std::size_t w,
               const double* cols, double* dx_out) {
  // Channels are independent; taps within a channel accumulate in a fixed
  // order, so parallelise over channels only.
  const auto channels = static_cast<std::int64_t>(ch);
  const std::size_t hw = h * w;
#pragma omp parallel for schedule(static) if (ch * 9 * hw >= kParallelWork)
  for (std::int64_t c = 0; c < channels; ++c) {
    for (int tap = 0; tap < 9; ++tap) {
      const int dy = tap / 3 - 1;
      const int dx = tap % 3 - 1;
      const double* in = cols + (static_cast<std::size_t>(c) * 9 + tap) * hw;
      for (std::size_t y = 0; y < h; ++y) {
        const auto sy = static_cast<std::int64_t>(y) + dy;
        if (sy < 0 || sy >= static_cast<std::int64_t>(h)) continue;
        for (std::size_t xx = 0; xx < w; ++xx) {
          const auto sx = static_cast<std::int64_t>(xx) + dx;
          if (sx < 0 || sx >= static_cast<std::int64_t>(w)) continue;
          dx_out[(static_cast<std::size_t>(c) * h + sy) * w + sx] += in[y * w + xx];
        }
      }
    }
  }
}

namespace serial {

void gemm_nn(std::size_t m, std::size_t k, std::size_t n, const double* a,
             const double* b, double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[p * n + j];
      c[i * n + j] += s;
    }
  }
}

void gemm_tn(std::size_t m, std::size_t k, std::size_t n, const double* a,
             const double* b, double* c) {
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) s += a[i * k + p] * b[i * n + j];
      c[p * n + j] += s;
    }
  }
}

void gemm_nt(std::size_t m, std::size_t k, std::size_t n, const double* a,
             const double* b, double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[j * k + p];
      c[i * n + j] += s;
    }
  }
}

void im2col3x3(std::size_t ch, std::size_t h, std::size_t w, const double* x,
               double* cols) {
  const std::size_t hw = h * w;
  for (std::size_t c = 0; c < ch; ++c) {
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const std::size_t row = c * 9 + static_cast<std::size_t>(ky * 3 + kx);
        for (std::size_t y = 0; y < h; ++y) {
          for (std::size_t xx = 0; xx < w; ++xx) {
            const long sy = static_cast<long>(y) + ky - 1;
            const long sx = static_cast<long>(xx) + kx - 1;
            double v = 0.0;
            if (sy >= 0 && sy < static_cast<long>(h) && sx >= 0 &&
                sx < static_cast<long>(w)) {
              v = x[(c * h + static_cast<std::size_t>(sy)) * w +
                    static_cast<std::size_t>(sx)];
            }
            cols[row * hw + y * w + xx] = v;
          }
        }
      }
    }
  }
}

void col2im3x3(std::size_t ch, std::size_t h, std::size_t w,
               const double* cols, double* dx) {
  const std::size_t hw = h * w;
  for (std::size_t c = 0; c < ch; ++c) {
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const std::size_t row = c * 9 + static_cast<std::size_t>(ky * 3 + kx);
        for (std::size_t y = 0; y < h; ++y) {
          for (std::size_t xx = 0; xx < w; ++xx) {
            const long sy = static_cast<long>(y) + ky - 1;
            const long sx = static_cast<long>(xx) + kx - 1;
            if (sy >= 0 && sy < static_cast<long>(h) && sx >= 0 &&
                sx < static_cast<long>(w)) {
              dx[(c * h + static_cast<std::size_t>(sy)) * w +
                 static_cast<std::size_t>(sx)] += cols[row * hw + y * w + xx];
            }
          }
        }
      }
    }
  }
}

}  // namespace serial

}  // namespace botdna::kernels
