#include "fids/kernels.hpp"

#include <immintrin.h>

namespace fids::kernels::avx2 {

double sum(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double total = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) {
    total += x[i];
  }
  return total;
}

void deviations(const double* y, std::size_t n, double offset, double* out) {
  const __m256d off = _mm256_set1_pd(offset);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(y + i), off));
  }
  for (; i < n; ++i) {
    out[i] = y[i] - offset;
  }
}

// A single running sum is a serial dependency chain; the vector path only pays
// off across independent resamples (prefix_range_x4).
double prefix_range(const double* d, std::size_t n) { return scalar::prefix_range(d, n); }

void prefix_range_x4(const double* interleaved, std::size_t n, double* out4) {
  __m256d s = _mm256_setzero_pd();
  __m256d hi = _mm256_setzero_pd();
  __m256d lo = _mm256_setzero_pd();
  for (std::size_t i = 0; i < n; ++i) {
    s = _mm256_add_pd(s, _mm256_loadu_pd(interleaved + 4 * i));
    // max_pd(a, b) returns b unless a > b: same selection as the scalar ternary.
    hi = _mm256_max_pd(s, hi);
    lo = _mm256_min_pd(s, lo);
  }
  _mm256_storeu_pd(out4, _mm256_sub_pd(hi, lo));
}

} // namespace fids::kernels::avx2
