#include "fids/kernels.hpp"

namespace fids::kernels::scalar {

double sum(const double* x, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc[0] += x[i];
    acc[1] += x[i + 1];
    acc[2] += x[i + 2];
    acc[3] += x[i + 3];
  }
  double total = (acc[0] + acc[1]) + (acc[2] + acc[3]);
  for (; i < n; ++i) {
    total += x[i];
  }
  return total;
}

void deviations(const double* y, std::size_t n, double offset, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = y[i] - offset;
  }
}

double prefix_range(const double* d, std::size_t n) {
  double s = 0.0;
  double hi = 0.0;
  double lo = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s += d[i];
    hi = s > hi ? s : hi;
    lo = s < lo ? s : lo;
  }
  return hi - lo;
}

void prefix_range_x4(const double* interleaved, std::size_t n, double* out4) {
  double s[4] = {0.0, 0.0, 0.0, 0.0};
  double hi[4] = {0.0, 0.0, 0.0, 0.0};
  double lo[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = interleaved + 4 * i;
    for (int lane = 0; lane < 4; ++lane) {
      s[lane] += row[lane];
      hi[lane] = s[lane] > hi[lane] ? s[lane] : hi[lane];
      lo[lane] = s[lane] < lo[lane] ? s[lane] : lo[lane];
    }
  }
  for (int lane = 0; lane < 4; ++lane) {
    out4[lane] = hi[lane] - lo[lane];
  }
}

} // namespace fids::kernels::scalar
