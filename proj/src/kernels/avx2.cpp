// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include "ood/kernels.hpp"

#if defined(OOD_HAVE_AVX2_KERNELS)

#include <immintrin.h>

#include <algorithm>
#include <cstdint>

namespace ood::kernels::avx2 {

namespace {

inline double horizontal_sum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  const __m128d swapped = _mm_unpackhi_pd(pair, pair);
  return _mm_cvtsd_f64(_mm_add_sd(pair, swapped));
}

inline double horizontal_max(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_max_pd(lo, hi);
  const __m128d swapped = _mm_unpackhi_pd(pair, pair);
  return _mm_cvtsd_f64(_mm_max_sd(pair, swapped));
}

}  // namespace

double sum(std::span<const double> values) noexcept {
  const double* p = values.data();
  const std::size_t n = values.size();
  std::size_t i = 0;
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(p + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(p + i + 4));
  }
  double res = horizontal_sum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) res += p[i];
  return res;
}

double sum_squared_deviations(std::span<const double> values, double center) noexcept {
  const double* p = values.data();
  const std::size_t n = values.size();
  const __m256d c = _mm256_set1_pd(center);
  std::size_t i = 0;
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(p + i), c);
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(p + i + 4), c);
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  double res = horizontal_sum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double d = p[i] - center;
    res += d * d;
  }
  return res;
}

double max_value(std::span<const double> values) noexcept {
  const double* p = values.data();
  const std::size_t n = values.size();
  if (n < 4) {
    double m = p[0];
    for (std::size_t i = 1; i < n; ++i) m = std::max(m, p[i]);
    return m;
  }
  __m256d acc = _mm256_loadu_pd(p);
  std::size_t i = 4;
  for (; i + 4 <= n; i += 4) acc = _mm256_max_pd(acc, _mm256_loadu_pd(p + i));
  double m = horizontal_max(acc);
  for (; i < n; ++i) m = std::max(m, p[i]);
  return m;
}

std::size_t count_below(std::span<const double> values, double threshold) noexcept {
  const double* p = values.data();
  const std::size_t n = values.size();
  const __m256d t = _mm256_set1_pd(threshold);
  std::size_t i = 0;
  std::size_t count = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d lt = _mm256_cmp_pd(_mm256_loadu_pd(p + i), t, _CMP_LT_OQ);
    count += static_cast<std::size_t>(__builtin_popcount(
        static_cast<unsigned>(_mm256_movemask_pd(lt))));
  }
  for (; i < n; ++i) count += p[i] < threshold ? 1 : 0;
  return count;
}

}  // namespace ood::kernels::avx2

#endif
