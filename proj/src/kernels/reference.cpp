#include "ood/kernels.hpp"

#include <algorithm>

namespace ood::kernels::reference {

double sum(std::span<const double> values) noexcept {
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc;
}

double sum_squared_deviations(std::span<const double> values, double center) noexcept {
  double acc = 0.0;
  for (double v : values) {
    const double d = v - center;
    acc += d * d;
  }
  return acc;
}

double max_value(std::span<const double> values) noexcept {
  double m = values.front();
  for (double v : values.subspan(1)) m = std::max(m, v);
  return m;
}

std::size_t count_below(std::span<const double> values, double threshold) noexcept {
  std::size_t n = 0;
  for (double v : values) n += v < threshold ? 1 : 0;
  return n;
}

}  // namespace ood::kernels::reference
