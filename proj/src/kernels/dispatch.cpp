#include "ood/kernels.hpp"

#include <atomic>

namespace ood::kernels {

namespace {

Backend detect() noexcept {
#if defined(OOD_HAVE_AVX2_KERNELS)
  if (backend_supported(Backend::Avx2)) return Backend::Avx2;
#endif
  return Backend::Reference;
}

std::atomic<Backend>& selected() noexcept {
  static std::atomic<Backend> backend{detect()};
  return backend;
}

}  // namespace

std::string_view to_string(Backend b) noexcept {
  switch (b) {
    case Backend::Reference: return "reference";
    case Backend::Avx2: return "avx2";
  }
  return "unknown";
}

bool backend_supported(Backend b) noexcept {
  switch (b) {
    case Backend::Reference: return true;
    case Backend::Avx2:
#if defined(OOD_HAVE_AVX2_KERNELS)
      __builtin_cpu_init();
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

Backend active_backend() noexcept { return selected().load(std::memory_order_relaxed); }

bool set_backend(Backend b) noexcept {
  if (!backend_supported(b)) return false;
  selected().store(b, std::memory_order_relaxed);
  return true;
}

void reset_backend() noexcept { selected().store(detect(), std::memory_order_relaxed); }

#if defined(OOD_HAVE_AVX2_KERNELS)
#define OOD_DISPATCH(fn, ...)                                              \
  (active_backend() == Backend::Avx2 ? avx2::fn(__VA_ARGS__) : reference::fn(__VA_ARGS__))
#else
#define OOD_DISPATCH(fn, ...) reference::fn(__VA_ARGS__)
#endif

double sum(std::span<const double> values) noexcept { return OOD_DISPATCH(sum, values); }

double sum_squared_deviations(std::span<const double> values, double center) noexcept {
  return OOD_DISPATCH(sum_squared_deviations, values, center);
}

double max_value(std::span<const double> values) noexcept {
  return OOD_DISPATCH(max_value, values);
}

std::size_t count_below(std::span<const double> values, double threshold) noexcept {
  return OOD_DISPATCH(count_below, values, threshold);
}

#undef OOD_DISPATCH

}  // namespace ood::kernels
