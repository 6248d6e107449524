#pragma once

// Reduction kernels over contiguous doubles. Each operation has a scalar
// reference implementation and, on x86-64, an AVX2 variant; the public entry
// points dispatch at runtime to the best variant the CPU supports.
//
// max_value and count_below are exact in every variant. sum and
// sum_squared_deviations may differ between variants by rounding only.

#include <cstddef>
#include <span>
#include <string_view>

namespace ood::kernels {

enum class Backend { Reference, Avx2 };

std::string_view to_string(Backend b) noexcept;

/// Whether the running CPU can execute the given backend.
bool backend_supported(Backend b) noexcept;

Backend active_backend() noexcept;

/// Forces a backend (tests and benchmarks). Returns false and leaves the
/// current selection untouched if the backend is unsupported.
bool set_backend(Backend b) noexcept;

/// Restores the automatically detected backend.
void reset_backend() noexcept;

double sum(std::span<const double> values) noexcept;
double sum_squared_deviations(std::span<const double> values, double center) noexcept;
/// Precondition: values non-empty and NaN-free.
double max_value(std::span<const double> values) noexcept;
/// Number of entries strictly below `threshold`.
std::size_t count_below(std::span<const double> values, double threshold) noexcept;

namespace reference {
double sum(std::span<const double> values) noexcept;
double sum_squared_deviations(std::span<const double> values, double center) noexcept;
double max_value(std::span<const double> values) noexcept;
std::size_t count_below(std::span<const double> values, double threshold) noexcept;
}  // namespace reference

#if defined(__x86_64__) || defined(_M_X64)
#define OOD_HAVE_AVX2_KERNELS 1
namespace avx2 {
double sum(std::span<const double> values) noexcept;
double sum_squared_deviations(std::span<const double> values, double center) noexcept;
double max_value(std::span<const double> values) noexcept;
std::size_t count_below(std::span<const double> values, double threshold) noexcept;
}  // namespace avx2
#endif

}  // namespace ood::kernels
