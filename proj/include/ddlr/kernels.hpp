#pragma once

// Data-parallel inner loops used by the estimators. Each kernel has a scalar
// reference implementation and, on x86-64 builds, an AVX2/FMA variant. The
// variant is chosen once at runtime from CPUID; tests pin either one through
// set_isa() and check that they agree.

#include <cstddef>
#include <span>
#include <string_view>

namespace ddlr::kernels {

enum class Isa { Scalar, Avx2 };

[[nodiscard]] std::string_view to_string(Isa isa);

// True if this binary contains the variant and the CPU can run it.
[[nodiscard]] bool isa_available(Isa isa);

// The variant currently used by the dispatching entry points.
[[nodiscard]] Isa active_isa();

// Forces a variant. Returns false (and changes nothing) if it is unavailable.
bool set_isa(Isa isa);

// Restores the CPUID-based choice.
void reset_isa();

// sum_i a[i]*b[i]; a and b must have equal length.
[[nodiscard]] double dot(std::span<const double> a, std::span<const double> b);

// sum_i a[i]^2
[[nodiscard]] double sum_squares(std::span<const double> a);

// out[j] = sum_t e[t] * x[t + L - j] for j = 0..2L, samples of x outside
// [0, n) treated as zero. out must have 2L+1 entries. This is the unnormalized
// stacked cross-correlation used by the correlation estimator.
void lagged_xcorr(std::span<const double> e, std::span<const double> x, std::size_t lags,
                  std::span<double> out);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double sum_squares(const double* a, std::size_t n);
} // namespace scalar

#if defined(DDLR_BUILD_AVX2)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double sum_squares(const double* a, std::size_t n);
} // namespace avx2
#endif

} // namespace ddlr::kernels
