#pragma once

// Thin FFTW wrapper: real-to-complex transforms with cached plans.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace ddlr::detail {

// nfft/2 + 1 bins of the DFT of x, zero-padded (or truncated) to nfft samples.
[[nodiscard]] std::vector<std::complex<double>> rfft(std::span<const double> x, std::size_t nfft);

// Inverse of rfft, including the 1/nfft factor. bins must hold nfft/2 + 1 entries.
[[nodiscard]] std::vector<double> irfft(std::span<const std::complex<double>> bins, std::size_t nfft);

[[nodiscard]] std::size_t next_pow2(std::size_t n);

} // namespace ddlr::detail
