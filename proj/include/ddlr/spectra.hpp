#pragma once

// Nonparametric spectra, filter-magnitude designs and zero-phase filtering.
//
// Spectra use the two-sided density convention sampled on [0, pi]: white noise
// of variance s^2 has a flat spectrum equal to s^2, and the power of a signal
// is (1/2pi) * integral over [-pi, pi].

#include "ddlr/lti.hpp"

#include <complex>
#include <optional>
#include <string_view>
#include <vector>

namespace ddlr {

inline constexpr std::size_t kDefaultWelchSegment = 512;
inline constexpr double kDefaultWelchOverlap = 0.5;
inline constexpr double kSpectrumFloor = 1e-12;  // relative to the max bin
inline constexpr double kFilterCap = 1e6;        // relative to the median |K|^2

// Uniform frequency grid of M >= 2 points from 0 to pi inclusive.
[[nodiscard]] std::vector<double> frequency_grid(std::size_t points);

struct SpectralEstimate {
    std::vector<double> grid;
    std::vector<double> values;
};

struct CrossSpectralEstimate {
    std::vector<double> grid;
    std::vector<std::complex<double>> values;
};

struct FilterMagnitude {
    std::vector<double> grid;
    std::vector<double> mag; // |K(w)|

    // Linear interpolation in w, clamped to the end points.
    [[nodiscard]] double at(double omega) const;
};

enum class FilterKind { PeLin, PeNlin, CorrLin, CorrNlin };

[[nodiscard]] std::string_view to_string(FilterKind kind);

// Spectra feeding a design. PeLin/PeNlin read output_psd, CorrLin/CorrNlin read
// cross_psd; disturbance_psd is always required.
struct DesignSpectra {
    SpectralEstimate disturbance_psd;
    std::optional<SpectralEstimate> output_psd;
    std::optional<CrossSpectralEstimate> cross_psd;
};

// Hann-windowed, averaged modified periodogram with M = segment/2 + 1 bins.
// Throws Error(TooFewSamples) if segment > N or segment < 2.
[[nodiscard]] SpectralEstimate welch_psd(std::span<const double> x, std::size_t segment = kDefaultWelchSegment,
                                         double overlap = kDefaultWelchOverlap);

// E[conj(X) Y] on the Welch grid. Throws Error(DimensionMismatch) on unequal lengths.
[[nodiscard]] CrossSpectralEstimate cross_psd(std::span<const double> x, std::span<const double> y,
                                              std::size_t segment = kDefaultWelchSegment,
                                              double overlap = kDefaultWelchOverlap);

// Finite-record energy spectrum |D(w)|^2 / N of d extended past its end by
// holding the last value. A signal ending at zero gets its plain DTFT, a step
// gets |1 / (1 - e^{-jw})|^2 / N. When the last value is non-zero the w = 0
// bin is infinite and is replaced by the nearest positive-frequency value.
[[nodiscard]] SpectralEstimate disturbance_psd(std::span<const double> d, const std::vector<double>& grid);

// Approximate |K|^2 designs (Q ~ Qd):
//   PeLin    |Qd|^4 Phi_d / (|A|^2 Phi_y)
//   PeNlin   |Qd|^4 Phi_d / Phi_y
//   CorrLin  |Qd|^4 Phi_d / (|A|^2 |Phi_xy|^2)
//   CorrNlin |Qd|^4 Phi_d / |Phi_xy|^2
// The result lives on the denominator spectrum's grid; Phi_d is interpolated
// onto it. Throws Error(GridMismatch) if the grids do not span the same range.
[[nodiscard]] FilterMagnitude design_filter(FilterKind kind, const TransferOperator& Qd,
                                            std::span<const double> A_current, const DesignSpectra& spectra);

// Zero-phase filtering by |K|: DFT of x zero-padded to a power of two at least
// max(2N, 2(M-1)), bins scaled by the interpolated magnitude, inverse DFT,
// truncated back to N samples.
[[nodiscard]] Series apply_zero_phase(const FilterMagnitude& K, std::span<const double> x);

// FFT length used by apply_zero_phase for a record of n samples.
[[nodiscard]] std::size_t zero_phase_fft_length(const FilterMagnitude& K, std::size_t n);

} // namespace ddlr
