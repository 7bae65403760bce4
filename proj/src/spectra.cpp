#include "ddlr/spectra.hpp"

#include "ddlr/error.hpp"
#include "fft.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace ddlr {
namespace {

std::vector<double> hann(std::size_t n) {
    // periodic Hann
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
    }
    return w;
}

void check_welch_args(std::size_t n, std::size_t segment, double overlap) {
    if (segment < 2 || segment > n) {
        throw Error(ErrorKind::TooFewSamples, "Welch segment of " + std::to_string(segment) +
                                                  " samples does not fit a record of " + std::to_string(n));
    }
    if (!(overlap >= 0.0 && overlap < 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "Welch overlap must lie in [0, 1)");
    }
}

std::vector<std::size_t> segment_starts(std::size_t n, std::size_t segment, double overlap) {
    const auto step =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(static_cast<double>(segment) * (1.0 - overlap))));
    std::vector<std::size_t> starts;
    for (std::size_t s = 0; s + segment <= n; s += step) starts.push_back(s);
    return starts;
}

std::vector<std::complex<double>> windowed_bins(std::span<const double> x, std::size_t start,
                                                const std::vector<double>& window) {
    std::vector<double> buf(window.size());
    for (std::size_t i = 0; i < window.size(); ++i) buf[i] = window[i] * x[start + i];
    return detail::rfft(buf, window.size());
}

double interp(const std::vector<double>& grid, const std::vector<double>& values, double omega) {
    if (omega <= grid.front()) return values.front();
    if (omega >= grid.back()) return values.back();
    const auto it = std::upper_bound(grid.begin(), grid.end(), omega);
    const auto hi = static_cast<std::size_t>(it - grid.begin());
    const std::size_t lo = hi - 1;
    const double w = (omega - grid[lo]) / (grid[hi] - grid[lo]);
    return (1.0 - w) * values[lo] + w * values[hi];
}

bool same_span(const std::vector<double>& a, const std::vector<double>& b) {
    constexpr double tol = 1e-9;
    return a.size() >= 2 && b.size() >= 2 && std::abs(a.front() - b.front()) < tol &&
           std::abs(a.back() - b.back()) < tol;
}

bool same_grid(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::abs(a[i] - b[i]) > 1e-12) return false;
    }
    return true;
}

double median(std::vector<double> v) {
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(v.begin(), mid);
    return 0.5 * (lower + upper);
}

} // namespace

std::vector<double> frequency_grid(std::size_t points) {
    if (points < 2) {
        throw Error(ErrorKind::InvalidArgument, "frequency grid needs at least 2 points");
    }
    std::vector<double> grid(points);
    for (std::size_t k = 0; k < points; ++k) {
        grid[k] = std::numbers::pi * static_cast<double>(k) / static_cast<double>(points - 1);
    }
    return grid;
}

double FilterMagnitude::at(double omega) const { return interp(grid, mag, omega); }

std::string_view to_string(FilterKind kind) {
    switch (kind) {
    case FilterKind::PeLin: return "pe_lin";
    case FilterKind::PeNlin: return "pe_nlin";
    case FilterKind::CorrLin: return "corr_lin";
    case FilterKind::CorrNlin: return "corr_nlin";
    }
    return "unknown";
}

SpectralEstimate welch_psd(std::span<const double> x, std::size_t segment, double overlap) {
    check_welch_args(x.size(), segment, overlap);
    const auto window = hann(segment);
    double window_energy = 0.0;
    for (double w : window) window_energy += w * w;

    SpectralEstimate est;
    est.grid = frequency_grid(segment / 2 + 1);
    est.values.assign(est.grid.size(), 0.0);
    const auto starts = segment_starts(x.size(), segment, overlap);
    for (std::size_t start : starts) {
        const auto bins = windowed_bins(x, start, window);
        for (std::size_t k = 0; k < est.values.size(); ++k) est.values[k] += std::norm(bins[k]);
    }
    const double scale = 1.0 / (window_energy * static_cast<double>(starts.size()));
    for (double& v : est.values) v *= scale;
    return est;
}

CrossSpectralEstimate cross_psd(std::span<const double> x, std::span<const double> y, std::size_t segment,
                                double overlap) {
    if (x.size() != y.size()) {
        throw Error(ErrorKind::DimensionMismatch, "cross spectrum needs equal-length series");
    }
    check_welch_args(x.size(), segment, overlap);
    const auto window = hann(segment);
    double window_energy = 0.0;
    for (double w : window) window_energy += w * w;

    CrossSpectralEstimate est;
    est.grid = frequency_grid(segment / 2 + 1);
    est.values.assign(est.grid.size(), {0.0, 0.0});
    const auto starts = segment_starts(x.size(), segment, overlap);
    for (std::size_t start : starts) {
        const auto bx = windowed_bins(x, start, window);
        const auto by = windowed_bins(y, start, window);
        for (std::size_t k = 0; k < est.values.size(); ++k) est.values[k] += std::conj(bx[k]) * by[k];
    }
    const double scale = 1.0 / (window_energy * static_cast<double>(starts.size()));
    for (auto& v : est.values) v *= scale;
    return est;
}

SpectralEstimate disturbance_psd(std::span<const double> d, const std::vector<double>& grid) {
    if (d.empty()) {
        throw Error(ErrorKind::InvalidArgument, "disturbance must contain at least one sample");
    }
    if (grid.size() < 2) {
        throw Error(ErrorKind::InvalidArgument, "frequency grid needs at least 2 points");
    }
    const std::size_t n = d.size();
    const double last = d.back();
    const bool held = std::abs(last) > 0.0;

    SpectralEstimate est;
    est.grid = grid;
    est.values.assign(grid.size(), 0.0);
    std::size_t undefined_bins = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double omega = grid[k];
        const bool at_dc = std::abs(std::sin(omega / 2.0)) < 1e-12;
        if (held && at_dc) {
            ++undefined_bins;
            continue;
        }
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t t = 0; t < n; ++t) {
            acc += d[t] * std::polar(1.0, -omega * static_cast<double>(t + 1));
        }
        if (held) {
            acc += last * std::polar(1.0, -omega * static_cast<double>(n + 1)) / (1.0 - std::polar(1.0, -omega));
        }
        est.values[k] = std::norm(acc) / static_cast<double>(n);
    }
    if (undefined_bins > 0) {
        for (std::size_t k = 0; k < grid.size(); ++k) {
            if (std::abs(std::sin(grid[k] / 2.0)) >= 1e-12) continue;
            // nearest bin away from DC
            double best = std::numeric_limits<double>::infinity();
            double value = 0.0;
            for (std::size_t j = 0; j < grid.size(); ++j) {
                if (std::abs(std::sin(grid[j] / 2.0)) < 1e-12) continue;
                if (std::abs(grid[j] - grid[k]) < best) {
                    best = std::abs(grid[j] - grid[k]);
                    value = est.values[j];
                }
            }
            est.values[k] = value;
        }
    }
    return est;
}

FilterMagnitude design_filter(FilterKind kind, const TransferOperator& Qd, std::span<const double> A_current,
                              const DesignSpectra& spectra) {
    const bool uses_output = kind == FilterKind::PeLin || kind == FilterKind::PeNlin;
    const bool uses_a = kind == FilterKind::PeLin || kind == FilterKind::CorrLin;

    std::vector<double> grid;
    std::vector<double> denominator;
    if (uses_output) {
        if (!spectra.output_psd) {
            throw Error(ErrorKind::InvalidArgument, std::string(to_string(kind)) + " design needs the output spectrum");
        }
        grid = spectra.output_psd->grid;
        denominator = spectra.output_psd->values;
    } else {
        if (!spectra.cross_psd) {
            throw Error(ErrorKind::InvalidArgument, std::string(to_string(kind)) + " design needs the cross spectrum");
        }
        grid = spectra.cross_psd->grid;
        denominator.reserve(grid.size());
        for (const auto& c : spectra.cross_psd->values) denominator.push_back(std::norm(c));
    }
    const SpectralEstimate& dist = spectra.disturbance_psd;
    if (grid.size() != denominator.size() || dist.grid.size() != dist.values.size() || !same_span(grid, dist.grid)) {
        throw Error(ErrorKind::GridMismatch, "disturbance and data spectra must cover the same frequency range");
    }
    const bool aligned = same_grid(grid, dist.grid);

    const double max_den = *std::max_element(denominator.begin(), denominator.end());
    const double floor = kSpectrumFloor * max_den;

    std::vector<double> k2(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double omega = grid[k];
        const double qd2 = std::norm(Qd.frequency_response(omega));
        const double phi_d = aligned ? dist.values[k] : interp(dist.grid, dist.values, omega);
        double value = qd2 * qd2 * phi_d / std::max(denominator[k], floor);
        if (uses_a) {
            value /= std::norm(poly::eval(A_current, omega));
        }
        k2[k] = std::isfinite(value) ? value : 0.0;
    }
    const double cap = kFilterCap * median(k2);
    if (cap > 0.0) {
        for (double& v : k2) v = std::min(v, cap);
    }

    FilterMagnitude K;
    K.grid = std::move(grid);
    K.mag.resize(k2.size());
    for (std::size_t k = 0; k < k2.size(); ++k) K.mag[k] = std::sqrt(k2[k]);
    return K;
}

std::size_t zero_phase_fft_length(const FilterMagnitude& K, std::size_t n) {
    const std::size_t implied = 2 * (K.grid.size() - 1);
    return detail::next_pow2(std::max<std::size_t>({2 * n, implied, 2}));
}

Series apply_zero_phase(const FilterMagnitude& K, std::span<const double> x) {
    if (K.grid.size() < 2 || K.grid.size() != K.mag.size()) {
        throw Error(ErrorKind::InvalidArgument, "filter magnitude needs at least 2 grid points");
    }
    if (x.empty()) {
        return {};
    }
    const std::size_t nfft = zero_phase_fft_length(K, x.size());
    auto bins = detail::rfft(x, nfft);
    for (std::size_t k = 0; k < bins.size(); ++k) {
        const double omega = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(nfft);
        bins[k] *= K.at(omega);
    }
    Series out = detail::irfft(bins, nfft);
    out.resize(x.size());
    return out;
}

} // namespace ddlr
