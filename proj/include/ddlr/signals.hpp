#pragma once

// Excitation and noise generation, simulated experiments, dataset CSV files.

#include "ddlr/lti.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>

namespace ddlr {

enum class ExperimentKind { OpenLoop, ClosedLoop };

// One experiment's record. Closed-loop datasets carry the reference r; open-loop
// ones do not. All present series share the same length.
class Dataset {
public:
    static Dataset open_loop(Series u, Series y);
    static Dataset closed_loop(Series r, Series u, Series y);

    [[nodiscard]] ExperimentKind kind() const noexcept { return kind_; }
    [[nodiscard]] std::size_t size() const noexcept { return u_.size(); }
    [[nodiscard]] const Series& u() const noexcept { return u_; }
    [[nodiscard]] const Series& y() const noexcept { return y_; }
    // Throws Error(InvalidArgument) for open-loop data.
    [[nodiscard]] const Series& r() const;
    [[nodiscard]] bool has_r() const noexcept { return r_.has_value(); }

    // u for open-loop data, r for closed-loop data.
    [[nodiscard]] const Series& excitation() const;

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    Dataset(ExperimentKind kind, std::optional<Series> r, Series u, Series y);

    ExperimentKind kind_;
    std::optional<Series> r_;
    Series u_;
    Series y_;
};

struct SquareWave {
    std::size_t period = 300;
    double amplitude = 1.0;
    std::size_t samples = 3000;
};

struct ExperimentConfig {
    TransferOperator plant;
    ExperimentKind mode = ExperimentKind::OpenLoop;
    std::optional<TransferOperator> initial_controller;
    std::variant<SquareWave, Series> excitation = SquareWave{};
    double noise_variance = 0.0;
    std::uint64_t seed = 0;
};

// A simulated experiment together with the noise realization that produced it.
// The noise is kept so noisy identities can be checked exactly.
struct ExperimentRecord {
    Dataset data;
    Series noise;
};

// +amplitude for the first half of each period, -amplitude for the second,
// starting high at the first sample. Throws Error(BadPeriod) if period < 2.
[[nodiscard]] Series square_wave(std::size_t period, double amplitude, std::size_t n);

// i.i.d. N(0, variance). Uniforms come from std::mt19937_64 seeded with `seed`
// (53-bit mantissa draws), normals from the Box-Muller transform; the output is
// therefore identical on every conforming standard library.
[[nodiscard]] Series gaussian_noise(std::uint64_t seed, double variance, std::size_t n);

// Open loop:   u = excitation, y = G u + v.
// Closed loop: r = excitation, y = T0 r + S0 v, u = G^-1 T0 r - C0 S0 v
//              (computed as C0 S0 (r - v), which is the same operator).
[[nodiscard]] ExperimentRecord run_experiment_record(const ExperimentConfig& cfg);
[[nodiscard]] Dataset run_experiment(const ExperimentConfig& cfg);

// Monte Carlo convention: run i uses base_seed + i.
[[nodiscard]] constexpr std::uint64_t run_seed(std::uint64_t base_seed, std::size_t run_index) {
    return base_seed + static_cast<std::uint64_t>(run_index);
}

// CSV with header "t,u,y" or "t,r,u,y"; t is a 1-based index and values are
// written in scientific notation with 17 significant digits.
void save_dataset(const Dataset& d, const std::filesystem::path& path);
[[nodiscard]] Dataset load_dataset(const std::filesystem::path& path);

// Shared number formatting for every text output (17 significant digits).
[[nodiscard]] std::string format_double(double value);

} // namespace ddlr
