#pragma once

// Virtual regulation experiment built from measured data: pretend the record
// came from a noise-free loop closed with the ideal controller and r = 0.

#include "ddlr/lti.hpp"
#include "ddlr/signals.hpp"

#include <filesystem>

namespace ddlr {

struct VirtualSignals {
    Series e_bar;  // -y
    Series d_bar;  // Qd^-1 y
    Series u_bar;  // u - d_bar
    Series ef_bar; // Cf e_bar
    // Number of leading dataset samples dropped; series index i maps to
    // dataset sample offset + i.
    std::size_t offset = 0;

    [[nodiscard]] std::size_t size() const noexcept { return u_bar.size(); }

    // Drift diagnostic: Qd^-1 usually has a pole at z = 1, so d_bar may wander
    // on noisy data.
    [[nodiscard]] double max_abs_disturbance() const;
};

// Zero initial conditions throughout. discard_prefix drops that many leading
// samples after filtering. Throws Error(NonInvertible) if Qd is zero.
[[nodiscard]] VirtualSignals make_virtual(const Dataset& d, const TransferOperator& Qd,
                                          const TransferOperator& Cf, std::size_t discard_prefix = 0);

// Debug dump, header "t,e_bar,d_bar,u_bar,ef_bar".
void save_virtual(const VirtualSignals& vs, const std::filesystem::path& path);

} // namespace ddlr
