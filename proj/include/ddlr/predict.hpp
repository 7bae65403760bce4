#pragma once

// Controller parametrization and the two one-step-ahead predictors of the
// virtual control action.

#include "ddlr/lti.hpp"
#include "ddlr/virtual_signals.hpp"

#include <Eigen/Dense>

namespace ddlr {

// C(q, rho) = B(q, rho) / A(q, rho) * Cf(q) with
//   A = 1 + a_1 q^-1 + ... + a_na q^-na,  B = b_0 + ... + b_nb q^-nb,
//   rho = [a_1 .. a_na, b_0 .. b_nb].
class ControllerSpec {
public:
    ControllerSpec(std::size_t n_a, std::size_t n_b, TransferOperator fixed, Eigen::VectorXd rho);
    // rho = 0
    ControllerSpec(std::size_t n_a, std::size_t n_b, TransferOperator fixed);

    [[nodiscard]] std::size_t n_a() const noexcept { return n_a_; }
    [[nodiscard]] std::size_t n_b() const noexcept { return n_b_; }
    [[nodiscard]] std::size_t parameter_count() const noexcept { return n_a_ + n_b_ + 1; }
    [[nodiscard]] const TransferOperator& fixed() const noexcept { return fixed_; }
    [[nodiscard]] const Eigen::VectorXd& rho() const noexcept { return rho_; }

    // Same structure, new parameters. Throws Error(DimensionMismatch) on wrong length.
    [[nodiscard]] ControllerSpec with_rho(const Eigen::VectorXd& rho) const;

    [[nodiscard]] Poly A() const;
    [[nodiscard]] Poly B() const;
    // Ci = B / A
    [[nodiscard]] TransferOperator identified() const;
    // C = Ci * Cf
    [[nodiscard]] TransferOperator realize() const;

private:
    std::size_t n_a_;
    std::size_t n_b_;
    TransferOperator fixed_;
    Eigen::VectorXd rho_;
};

// N x (n_a + n_b + 1), row t = [-u_bar(t-1) .. -u_bar(t-n_a), ef_bar(t) .. ef_bar(t-n_b)],
// lags reaching before the first sample are zero.
using RegressorMatrix = Eigen::MatrixXd;

// Throws Error(TooFewSamples) if N < n_a + n_b + 1.
[[nodiscard]] RegressorMatrix build_regressor(const VirtualSignals& vs, std::size_t n_a, std::size_t n_b);

// Same layout built from arbitrary (already filtered) series.
[[nodiscard]] RegressorMatrix build_regressor(std::span<const double> u_bar, std::span<const double> ef_bar,
                                              std::size_t n_a, std::size_t n_b);

// eps_lin(t) = u_bar(t) - phi(t)^T rho  ==  A u_bar - B ef_bar.
// Throws Error(DimensionMismatch) if rho does not fit the spec's orders.
[[nodiscard]] Series eps_linear(const ControllerSpec& spec, const VirtualSignals& vs);

// eps_nl(t) = u_bar(t) - (B/A) ef_bar(t)
[[nodiscard]] Series eps_nonlinear(const ControllerSpec& spec, const VirtualSignals& vs);

} // namespace ddlr
