#pragma once

// Rational transfer operators in the backward shift q^-1, their algebra,
// difference-equation simulation, closed-loop sensitivities and pole checks.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace ddlr {

using Series = std::vector<double>;
using Poly = std::vector<double>;

inline constexpr double kTrimTolerance = 1e-12;
inline constexpr double kStabilityTolerance = 1e-9;
inline constexpr double kRationalTolerance = 1e-8;

// H(q) = q^lead * (num[0] + num[1] q^-1 + ...) / (1 + den[1] q^-1 + ...).
//
// lead is a non-negative time advance. It is zero for every causal operator
// and only becomes positive when inverting an operator whose numerator starts
// with pure delays; offline filtering handles the advance by reading ahead.
class TransferOperator {
public:
    // Identity operator.
    TransferOperator();

    // Normalizes so den[0] == 1 and trims near-zero trailing coefficients.
    // Throws Error(ZeroLeadingDenominator) if den is empty or den[0] == 0.
    TransferOperator(Poly num, Poly den, int lead = 0);

    [[nodiscard]] static TransferOperator identity() { return {}; }
    [[nodiscard]] static TransferOperator zero() { return TransferOperator({0.0}, {1.0}); }
    [[nodiscard]] static TransferOperator gain(double k) { return TransferOperator({k}, {1.0}); }
    // q^-n
    [[nodiscard]] static TransferOperator delay(std::size_t n);

    [[nodiscard]] const Poly& num() const noexcept { return num_; }
    [[nodiscard]] const Poly& den() const noexcept { return den_; }
    [[nodiscard]] int lead() const noexcept { return lead_; }

    [[nodiscard]] bool is_zero() const noexcept;
    [[nodiscard]] bool is_causal() const noexcept { return lead_ == 0; }

    // H(e^{jw})
    [[nodiscard]] std::complex<double> frequency_response(double omega) const;

    // H(1); infinite when den(1) == 0.
    [[nodiscard]] double static_gain() const;

private:
    Poly num_;
    Poly den_;
    int lead_ = 0;
};

struct PolePlacementReport {
    std::vector<std::complex<double>> roots;
    double max_modulus = 0.0;
    bool stable = true;
};

struct Sensitivities {
    TransferOperator S; // (1 + G C)^-1
    TransferOperator T; // 1 - S
    TransferOperator Q; // G S
};

// Free-function spellings of the operator algebra.
[[nodiscard]] TransferOperator tf_make(Poly num, Poly den);
[[nodiscard]] TransferOperator tf_mul(const TransferOperator& a, const TransferOperator& b);
[[nodiscard]] TransferOperator tf_add(const TransferOperator& a, const TransferOperator& b);
[[nodiscard]] TransferOperator tf_sub(const TransferOperator& a, const TransferOperator& b);
[[nodiscard]] TransferOperator tf_neg(const TransferOperator& a);
[[nodiscard]] TransferOperator tf_scale(const TransferOperator& a, double k);
// Throws Error(NonInvertible) if the numerator is zero.
[[nodiscard]] TransferOperator tf_inv(const TransferOperator& a);

[[nodiscard]] inline TransferOperator operator*(const TransferOperator& a, const TransferOperator& b) {
    return tf_mul(a, b);
}
[[nodiscard]] inline TransferOperator operator+(const TransferOperator& a, const TransferOperator& b) {
    return tf_add(a, b);
}
[[nodiscard]] inline TransferOperator operator-(const TransferOperator& a, const TransferOperator& b) {
    return tf_sub(a, b);
}
[[nodiscard]] inline TransferOperator operator-(const TransferOperator& a) { return tf_neg(a); }

// a == b as rational functions, by cross-multiplication:
// max|coef(num_a den_b - num_b den_a)| < tol * (1 + max|coef|).
[[nodiscard]] bool rational_equal(const TransferOperator& a, const TransferOperator& b,
                                  double tol = kRationalTolerance);

// Zero-initial-condition direct-form difference equation. Operators with a
// positive lead read ahead in the input, treating samples past the end as zero.
[[nodiscard]] Series simulate(const TransferOperator& h, std::span<const double> input);

// Throws Error(DegenerateLoop) if 1 + G C is identically zero or the loop has
// no causal solution (zero leading coefficient of the characteristic polynomial).
[[nodiscard]] Sensitivities closed_loop(const TransferOperator& G, const TransferOperator& C);

[[nodiscard]] PolePlacementReport stability_report(const TransferOperator& h,
                                                   double tol = kStabilityTolerance);

// Polynomial helpers over coefficient lists in q^-1.
namespace poly {
[[nodiscard]] Poly mul(std::span<const double> a, std::span<const double> b);
[[nodiscard]] Poly add(std::span<const double> a, std::span<const double> b);
[[nodiscard]] Poly scale(std::span<const double> a, double k);
[[nodiscard]] Poly shift(std::span<const double> a, std::size_t n); // multiply by q^-n
[[nodiscard]] std::complex<double> eval(std::span<const double> a, double omega); // at q = e^{jw}
[[nodiscard]] Poly trim(Poly a, double tol = kTrimTolerance);
} // namespace poly

} // namespace ddlr
