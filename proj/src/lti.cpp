#include "ddlr/lti.hpp"

#include "ddlr/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace ddlr {

namespace poly {

Poly mul(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) {
        return {0.0};
    }
    Poly out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            out[i + j] += a[i] * b[j];
        }
    }
    return out;
}

Poly add(std::span<const double> a, std::span<const double> b) {
    Poly out(std::max(a.size(), b.size()), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
    return out;
}

Poly scale(std::span<const double> a, double k) {
    Poly out(a.begin(), a.end());
    for (double& c : out) c *= k;
    return out;
}

Poly shift(std::span<const double> a, std::size_t n) {
    Poly out(n, 0.0);
    out.insert(out.end(), a.begin(), a.end());
    return out;
}

std::complex<double> eval(std::span<const double> a, double omega) {
    // Horner in z^-1 = e^{-jw}
    const std::complex<double> zinv = std::polar(1.0, -omega);
    std::complex<double> acc{0.0, 0.0};
    for (auto it = a.rbegin(); it != a.rend(); ++it) {
        acc = acc * zinv + *it;
    }
    return acc;
}

Poly trim(Poly a, double tol) {
    while (a.size() > 1 && std::abs(a.back()) < tol) {
        a.pop_back();
    }
    if (a.empty()) {
        a.push_back(0.0);
    }
    return a;
}

} // namespace poly

namespace {

bool all_zero(std::span<const double> a) {
    return std::all_of(a.begin(), a.end(), [](double c) { return std::abs(c) < kTrimTolerance; });
}

std::size_t leading_zeros(std::span<const double> a) {
    std::size_t k = 0;
    while (k < a.size() && std::abs(a[k]) < kTrimTolerance) ++k;
    return k;
}

double max_abs(std::span<const double> a) {
    double m = 0.0;
    for (double c : a) m = std::max(m, std::abs(c));
    return m;
}

} // namespace

TransferOperator::TransferOperator() : num_{1.0}, den_{1.0} {}

TransferOperator::TransferOperator(Poly num, Poly den, int lead) {
    if (den.empty() || den.front() == 0.0) {
        throw Error(ErrorKind::ZeroLeadingDenominator, "denominator must start with a non-zero coefficient");
    }
    if (num.empty()) {
        num.push_back(0.0);
    }
    const double d0 = den.front();
    for (double& c : num) c /= d0;
    for (double& c : den) c /= d0;

    num_ = poly::trim(std::move(num));
    den_ = poly::trim(std::move(den));
    if (all_zero(num_)) {
        num_ = {0.0};
        den_ = {1.0};
        lead_ = 0;
        return;
    }

    if (lead < 0) {
        num_ = poly::shift(num_, static_cast<std::size_t>(-lead));
        lead = 0;
    }
    // An advance cancels against leading pure delays of the numerator.
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(lead), leading_zeros(num_));
    num_.erase(num_.begin(), num_.begin() + static_cast<std::ptrdiff_t>(k));
    lead_ = lead - static_cast<int>(k);
}

TransferOperator TransferOperator::delay(std::size_t n) { return TransferOperator(poly::shift(Poly{1.0}, n), {1.0}); }

bool TransferOperator::is_zero() const noexcept { return all_zero(num_); }

std::complex<double> TransferOperator::frequency_response(double omega) const {
    return std::polar(1.0, omega * lead_) * poly::eval(num_, omega) / poly::eval(den_, omega);
}

double TransferOperator::static_gain() const {
    double n = 0.0;
    double d = 0.0;
    for (double c : num_) n += c;
    for (double c : den_) d += c;
    if (d == 0.0) {
        return n == 0.0 ? std::numeric_limits<double>::quiet_NaN() : std::numeric_limits<double>::infinity();
    }
    return n / d;
}

TransferOperator tf_make(Poly num, Poly den) { return TransferOperator(std::move(num), std::move(den)); }

TransferOperator tf_mul(const TransferOperator& a, const TransferOperator& b) {
    return TransferOperator(poly::mul(a.num(), b.num()), poly::mul(a.den(), b.den()), a.lead() + b.lead());
}

TransferOperator tf_add(const TransferOperator& a, const TransferOperator& b) {
    const int lead = std::max(a.lead(), b.lead());
    const Poly left = poly::shift(poly::mul(a.num(), b.den()), static_cast<std::size_t>(lead - a.lead()));
    const Poly right = poly::shift(poly::mul(b.num(), a.den()), static_cast<std::size_t>(lead - b.lead()));
    return TransferOperator(poly::add(left, right), poly::mul(a.den(), b.den()), lead);
}

TransferOperator tf_neg(const TransferOperator& a) { return tf_scale(a, -1.0); }

TransferOperator tf_scale(const TransferOperator& a, double k) {
    return TransferOperator(poly::scale(a.num(), k), a.den(), a.lead());
}

TransferOperator tf_sub(const TransferOperator& a, const TransferOperator& b) { return tf_add(a, tf_neg(b)); }

TransferOperator tf_inv(const TransferOperator& a) {
    if (a.is_zero()) {
        throw Error(ErrorKind::NonInvertible, "cannot invert a zero transfer operator");
    }
    // a = q^{l} q^{-k} N'/D  =>  a^-1 = q^{k-l} D/N'
    const std::size_t k = leading_zeros(a.num());
    Poly stripped(a.num().begin() + static_cast<std::ptrdiff_t>(k), a.num().end());
    return TransferOperator(a.den(), std::move(stripped), static_cast<int>(k) - a.lead());
}

bool rational_equal(const TransferOperator& a, const TransferOperator& b, double tol) {
    const int lead = std::max(a.lead(), b.lead());
    const Poly left = poly::shift(poly::mul(a.num(), b.den()), static_cast<std::size_t>(lead - a.lead()));
    const Poly right = poly::shift(poly::mul(b.num(), a.den()), static_cast<std::size_t>(lead - b.lead()));
    const Poly diff = poly::add(left, poly::scale(right, -1.0));
    const double scale = 1.0 + std::max(max_abs(left), max_abs(right));
    return max_abs(diff) < tol * scale;
}

Series simulate(const TransferOperator& h, std::span<const double> input) {
    const std::size_t n = input.size();
    const auto lead = static_cast<std::size_t>(h.lead());
    const Poly& b = h.num();
    const Poly& a = h.den();
    const std::size_t total = n + lead;

    Series out(total, 0.0);
    for (std::size_t t = 0; t < total; ++t) {
        double acc = 0.0;
        const std::size_t nb = std::min(b.size(), t + 1);
        for (std::size_t i = 0; i < nb; ++i) {
            const std::size_t idx = t - i;
            if (idx < n) acc += b[i] * input[idx];
        }
        const std::size_t na = std::min(a.size(), t + 1);
        for (std::size_t i = 1; i < na; ++i) {
            acc -= a[i] * out[t - i];
        }
        out[t] = acc;
    }
    if (lead > 0) {
        out.erase(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(lead));
    }
    return out;
}

Sensitivities closed_loop(const TransferOperator& G, const TransferOperator& C) {
    if (!G.is_causal() || !C.is_causal()) {
        throw Error(ErrorKind::DegenerateLoop, "closed loop requires causal plant and controller");
    }
    const Poly loop_den = poly::mul(G.den(), C.den());
    const Poly loop_num = poly::mul(G.num(), C.num());
    const Poly characteristic = poly::trim(poly::add(loop_den, loop_num));
    if (all_zero(characteristic)) {
        throw Error(ErrorKind::DegenerateLoop, "1 + G C is identically zero");
    }
    if (std::abs(characteristic.front()) < kTrimTolerance) {
        throw Error(ErrorKind::DegenerateLoop, "1 + G C has no causal inverse (ill-posed algebraic loop)");
    }
    return Sensitivities{
        TransferOperator(loop_den, characteristic),
        TransferOperator(loop_num, characteristic),
        TransferOperator(poly::mul(G.num(), C.den()), characteristic),
    };
}

PolePlacementReport stability_report(const TransferOperator& h, double tol) {
    PolePlacementReport report;
    const Poly& den = h.den();
    const std::size_t order = den.size() - 1;
    if (order == 0) {
        return report;
    }
    // den(q^-1) = 1 + d1 q^-1 + ... + dn q^-n  ->  z^n + d1 z^{n-1} + ... + dn
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(order),
                                                      static_cast<Eigen::Index>(order));
    for (std::size_t j = 0; j < order; ++j) {
        companion(0, static_cast<Eigen::Index>(j)) = -den[j + 1];
    }
    for (std::size_t i = 1; i < order; ++i) {
        companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    const auto& values = solver.eigenvalues();
    report.roots.reserve(order);
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        report.roots.push_back(values[i]);
        report.max_modulus = std::max(report.max_modulus, std::abs(values[i]));
    }
    report.stable = report.max_modulus < 1.0 - tol;
    return report;
}

} // namespace ddlr
