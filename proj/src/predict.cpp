#include "ddlr/predict.hpp"

#include "ddlr/error.hpp"

namespace ddlr {

ControllerSpec::ControllerSpec(std::size_t n_a, std::size_t n_b, TransferOperator fixed, Eigen::VectorXd rho)
    : n_a_(n_a), n_b_(n_b), fixed_(std::move(fixed)), rho_(std::move(rho)) {
    if (static_cast<std::size_t>(rho_.size()) != parameter_count()) {
        throw Error(ErrorKind::DimensionMismatch, "rho must have n_a + n_b + 1 = " +
                                                      std::to_string(parameter_count()) + " entries, got " +
                                                      std::to_string(rho_.size()));
    }
}

ControllerSpec::ControllerSpec(std::size_t n_a, std::size_t n_b, TransferOperator fixed)
    : ControllerSpec(n_a, n_b, std::move(fixed), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_a + n_b + 1))) {}

ControllerSpec ControllerSpec::with_rho(const Eigen::VectorXd& rho) const {
    return ControllerSpec(n_a_, n_b_, fixed_, rho);
}

Poly ControllerSpec::A() const {
    Poly a(n_a_ + 1);
    a[0] = 1.0;
    for (std::size_t i = 0; i < n_a_; ++i) a[i + 1] = rho_[static_cast<Eigen::Index>(i)];
    return a;
}

Poly ControllerSpec::B() const {
    Poly b(n_b_ + 1);
    for (std::size_t i = 0; i <= n_b_; ++i) b[i] = rho_[static_cast<Eigen::Index>(n_a_ + i)];
    return b;
}

TransferOperator ControllerSpec::identified() const { return TransferOperator(B(), A()); }

TransferOperator ControllerSpec::realize() const { return tf_mul(identified(), fixed_); }

RegressorMatrix build_regressor(std::span<const double> u_bar, std::span<const double> ef_bar, std::size_t n_a,
                                std::size_t n_b) {
    if (u_bar.size() != ef_bar.size()) {
        throw Error(ErrorKind::DimensionMismatch, "u_bar and ef_bar lengths differ");
    }
    const std::size_t n = u_bar.size();
    const std::size_t p = n_a + n_b + 1;
    if (n < p) {
        throw Error(ErrorKind::TooFewSamples,
                    "need at least " + std::to_string(p) + " samples, got " + std::to_string(n));
    }
    RegressorMatrix phi = RegressorMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (std::size_t k = 1; k <= n_a; ++k) {
        auto col = phi.col(static_cast<Eigen::Index>(k - 1));
        for (std::size_t t = k; t < n; ++t) col[static_cast<Eigen::Index>(t)] = -u_bar[t - k];
    }
    for (std::size_t k = 0; k <= n_b; ++k) {
        auto col = phi.col(static_cast<Eigen::Index>(n_a + k));
        for (std::size_t t = k; t < n; ++t) col[static_cast<Eigen::Index>(t)] = ef_bar[t - k];
    }
    return phi;
}

RegressorMatrix build_regressor(const VirtualSignals& vs, std::size_t n_a, std::size_t n_b) {
    return build_regressor(vs.u_bar, vs.ef_bar, n_a, n_b);
}

Series eps_linear(const ControllerSpec& spec, const VirtualSignals& vs) {
    const RegressorMatrix phi = build_regressor(vs, spec.n_a(), spec.n_b());
    const Eigen::VectorXd prediction = phi * spec.rho();
    Series eps(vs.size());
    for (std::size_t t = 0; t < eps.size(); ++t) {
        eps[t] = vs.u_bar[t] - prediction[static_cast<Eigen::Index>(t)];
    }
    return eps;
}

Series eps_nonlinear(const ControllerSpec& spec, const VirtualSignals& vs) {
    const Series predicted = simulate(spec.identified(), vs.ef_bar);
    Series eps(vs.size());
    for (std::size_t t = 0; t < eps.size(); ++t) eps[t] = vs.u_bar[t] - predicted[t];
    return eps;
}

} // namespace ddlr
