#include "support.hpp"

#include "ddlr/benchmark.hpp"
#include "ddlr/estimate.hpp"
#include "ddlr/kernels.hpp"

#include <random>

using namespace ddlr;
namespace k = ddlr::kernels;

namespace {

Series uniform(std::uint64_t seed, std::size_t n) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Series s(n);
    for (auto& v : s) v = d(rng);
    return s;
}

// Reference definitions, written out without any blocking.
double naive_dot(const Series& a, const Series& b) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
    return static_cast<double>(s);
}

Series naive_xcorr(const Series& e, const Series& x, std::size_t L) {
    const auto n = static_cast<std::ptrdiff_t>(e.size());
    Series out(2 * L + 1, 0.0);
    for (std::size_t j = 0; j <= 2 * L; ++j) {
        const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(L) - static_cast<std::ptrdiff_t>(j);
        for (std::ptrdiff_t t = 0; t < n; ++t) {
            const std::ptrdiff_t s = t + shift;
            if (s >= 0 && s < n) out[j] += e[static_cast<std::size_t>(t)] * x[static_cast<std::size_t>(s)];
        }
    }
    return out;
}

struct IsaGuard {
    ~IsaGuard() { k::reset_isa(); }
};

} // namespace

TEST_CASE("isa selection") {
    IsaGuard guard;
    CHECK(k::isa_available(k::Isa::Scalar));
    CHECK(k::set_isa(k::Isa::Scalar));
    CHECK(k::active_isa() == k::Isa::Scalar);
    CHECK(k::to_string(k::Isa::Avx2) == "avx2");
    if (!k::isa_available(k::Isa::Avx2)) {
        CHECK_FALSE(k::set_isa(k::Isa::Avx2));
        CHECK(k::active_isa() == k::Isa::Scalar);
    }
}

TEST_CASE("scalar kernels match the definitions") {
    IsaGuard guard;
    REQUIRE(k::set_isa(k::Isa::Scalar));
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 16u, 33u, 1001u}) {
        const Series a = uniform(n, n);
        const Series b = uniform(n + 100, n);
        CHECK(k::dot(a, b) == doctest::Approx(naive_dot(a, b)).epsilon(1e-13));
        CHECK(k::sum_squares(a) == doctest::Approx(naive_dot(a, a)).epsilon(1e-13));
    }
    const Series e = uniform(1, 97);
    const Series x = uniform(2, 97);
    for (std::size_t L : {0u, 1u, 5u, 96u, 120u}) {
        Series out(2 * L + 1);
        k::lagged_xcorr(e, x, L, out);
        CHECK(ddlr::test::max_abs_diff(out, naive_xcorr(e, x, L)) < 1e-12);
    }
    Series out(3);
    CHECK_THROWS((void)k::dot(e, Series(3, 0.0)));
    CHECK_THROWS(k::lagged_xcorr(e, Series(3, 0.0), 1, out));
    CHECK_THROWS(k::lagged_xcorr(e, x, 2, out));
}

TEST_CASE("avx2 kernels agree with scalar ones") {
    if (!k::isa_available(k::Isa::Avx2)) {
        MESSAGE("AVX2 not available on this machine or build; equivalence not exercised");
        return;
    }
    IsaGuard guard;
    for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 8u, 15u, 16u, 17u, 31u, 64u, 1001u, 3000u}) {
        const Series a = uniform(3 * n + 1, n);
        const Series b = uniform(3 * n + 2, n);
        REQUIRE(k::set_isa(k::Isa::Scalar));
        const double ds = k::dot(a, b);
        const double ss = k::sum_squares(a);
        REQUIRE(k::set_isa(k::Isa::Avx2));
        const double dv = k::dot(a, b);
        const double sv = k::sum_squares(a);
        const double scale = std::max(1.0, naive_dot(a, a));
        CHECK(std::abs(ds - dv) <= 1e-13 * scale);
        CHECK(std::abs(ss - sv) <= 1e-13 * scale);
    }
    const Series e = uniform(5, 3000);
    const Series x = uniform(6, 3000);
    for (std::size_t L : {0u, 3u, 185u}) {
        Series s(2 * L + 1), v(2 * L + 1);
        REQUIRE(k::set_isa(k::Isa::Scalar));
        k::lagged_xcorr(e, x, L, s);
        REQUIRE(k::set_isa(k::Isa::Avx2));
        k::lagged_xcorr(e, x, L, v);
        CHECK(ddlr::test::max_abs_diff(s, v) < 1e-11);
    }
}

TEST_CASE("tuning results do not depend on the kernel variant") {
    if (!k::isa_available(k::Isa::Avx2)) {
        MESSAGE("AVX2 not available; skipped");
        return;
    }
    IsaGuard guard;
    const auto r = bench::Realization::AsPrinted;
    const Dataset d = run_experiment(bench::experiment(r, ExperimentKind::OpenLoop, bench::kNoiseVariance, 21));
    for (const auto& cell : bench::matching_cells(r, bench::MatchingFilter::ReferenceModel)) {
        if (cell.experiment != ExperimentKind::OpenLoop || cell.tuning.method != Method::Correlation) continue;
        TuningConfig cfg = cell.tuning;
        cfg.max_simplex_iters = 200;
        REQUIRE(k::set_isa(k::Isa::Scalar));
        const TuningResult a = tune(cfg, d);
        REQUIRE(k::set_isa(k::Isa::Avx2));
        const TuningResult b = tune(cfg, d);
        const double rel = (a.rho_hat - b.rho_hat).lpNorm<Eigen::Infinity>() /
                           std::max(1.0, a.rho_hat.lpNorm<Eigen::Infinity>());
        CHECK(rel < 1e-8);
    }
}
