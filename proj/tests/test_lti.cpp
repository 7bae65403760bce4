#include "support.hpp"

#include "ddlr/benchmark.hpp"
#include "ddlr/error.hpp"
#include "ddlr/evaluate.hpp"
#include "ddlr/lti.hpp"
#include "ddlr/signals.hpp"

#include <numbers>

using namespace ddlr;
using ddlr::test::max_abs_diff;
using bench::Realization;

namespace {

const TransferOperator kG = bench::plant(Realization::AsPrinted);
const TransferOperator kQd = bench::reference_model(Realization::AsPrinted);

void check_poly(const Poly& got, const Poly& want, double tol = 1e-12) {
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(tol));
}

} // namespace

TEST_CASE("construction normalizes and trims") {
    const TransferOperator id({1.0}, {1.0});
    CHECK(rational_equal(id, TransferOperator::identity()));

    const TransferOperator h({1.0}, {2.0, -1.0});
    check_poly(h.num(), {0.5});
    check_poly(h.den(), {1.0, -0.5});

    const TransferOperator t({1.0, 2.0, 1e-14}, {1.0, 0.5, 0.0});
    CHECK(t.num().size() == 2);
    CHECK(t.den().size() == 2);

    CHECK_THROWS_AS(TransferOperator({1.0}, {}), Error);
    try {
        (void)TransferOperator({1.0}, {0.0, 1.0});
        FAIL("expected a throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ZeroLeadingDenominator);
    }
}

TEST_CASE("benchmark plant has unit static gain and the printed coefficients") {
    check_poly(kG.num(), {1.0 / 120.0, -0.7 / 120.0});
    check_poly(kG.den(), {1.0, -1.9, 0.9025});
    CHECK(kG.static_gain() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(kQd.frequency_response(0.3)) == doctest::Approx(0.03703392498360768).epsilon(1e-12));
}

TEST_CASE("operator algebra") {
    const TransferOperator a({1.0, 0.5}, {1.0, -0.3});
    const TransferOperator b({0.2}, {1.0, 0.4});
    CHECK(rational_equal(a * tf_inv(a), TransferOperator::identity()));
    CHECK(rational_equal(a + b - b, a));
    CHECK(rational_equal(tf_scale(a, 2.0), a + a));
    CHECK(rational_equal(-a + a, TransferOperator::zero()));
    CHECK(rational_equal(tf_make({0.0, 1.0}, {1.0}), TransferOperator::delay(1)));
    CHECK_THROWS_AS((void)tf_inv(TransferOperator::zero()), Error);
    // frequency response is multiplicative
    for (double w : {0.0, 0.4, 2.0}) {
        const auto lhs = (a * b).frequency_response(w);
        const auto rhs = a.frequency_response(w) * b.frequency_response(w);
        CHECK(std::abs(lhs - rhs) < 1e-12);
    }
}

TEST_CASE("ideal controller for the benchmark carries one sample of delay") {
    const TransferOperator Cd = tf_inv(kQd) - tf_inv(kG);
    const Poly num = poly::scale(poly::mul(Poly{0.0, 1.0}, poly::mul(Poly{1.0, -0.95}, Poly{1.0, -0.95})), 12.0);
    const Poly den = poly::mul(Poly{1.0, -0.7}, Poly{1.0, -1.0});
    CHECK(rational_equal(Cd, TransferOperator(num, den)));
    CHECK(Cd.is_causal());
    CHECK(rational_equal(ideal_controller(kG, kQd), Cd));
}

TEST_CASE("inverting a delayed operator yields a lead") {
    const TransferOperator d2 = TransferOperator::delay(2) * TransferOperator({1.0, -0.5}, {1.0});
    const TransferOperator inv = tf_inv(d2);
    CHECK(inv.lead() == 2);
    const Series x{1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
    const Series back = simulate(inv, simulate(d2, x));
    // the last two samples were pushed past the end by the delay
    CHECK(max_abs_diff(std::span(back).first(4), std::span(x).first(4)) < 1e-12);
}

TEST_CASE("simulate") {
    const Series x{1.0, -2.0, 3.5, 0.25};
    CHECK(max_abs_diff(simulate(TransferOperator::identity(), x), x) == 0.0);
    const Series delayed = simulate(tf_make({0.0, 1.0}, {1.0}), x);
    CHECK(max_abs_diff(delayed, Series{0.0, 1.0, -2.0, 3.5}) == 0.0);

    const Series step(600, 1.0);
    const Series ys = simulate(kG, step);
    CHECK(std::abs(ys.back() - 1.0) < 1e-6);

    // values computed independently with a reference difference-equation solver
    const Series u = square_wave(300, 1.0, 3000);
    const Series y = simulate(kG, u);
    const Series head{0.00833333333333333, 0.01833333333333333, 0.0298125, 0.04259791666666667, 0.05653026041666667,
                      0.07146286979166667};
    for (std::size_t i = 0; i < head.size(); ++i) CHECK(y[i] == doctest::Approx(head[i]).epsilon(1e-7));
    CHECK(y[149] == doctest::Approx(0.9965473728249208).epsilon(1e-12));
    CHECK(y[2999] == doctest::Approx(-0.9931006181165334).epsilon(1e-12));
}

TEST_CASE("closed loop sensitivities") {
    SUBCASE("open loop when C = 0") {
        const Sensitivities s = closed_loop(kG, TransferOperator::zero());
        CHECK(rational_equal(s.S, TransferOperator::identity()));
        CHECK(rational_equal(s.T, TransferOperator::zero()));
        CHECK(rational_equal(s.Q, kG));
    }
    SUBCASE("ideal controller realizes the reference model") {
        const Sensitivities s = closed_loop(kG, ideal_controller(kG, kQd));
        CHECK(rational_equal(s.Q, kQd));
        CHECK(rational_equal(s.S + s.T, TransferOperator::identity()));
    }
    SUBCASE("initial controller characteristic polynomial") {
        const Sensitivities s = closed_loop(kG, bench::initial_controller(Realization::AsPrinted));
        check_poly(s.S.den(), {1.0, -3.2, 3.6875, -1.77175, 0.2842875}, 1e-10);
        const auto rep = stability_report(s.S);
        CHECK(rep.stable);
        CHECK(rep.max_modulus == doctest::Approx(0.978).epsilon(1e-3));
    }
    SUBCASE("degenerate loop") {
        // G C == -1 identically
        CHECK_THROWS_AS((void)closed_loop(TransferOperator::gain(1.0), TransferOperator::gain(-1.0)), Error);
    }
}

TEST_CASE("stability report") {
    auto roots_of = [](Poly den) { return stability_report(TransferOperator({1.0}, std::move(den))); };
    const auto a = roots_of({1.0, -0.95});
    CHECK(a.stable);
    CHECK(a.max_modulus == doctest::Approx(0.95));
    const auto b = roots_of({1.0, -1.0});
    CHECK_FALSE(b.stable);
    CHECK(b.max_modulus == doctest::Approx(1.0));
    const auto c = stability_report(kQd);
    CHECK(c.stable);
    REQUIRE(c.roots.size() == 3);
    std::vector<double> mods;
    for (auto r : c.roots) mods.push_back(std::abs(r));
    std::sort(mods.begin(), mods.end());
    CHECK(mods[0] == doctest::Approx(0.9).epsilon(1e-6));
    CHECK(mods[1] == doctest::Approx(0.95).epsilon(1e-6));
    CHECK(mods[2] == doctest::Approx(0.95).epsilon(1e-6));
}

TEST_CASE("polynomial helpers") {
    check_poly(poly::mul(Poly{1.0, 2.0}, Poly{1.0, -2.0}), {1.0, 0.0, -4.0});
    check_poly(poly::add(Poly{1.0}, Poly{0.0, 3.0}), {1.0, 3.0});
    check_poly(poly::shift(Poly{1.0, 2.0}, 2), {0.0, 0.0, 1.0, 2.0});
    CHECK(poly::trim(Poly{1.0, 0.0, 1e-13}).size() == 1);
    const auto v = poly::eval(Poly{1.0, -1.0}, std::numbers::pi);
    CHECK(std::abs(v - std::complex<double>(2.0, 0.0)) < 1e-12);
}
