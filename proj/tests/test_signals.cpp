#include "support.hpp"

#include "ddlr/benchmark.hpp"
#include "ddlr/error.hpp"
#include "ddlr/signals.hpp"

#include <filesystem>
#include <fstream>
#include <numeric>

using namespace ddlr;
using ddlr::test::max_abs_diff;
using bench::Realization;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("ddlr_test_" + name);
}

} // namespace

TEST_CASE("square wave") {
    const Series s = square_wave(4, 1.0, 4);
    CHECK(s == Series{1.0, 1.0, -1.0, -1.0});
    const Series p = square_wave(300, 1.0, 3000);
    CHECK(p.size() == 3000);
    CHECK(p[149] == 1.0);
    CHECK(p[150] == -1.0);
    CHECK(p[300] == 1.0);
    CHECK(std::accumulate(p.begin(), p.end(), 0.0) == 0.0);
    CHECK(square_wave(5, 2.0, 3) == Series{2.0, 2.0, -2.0});
    CHECK_THROWS_AS((void)square_wave(1, 1.0, 10), Error);
}

TEST_CASE("gaussian noise") {
    CHECK(gaussian_noise(3, 0.0, 10) == Series(10, 0.0));
    const Series a = gaussian_noise(42, 0.0025, 100000);
    const Series b = gaussian_noise(42, 0.0025, 100000);
    CHECK(a == b);
    CHECK(gaussian_noise(43, 0.0025, 10) != Series(a.begin(), a.begin() + 10));
    const double mean = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
    double var = 0.0;
    for (double v : a) var += (v - mean) * (v - mean);
    var /= static_cast<double>(a.size() - 1);
    CHECK(std::abs(var - 0.0025) < 0.05 * 0.0025);
    CHECK(std::abs(mean) < 5.0 * 0.05 / std::sqrt(100000.0));
}

TEST_CASE("dataset invariants") {
    CHECK_THROWS_AS((void)Dataset::open_loop({1.0, 2.0}, {1.0}), Error);
    CHECK_THROWS_AS((void)Dataset::closed_loop({1.0}, {1.0, 2.0}, {1.0, 2.0}), Error);
    const Dataset ol = Dataset::open_loop({1.0}, {2.0});
    CHECK_FALSE(ol.has_r());
    CHECK_THROWS_AS((void)ol.r(), Error);
    CHECK(&ol.excitation() == &ol.u());
    const Dataset cl = Dataset::closed_loop({3.0}, {1.0}, {2.0});
    CHECK(&cl.excitation() == &cl.r());
}

TEST_CASE("open-loop experiment") {
    const auto cfg = bench::experiment(Realization::AsPrinted, ExperimentKind::OpenLoop, 0.0, 1);
    const Dataset d = run_experiment(cfg);
    CHECK(d.kind() == ExperimentKind::OpenLoop);
    CHECK(d.size() == 3000);
    CHECK(d.y()[149] == doctest::Approx(0.9965473728249208).epsilon(1e-12));
    CHECK(d.y()[2999] == doctest::Approx(-0.9931006181165334).epsilon(1e-12));

    SUBCASE("step input gives the step response") {
        ExperimentConfig step = cfg;
        step.excitation = Series(50, 1.0);
        const Dataset s = run_experiment(step);
        CHECK(max_abs_diff(s.y(), simulate(cfg.plant, Series(50, 1.0))) == 0.0);
    }
    SUBCASE("noise enters additively at the output") {
        const auto noisy = bench::experiment(Realization::AsPrinted, ExperimentKind::OpenLoop, 0.0025, 9);
        const ExperimentRecord rec = run_experiment_record(noisy);
        Series clean = rec.data.y();
        for (std::size_t i = 0; i < clean.size(); ++i) clean[i] -= rec.noise[i];
        CHECK(max_abs_diff(clean, d.y()) < 1e-12);
        CHECK(ddlr::test::max_abs(rec.data.y()) < 1.5);
        CHECK(ddlr::test::max_abs(rec.data.y()) > 0.9);
    }
}

TEST_CASE("closed-loop experiment") {
    const auto cfg = bench::experiment(Realization::AsPrinted, ExperimentKind::ClosedLoop, 0.0, 1);
    const Dataset d = run_experiment(cfg);
    CHECK(d.kind() == ExperimentKind::ClosedLoop);
    const Series head{0.0, 0.05, 0.08, 0.10325, 0.124025, 0.14370875};
    for (std::size_t i = 0; i < head.size(); ++i) CHECK(d.y()[i] == doctest::Approx(head[i]).epsilon(1e-10));
    CHECK(d.y()[299] == doctest::Approx(-0.9329273266060425).epsilon(1e-10));
    // loop equation y = G u holds without noise; y and u come from different
    // high-order filters, so roundoff accumulates slowly
    CHECK(max_abs_diff(simulate(cfg.plant, d.u()), d.y()) < 1e-7);

    ExperimentConfig bad = cfg;
    bad.initial_controller.reset();
    CHECK_THROWS_AS((void)run_experiment(bad), Error);
}

TEST_CASE("closed-loop noise follows the loop equations") {
    const auto cfg = bench::experiment(Realization::AsPrinted, ExperimentKind::ClosedLoop, 0.0025, 5);
    const ExperimentRecord rec = run_experiment_record(cfg);
    // y - v is the plant output driven by u
    Series yv = rec.data.y();
    for (std::size_t i = 0; i < yv.size(); ++i) yv[i] -= rec.noise[i];
    CHECK(max_abs_diff(simulate(cfg.plant, rec.data.u()), yv) < 1e-7);
}

TEST_CASE("experiments are deterministic in the seed") {
    const auto cfg = bench::experiment(Realization::AsPrinted, ExperimentKind::ClosedLoop, 0.0025, 77);
    CHECK(run_experiment(cfg) == run_experiment(cfg));
    CHECK(run_seed(1000, 3) == 1003);
}

TEST_CASE("dataset CSV round trip") {
    const auto ol = run_experiment(bench::experiment(Realization::AsPrinted, ExperimentKind::OpenLoop, 0.0025, 2));
    const auto cl = run_experiment(bench::experiment(Realization::AsPrinted, ExperimentKind::ClosedLoop, 0.0025, 2));
    for (const Dataset* d : {&ol, &cl}) {
        const auto path = temp_file("roundtrip.csv");
        save_dataset(*d, path);
        const Dataset back = load_dataset(path);
        CHECK(back == *d);
        std::ifstream in(path);
        std::string header;
        std::getline(in, header);
        CHECK(header == (d->has_r() ? "t,r,u,y" : "t,u,y"));
        std::filesystem::remove(path);
    }
}

TEST_CASE("dataset loading errors") {
    CHECK_THROWS_AS((void)load_dataset(temp_file("does_not_exist.csv")), Error);
    const auto path = temp_file("broken.csv");
    {
        std::ofstream out(path);
        out << "t,u,y\n1,0.5,0.25\n2,abc,0.1\n";
    }
    try {
        (void)load_dataset(path);
        FAIL("expected a parse error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ParseError);
        CHECK(std::string(e.what()).find(":3") != std::string::npos);
    }
    {
        std::ofstream out(path);
        out << "t,a,b\n1,0.5,0.25\n";
    }
    CHECK_THROWS_AS((void)load_dataset(path), Error);
    std::filesystem::remove(path);
}

TEST_CASE("number formatting") {
    CHECK(std::stod(format_double(0.1)) == 0.1);
    CHECK(std::stod(format_double(-1.0 / 3.0)) == -1.0 / 3.0);
}
