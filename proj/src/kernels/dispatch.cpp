#include "ddlr/kernels.hpp"

#include <atomic>
#include <stdexcept>

namespace ddlr::kernels {
namespace {

using DotFn = double (*)(const double*, const double*, std::size_t);
using SumSquaresFn = double (*)(const double*, std::size_t);

struct Table {
    DotFn dot;
    SumSquaresFn sum_squares;
};

constexpr Table kScalar{&scalar::dot, &scalar::sum_squares};
#if defined(DDLR_BUILD_AVX2)
constexpr Table kAvx2{&avx2::dot, &avx2::sum_squares};
#endif

bool cpu_has_avx2() {
#if defined(DDLR_BUILD_AVX2) && (defined(__GNUC__) || defined(__clang__))
    static const bool has = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return has;
#else
    return false;
#endif
}

Isa detect() { return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar; }

std::atomic<Isa>& current() {
    static std::atomic<Isa> isa{detect()};
    return isa;
}

const Table& table() {
#if defined(DDLR_BUILD_AVX2)
    if (current().load(std::memory_order_relaxed) == Isa::Avx2) {
        return kAvx2;
    }
#endif
    return kScalar;
}

} // namespace

std::string_view to_string(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) { return isa == Isa::Scalar || cpu_has_avx2(); }

Isa active_isa() { return current().load(); }

bool set_isa(Isa isa) {
    if (!isa_available(isa)) {
        return false;
    }
    current().store(isa);
    return true;
}

void reset_isa() { current().store(detect()); }

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("kernels::dot: length mismatch");
    }
    return table().dot(a.data(), b.data(), a.size());
}

double sum_squares(std::span<const double> a) { return table().sum_squares(a.data(), a.size()); }

void lagged_xcorr(std::span<const double> e, std::span<const double> x, std::size_t lags,
                  std::span<double> out) {
    if (e.size() != x.size()) {
        throw std::invalid_argument("kernels::lagged_xcorr: length mismatch");
    }
    if (out.size() != 2 * lags + 1) {
        throw std::invalid_argument("kernels::lagged_xcorr: output must hold 2L+1 entries");
    }
    const auto n = static_cast<std::ptrdiff_t>(e.size());
    const auto L = static_cast<std::ptrdiff_t>(lags);
    const Table& fns = table();
    for (std::ptrdiff_t j = 0; j <= 2 * L; ++j) {
        // shift s: pairs e[t] with x[t + s]
        const std::ptrdiff_t s = L - j;
        const std::ptrdiff_t t0 = s < 0 ? -s : 0;
        const std::ptrdiff_t t1 = s > 0 ? n - s : n;
        out[static_cast<std::size_t>(j)] =
            t1 > t0 ? fns.dot(e.data() + t0, x.data() + t0 + s, static_cast<std::size_t>(t1 - t0)) : 0.0;
    }
}

} // namespace ddlr::kernels
