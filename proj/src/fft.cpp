#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace ddlr::detail {
namespace {

// FFTW planning is not thread-safe; executing an existing plan on new arrays is.
class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan forward(std::size_t n) { return get(n, true); }
    fftw_plan backward(std::size_t n) { return get(n, false); }

private:
    fftw_plan get(std::size_t n, bool forward) {
        std::lock_guard lock(mutex_);
        const auto key = std::make_pair(n, forward);
        if (auto it = plans_.find(key); it != plans_.end()) {
            return it->second;
        }
        double* real = fftw_alloc_real(n);
        fftw_complex* spec = fftw_alloc_complex(n / 2 + 1);
        const int size = static_cast<int>(n);
        fftw_plan plan = forward ? fftw_plan_dft_r2c_1d(size, real, spec, FFTW_ESTIMATE)
                                 : fftw_plan_dft_c2r_1d(size, spec, real, FFTW_ESTIMATE);
        fftw_free(real);
        fftw_free(spec);
        if (plan == nullptr) {
            throw std::runtime_error("FFTW planning failed");
        }
        plans_.emplace(key, plan);
        return plan;
    }

    std::mutex mutex_;
    std::map<std::pair<std::size_t, bool>, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache instance;
    return instance;
}

struct FftwFree {
    void operator()(void* p) const noexcept { fftw_free(p); }
};

} // namespace

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

std::vector<std::complex<double>> rfft(std::span<const double> x, std::size_t nfft) {
    if (nfft == 0) {
        throw std::invalid_argument("rfft: zero length");
    }
    std::unique_ptr<double, FftwFree> in(fftw_alloc_real(nfft));
    std::unique_ptr<fftw_complex, FftwFree> out(fftw_alloc_complex(nfft / 2 + 1));
    const std::size_t copy = std::min(nfft, x.size());
    std::copy_n(x.begin(), copy, in.get());
    std::fill(in.get() + copy, in.get() + nfft, 0.0);

    fftw_execute_dft_r2c(cache().forward(nfft), in.get(), out.get());

    std::vector<std::complex<double>> bins(nfft / 2 + 1);
    for (std::size_t k = 0; k < bins.size(); ++k) {
        bins[k] = {out.get()[k][0], out.get()[k][1]};
    }
    return bins;
}

std::vector<double> irfft(std::span<const std::complex<double>> bins, std::size_t nfft) {
    if (bins.size() != nfft / 2 + 1) {
        throw std::invalid_argument("irfft: expected nfft/2 + 1 bins");
    }
    std::unique_ptr<fftw_complex, FftwFree> in(fftw_alloc_complex(bins.size()));
    std::unique_ptr<double, FftwFree> out(fftw_alloc_real(nfft));
    for (std::size_t k = 0; k < bins.size(); ++k) {
        in.get()[k][0] = bins[k].real();
        in.get()[k][1] = bins[k].imag();
    }
    // c2r destroys its input; the copy above is ours to lose.
    fftw_execute_dft_c2r(cache().backward(nfft), in.get(), out.get());

    std::vector<double> result(out.get(), out.get() + nfft);
    const double scale = 1.0 / static_cast<double>(nfft);
    for (double& v : result) v *= scale;
    return result;
}

} // namespace ddlr::detail
