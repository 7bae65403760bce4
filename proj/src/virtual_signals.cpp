#include "ddlr/virtual_signals.hpp"

#include "ddlr/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace ddlr {

double VirtualSignals::max_abs_disturbance() const {
    double m = 0.0;
    for (double v : d_bar) m = std::max(m, std::abs(v));
    return m;
}

VirtualSignals make_virtual(const Dataset& d, const TransferOperator& Qd, const TransferOperator& Cf,
                            std::size_t discard_prefix) {
    if (discard_prefix >= d.size()) {
        throw Error(ErrorKind::TooFewSamples, "discard prefix leaves no samples");
    }
    const Series& y = d.y();
    const Series& u = d.u();
    const std::size_t n = y.size();

    VirtualSignals vs;
    vs.e_bar.resize(n);
    for (std::size_t t = 0; t < n; ++t) vs.e_bar[t] = -y[t];
    vs.d_bar = simulate(tf_inv(Qd), y);
    vs.u_bar.resize(n);
    for (std::size_t t = 0; t < n; ++t) vs.u_bar[t] = u[t] - vs.d_bar[t];
    vs.ef_bar = simulate(Cf, vs.e_bar);

    if (discard_prefix > 0) {
        const auto cut = static_cast<std::ptrdiff_t>(discard_prefix);
        for (Series* s : {&vs.e_bar, &vs.d_bar, &vs.u_bar, &vs.ef_bar}) {
            s->erase(s->begin(), s->begin() + cut);
        }
        vs.offset = discard_prefix;
    }
    return vs;
}

void save_virtual(const VirtualSignals& vs, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorKind::IoError, "cannot open '" + path.string() + "' for writing");
    }
    out << "t,e_bar,d_bar,u_bar,ef_bar\n";
    for (std::size_t i = 0; i < vs.size(); ++i) {
        out << (vs.offset + i + 1) << ',' << format_double(vs.e_bar[i]) << ',' << format_double(vs.d_bar[i]) << ','
            << format_double(vs.u_bar[i]) << ',' << format_double(vs.ef_bar[i]) << '\n';
    }
    if (!out) {
        throw Error(ErrorKind::IoError, "failed writing '" + path.string() + "'");
    }
}

} // namespace ddlr
