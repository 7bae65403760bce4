#include "ddlr/error.hpp"
#include "ddlr/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ddlr {
namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;
constexpr double kRelativeStep = 0.05;
constexpr double kZeroStep = 0.00025;

double safe_eval(const CostFunction& cost, const Eigen::VectorXd& x) {
    const double v = cost(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

} // namespace

SimplexResult simplex_minimize(const CostFunction& cost, const Eigen::VectorXd& x0, const SimplexOptions& options) {
    const auto n = static_cast<std::size_t>(x0.size());
    const double f0 = cost(x0);
    if (!std::isfinite(f0)) {
        throw Error(ErrorKind::NonFiniteCost, "cost is not finite at the initial point");
    }
    SimplexResult result;
    if (n == 0) {
        result.x = x0;
        result.value = f0;
        result.converged = true;
        return result;
    }

    std::vector<Eigen::VectorXd> vertices(n + 1, x0);
    std::vector<double> values(n + 1, f0);
    for (std::size_t i = 0; i < n; ++i) {
        auto& v = vertices[i + 1];
        const auto idx = static_cast<Eigen::Index>(i);
        v[idx] = x0[idx] != 0.0 ? (1.0 + kRelativeStep) * x0[idx] : kZeroStep;
        values[i + 1] = safe_eval(cost, v);
    }

    std::vector<std::size_t> order(n + 1);
    auto sort_vertices = [&] {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        std::vector<Eigen::VectorXd> vs;
        std::vector<double> fs;
        vs.reserve(n + 1);
        fs.reserve(n + 1);
        for (std::size_t i : order) {
            vs.push_back(std::move(vertices[i]));
            fs.push_back(values[i]);
        }
        vertices = std::move(vs);
        values = std::move(fs);
    };
    auto diameter = [&] {
        double d = 0.0;
        for (std::size_t i = 1; i <= n; ++i) d = std::max(d, (vertices[i] - vertices[0]).lpNorm<Eigen::Infinity>());
        return d;
    };

    sort_vertices();
    while (result.iterations < options.max_iters) {
        if (diameter() < options.diameter_tol) {
            result.converged = true;
            break;
        }
        ++result.iterations;

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) centroid += vertices[i];
        centroid /= static_cast<double>(n);

        const Eigen::VectorXd& worst = vertices[n];
        const Eigen::VectorXd reflected = centroid + kReflect * (centroid - worst);
        const double f_reflected = safe_eval(cost, reflected);

        if (f_reflected < values[0]) {
            const Eigen::VectorXd expanded = centroid + kExpand * (reflected - centroid);
            const double f_expanded = safe_eval(cost, expanded);
            if (f_expanded < f_reflected) {
                vertices[n] = expanded;
                values[n] = f_expanded;
            } else {
                vertices[n] = reflected;
                values[n] = f_reflected;
            }
        } else if (f_reflected < values[n - 1]) {
            vertices[n] = reflected;
            values[n] = f_reflected;
        } else {
            bool shrink = false;
            if (f_reflected < values[n]) {
                const Eigen::VectorXd outside = centroid + kContract * (reflected - centroid);
                const double f_outside = safe_eval(cost, outside);
                if (f_outside <= f_reflected) {
                    vertices[n] = outside;
                    values[n] = f_outside;
                } else {
                    shrink = true;
                }
            } else {
                const Eigen::VectorXd inside = centroid + kContract * (worst - centroid);
                const double f_inside = safe_eval(cost, inside);
                if (f_inside < values[n]) {
                    vertices[n] = inside;
                    values[n] = f_inside;
                } else {
                    shrink = true;
                }
            }
            if (shrink) {
                for (std::size_t i = 1; i <= n; ++i) {
                    vertices[i] = vertices[0] + kShrink * (vertices[i] - vertices[0]);
                    values[i] = safe_eval(cost, vertices[i]);
                }
            }
        }
        sort_vertices();
        result.trace.push_back(values[0]);
    }
    if (!result.converged && diameter() < options.diameter_tol) {
        result.converged = true;
    }
    result.x = vertices[0];
    result.value = values[0];
    return result;
}

} // namespace ddlr
