#pragma once

#include "garchdiag/errors.hpp"
#include "garchdiag/psp.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace garchdiag {

struct KdeEstimate {
    std::vector<double> grid;
    std::vector<double> density;
    double bandwidth = 0.0;
    std::string kernel = "gaussian";
    std::size_t n = 0;
};

inline constexpr std::size_t kDefaultKdeGridPoints = 512;

[[nodiscard]] inline double gaussian_kernel(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

/// Silverman's rule, 1.06 sigma_hat n^{-1/5}.
inline double default_bandwidth(std::span<const double> eps_hat) {
    if (eps_hat.size() < 2) throw Error(ErrorCode::InvalidArgument, "bandwidth needs n >= 2");
    const auto st = sample_stats(eps_hat);
    return 1.06 * std::sqrt(st.var) * std::pow(static_cast<double>(eps_hat.size()), -0.2);
}

/// `points` equispaced values on [min - 5h, max + 5h].
inline std::vector<double> default_grid(std::span<const double> eps_hat, double h,
                                        std::size_t points = kDefaultKdeGridPoints) {
    if (eps_hat.empty() || points < 2) {
        throw Error(ErrorCode::InvalidArgument, "grid needs data and at least two points");
    }
    const auto [mn, mx] = std::minmax_element(eps_hat.begin(), eps_hat.end());
    const double a = *mn - 5.0 * h;
    const double b = *mx + 5.0 * h;
    std::vector<double> g(points);
    for (std::size_t i = 0; i < points; ++i) {
        g[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1);
    }
    return g;
}

/// f_hat(x) = (n h)^{-1} sum_t K((x - e_t) / h) with the standard Gaussian K.
inline KdeEstimate kde_evaluate(std::span<const double> eps_hat, double h,
                                std::span<const double> grid) {
    if (!(h > 0.0)) {
        throw Error(ErrorCode::NonpositiveBandwidth, "bandwidth h = " + std::to_string(h));
    }
    if (eps_hat.empty()) throw Error(ErrorCode::InvalidArgument, "kde needs at least one point");
    KdeEstimate out;
    out.grid.assign(grid.begin(), grid.end());
    out.density.resize(grid.size());
    out.bandwidth = h;
    out.n = eps_hat.size();
    const double norm = 1.0 / (static_cast<double>(eps_hat.size()) * h);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double acc = 0.0;
        for (double e : eps_hat) acc += gaussian_kernel((grid[i] - e) / h);
        out.density[i] = acc * norm;
    }
    return out;
}

/// Default bandwidth on the default grid.
inline KdeEstimate kde(std::span<const double> eps_hat) {
    const double h = default_bandwidth(eps_hat);
    const auto grid = default_grid(eps_hat, h);
    return kde_evaluate(eps_hat, h, grid);
}

inline double trapezoid(std::span<const double> x, std::span<const double> y) {
    double acc = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) acc += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
    return acc;
}

}  // namespace garchdiag
