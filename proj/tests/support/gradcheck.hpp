#pragma once

// Test-only finite-difference oracle. Central differences over the flattened
// parameter vector; independent of the analytic gradient paths it checks.

#include <functional>
#include <vector>

#include "streamprobe/probe.hpp"

namespace streamprobe::testing {

inline std::vector<double> numeric_gradient(
    const std::function<double(const ProbeParams&)>& loss_fn, const ProbeParams& params,
    double h = 1e-5) {
    ProbeParams p = params;
    std::vector<double> flat = p.flatten();
    std::vector<double> grad(flat.size());
    for (std::size_t i = 0; i < flat.size(); ++i) {
        const double orig = flat[i];
        flat[i] = orig + h;
        p.unflatten(flat);
        const double up = loss_fn(p);
        flat[i] = orig - h;
        p.unflatten(flat);
        const double down = loss_fn(p);
        grad[i] = (up - down) / (2.0 * h);
        flat[i] = orig;
    }
    p.unflatten(flat);
    return grad;
}

// Worst normalized mismatch. Values below the 1e-3 floor are compared
// absolutely, so err < 1e-5 is exactly "relative error < 1e-5, or absolute
// error < 1e-8 near zero".
inline double gradient_max_error(const std::vector<double>& analytic,
                                 const std::vector<double>& numeric) {
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double denom =
            std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-3});
        worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
    }
    return worst;
}

}  // namespace streamprobe::testing
