#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include <nlohmann/json.hpp>

#include "lmcf/grid.hpp"

namespace lmcf {

/// Time-ordered snapshots of u on a fixed grid.
struct Trajectory {
    GridSpec grid;
    double theta0 = 0.0;
    double dt = 0.0;  // solver step; 0 when unknown (e.g. rescaled data)
    std::vector<double> times;
    std::vector<ScalarField> snapshots;
    nlohmann::json provenance = nlohmann::json::object();

    std::size_t size() const noexcept { return snapshots.size(); }

    /// Spacing between consecutive snapshots (0 for a single snapshot).
    double snapshot_spacing() const noexcept {
        return times.size() < 2 ? 0.0 : (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    }

    /// Index of the snapshot at time `t`, accepting the nearest one when it is
    /// within `slack`. Throws RangeError otherwise.
    std::size_t index_at(double t, double slack) const {
        std::size_t best = 0;
        double dist = INFINITY;
        for (std::size_t k = 0; k < times.size(); ++k) {
            const double d = std::abs(times[k] - t);
            if (d < dist) {
                dist = d;
                best = k;
            }
        }
        if (times.empty() || dist > slack)
            throw RangeError("trajectory has no snapshot at t = " + std::to_string(t));
        return best;
    }
};

}  // namespace lmcf
