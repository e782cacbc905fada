#pragma once

// Exhaustive verification oracle for small instances: log-spaced grid over
// the feasible power box honoring QoS, followed by local re-gridding around
// the incumbents. Tracks the best point for both objectives.

#include "model.hpp"

#include <stdexcept>
#include <vector>

namespace eemax {

struct OracleResult {
    bool found = false;  ///< at least one feasible grid point existed
    PowerVector best_wsee_p;
    double best_wsee = 0.0;
    PowerVector best_wsr_p;
    double best_wsr = 0.0;
    /// Multiplicative per-step grid ratio around the incumbents after the
    /// final refinement round; bounds the local resolution of the search.
    double final_step_ratio = 1.0;
};

namespace detail {

struct GridAxis {
    double lo, hi;  // multiplicative range, lo > 0
};

template <typename Visit>
void scan_grid(const NetworkInstance& inst, const std::vector<GridAxis>& axes, int points,
               Visit&& visit) {
    const int n = inst.n_users();
    std::vector<int> idx(n, 0);
    PowerVector p(n);
    while (true) {
        for (int d = 0; d < n; ++d) {
            const double t = points > 1 ? static_cast<double>(idx[d]) / (points - 1) : 1.0;
            p[d] = axes[d].lo * std::pow(axes[d].hi / axes[d].lo, t);
        }
        visit(p);
        int d = 0;
        while (d < n && ++idx[d] == points) {
            idx[d] = 0;
            ++d;
        }
        if (d == n) break;
    }
}

}  // namespace detail

/// grid_points per dimension over [1e-6 p_max, p_max], refine_rounds local
/// refinements; extra_points are injected as candidate incumbents.
inline OracleResult brute_force_oracle(const NetworkInstance& inst, int grid_points, int refine_rounds,
                                       const std::vector<PowerVector>& extra_points = {}) {
    const int n = inst.n_users();
    if (n > 3) throw std::invalid_argument("brute-force oracle limited to N <= 3");
    if (grid_points < 2) throw std::invalid_argument("need at least 2 grid points per dimension");
    inst.validate();

    OracleResult res;
    auto consider = [&](const PowerVector& p) {
        for (int i = 0; i < n; ++i) {
            if (!(p[i] >= 0.0) || p[i] > inst.users[i].p_max * (1.0 + 1e-12)) return;
            if (inst.users[i].r_min > 0.0 && rate(inst, p, i) < inst.users[i].r_min) return;
        }
        const double f_ee = wsee(inst, p);
        const double f_sr = wsr(inst, p);
        if (!res.found || f_ee > res.best_wsee) {
            res.best_wsee = f_ee;
            res.best_wsee_p = p;
        }
        if (!res.found || f_sr > res.best_wsr) {
            res.best_wsr = f_sr;
            res.best_wsr_p = p;
        }
        res.found = true;
    };

    std::vector<detail::GridAxis> axes(n);
    for (int i = 0; i < n; ++i) axes[i] = {1e-6 * inst.users[i].p_max, inst.users[i].p_max};
    detail::scan_grid(inst, axes, grid_points, consider);
    for (const auto& p : extra_points) {
        if (p.size() == n) consider(p);
    }
    if (!res.found) return res;

    // Per-step multiplicative ratio of the coarse grid. Refinement windows
    // span +-4 current steps so that optima on curved constraint boundaries
    // stay inside the window across rounds.
    double step_ratio = std::pow(1e6, 1.0 / (grid_points - 1));
    for (int round = 0; round < refine_rounds; ++round) {
        const double window = std::pow(step_ratio, 4.0);
        for (const PowerVector* anchor : {&res.best_wsee_p, &res.best_wsr_p}) {
            std::vector<detail::GridAxis> local(n);
            for (int i = 0; i < n; ++i) {
                const double lo_bound = 1e-9 * inst.users[i].p_max;
                local[i].lo = std::max((*anchor)[i] / window, lo_bound);
                local[i].hi = std::min((*anchor)[i] * window, inst.users[i].p_max);
            }
            detail::scan_grid(inst, local, grid_points, consider);
        }
        step_ratio = std::pow(window * window, 1.0 / (grid_points - 1));
    }
    res.final_step_ratio = step_ratio;
    return res;
}

}  // namespace eemax
