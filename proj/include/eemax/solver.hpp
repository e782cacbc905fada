#pragma once

// Log-barrier interior-point solver for canonical concave maximization:
//
//   maximize   f0(x)
//   subject to g_i(x) >= 0,  lo <= x <= hi
//
// with f0 and every g_i a CanonicalFunction. Damped Newton centering with
// backtracking line search, barrier parameter schedule t <- 10 t from
// t0 = 1, outer stop when m/t <= gap_tol with m the number of barrier
// terms. Infinite box bounds are replaced by the +-60 sentinel (log2-domain
// variables, powers spanning 1e-18 to 1e18); a sentinel bound active at the
// optimum is flagged, never silent.

#include "canonical.hpp"
#include "nnls.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <vector>

namespace eemax {

struct ConvexProgram {
    int n_vars = 0;
    CanonicalFunction objective;
    std::vector<CanonicalFunction> constraints;  ///< feasible iff each >= 0
    Eigen::VectorXd lower;  ///< may contain -inf
    Eigen::VectorXd upper;  ///< may contain +inf
};

enum class SolveStatus { Optimal, MaxIter, Infeasible, NumericalFailure };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "Optimal";
        case SolveStatus::MaxIter: return "MaxIter";
        case SolveStatus::Infeasible: return "Infeasible";
        case SolveStatus::NumericalFailure: return "NumericalFailure";
    }
    return "?";
}

struct KktResidual {
    double stationarity = std::numeric_limits<double>::quiet_NaN();  ///< ||grad L||_inf
    double max_violation = 0.0;
    double complementarity = 0.0;  ///< max |lambda_i g_i|
};

struct SolveReport {
    Eigen::VectorXd x;
    double objective = std::numeric_limits<double>::quiet_NaN();
    KktResidual kkt;
    Eigen::VectorXd constraint_duals;
    SolveStatus status = SolveStatus::NumericalFailure;
    int outer_iterations = 0;
    int newton_steps = 0;
    bool sentinel_bound_active = false;  ///< a +-60 replacement bound binds at the optimum
    bool exp_clamp_active = false;       ///< an exponent clamp binds at the optimum
    std::vector<double> outer_objectives;
};

struct SolverOptions {
    double t0 = 1.0;
    double t_growth = 10.0;
    double gap_tol = 1e-8;      ///< outer stop: m / t <= gap_tol
    double newton_tol = 1e-12;  ///< centering stop: decrement^2 / 2 <= newton_tol
    int max_newton = 80;        ///< per centering stage
    double armijo_slope = 0.01;
    double backtrack = 0.5;
    double slack_min = 1e-8;       ///< phase-I required slack
    double infinite_bound = 60.0;  ///< sentinel replacing infinite box bounds
    double kkt_tol = 1e-6;         ///< scaled stationarity bound for Optimal
    int verbosity = 0;
    std::ostream* trace = nullptr;
};

namespace detail {

struct Box {
    Eigen::VectorXd lo, hi;
    std::vector<bool> lo_sentinel, hi_sentinel;
};

inline Box effective_box(const ConvexProgram& prog, const SolverOptions& opts) {
    const int n = prog.n_vars;
    Box box;
    box.lo = prog.lower.size() ? prog.lower : Eigen::VectorXd::Constant(n, -std::numeric_limits<double>::infinity());
    box.hi = prog.upper.size() ? prog.upper : Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
    box.lo_sentinel.assign(n, false);
    box.hi_sentinel.assign(n, false);
    for (int j = 0; j < n; ++j) {
        if (!std::isfinite(box.lo[j])) {
            box.lo[j] = -opts.infinite_bound;
            box.lo_sentinel[j] = true;
        }
        if (!std::isfinite(box.hi[j])) {
            box.hi[j] = opts.infinite_bound;
            box.hi_sentinel[j] = true;
        }
        if (!(box.lo[j] < box.hi[j])) throw std::invalid_argument("empty box");
    }
    return box;
}

inline Eigen::VectorXd clamp_into_box(const Box& box, Eigen::VectorXd x) {
    for (int j = 0; j < x.size(); ++j) {
        const double margin = 1e-9 * std::max(1.0, box.hi[j] - box.lo[j]);
        x[j] = std::min(std::max(x[j], box.lo[j] + margin), box.hi[j] - margin);
    }
    return x;
}

inline double min_constraint_slack(const ConvexProgram& prog, const Eigen::VectorXd& x) {
    double s = std::numeric_limits<double>::infinity();
    for (const auto& g : prog.constraints) s = std::min(s, value(g, x));
    return s;
}

/// Barrier objective t*f0 + sum ln g_i + box barriers; -inf when infeasible.
inline double barrier_value(const ConvexProgram& prog, const Box& box, double t, const Eigen::VectorXd& x) {
    double phi = t * value(prog.objective, x);
    for (const auto& g : prog.constraints) {
        const double v = value(g, x);
        if (!(v > 0.0)) return -std::numeric_limits<double>::infinity();
        phi += std::log(v);
    }
    for (int j = 0; j < x.size(); ++j) {
        const double a = x[j] - box.lo[j], b = box.hi[j] - x[j];
        if (!(a > 0.0) || !(b > 0.0)) return -std::numeric_limits<double>::infinity();
        phi += std::log(a) + std::log(b);
    }
    return phi;
}

struct CenterResult {
    int steps = 0;
    bool converged = false;
    bool stalled = false;
};

/// Damped-Newton maximization of the barrier objective at fixed t.
/// early_stop, when set, may end the stage as soon as it returns true.
template <typename EarlyStop>
CenterResult newton_center(const ConvexProgram& prog, const Box& box, double t, Eigen::VectorXd& x,
                           const SolverOptions& opts, EarlyStop&& early_stop) {
    const int n = prog.n_vars;
    CenterResult res;
    int tiny_progress = 0;
    for (int step = 0; step < opts.max_newton; ++step) {
        if (early_stop(x)) {
            res.converged = true;
            return res;
        }
        auto obj = evaluate(prog.objective, x, true);
        Eigen::VectorXd grad = t * obj.gradient;
        Eigen::MatrixXd hess = t * obj.hessian;
        double phi = t * obj.value;
        for (const auto& g : prog.constraints) {
            auto e = evaluate(g, x, true);
            phi += std::log(e.value);
            grad += e.gradient / e.value;
            hess += e.hessian / e.value - (e.gradient * e.gradient.transpose()) / (e.value * e.value);
        }
        for (int j = 0; j < n; ++j) {
            const double a = x[j] - box.lo[j], b = box.hi[j] - x[j];
            phi += std::log(a) + std::log(b);
            grad[j] += 1.0 / a - 1.0 / b;
            hess(j, j) -= 1.0 / (a * a) + 1.0 / (b * b);
        }

        // Newton step on the concave barrier: solve (-H) d = grad.
        Eigen::MatrixXd neg_h = -hess;
        double ridge = 0.0;
        Eigen::VectorXd dir;
        double decrement2 = -1.0;
        for (int attempt = 0; attempt < 12; ++attempt) {
            Eigen::LDLT<Eigen::MatrixXd> ldlt(neg_h + ridge * Eigen::MatrixXd::Identity(n, n));
            if (ldlt.info() == Eigen::Success) {
                dir = ldlt.solve(grad);
                decrement2 = grad.dot(dir);
                if (std::isfinite(decrement2) && decrement2 >= 0.0) break;
            }
            ridge = (ridge == 0.0) ? 1e-12 * std::max(1.0, neg_h.diagonal().maxCoeff()) : ridge * 100.0;
        }
        if (!(decrement2 >= 0.0) || !dir.allFinite()) {
            res.stalled = true;
            return res;
        }
        if (0.5 * decrement2 <= opts.newton_tol) {
            res.converged = true;
            return res;
        }

        double s = 1.0;
        double phi_new = barrier_value(prog, box, t, x + s * dir);
        int backtracks = 0;
        while ((!std::isfinite(phi_new) || phi_new < phi + opts.armijo_slope * s * decrement2) &&
               backtracks < 80) {
            s *= opts.backtrack;
            phi_new = barrier_value(prog, box, t, x + s * dir);
            ++backtracks;
        }
        if (backtracks >= 80 || !std::isfinite(phi_new)) {
            res.stalled = true;
            return res;
        }
        // Centered to working precision: the barrier value no longer moves.
        if (phi_new - phi <= 1e-12 * (1.0 + std::abs(phi))) {
            if (++tiny_progress >= 2) {
                x += s * dir;
                ++res.steps;
                res.converged = true;
                return res;
            }
        } else {
            tiny_progress = 0;
        }
        x += s * dir;
        ++res.steps;
        if (opts.trace && opts.verbosity > 0)
            *opts.trace << "t=" << t << " step=" << s << " objective=" << value(prog.objective, x)
                        << " decrement2=" << decrement2 << "\n";
    }
    return res;
}

}  // namespace detail

/// KKT residual of the program at x with multipliers `duals` ordered as
/// (constraints..., lower bounds..., upper bounds...).
inline KktResidual kkt_residual(const ConvexProgram& prog, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& duals) {
    const int n = prog.n_vars;
    const int m = static_cast<int>(prog.constraints.size());
    if (duals.size() != m + 2 * n) throw std::invalid_argument("dual vector has wrong length");
    KktResidual res;
    Eigen::VectorXd grad_l = evaluate(prog.objective, x, false).gradient;
    for (int i = 0; i < m; ++i) {
        auto e = evaluate(prog.constraints[i], x, false);
        grad_l += duals[i] * e.gradient;
        res.max_violation = std::max(res.max_violation, -e.value);
        res.complementarity = std::max(res.complementarity, std::abs(duals[i] * e.value));
    }
    const bool has_lo = prog.lower.size() > 0, has_hi = prog.upper.size() > 0;
    for (int j = 0; j < n; ++j) {
        const double lo = has_lo ? prog.lower[j] : -std::numeric_limits<double>::infinity();
        const double hi = has_hi ? prog.upper[j] : std::numeric_limits<double>::infinity();
        const double lam_lo = duals[m + j], lam_hi = duals[m + n + j];
        if (std::isfinite(lo)) {
            grad_l[j] += lam_lo;
            res.max_violation = std::max(res.max_violation, lo - x[j]);
            res.complementarity = std::max(res.complementarity, std::abs(lam_lo * (x[j] - lo)));
        }
        if (std::isfinite(hi)) {
            grad_l[j] -= lam_hi;
            res.max_violation = std::max(res.max_violation, x[j] - hi);
            res.complementarity = std::max(res.complementarity, std::abs(lam_hi * (hi - x[j])));
        }
    }
    res.stationarity = grad_l.lpNorm<Eigen::Infinity>();
    return res;
}

/// Phase-I: find x with every constraint slack >= slack_min, or Infeasible.
/// A feasible hint with enough slack is returned unchanged.
inline SolveReport find_strictly_feasible(const ConvexProgram& prog, const Eigen::VectorXd& hint,
                                          const SolverOptions& opts = {}) {
    const int n = prog.n_vars;
    const auto box = detail::effective_box(prog, opts);
    SolveReport report;

    if (prog.constraints.empty()) {
        report.x = hint.size() ? detail::clamp_into_box(box, hint) : Eigen::VectorXd((box.lo + box.hi) / 2.0);
        report.objective = std::numeric_limits<double>::infinity();
        report.status = SolveStatus::Optimal;
        return report;
    }

    Eigen::VectorXd x0 = hint.size() ? hint : Eigen::VectorXd((box.lo + box.hi) / 2.0);
    const bool hint_in_box =
        hint.size() && (hint.array() > box.lo.array()).all() && (hint.array() < box.hi.array()).all();
    if (hint_in_box && detail::min_constraint_slack(prog, hint) >= opts.slack_min) {
        report.x = hint;
        report.status = SolveStatus::Optimal;
        report.objective = detail::min_constraint_slack(prog, hint);
        return report;
    }
    x0 = detail::clamp_into_box(box, x0);

    // Augmented program over (x, s): maximize s subject to
    // g_i(x) - s * sigma_i >= 0 with sigma_i = max(1, |g_i(x0)|), so that s
    // starts O(1) below feasibility regardless of the constraint scales.
    ConvexProgram aux;
    aux.n_vars = n + 1;
    aux.objective = CanonicalFunction::affine(Eigen::VectorXd::Unit(n + 1, n));
    double s0 = std::numeric_limits<double>::infinity();
    for (const auto& g : prog.constraints) {
        const double g0 = value(g, x0);
        const double sigma = std::max(1.0, std::abs(g0));
        s0 = std::min(s0, g0 / sigma);
        CanonicalFunction cg = g;
        cg.n_vars = n + 1;
        Eigen::VectorXd coeff = Eigen::VectorXd::Zero(n + 1);
        if (cg.affine_coeff.size()) coeff.head(n) = cg.affine_coeff;
        coeff[n] = -sigma;
        cg.affine_coeff = coeff;
        for (auto& t : cg.exp_terms) {
            Eigen::VectorXd c = Eigen::VectorXd::Zero(n + 1);
            c.head(n) = t.form.coeff;
            t.form.coeff = c;
        }
        for (auto& t : cg.lse_terms)
            for (auto& f : t.forms) {
                Eigen::VectorXd c = Eigen::VectorXd::Zero(n + 1);
                c.head(n) = f.coeff;
                f.coeff = c;
            }
        aux.constraints.push_back(std::move(cg));
    }
    aux.lower = Eigen::VectorXd(n + 1);
    aux.upper = Eigen::VectorXd(n + 1);
    aux.lower.head(n) = box.lo;
    aux.upper.head(n) = box.hi;
    aux.lower[n] = s0 - 1.0;
    aux.upper[n] = 2.0;

    Eigen::VectorXd z(n + 1);
    z.head(n) = x0;
    z[n] = s0 - 0.5;

    const double target_slack = std::max(10.0 * opts.slack_min, 1e-7);
    const auto aux_box = detail::effective_box(aux, opts);
    bool reached = false;
    double t = opts.t0;
    const double m_terms = static_cast<double>(aux.constraints.size() + 2 * (n + 1));
    int total_steps = 0;
    auto early = [&](const Eigen::VectorXd& cur) {
        if (detail::min_constraint_slack(prog, cur.head(n)) >= target_slack) {
            reached = true;
            return true;
        }
        return false;
    };
    for (int outer = 0; outer < 40; ++outer) {
        auto cr = detail::newton_center(aux, aux_box, t, z, opts, early);
        total_steps += cr.steps;
        ++report.outer_iterations;
        if (reached) break;
        if (m_terms / t <= opts.gap_tol) break;
        t *= opts.t_growth;
    }
    report.newton_steps = total_steps;
    report.x = z.head(n);
    const double slack = detail::min_constraint_slack(prog, report.x);
    report.objective = slack;
    report.status = slack >= opts.slack_min ? SolveStatus::Optimal : SolveStatus::Infeasible;
    return report;
}

/// Barrier solve. warm_start may sit on the feasible-set boundary; phase-I
/// then supplies the strictly interior start.
inline SolveReport solve(const ConvexProgram& prog, const Eigen::VectorXd& warm_start = {},
                         const SolverOptions& opts = {}) {
    const int n = prog.n_vars;
    const auto box = detail::effective_box(prog, opts);
    SolveReport report;

    Eigen::VectorXd x;
    {
        auto phase1 = find_strictly_feasible(prog, warm_start, opts);
        if (phase1.status != SolveStatus::Optimal) {
            report.status = SolveStatus::Infeasible;
            report.x = phase1.x;
            return report;
        }
        x = detail::clamp_into_box(box, phase1.x);
    }

    const int m = static_cast<int>(prog.constraints.size());
    const double m_terms = static_cast<double>(m + 2 * n);
    double t = opts.t0;
    bool all_centered = true;
    auto no_early = [](const Eigen::VectorXd&) { return false; };
    while (true) {
        auto cr = detail::newton_center(prog, box, t, x, opts, no_early);
        report.newton_steps += cr.steps;
        ++report.outer_iterations;
        all_centered = all_centered && cr.converged;
        report.outer_objectives.push_back(value(prog.objective, x));
        if (m_terms / t <= opts.gap_tol) break;
        if (report.outer_iterations > 60) {
            all_centered = false;
            break;
        }
        t *= opts.t_growth;
    }

    report.x = x;
    bool clamped = false;
    report.objective = value(prog.objective, x, &clamped);
    report.exp_clamp_active = clamped;

    // Multipliers by non-negative least squares on the near-active set;
    // barrier estimates 1/(t g_i) are noise-limited at the final t.
    Eigen::VectorXd duals = Eigen::VectorXd::Zero(m + 2 * n);
    {
        const Eigen::VectorXd grad_f = evaluate(prog.objective, x, false).gradient;
        std::vector<int> active;
        std::vector<Eigen::VectorXd> grads;
        for (int i = 0; i < m; ++i) {
            auto e = evaluate(prog.constraints[i], x, false);
            const double scale = std::max(1.0, e.gradient.lpNorm<Eigen::Infinity>());
            if (e.value <= 1e-5 * scale) {
                active.push_back(i);
                grads.push_back(e.gradient);
            }
        }
        for (int j = 0; j < n; ++j) {
            if (std::isfinite(box.lo[j]) && x[j] - box.lo[j] <= 1e-5) {
                active.push_back(m + j);
                grads.push_back(Eigen::VectorXd::Unit(n, j));
            }
            if (std::isfinite(box.hi[j]) && box.hi[j] - x[j] <= 1e-5) {
                active.push_back(m + n + j);
                grads.push_back(-Eigen::VectorXd::Unit(n, j));
            }
        }
        if (!active.empty()) {
            Eigen::MatrixXd g_mat(n, active.size());
            for (size_t k = 0; k < active.size(); ++k) g_mat.col(k) = grads[k];
            const Eigen::VectorXd lambda = nnls(g_mat, -grad_f);
            for (size_t k = 0; k < active.size(); ++k) duals[active[k]] = lambda[k];
        }
    }
    report.constraint_duals = duals;
    report.kkt = kkt_residual(prog, x, duals);

    for (int j = 0; j < n; ++j) {
        const double tol = 1e-6 * std::max(1.0, box.hi[j] - box.lo[j]);
        if (box.lo_sentinel[j] && x[j] - box.lo[j] < tol) report.sentinel_bound_active = true;
        if (box.hi_sentinel[j] && box.hi[j] - x[j] < tol) report.sentinel_bound_active = true;
    }

    const double grad_scale =
        std::max(1.0, evaluate(prog.objective, x, false).gradient.lpNorm<Eigen::Infinity>());
    if (report.exp_clamp_active) {
        report.status = SolveStatus::NumericalFailure;
    } else if (all_centered && report.kkt.stationarity <= opts.kkt_tol * grad_scale) {
        report.status = SolveStatus::Optimal;
    } else {
        report.status = SolveStatus::MaxIter;
    }
    return report;
}

}  // namespace eemax
