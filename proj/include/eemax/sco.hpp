#pragma once

// Sequential convex optimization drivers. Each iteration expands the bound
// coefficients at the current SINRs, solves the convex subproblem warm-started
// at the expansion point, and accepts the maximizer; the recorded objective
// history is nondecreasing and the loop stops on the relative-change
// criterion. The returned point is certified against the exact (nonconvex)
// transformed constraint set, not the surrogate.

#include "model.hpp"
#include "nnls.hpp"
#include "solver.hpp"
#include "surrogate.hpp"

#include <optional>
#include <sstream>
#include <utility>
#include <vector>

namespace eemax {

class InfeasibleInitialPoint : public std::runtime_error {
public:
    InfeasibleInitialPoint(std::string what, FeasibilityReport rep)
        : std::runtime_error(std::move(what)), report(std::move(rep)) {}
    FeasibilityReport report;
};

class SubproblemFailure : public std::runtime_error {
public:
    SubproblemFailure(std::string what, SolveReport rep)
        : std::runtime_error(std::move(what)), report(std::move(rep)) {}
    SolveReport report;
};

class DegenerateRate : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ScoOptions {
    double tolerance = 1e-4;  ///< relative objective-change stopping criterion
    int max_iter = 100;
    std::optional<PowerVector> initial_power;  ///< watts; lambda * p_max when unset
    double lambda = 1.0;                       ///< initial-point scale in (0, 1]
    double power_floor = 1e-12;                ///< minimum initial power [W]
    bool record_history = true;
    bool record_subproblems = false;
    bool compute_kkt = true;
    SolverOptions solver;
};

struct ScoResult {
    PowerVector p_star;
    double objective = std::numeric_limits<double>::quiet_NaN();  ///< wsee or wsr at p_star
    Eigen::VectorXd per_user_ee;
    int iterations = 0;
    std::vector<double> history;  ///< f^(0), ..., f^(iterations)
    bool converged = false;
    KktResidual kkt;  ///< stationarity scaled by the objective gradient norm
    bool sentinel_bound_active = false;
    std::vector<SolveReport> subproblem_reports;
    Eigen::MatrixXd p_star_rb;  ///< N x K allocation (multi-RB driver only)
};

namespace detail {

inline PowerVector initial_power(const std::vector<UserLink>& users, const ScoOptions& opts) {
    const int n = static_cast<int>(users.size());
    PowerVector p(n);
    if (opts.initial_power) {
        if (opts.initial_power->size() != n) throw std::invalid_argument("initial power has wrong length");
        p = *opts.initial_power;
    } else {
        if (!(opts.lambda > 0.0) || opts.lambda > 1.0)
            throw std::invalid_argument("initial-point scale must be in (0, 1]");
        for (int i = 0; i < n; ++i) p[i] = opts.lambda * users[i].p_max;
    }
    for (int i = 0; i < n; ++i) p[i] = std::max(p[i], opts.power_floor);
    return p;
}

inline void require_feasible(const FeasibilityReport& rep, const char* driver) {
    if (rep.feasible) return;
    std::ostringstream os;
    os << driver << ": initial point infeasible:";
    for (const auto& v : rep.violations) os << " " << v.to_string() << ";";
    throw InfeasibleInitialPoint(os.str(), rep);
}

/// True when the subproblem solve is usable; throws on numerical failure.
/// An Infeasible report with a feasible expansion point means the surrogate
/// set has empty interior (every constraint tight at once): the expansion
/// point is then the best certifiable iterate and the driver stops there.
inline bool require_solved(const SolveReport& rep, const char* driver, bool expansion_feasible) {
    if (rep.status == SolveStatus::Optimal || rep.status == SolveStatus::MaxIter) return true;
    if (rep.status == SolveStatus::Infeasible && expansion_feasible) return false;
    throw SubproblemFailure(std::string(driver) + ": subproblem " + to_string(rep.status), rep);
}

/// Relative stopping criterion; absolute when the previous value is zero.
inline bool stop_criterion(double f_new, double f_prev, double eps) {
    if (f_prev == 0.0) return std::abs(f_new) < eps;
    return std::abs(f_new - f_prev) / std::abs(f_prev) < eps;
}

struct ConstraintGrad {
    double value;
    Eigen::VectorXd grad;
};

/// d log2(rate numerator/denominator) pieces for the exact rate at p = 2^q.
/// Returns the gradient of R'_i(q)/B in q.
inline Eigen::VectorXd rate_over_b_grad(const NetworkInstance& inst, const Eigen::VectorXd& q, int i) {
    const int n = inst.n_users();
    const Eigen::VectorXd p = exp2_vec(q);
    const double den = interference_plus_noise(inst, p, i);
    const double num = den + inst.gain(i, i) * p[i];
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        g[j] = inst.gain(j, i) * p[j] * (1.0 / num - 1.0 / den);
    }
    g[i] = (inst.gain(i, i) + inst.self_interference[i]) * p[i] / num -
           inst.self_interference[i] * p[i] / den;
    return g;
}

inline Eigen::VectorXd theta_grad(const NetworkInstance& inst, const Eigen::VectorXd& q, int i) {
    const int n = inst.n_users();
    const Eigen::VectorXd p = exp2_vec(q);
    const double den = interference_plus_noise(inst, p, i);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        g[j] = -inst.gain(j, i) * p[j] / den;
    }
    g[i] = 1.0 - inst.self_interference[i] * p[i] / den;
    return g;
}

/// Least-squares KKT certificate: fit non-negative multipliers on the active
/// constraint gradients and report the scaled stationarity residual.
inline KktResidual certify(const Eigen::VectorXd& grad_f, const std::vector<ConstraintGrad>& active,
                           double max_violation) {
    KktResidual res;
    res.max_violation = max_violation;
    const double scale = std::max(grad_f.lpNorm<Eigen::Infinity>(), 1e-300);
    if (active.empty()) {
        res.stationarity = grad_f.lpNorm<Eigen::Infinity>() / scale;
        return res;
    }
    Eigen::MatrixXd g_mat(grad_f.size(), active.size());
    for (size_t k = 0; k < active.size(); ++k) g_mat.col(k) = active[k].grad;
    const Eigen::VectorXd lambda = nnls(g_mat, -grad_f);
    res.stationarity = (grad_f + g_mat * lambda).lpNorm<Eigen::Infinity>() / scale;
    for (size_t k = 0; k < active.size(); ++k)
        res.complementarity = std::max(res.complementarity, std::abs(lambda[k] * active[k].value));
    return res;
}

}  // namespace detail

/// KKT residual of the transformed WSEE problem (exact constraint set) at
/// p_star with v_i = log2 EE_i(p_star). Stationarity is scaled by the
/// objective gradient norm; activity tolerance 1e-6 on normalized values.
inline KktResidual certify_kkt_wsee(const NetworkInstance& inst, const PowerVector& p_star,
                                    double activity_tol = 1e-6) {
    const int n = inst.n_users();
    const Eigen::VectorXd q = log2_vec(p_star);
    const int n_vars = 2 * n;

    Eigen::VectorXd grad_f = Eigen::VectorXd::Zero(n_vars);
    for (int i = 0; i < n; ++i)
        grad_f[n + i] = kLn2 * inst.users[i].weight * ee(inst, p_star, i);

    std::vector<detail::ConstraintGrad> active;
    double violation = 0.0;
    for (int i = 0; i < n; ++i) {
        const double cap = std::log2(inst.users[i].p_max) - q[i];
        violation = std::max(violation, -cap);
        if (cap <= activity_tol) {
            Eigen::VectorXd g = Eigen::VectorXd::Zero(n_vars);
            g[i] = -1.0;
            active.push_back({cap, g});
        }
        if (inst.users[i].r_min > 0.0) {
            const double t = theta(inst, q, i);
            violation = std::max(violation, -t);
            if (std::abs(t) <= activity_tol) {
                Eigen::VectorXd g = Eigen::VectorXd::Zero(n_vars);
                g.head(n) = detail::theta_grad(inst, q, i);
                active.push_back({t, g});
            }
        }
        // The efficiency constraint is active by the choice v = log2 EE.
        Eigen::VectorXd g = Eigen::VectorXd::Zero(n_vars);
        g.head(n) = detail::rate_over_b_grad(inst, q, i);
        const double consumption = power_consumed_linear(inst.users[i], p_star[i]);
        const double vexp = ee(inst, p_star, i);
        g[i] -= kLn2 * inst.users[i].mu * p_star[i] * vexp / inst.bandwidth;
        g[n + i] = -kLn2 * consumption * vexp / inst.bandwidth;
        active.push_back({0.0, g});
    }
    return detail::certify(grad_f, active, violation);
}

/// KKT residual of the rate-maximization problem over {caps, QoS} at p_star.
inline KktResidual certify_kkt_wsr(const NetworkInstance& inst, const PowerVector& p_star,
                                   double activity_tol = 1e-6) {
    const int n = inst.n_users();
    const Eigen::VectorXd q = log2_vec(p_star);

    Eigen::VectorXd grad_f = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i)
        grad_f += inst.users[i].weight * detail::rate_over_b_grad(inst, q, i);

    std::vector<detail::ConstraintGrad> active;
    double violation = 0.0;
    for (int i = 0; i < n; ++i) {
        const double cap = std::log2(inst.users[i].p_max) - q[i];
        violation = std::max(violation, -cap);
        if (cap <= activity_tol) {
            Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
            g[i] = -1.0;
            active.push_back({cap, g});
        }
        if (inst.users[i].r_min > 0.0) {
            const double t = theta(inst, q, i);
            violation = std::max(violation, -t);
            if (std::abs(t) <= activity_tol) active.push_back({t, detail::theta_grad(inst, q, i)});
        }
    }
    return detail::certify(grad_f, active, violation);
}

/// KKT residual of the general-power-model problem (set with auxiliary rate
/// variables) at p_star, with y = log2 R(p_star) and v = log2 psi.
inline KktResidual certify_kkt_general(const NetworkInstance& inst,
                                       const std::vector<GeneralPowerUser>& gusers,
                                       const PowerVector& p_star, double activity_tol = 1e-6) {
    const int n = inst.n_users();
    const Eigen::VectorXd q = log2_vec(p_star);
    const int n_vars = 3 * n;

    Eigen::VectorXd grad_f = Eigen::VectorXd::Zero(n_vars);
    for (int i = 0; i < n; ++i)
        grad_f[2 * n + i] = kLn2 * inst.users[i].weight * ee_general(inst, gusers, p_star, i);

    std::vector<detail::ConstraintGrad> active;
    double violation = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = rate(inst, p_star, i);
        const double y = std::log2(r);
        const double psi = ee_general(inst, gusers, p_star, i);
        const double v = std::log2(psi);
        const GeneralPowerUser& gu = gusers[i];

        const double cap = std::log2(inst.users[i].p_max) - q[i];
        violation = std::max(violation, -cap);
        if (cap <= activity_tol) {
            Eigen::VectorXd g = Eigen::VectorXd::Zero(n_vars);
            g[i] = -1.0;
            active.push_back({cap, g});
        }
        if (inst.users[i].r_min > 0.0) {
            const double t = theta(inst, q, i);
            violation = std::max(violation, -t);
            if (std::abs(t) <= activity_tol) {
                Eigen::VectorXd g = Eigen::VectorXd::Zero(n_vars);
                g.head(n) = detail::theta_grad(inst, q, i);
                active.push_back({t, g});
            }
        }
        {
            // Rate constraint R'_i(q)/B >= 2^{y_i}/B, active at y = log2 R.
            Eigen::VectorXd g = Eigen::VectorXd::Zero(n_vars);
            g.head(n) = detail::rate_over_b_grad(inst, q, i);
            g[n + i] = -kLn2 * r / inst.bandwidth;
            active.push_back({0.0, g});
        }
        {
            // Consumption constraint -epsilon_i >= 0, active at v = log2 psi.
            Eigen::VectorXd g = Eigen::VectorXd::Zero(n_vars);
            double poly = 0.0, poly_dq = 0.0;
            for (size_t m = 1; m <= gu.mu_m.size(); ++m) {
                const double term = gu.mu_m[m - 1] * std::exp2(static_cast<double>(m) * q[i] + v - y);
                poly += term;
                poly_dq += static_cast<double>(m) * term;
            }
            const double rate_term = gu.xi * std::exp2(v - (1.0 - gu.delta) * y);
            const double static_term = gu.p_st * std::exp2(v - y);
            g[i] = -kLn2 * poly_dq;
            g[n + i] = kLn2 * (poly + (1.0 - gu.delta) * rate_term + static_term);
            g[2 * n + i] = -kLn2 * (poly + rate_term + static_term);
            active.push_back({0.0, g});
        }
    }
    return detail::certify(grad_f, active, violation);
}

/// KKT residual of the multi-RB problem at the N x K allocation p_star.
inline KktResidual certify_kkt_multi_rb(const MultiRbInstance& mrb, const Eigen::MatrixXd& p_star,
                                        double activity_tol = 1e-6) {
    const int n = mrb.n_users();
    const int k_rb = mrb.n_rb();
    const int n_vars = n * k_rb + n;

    Eigen::VectorXd grad_f = Eigen::VectorXd::Zero(n_vars);
    for (int i = 0; i < n; ++i)
        grad_f[n * k_rb + i] = kLn2 * mrb.users[i].weight * ee_multi_rb(mrb, p_star, i);

    auto rb_view = [&](int k) {
        return NetworkInstance{mrb.rb_bandwidth, mrb.gain[k], mrb.self_interference[k], mrb.noise[k],
                               mrb.users};
    };

    std::vector<detail::ConstraintGrad> active;
    double violation = 0.0;
    for (int i = 0; i < n; ++i) {
        const double total = p_star.row(i).sum();
        const double cap = std::log2(mrb.users[i].p_max) - std::log2(total);
        violation = std::max(violation, -cap);
        if (cap <= activity_tol) {
            Eigen::VectorXd g = Eigen::VectorXd::Zero(n_vars);
            for (int k = 0; k < k_rb; ++k) g[i * k_rb + k] = -p_star(i, k) / total;
            active.push_back({cap, g});
        }

        // Per-RB exact rate gradient of R_i(P)/B_RB in the stacked q layout.
        Eigen::VectorXd rate_grad = Eigen::VectorXd::Zero(n_vars);
        for (int k = 0; k < k_rb; ++k) {
            const auto view = rb_view(k);
            const Eigen::VectorXd gq = detail::rate_over_b_grad(view, log2_vec(p_star.col(k)), i);
            for (int j = 0; j < n; ++j) rate_grad[j * k_rb + k] += gq[j];
        }

        if (mrb.users[i].r_min > 0.0) {
            const double slack = (rate_multi_rb(mrb, p_star, i) - mrb.users[i].r_min) / mrb.rb_bandwidth;
            violation = std::max(violation, -slack);
            if (std::abs(slack) <= activity_tol) active.push_back({slack, rate_grad});
        }

        // Efficiency constraint, active at v = log2 EE.
        Eigen::VectorXd g = rate_grad;
        const double consumption = power_consumed_linear(mrb.users[i], total);
        const double vexp = ee_multi_rb(mrb, p_star, i);
        for (int k = 0; k < k_rb; ++k)
            g[i * k_rb + k] -= kLn2 * mrb.users[i].mu * p_star(i, k) * vexp / mrb.rb_bandwidth;
        g[n * k_rb + i] = -kLn2 * consumption * vexp / mrb.rb_bandwidth;
        active.push_back({0.0, g});
    }
    return detail::certify(grad_f, active, violation);
}

/// Algorithm: maximize the weighted-sum energy efficiency over the feasible
/// set by sequential convex subproblems in the exponential domain.
inline ScoResult wsee_maximize(const NetworkInstance& inst, const ScoOptions& opts = {}) {
    inst.validate();
    const int n = inst.n_users();
    PowerVector p = detail::initial_power(inst.users, opts);
    detail::require_feasible(is_feasible(inst, p), "wsee_maximize");

    Eigen::VectorXd q = log2_vec(p);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = std::log2(std::max(ee(inst, p, i), 1e-300));
    double f_prev = wsee(inst, p);

    ScoResult result;
    result.history.push_back(f_prev);
    for (int iter = 1; iter <= opts.max_iter; ++iter) {
        auto sp = build_wsee_subproblem(inst, q, v);
        auto rep = solve(sp.program, sp.expansion, opts.solver);
        if (!detail::require_solved(rep, "wsee_maximize", is_feasible(inst, p).feasible)) {
            result.converged = true;
            break;
        }
        result.sentinel_bound_active |= rep.sentinel_bound_active;
        if (opts.record_subproblems) result.subproblem_reports.push_back(rep);

        const Eigen::VectorXd v_new = sp.v_of(rep.x);
        double f_new = 0.0;
        for (int i = 0; i < n; ++i) f_new += inst.users[i].weight * std::exp2(v_new[i]);
        if (f_new < f_prev) {
            // Progress below solver resolution; keep the previous iterate.
            result.converged = true;
            break;
        }
        q = sp.q_of(rep.x);
        v = v_new;
        p = exp2_vec(q);
        result.iterations = iter;
        result.history.push_back(f_new);
        if (detail::stop_criterion(f_new, f_prev, opts.tolerance)) {
            result.converged = true;
            break;
        }
        f_prev = f_new;
    }

    result.p_star = p;
    result.per_user_ee = Eigen::VectorXd(n);
    for (int i = 0; i < n; ++i) result.per_user_ee[i] = ee(inst, p, i);
    result.objective = wsee(inst, p);
    if (opts.compute_kkt) result.kkt = certify_kkt_wsee(inst, p);
    return result;
}

/// Baseline: maximize the weighted-sum rate over the same feasible set.
inline ScoResult wsr_maximize(const NetworkInstance& inst, const ScoOptions& opts = {}) {
    inst.validate();
    const int n = inst.n_users();
    PowerVector p = detail::initial_power(inst.users, opts);
    detail::require_feasible(is_feasible(inst, p), "wsr_maximize");

    Eigen::VectorXd q = log2_vec(p);
    double f_prev = wsr(inst, p);

    ScoResult result;
    result.history.push_back(f_prev);
    for (int iter = 1; iter <= opts.max_iter; ++iter) {
        auto sp = build_wsr_subproblem(inst, q);
        auto rep = solve(sp.program, sp.expansion, opts.solver);
        if (!detail::require_solved(rep, "wsr_maximize", is_feasible(inst, p).feasible)) {
            result.converged = true;
            break;
        }
        result.sentinel_bound_active |= rep.sentinel_bound_active;
        if (opts.record_subproblems) result.subproblem_reports.push_back(rep);

        const double f_new = wsr(inst, exp2_vec(rep.x));
        if (f_new < f_prev) {
            result.converged = true;
            break;
        }
        q = rep.x;
        p = exp2_vec(q);
        result.iterations = iter;
        result.history.push_back(f_new);
        if (detail::stop_criterion(f_new, f_prev, opts.tolerance)) {
            result.converged = true;
            break;
        }
        f_prev = f_new;
    }

    result.p_star = p;
    result.per_user_ee = Eigen::VectorXd(n);
    for (int i = 0; i < n; ++i) result.per_user_ee[i] = ee(inst, p, i);
    result.objective = wsr(inst, p);
    if (opts.compute_kkt) result.kkt = certify_kkt_wsr(inst, p);
    return result;
}

/// Rate-dependent power model variant over (q, y, v).
inline ScoResult wsee_maximize_general(const NetworkInstance& inst,
                                       const std::vector<GeneralPowerUser>& gusers,
                                       const ScoOptions& opts = {}) {
    inst.validate();
    const int n = inst.n_users();
    if (static_cast<int>(gusers.size()) != n) throw std::invalid_argument("need one GeneralPowerUser per user");
    for (const auto& gu : gusers) {
        if (gu.mu_m.empty() || gu.mu_m[0] < 1.0) throw std::invalid_argument("mu_m[0] must be >= 1");
        for (double m : gu.mu_m)
            if (m < 0.0) throw std::invalid_argument("mu_m entries must be >= 0");
        if (gu.xi < 0.0 || !(gu.delta > 0.0) || gu.delta > 1.0 || !(gu.p_st > 0.0))
            throw std::invalid_argument("invalid general power model parameters");
    }

    PowerVector p = detail::initial_power(inst.users, opts);
    detail::require_feasible(is_feasible(inst, p), "wsee_maximize_general");

    Eigen::VectorXd q = log2_vec(p);
    Eigen::VectorXd y(n), v(n);
    for (int i = 0; i < n; ++i) {
        const double r = rate(inst, p, i);
        if (!(r > 0.0))
            throw DegenerateRate("wsee_maximize_general: zero rate at the initial point for user " +
                                 std::to_string(i));
        y[i] = std::log2(r);
        v[i] = std::log2(r / power_consumed_general(gusers[i], p[i], r));
    }
    double f_prev = 0.0;
    for (int i = 0; i < n; ++i) f_prev += inst.users[i].weight * std::exp2(v[i]);

    ScoResult result;
    result.history.push_back(f_prev);
    for (int iter = 1; iter <= opts.max_iter; ++iter) {
        auto sp = build_wsee_general_subproblem(inst, gusers, q, y, v);
        auto rep = solve(sp.program, sp.expansion, opts.solver);
        if (!detail::require_solved(rep, "wsee_maximize_general", is_feasible(inst, p).feasible)) {
            result.converged = true;
            break;
        }
        result.sentinel_bound_active |= rep.sentinel_bound_active;
        if (opts.record_subproblems) result.subproblem_reports.push_back(rep);

        const Eigen::VectorXd v_new = rep.x.tail(n);
        double f_new = 0.0;
        for (int i = 0; i < n; ++i) f_new += inst.users[i].weight * std::exp2(v_new[i]);
        if (f_new < f_prev) {
            result.converged = true;
            break;
        }
        q = rep.x.head(n);
        y = rep.x.segment(n, n);
        v = v_new;
        p = exp2_vec(q);
        result.iterations = iter;
        result.history.push_back(f_new);
        if (detail::stop_criterion(f_new, f_prev, opts.tolerance)) {
            result.converged = true;
            break;
        }
        f_prev = f_new;
    }

    result.p_star = p;
    result.per_user_ee = Eigen::VectorXd(n);
    for (int i = 0; i < n; ++i) result.per_user_ee[i] = ee_general(inst, gusers, p, i);
    result.objective = wsee_general(inst, gusers, p);
    if (opts.compute_kkt) result.kkt = certify_kkt_general(inst, gusers, p);
    return result;
}

/// Multi-resource-block variant over the N x K allocation. The initial
/// per-user power is split equally across resource blocks.
inline ScoResult wsee_maximize_multi_rb(const MultiRbInstance& mrb, const ScoOptions& opts = {}) {
    mrb.validate();
    const int n = mrb.n_users();
    const int k_rb = mrb.n_rb();
    PowerVector p_total = detail::initial_power(mrb.users, opts);
    Eigen::MatrixXd p = (p_total / static_cast<double>(k_rb)).replicate(1, k_rb);
    detail::require_feasible(is_feasible_multi_rb(mrb, p), "wsee_maximize_multi_rb");

    Eigen::MatrixXd q(n, k_rb);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < k_rb; ++k) q(i, k) = std::log2(p(i, k));
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = std::log2(std::max(ee_multi_rb(mrb, p, i), 1e-300));
    double f_prev = wsee_multi_rb(mrb, p);

    ScoResult result;
    result.history.push_back(f_prev);
    for (int iter = 1; iter <= opts.max_iter; ++iter) {
        auto sp = build_wsee_multi_rb_subproblem(mrb, q, v);
        auto rep = solve(sp.program, sp.expansion, opts.solver);
        if (!detail::require_solved(rep, "wsee_maximize_multi_rb", is_feasible_multi_rb(mrb, p).feasible)) {
            result.converged = true;
            break;
        }
        result.sentinel_bound_active |= rep.sentinel_bound_active;
        if (opts.record_subproblems) result.subproblem_reports.push_back(rep);

        const Eigen::VectorXd v_new = rep.x.tail(n);
        double f_new = 0.0;
        for (int i = 0; i < n; ++i) f_new += mrb.users[i].weight * std::exp2(v_new[i]);
        if (f_new < f_prev) {
            result.converged = true;
            break;
        }
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < k_rb; ++k) q(i, k) = rep.x[i * k_rb + k];
        v = v_new;
        p = exp2_mat(q);
        result.iterations = iter;
        result.history.push_back(f_new);
        if (detail::stop_criterion(f_new, f_prev, opts.tolerance)) {
            result.converged = true;
            break;
        }
        f_prev = f_new;
    }

    result.p_star_rb = p;
    result.p_star = p.rowwise().sum();
    result.per_user_ee = Eigen::VectorXd(n);
    for (int i = 0; i < n; ++i) result.per_user_ee[i] = ee_multi_rb(mrb, p, i);
    result.objective = wsee_multi_rb(mrb, p);
    if (opts.compute_kkt) result.kkt = certify_kkt_multi_rb(mrb, p);
    return result;
}

/// Feasible-start helper for instances where lambda * p_max violates QoS:
/// maximizes the minimum QoS slack over the power box.
inline std::optional<PowerVector> find_feasible_start(const NetworkInstance& inst,
                                                      const SolverOptions& solver_opts = {}) {
    inst.validate();
    const int n = inst.n_users();
    ConvexProgram prog;
    prog.n_vars = n;
    prog.objective = CanonicalFunction::affine(Eigen::VectorXd::Zero(n));
    const double inf = std::numeric_limits<double>::infinity();
    prog.lower = Eigen::VectorXd::Constant(n, -inf);
    prog.upper = Eigen::VectorXd::Constant(n, inf);
    detail::set_q_box(prog, inst.users, 0, 1);
    for (int i = 0; i < n; ++i)
        if (inst.users[i].r_min > 0.0)
            prog.constraints.push_back(detail::theta_constraint(inst, i, n, 0));

    Eigen::VectorXd hint(n);
    for (int i = 0; i < n; ++i) hint[i] = std::log2(inst.users[i].p_max) - 1.0;
    auto rep = find_strictly_feasible(prog, hint, solver_opts);
    if (rep.status != SolveStatus::Optimal) return std::nullopt;
    PowerVector p = exp2_vec(rep.x);
    if (!is_feasible(inst, p).feasible) return std::nullopt;
    return p;
}

}  // namespace eemax
