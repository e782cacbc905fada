#pragma once

// Concave lower bounds and convex subproblem construction in the
// exponential variables q = log2 p (plus y, v where applicable):
// the (alpha, beta) logarithmic bound, the bounded rate, the
// energy-efficiency residual, the affine objective bound, the
// rate-vs-consumption constraint of the general power model, and the
// multi-resource-block QoS surrogate.

#include "canonical.hpp"
#include "model.hpp"
#include "solver.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace eemax {

/// Coefficients of the bound log2(1+g) >= alpha*log2(g) + beta, tight (in
/// value and first derivative) at the expansion SINR.
struct BoundCoeffs {
    double alpha = 0.0;
    double beta = 0.0;
    double expansion_sinr = 0.0;
};

/// gamma_prime = 0 degenerates to (0, 0): the bound becomes log2(1+g) >= 0,
/// the continuous-limit-safe convention for zero expansion power.
inline BoundCoeffs log_bound_coeffs(double gamma_prime) {
    if (!(gamma_prime >= 0.0)) throw std::invalid_argument("expansion SINR must be >= 0");
    if (gamma_prime == 0.0) return {0.0, 0.0, 0.0};
    const double alpha = gamma_prime / (1.0 + gamma_prime);
    const double beta = std::log2(1.0 + gamma_prime) - alpha * std::log2(gamma_prime);
    return {alpha, beta, gamma_prime};
}

namespace detail {

inline double log2_sum_exp2(const std::vector<double>& exponents) {
    double m = -std::numeric_limits<double>::infinity();
    for (double u : exponents) m = std::max(m, u);
    if (!std::isfinite(m)) return m;
    double sum = 0.0;
    for (double u : exponents) sum += std::exp2(u - m);
    return m + std::log2(sum);
}

/// log2 of the interference-plus-noise of receiver i at p = 2^q.
inline double log2_interference(const NetworkInstance& inst, const Eigen::VectorXd& q, int i) {
    std::vector<double> entries;
    entries.reserve(inst.n_users() + 1);
    for (int j = 0; j < inst.n_users(); ++j) {
        if (j != i && inst.gain(j, i) > 0.0) entries.push_back(std::log2(inst.gain(j, i)) + q[j]);
    }
    if (inst.self_interference[i] > 0.0) entries.push_back(std::log2(inst.self_interference[i]) + q[i]);
    entries.push_back(std::log2(inst.noise[i]));
    return log2_sum_exp2(entries);
}

/// Interference-plus-noise LSE entry forms over an n_vars-dimensional
/// decision vector whose q-block starts at q_offset (stride q_stride).
inline std::vector<AffineForm> interference_forms(const Eigen::MatrixXd& gain,
                                                  const Eigen::VectorXd& phi,
                                                  const Eigen::VectorXd& noise, int i, int n_vars,
                                                  int q_offset, int q_stride = 1) {
    const int n = static_cast<int>(phi.size());
    std::vector<AffineForm> forms;
    for (int j = 0; j < n; ++j) {
        if (j != i && gain(j, i) > 0.0)
            forms.push_back(AffineForm::unit(n_vars, q_offset + j * q_stride, 1.0, std::log2(gain(j, i))));
    }
    if (phi[i] > 0.0)
        forms.push_back(AffineForm::unit(n_vars, q_offset + i * q_stride, 1.0, std::log2(phi[i])));
    forms.push_back(AffineForm::constant_form(n_vars, std::log2(noise[i])));
    return forms;
}

}  // namespace detail

/// QoS constraint in the q domain; theta >= 0 iff the rate at 2^q meets
/// r_min. Only defined for users with an active QoS target.
inline double theta(const NetworkInstance& inst, const Eigen::VectorXd& q, int i) {
    detail::check_user_index(inst.n_users(), i);
    const double g_min = gamma_min(inst.users[i], inst.bandwidth);
    if (!(g_min > 0.0))
        throw std::domain_error("theta undefined for r_min = 0; drop the constraint instead");
    return std::log2(inst.gain(i, i) / g_min) + q[i] - detail::log2_interference(inst, q, i);
}

/// Concave lower bound on the rate at p = 2^q built from coeffs.
inline double rate_bound(const NetworkInstance& inst, const Eigen::VectorXd& q, const BoundCoeffs& coeffs,
                         int i) {
    detail::check_user_index(inst.n_users(), i);
    const double b = inst.bandwidth;
    return b * (coeffs.beta + coeffs.alpha * std::log2(inst.gain(i, i))) +
           b * coeffs.alpha * (q[i] - detail::log2_interference(inst, q, i));
}

/// Exact energy-efficiency residual of the transformed problem:
/// phi(q, v_i) = R'_i(q) - mu_i 2^{q_i+v_i} - p_st,i 2^{v_i}.
inline double phi_exact(const NetworkInstance& inst, const Eigen::VectorXd& q, double v_i, int i) {
    const Eigen::VectorXd p = exp2_vec(q);
    return rate(inst, p, i) - inst.users[i].mu * std::exp2(q[i] + v_i) -
           inst.users[i].p_st * std::exp2(v_i);
}

/// Concave surrogate of phi_exact using the bounded rate.
inline double phi_tilde(const NetworkInstance& inst, const Eigen::VectorXd& q, double v_i,
                        const BoundCoeffs& coeffs, int i) {
    return rate_bound(inst, q, coeffs, i) - inst.users[i].mu * std::exp2(q[i] + v_i) -
           inst.users[i].p_st * std::exp2(v_i);
}

/// Objective f(v) = sum w_i 2^{v_i} and its first-order bound at v_prime.
inline std::pair<double, double> f_and_f_tilde(const Eigen::VectorXd& v, const Eigen::VectorXd& v_prime,
                                               const Eigen::VectorXd& weights) {
    double f = 0.0, f_tilde = 0.0;
    for (int i = 0; i < v.size(); ++i) {
        const double base = weights[i] * std::exp2(v_prime[i]);
        f += weights[i] * std::exp2(v[i]);
        f_tilde += base + kLn2 * base * (v[i] - v_prime[i]);
    }
    return {f, f_tilde};
}

/// General-power-model consumption constraint in exponential variables;
/// epsilon <= 0 iff psi(2^{q_i}, 2^{y_i}) >= 2^{v_i}.
inline double epsilon_constraint(const GeneralPowerUser& user, double q_i, double y_i, double v_i) {
    double e = -1.0;
    for (size_t m = 1; m <= user.mu_m.size(); ++m)
        e += user.mu_m[m - 1] * std::exp2(static_cast<double>(m) * q_i + v_i - y_i);
    e += user.xi * std::exp2(v_i - (1.0 - user.delta) * y_i);
    e += user.p_st * std::exp2(v_i - y_i);
    return e;
}

enum class SurrogateKind { Wsee, WseeGeneral, Wsr, WseeMultiRb };

/// One convex subproblem instance: the canonical program, its expansion
/// point (always feasible for the surrogate set, possibly on its boundary;
/// the solver's phase-I supplies the strictly interior start), the bound
/// coefficients it was built from, and the objective normalization.
struct SurrogateProblem {
    SurrogateKind kind = SurrogateKind::Wsee;
    int n_users = 0;
    int n_rb = 1;
    ConvexProgram program;
    double objective_scale = 1.0;  ///< true objective = scale * program objective
    Eigen::VectorXd expansion;     ///< stacked decision vector at the expansion point
    std::vector<BoundCoeffs> coeffs;  ///< per user, RB-major for multi-RB
    std::vector<std::string> constraint_labels;

    Eigen::VectorXd q_of(const Eigen::VectorXd& x) const {
        if (kind == SurrogateKind::WseeMultiRb) return x.head(n_users * n_rb);
        return x.head(n_users);
    }
    Eigen::VectorXd v_of(const Eigen::VectorXd& x) const {
        return x.tail(n_users);  // Wsr has no v block; callers do not ask
    }
    Eigen::VectorXd y_of(const Eigen::VectorXd& x) const { return x.segment(n_users, n_users); }
};

namespace detail {

inline void set_q_box(ConvexProgram& prog, const std::vector<UserLink>& users, int q_offset,
                      int per_user, int q_stride = 1) {
    for (size_t i = 0; i < users.size(); ++i)
        for (int k = 0; k < per_user; ++k)
            prog.upper[q_offset + static_cast<int>(i) * q_stride + k] = std::log2(users[i].p_max);
}

inline CanonicalFunction theta_constraint(const NetworkInstance& inst, int i, int n_vars, int q_offset) {
    const double g_min = gamma_min(inst.users[i], inst.bandwidth);
    CanonicalFunction fn;
    fn.n_vars = n_vars;
    fn.affine_coeff = Eigen::VectorXd::Zero(n_vars);
    fn.affine_coeff[q_offset + i] = 1.0;
    fn.affine_constant = std::log2(inst.gain(i, i) / g_min);
    fn.add_lse(1.0, interference_forms(inst.gain, inst.self_interference, inst.noise, i, n_vars, q_offset));
    return fn;
}

/// Bounded rate divided by bandwidth as a canonical function:
/// beta + alpha log2(omega_ii) + alpha q_i - alpha log2(interference).
inline CanonicalFunction rate_bound_over_b(const NetworkInstance& inst, const BoundCoeffs& c, int i,
                                           int n_vars, int q_offset) {
    CanonicalFunction fn;
    fn.n_vars = n_vars;
    fn.affine_coeff = Eigen::VectorXd::Zero(n_vars);
    fn.affine_coeff[q_offset + i] = c.alpha;
    fn.affine_constant = c.beta + c.alpha * std::log2(inst.gain(i, i));
    if (c.alpha > 0.0)
        fn.add_lse(c.alpha,
                   interference_forms(inst.gain, inst.self_interference, inst.noise, i, n_vars, q_offset));
    return fn;
}

inline double objective_scale_from(const Eigen::VectorXd& coeff) {
    const double m = coeff.lpNorm<Eigen::Infinity>();
    return m > 0.0 ? m : 1.0;
}

}  // namespace detail

/// Subproblem for the linear power model: variables (q, v), objective
/// pi(v) = sum w_i 2^{v'_i} v_i, feasible set {power caps, QoS, bounded EE}.
inline SurrogateProblem build_wsee_subproblem(const NetworkInstance& inst, const Eigen::VectorXd& q_prime,
                                              const Eigen::VectorXd& v_prime) {
    const int n = inst.n_users();
    const int n_vars = 2 * n;
    SurrogateProblem sp;
    sp.kind = SurrogateKind::Wsee;
    sp.n_users = n;
    sp.expansion = Eigen::VectorXd(n_vars);
    sp.expansion << q_prime, v_prime;

    const Eigen::VectorXd p_prime = exp2_vec(q_prime);
    for (int i = 0; i < n; ++i) sp.coeffs.push_back(log_bound_coeffs(sinr(inst, p_prime, i)));

    ConvexProgram& prog = sp.program;
    prog.n_vars = n_vars;
    const double inf = std::numeric_limits<double>::infinity();
    prog.lower = Eigen::VectorXd::Constant(n_vars, -inf);
    prog.upper = Eigen::VectorXd::Constant(n_vars, inf);
    detail::set_q_box(prog, inst.users, 0, 1);

    Eigen::VectorXd obj_coeff = Eigen::VectorXd::Zero(n_vars);
    for (int i = 0; i < n; ++i) obj_coeff[n + i] = inst.users[i].weight * std::exp2(v_prime[i]);
    sp.objective_scale = detail::objective_scale_from(obj_coeff);
    prog.objective = CanonicalFunction::affine(obj_coeff / sp.objective_scale);

    const double b = inst.bandwidth;
    for (int i = 0; i < n; ++i) {
        if (inst.users[i].r_min > 0.0) {
            prog.constraints.push_back(detail::theta_constraint(inst, i, n_vars, 0));
            sp.constraint_labels.push_back("qos[" + std::to_string(i) + "]");
        }
        CanonicalFunction fn = detail::rate_bound_over_b(inst, sp.coeffs[i], i, n_vars, 0);
        AffineForm amp;  // q_i + v_i
        amp.coeff = Eigen::VectorXd::Zero(n_vars);
        amp.coeff[i] = 1.0;
        amp.coeff[n + i] = 1.0;
        fn.add_exp(inst.users[i].mu / b, amp);
        fn.add_exp(inst.users[i].p_st / b, AffineForm::unit(n_vars, n + i));
        prog.constraints.push_back(std::move(fn));
        sp.constraint_labels.push_back("ee[" + std::to_string(i) + "]");
    }
    return sp;
}

/// Subproblem for the rate-dependent power model: variables (q, y, v).
inline SurrogateProblem build_wsee_general_subproblem(const NetworkInstance& inst,
                                                      const std::vector<GeneralPowerUser>& gusers,
                                                      const Eigen::VectorXd& q_prime,
                                                      const Eigen::VectorXd& y_prime,
                                                      const Eigen::VectorXd& v_prime) {
    const int n = inst.n_users();
    if (static_cast<int>(gusers.size()) != n) throw std::invalid_argument("need one GeneralPowerUser per user");
    const int n_vars = 3 * n;
    SurrogateProblem sp;
    sp.kind = SurrogateKind::WseeGeneral;
    sp.n_users = n;
    sp.expansion = Eigen::VectorXd(n_vars);
    sp.expansion << q_prime, y_prime, v_prime;

    const Eigen::VectorXd p_prime = exp2_vec(q_prime);
    for (int i = 0; i < n; ++i) sp.coeffs.push_back(log_bound_coeffs(sinr(inst, p_prime, i)));

    ConvexProgram& prog = sp.program;
    prog.n_vars = n_vars;
    const double inf = std::numeric_limits<double>::infinity();
    prog.lower = Eigen::VectorXd::Constant(n_vars, -inf);
    prog.upper = Eigen::VectorXd::Constant(n_vars, inf);
    detail::set_q_box(prog, inst.users, 0, 1);

    Eigen::VectorXd obj_coeff = Eigen::VectorXd::Zero(n_vars);
    for (int i = 0; i < n; ++i) obj_coeff[2 * n + i] = inst.users[i].weight * std::exp2(v_prime[i]);
    sp.objective_scale = detail::objective_scale_from(obj_coeff);
    prog.objective = CanonicalFunction::affine(obj_coeff / sp.objective_scale);

    const double b = inst.bandwidth;
    for (int i = 0; i < n; ++i) {
        if (inst.users[i].r_min > 0.0) {
            prog.constraints.push_back(detail::theta_constraint(inst, i, n_vars, 0));
            sp.constraint_labels.push_back("qos[" + std::to_string(i) + "]");
        }
        // Bounded rate must dominate the auxiliary rate 2^{y_i}.
        CanonicalFunction rate_fn = detail::rate_bound_over_b(inst, sp.coeffs[i], i, n_vars, 0);
        rate_fn.add_exp(1.0 / b, AffineForm::unit(n_vars, n + i));
        prog.constraints.push_back(std::move(rate_fn));
        sp.constraint_labels.push_back("rate[" + std::to_string(i) + "]");

        // 1 - (consumption scaled by 2^{v_i - y_i} terms) >= 0, i.e. -epsilon_i.
        const GeneralPowerUser& gu = gusers[i];
        CanonicalFunction eps;
        eps.n_vars = n_vars;
        eps.affine_constant = 1.0;
        for (size_t m = 1; m <= gu.mu_m.size(); ++m) {
            AffineForm form;
            form.coeff = Eigen::VectorXd::Zero(n_vars);
            form.coeff[i] = static_cast<double>(m);
            form.coeff[2 * n + i] = 1.0;
            form.coeff[n + i] = -1.0;
            eps.add_exp(gu.mu_m[m - 1], form);
        }
        if (gu.xi > 0.0) {
            AffineForm form;
            form.coeff = Eigen::VectorXd::Zero(n_vars);
            form.coeff[2 * n + i] = 1.0;
            form.coeff[n + i] = -(1.0 - gu.delta);
            eps.add_exp(gu.xi, form);
        }
        {
            AffineForm form;
            form.coeff = Eigen::VectorXd::Zero(n_vars);
            form.coeff[2 * n + i] = 1.0;
            form.coeff[n + i] = -1.0;
            eps.add_exp(gu.p_st, form);
        }
        prog.constraints.push_back(std::move(eps));
        sp.constraint_labels.push_back("consumption[" + std::to_string(i) + "]");
    }
    return sp;
}

/// Subproblem of the rate-maximization baseline: variables q, objective
/// sum w_i (bounded rate)/B, feasible set {power caps, QoS}.
inline SurrogateProblem build_wsr_subproblem(const NetworkInstance& inst, const Eigen::VectorXd& q_prime) {
    const int n = inst.n_users();
    SurrogateProblem sp;
    sp.kind = SurrogateKind::Wsr;
    sp.n_users = n;
    sp.expansion = q_prime;

    const Eigen::VectorXd p_prime = exp2_vec(q_prime);
    for (int i = 0; i < n; ++i) sp.coeffs.push_back(log_bound_coeffs(sinr(inst, p_prime, i)));

    ConvexProgram& prog = sp.program;
    prog.n_vars = n;
    const double inf = std::numeric_limits<double>::infinity();
    prog.lower = Eigen::VectorXd::Constant(n, -inf);
    prog.upper = Eigen::VectorXd::Constant(n, inf);
    detail::set_q_box(prog, inst.users, 0, 1);

    // Objective sum_i w_i * (bounded rate)_i / B, one canonical function.
    CanonicalFunction obj;
    obj.n_vars = n;
    obj.affine_coeff = Eigen::VectorXd::Zero(n);
    obj.affine_constant = 0.0;
    for (int i = 0; i < n; ++i) {
        const double w = inst.users[i].weight;
        if (w == 0.0) continue;
        obj.affine_coeff[i] += w * sp.coeffs[i].alpha;
        obj.affine_constant += w * (sp.coeffs[i].beta + sp.coeffs[i].alpha * std::log2(inst.gain(i, i)));
        if (sp.coeffs[i].alpha > 0.0)
            obj.add_lse(w * sp.coeffs[i].alpha,
                        detail::interference_forms(inst.gain, inst.self_interference, inst.noise, i, n, 0));
    }
    sp.objective_scale = inst.bandwidth;
    prog.objective = std::move(obj);

    for (int i = 0; i < n; ++i) {
        if (inst.users[i].r_min > 0.0) {
            prog.constraints.push_back(detail::theta_constraint(inst, i, n, 0));
            sp.constraint_labels.push_back("qos[" + std::to_string(i) + "]");
        }
    }
    return sp;
}

/// Multi-RB surrogate QoS rows over a decision vector laid out RB-major
/// (variable i*K + k is q of user i on RB k). RBs with zero expansion power
/// enter with (alpha, beta) = (0, 0) and contribute nothing.
inline std::vector<CanonicalFunction> build_multi_rb_qos(const MultiRbInstance& mrb,
                                                         const Eigen::MatrixXd& q_prime, int n_vars) {
    const int n = mrb.n_users();
    const int k_rb = mrb.n_rb();
    const Eigen::MatrixXd p_prime = exp2_mat(q_prime);
    std::vector<CanonicalFunction> rows;
    for (int i = 0; i < n; ++i) {
        if (!(mrb.users[i].r_min > 0.0)) continue;
        CanonicalFunction fn;
        fn.n_vars = n_vars;
        fn.affine_coeff = Eigen::VectorXd::Zero(n_vars);
        fn.affine_constant = -mrb.users[i].r_min / mrb.rb_bandwidth;
        for (int k = 0; k < k_rb; ++k) {
            const auto c = log_bound_coeffs(sinr_rb(mrb, p_prime, i, k));
            fn.affine_constant += c.beta + c.alpha * std::log2(mrb.gain[k](i, i));
            fn.affine_coeff[i * k_rb + k] += c.alpha;
            if (c.alpha > 0.0)
                fn.add_lse(c.alpha, detail::interference_forms(mrb.gain[k], mrb.self_interference[k],
                                                               mrb.noise[k], i, n_vars, k, k_rb));
        }
        rows.push_back(std::move(fn));
    }
    return rows;
}

/// Multi-RB subproblem: variables (q_{i,k} RB-major, v_i); per-user total
/// power cap, surrogate QoS and surrogate EE constraints.
inline SurrogateProblem build_wsee_multi_rb_subproblem(const MultiRbInstance& mrb,
                                                       const Eigen::MatrixXd& q_prime,
                                                       const Eigen::VectorXd& v_prime) {
    const int n = mrb.n_users();
    const int k_rb = mrb.n_rb();
    const int n_vars = n * k_rb + n;
    SurrogateProblem sp;
    sp.kind = SurrogateKind::WseeMultiRb;
    sp.n_users = n;
    sp.n_rb = k_rb;
    sp.expansion = Eigen::VectorXd(n_vars);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < k_rb; ++k) sp.expansion[i * k_rb + k] = q_prime(i, k);
    sp.expansion.tail(n) = v_prime;

    const Eigen::MatrixXd p_prime = exp2_mat(q_prime);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < k_rb; ++k)
            sp.coeffs.push_back(log_bound_coeffs(sinr_rb(mrb, p_prime, i, k)));

    ConvexProgram& prog = sp.program;
    prog.n_vars = n_vars;
    const double inf = std::numeric_limits<double>::infinity();
    prog.lower = Eigen::VectorXd::Constant(n_vars, -inf);
    prog.upper = Eigen::VectorXd::Constant(n_vars, inf);
    detail::set_q_box(prog, mrb.users, 0, k_rb, k_rb);

    Eigen::VectorXd obj_coeff = Eigen::VectorXd::Zero(n_vars);
    for (int i = 0; i < n; ++i) obj_coeff[n * k_rb + i] = mrb.users[i].weight * std::exp2(v_prime[i]);
    sp.objective_scale = detail::objective_scale_from(obj_coeff);
    prog.objective = CanonicalFunction::affine(obj_coeff / sp.objective_scale);

    // Per-user total power budget; for K = 1 the box bound already says it.
    if (k_rb > 1) {
        for (int i = 0; i < n; ++i) {
            CanonicalFunction cap;
            cap.n_vars = n_vars;
            cap.affine_constant = std::log2(mrb.users[i].p_max);
            std::vector<AffineForm> forms;
            for (int k = 0; k < k_rb; ++k) forms.push_back(AffineForm::unit(n_vars, i * k_rb + k));
            cap.add_lse(1.0, std::move(forms));
            prog.constraints.push_back(std::move(cap));
            sp.constraint_labels.push_back("power_cap[" + std::to_string(i) + "]");
        }
    }

    for (auto& row : build_multi_rb_qos(mrb, q_prime, n_vars)) {
        prog.constraints.push_back(std::move(row));
        sp.constraint_labels.push_back("qos");
    }

    for (int i = 0; i < n; ++i) {
        CanonicalFunction fn;
        fn.n_vars = n_vars;
        fn.affine_coeff = Eigen::VectorXd::Zero(n_vars);
        fn.affine_constant = 0.0;
        for (int k = 0; k < k_rb; ++k) {
            const auto& c = sp.coeffs[i * k_rb + k];
            fn.affine_constant += c.beta + c.alpha * std::log2(mrb.gain[k](i, i));
            fn.affine_coeff[i * k_rb + k] += c.alpha;
            if (c.alpha > 0.0)
                fn.add_lse(c.alpha, detail::interference_forms(mrb.gain[k], mrb.self_interference[k],
                                                               mrb.noise[k], i, n_vars, k, k_rb));
            AffineForm amp;
            amp.coeff = Eigen::VectorXd::Zero(n_vars);
            amp.coeff[i * k_rb + k] = 1.0;
            amp.coeff[n * k_rb + i] = 1.0;
            fn.add_exp(mrb.users[i].mu / mrb.rb_bandwidth, amp);
        }
        fn.add_exp(mrb.users[i].p_st / mrb.rb_bandwidth, AffineForm::unit(n_vars, n * k_rb + i));
        prog.constraints.push_back(std::move(fn));
        sp.constraint_labels.push_back("ee[" + std::to_string(i) + "]");
    }
    return sp;
}

}  // namespace eemax
