#pragma once

// Interference network model: SINR, rates, power consumption, per-link
// energy efficiencies and the weighted-sum objectives evaluated exactly
// in the linear (watt) domain.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace eemax {

using PowerVector = Eigen::VectorXd;

inline Eigen::VectorXd exp2_vec(const Eigen::VectorXd& q) {
    return q.unaryExpr([](double u) { return std::exp2(u); });
}
inline Eigen::MatrixXd exp2_mat(const Eigen::MatrixXd& q) {
    return q.unaryExpr([](double u) { return std::exp2(u); });
}
inline Eigen::VectorXd log2_vec(const Eigen::VectorXd& p) {
    return p.unaryExpr([](double u) { return std::log2(u); });
}

/// One transmitter/receiver pair: priority weight, power budget, QoS target
/// and the linear power-consumption parameters.
struct UserLink {
    double weight = 1.0;  ///< priority weight w, >= 0
    double p_max = 1.0;   ///< maximum transmit power [W]
    double r_min = 0.0;   ///< minimum required rate [bit/s], 0 disables QoS
    double mu = 1.0;      ///< inverse amplifier efficiency, >= 1
    double p_st = 1.0;    ///< static dissipated power [W], strictly > 0
};

/// Interference-coupled network. gain(j, i) is the effect of transmitter j
/// on receiver i; the diagonal holds the direct-link gains.
struct NetworkInstance {
    double bandwidth = 1.0;             ///< [Hz]
    Eigen::MatrixXd gain;               ///< N x N, entries >= 0, diagonal > 0
    Eigen::VectorXd self_interference;  ///< length N, entries >= 0
    Eigen::VectorXd noise;              ///< length N, entries > 0 [W]
    std::vector<UserLink> users;

    int n_users() const { return static_cast<int>(users.size()); }

    /// Throws std::invalid_argument on any malformed field.
    void validate() const;
};

/// Rate-dependent power consumption: sum_m mu_m p^m + xi * rate^delta + p_st.
struct GeneralPowerUser {
    std::vector<double> mu_m;  ///< polynomial coefficients, mu_m[0] == mu
    double xi = 0.0;           ///< rate-dependent coefficient [W/(bit/s)^delta]
    double delta = 1.0;        ///< rate exponent, in (0, 1]
    double p_st = 1.0;         ///< [W], strictly > 0
};

/// Network with K resource blocks. Per-RB coefficient sets share one user
/// list; the per-user power budget caps the total power across RBs.
struct MultiRbInstance {
    double rb_bandwidth = 1.0;                        ///< [Hz]
    std::vector<Eigen::MatrixXd> gain;                ///< K matrices, N x N
    std::vector<Eigen::VectorXd> self_interference;   ///< K vectors
    std::vector<Eigen::VectorXd> noise;               ///< K vectors
    std::vector<UserLink> users;

    int n_users() const { return static_cast<int>(users.size()); }
    int n_rb() const { return static_cast<int>(gain.size()); }
    void validate() const;
};

struct ConstraintViolation {
    enum class Kind { PowerLower, PowerUpper, MinRate };
    Kind kind;
    int user;
    double amount;  ///< positive magnitude of the violation

    std::string to_string() const {
        std::ostringstream os;
        switch (kind) {
            case Kind::PowerLower: os << "p[" << user << "] < 0"; break;
            case Kind::PowerUpper: os << "p[" << user << "] > p_max"; break;
            case Kind::MinRate: os << "rate[" << user << "] < r_min"; break;
        }
        os << " by " << amount;
        return os.str();
    }
};

struct FeasibilityReport {
    bool feasible = true;
    std::vector<ConstraintViolation> violations;
};

namespace detail {

inline void check_user_index(int n, int i) {
    if (i < 0 || i >= n) throw std::out_of_range("user index " + std::to_string(i) + " out of range");
}

inline void check_power(const NetworkInstance& inst, const PowerVector& p) {
    if (p.size() != inst.n_users()) throw std::invalid_argument("power vector has wrong length");
    for (int i = 0; i < p.size(); ++i) {
        if (!std::isfinite(p[i]) || p[i] < 0.0)
            throw std::invalid_argument("power p[" + std::to_string(i) + "] must be finite and >= 0");
    }
}

}  // namespace detail

inline void NetworkInstance::validate() const {
    const int n = n_users();
    if (n < 1) throw std::invalid_argument("instance needs at least one user");
    if (!(bandwidth > 0.0)) throw std::invalid_argument("bandwidth must be > 0");
    if (gain.rows() != n || gain.cols() != n) throw std::invalid_argument("gain matrix must be N x N");
    if (self_interference.size() != n || noise.size() != n)
        throw std::invalid_argument("self_interference/noise must have length N");
    double weight_sum = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double w = gain(j, i);
            if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("gain entries must be finite and >= 0");
        }
        if (!(gain(i, i) > 0.0)) throw std::invalid_argument("direct gain gain(i,i) must be > 0");
        if (!std::isfinite(self_interference[i]) || self_interference[i] < 0.0)
            throw std::invalid_argument("self_interference must be finite and >= 0");
        if (!(noise[i] > 0.0) || !std::isfinite(noise[i])) throw std::invalid_argument("noise must be > 0");
        const UserLink& u = users[i];
        if (!(u.weight >= 0.0)) throw std::invalid_argument("weight must be >= 0");
        if (!(u.p_max > 0.0)) throw std::invalid_argument("p_max must be > 0");
        if (!(u.r_min >= 0.0)) throw std::invalid_argument("r_min must be >= 0");
        if (!(u.mu >= 1.0)) throw std::invalid_argument("mu must be >= 1");
        if (!(u.p_st > 0.0)) throw std::invalid_argument("p_st must be > 0");
        weight_sum += u.weight;
    }
    if (std::abs(weight_sum - 1.0) > 1e-9) throw std::invalid_argument("weights must sum to one");
}

inline void MultiRbInstance::validate() const {
    const int n = n_users();
    const int k = n_rb();
    if (n < 1 || k < 1) throw std::invalid_argument("multi-RB instance needs N >= 1 and K >= 1");
    if (!(rb_bandwidth > 0.0)) throw std::invalid_argument("rb_bandwidth must be > 0");
    if (static_cast<int>(self_interference.size()) != k || static_cast<int>(noise.size()) != k)
        throw std::invalid_argument("per-RB vectors must have length K");
    for (int rb = 0; rb < k; ++rb) {
        NetworkInstance view{rb_bandwidth, gain[rb], self_interference[rb], noise[rb], users};
        view.validate();
    }
}

/// Interference-plus-noise seen by receiver i (the SINR denominator).
inline double interference_plus_noise(const NetworkInstance& inst, const PowerVector& p, int i) {
    double d = inst.noise[i] + inst.self_interference[i] * p[i];
    for (int j = 0; j < inst.n_users(); ++j) {
        if (j != i) d += inst.gain(j, i) * p[j];
    }
    return d;
}

inline double sinr(const NetworkInstance& inst, const PowerVector& p, int i) {
    detail::check_user_index(inst.n_users(), i);
    detail::check_power(inst, p);
    return inst.gain(i, i) * p[i] / interference_plus_noise(inst, p, i);
}

inline double rate(const NetworkInstance& inst, const PowerVector& p, int i) {
    return inst.bandwidth * std::log2(1.0 + sinr(inst, p, i));
}

inline double power_consumed_linear(const UserLink& user, double p_i) {
    if (!(p_i >= 0.0)) throw std::invalid_argument("transmit power must be >= 0");
    return user.mu * p_i + user.p_st;
}

inline double power_consumed_general(const GeneralPowerUser& user, double p_i, double rate_i) {
    if (!(p_i >= 0.0) || !(rate_i >= 0.0)) throw std::invalid_argument("power and rate must be >= 0");
    double total = user.p_st;
    double p_pow = 1.0;
    for (double mu_m : user.mu_m) {
        p_pow *= p_i;
        total += mu_m * p_pow;
    }
    if (user.xi > 0.0) total += user.xi * std::pow(rate_i, user.delta);
    return total;
}

inline double ee(const NetworkInstance& inst, const PowerVector& p, int i) {
    return rate(inst, p, i) / power_consumed_linear(inst.users[i], p[i]);
}

/// General-model per-link efficiency psi(p_i, rho_i) evaluated at rho = rate.
inline double ee_general(const NetworkInstance& inst, const std::vector<GeneralPowerUser>& gusers,
                         const PowerVector& p, int i) {
    const double r = rate(inst, p, i);
    return r / power_consumed_general(gusers[i], p[i], r);
}

inline double wsee(const NetworkInstance& inst, const PowerVector& p) {
    double sum = 0.0;
    for (int i = 0; i < inst.n_users(); ++i) sum += inst.users[i].weight * ee(inst, p, i);
    return sum;
}

inline double wsee_general(const NetworkInstance& inst, const std::vector<GeneralPowerUser>& gusers,
                           const PowerVector& p) {
    double sum = 0.0;
    for (int i = 0; i < inst.n_users(); ++i) sum += inst.users[i].weight * ee_general(inst, gusers, p, i);
    return sum;
}

inline double wsr(const NetworkInstance& inst, const PowerVector& p) {
    double sum = 0.0;
    for (int i = 0; i < inst.n_users(); ++i) sum += inst.users[i].weight * rate(inst, p, i);
    return sum;
}

/// Feasibility of p for the power box and the minimum-rate constraints,
/// each checked with relative tolerance tol.
inline FeasibilityReport is_feasible(const NetworkInstance& inst, const PowerVector& p, double tol = 1e-9) {
    FeasibilityReport report;
    for (int i = 0; i < inst.n_users(); ++i) {
        const UserLink& u = inst.users[i];
        if (p[i] < -tol * u.p_max)
            report.violations.push_back({ConstraintViolation::Kind::PowerLower, i, -p[i]});
        if (p[i] > u.p_max * (1.0 + tol))
            report.violations.push_back({ConstraintViolation::Kind::PowerUpper, i, p[i] - u.p_max});
        if (u.r_min > 0.0) {
            const double r = rate(inst, p, i);
            if (r < u.r_min * (1.0 - tol))
                report.violations.push_back({ConstraintViolation::Kind::MinRate, i, u.r_min - r});
        }
    }
    report.feasible = report.violations.empty();
    return report;
}

/// SINR threshold equivalent to the user's minimum-rate constraint.
inline double gamma_min(const UserLink& user, double bandwidth) {
    return std::exp2(user.r_min / bandwidth) - 1.0;
}

/// Large-power SINR limit; +infinity when there is no self-interference.
inline double gamma_max(const NetworkInstance& inst, int i) {
    detail::check_user_index(inst.n_users(), i);
    if (inst.self_interference[i] == 0.0) return std::numeric_limits<double>::infinity();
    return inst.gain(i, i) / inst.self_interference[i];
}

inline double sinr_rb(const MultiRbInstance& mrb, const Eigen::MatrixXd& p, int i, int rb) {
    double d = mrb.noise[rb][i] + mrb.self_interference[rb][i] * p(i, rb);
    for (int j = 0; j < mrb.n_users(); ++j) {
        if (j != i) d += mrb.gain[rb](j, i) * p(j, rb);
    }
    return mrb.gain[rb](i, i) * p(i, rb) / d;
}

/// Per-user rate summed over resource blocks. p is N x K, entries >= 0.
inline double rate_multi_rb(const MultiRbInstance& mrb, const Eigen::MatrixXd& p, int i) {
    detail::check_user_index(mrb.n_users(), i);
    if (p.rows() != mrb.n_users() || p.cols() != mrb.n_rb())
        throw std::invalid_argument("power matrix must be N x K");
    if ((p.array() < 0.0).any() || !p.allFinite())
        throw std::invalid_argument("power matrix entries must be finite and >= 0");
    double sum = 0.0;
    for (int rb = 0; rb < mrb.n_rb(); ++rb) sum += std::log2(1.0 + sinr_rb(mrb, p, i, rb));
    return mrb.rb_bandwidth * sum;
}

/// Per-user consumption uses the total transmit power across RBs.
inline double ee_multi_rb(const MultiRbInstance& mrb, const Eigen::MatrixXd& p, int i) {
    const double p_total = p.row(i).sum();
    return rate_multi_rb(mrb, p, i) / power_consumed_linear(mrb.users[i], p_total);
}

inline double wsee_multi_rb(const MultiRbInstance& mrb, const Eigen::MatrixXd& p) {
    double sum = 0.0;
    for (int i = 0; i < mrb.n_users(); ++i) sum += mrb.users[i].weight * ee_multi_rb(mrb, p, i);
    return sum;
}

inline FeasibilityReport is_feasible_multi_rb(const MultiRbInstance& mrb, const Eigen::MatrixXd& p,
                                              double tol = 1e-9) {
    FeasibilityReport report;
    for (int i = 0; i < mrb.n_users(); ++i) {
        const UserLink& u = mrb.users[i];
        const double p_total = p.row(i).sum();
        if ((p.row(i).array() < -tol * u.p_max).any())
            report.violations.push_back({ConstraintViolation::Kind::PowerLower, i, p.row(i).minCoeff()});
        if (p_total > u.p_max * (1.0 + tol))
            report.violations.push_back({ConstraintViolation::Kind::PowerUpper, i, p_total - u.p_max});
        if (u.r_min > 0.0) {
            const double r = rate_multi_rb(mrb, p, i);
            if (r < u.r_min * (1.0 - tol))
                report.violations.push_back({ConstraintViolation::Kind::MinRate, i, u.r_min - r});
        }
    }
    report.feasible = report.violations.empty();
    return report;
}

}  // namespace eemax
