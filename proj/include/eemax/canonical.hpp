#pragma once

// Canonical concave functions: an affine part minus non-negatively weighted
// exponentials of affine forms minus non-negatively weighted log-sum-exp of
// affine forms. All transformed constraint families reduce to this shape,
// and value/gradient/Hessian are available in closed form.
//
// Base-2 exponentials throughout: 2^u = e^{u ln 2}, so gradients and
// Hessians carry explicit ln 2 factors.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace eemax {

inline constexpr double kLn2 = 0.6931471805599453;
/// Exponent arguments are clamped at this magnitude; a binding clamp at a
/// reported optimum is a numerical failure, not a silent saturation.
inline constexpr double kExpClamp = 700.0 / kLn2;

struct AffineForm {
    Eigen::VectorXd coeff;
    double constant = 0.0;

    double operator()(const Eigen::VectorXd& x) const { return coeff.dot(x) + constant; }

    static AffineForm unit(int n_vars, int index, double scale = 1.0, double constant = 0.0) {
        AffineForm f;
        f.coeff = Eigen::VectorXd::Zero(n_vars);
        f.coeff[index] = scale;
        f.constant = constant;
        return f;
    }

    static AffineForm constant_form(int n_vars, double constant) {
        AffineForm f;
        f.coeff = Eigen::VectorXd::Zero(n_vars);
        f.constant = constant;
        return f;
    }
};

struct CanonicalFunction {
    struct ExpTerm {
        double weight = 0.0;  ///< contributes -weight * 2^{form(x)}
        AffineForm form;
    };
    struct LseTerm {
        double weight = 0.0;  ///< contributes -weight * log2(sum_k 2^{forms[k](x)})
        std::vector<AffineForm> forms;
    };

    int n_vars = 0;
    Eigen::VectorXd affine_coeff;  ///< empty means zero
    double affine_constant = 0.0;
    std::vector<ExpTerm> exp_terms;
    std::vector<LseTerm> lse_terms;

    static CanonicalFunction affine(const Eigen::VectorXd& coeff, double constant = 0.0) {
        CanonicalFunction f;
        f.n_vars = static_cast<int>(coeff.size());
        f.affine_coeff = coeff;
        f.affine_constant = constant;
        return f;
    }

    void add_exp(double weight, AffineForm form) {
        if (weight < 0.0) throw std::invalid_argument("exp term weight must be >= 0");
        if (weight > 0.0) exp_terms.push_back({weight, std::move(form)});
    }

    void add_lse(double weight, std::vector<AffineForm> forms) {
        if (weight < 0.0) throw std::invalid_argument("lse term weight must be >= 0");
        if (forms.empty()) throw std::invalid_argument("lse term needs at least one form");
        if (weight > 0.0) lse_terms.push_back({weight, std::move(forms)});
    }
};

struct EvalResult {
    double value = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;
    bool clamped = false;  ///< an exponent argument hit +kExpClamp
};

namespace detail {

inline double clamped_exp2(double u, bool& clamped) {
    if (u > kExpClamp) {
        clamped = true;
        u = kExpClamp;
    }
    return std::exp2(u);
}

}  // namespace detail

/// Value only; returns -inf nowhere (canonical functions are finite everywhere).
inline double value(const CanonicalFunction& fn, const Eigen::VectorXd& x, bool* clamped = nullptr) {
    bool clamp_flag = false;
    double v = fn.affine_constant;
    if (fn.affine_coeff.size() > 0) v += fn.affine_coeff.dot(x);
    for (const auto& t : fn.exp_terms) v -= t.weight * detail::clamped_exp2(t.form(x), clamp_flag);
    for (const auto& t : fn.lse_terms) {
        double m = -std::numeric_limits<double>::infinity();
        for (const auto& f : t.forms) m = std::max(m, f(x));
        if (m > kExpClamp) clamp_flag = true;
        double sum = 0.0;
        for (const auto& f : t.forms) sum += std::exp2(f(x) - m);
        v -= t.weight * (m + std::log2(sum));
    }
    if (clamped) *clamped = clamp_flag;
    return v;
}

/// Analytically exact value, gradient and (optionally) Hessian.
inline EvalResult evaluate(const CanonicalFunction& fn, const Eigen::VectorXd& x, bool want_hessian = true) {
    const int n = fn.n_vars;
    EvalResult out;
    out.value = fn.affine_constant;
    out.gradient = Eigen::VectorXd::Zero(n);
    if (want_hessian) out.hessian = Eigen::MatrixXd::Zero(n, n);
    if (fn.affine_coeff.size() > 0) {
        out.value += fn.affine_coeff.dot(x);
        out.gradient += fn.affine_coeff;
    }
    for (const auto& t : fn.exp_terms) {
        const double z = detail::clamped_exp2(t.form(x), out.clamped);
        const double wz = t.weight * z;
        out.value -= wz;
        out.gradient -= (kLn2 * wz) * t.form.coeff;
        if (want_hessian)
            out.hessian -= (kLn2 * kLn2 * wz) * (t.form.coeff * t.form.coeff.transpose());
    }
    for (const auto& t : fn.lse_terms) {
        const int k = static_cast<int>(t.forms.size());
        double m = -std::numeric_limits<double>::infinity();
        for (const auto& f : t.forms) m = std::max(m, f(x));
        if (m > kExpClamp) out.clamped = true;
        double sum = 0.0;
        std::vector<double> soft(k);
        for (int a = 0; a < k; ++a) {
            soft[a] = std::exp2(t.forms[a](x) - m);
            sum += soft[a];
        }
        for (int a = 0; a < k; ++a) soft[a] /= sum;
        out.value -= t.weight * (m + std::log2(sum));
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
        for (int a = 0; a < k; ++a) mean += soft[a] * t.forms[a].coeff;
        out.gradient -= t.weight * mean;
        if (want_hessian) {
            Eigen::MatrixXd second = Eigen::MatrixXd::Zero(n, n);
            for (int a = 0; a < k; ++a)
                second += soft[a] * (t.forms[a].coeff * t.forms[a].coeff.transpose());
            second -= mean * mean.transpose();
            out.hessian -= (t.weight * kLn2) * second;
        }
    }
    return out;
}

}  // namespace eemax
