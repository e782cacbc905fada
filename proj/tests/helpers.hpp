#pragma once

// Shared test utilities: random instance generation, finite differences and
// a golden-section maximizer used as an independent 1-D oracle.

#include <eemax/model.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace testutil {

/// Random well-formed instance with diagonally dominant gains. All users get
/// equal weights; QoS targets default to zero.
inline eemax::NetworkInstance random_instance(std::mt19937_64& rng, int n, double bandwidth = 2e6,
                                             bool with_self_interference = true) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    eemax::NetworkInstance inst;
    inst.bandwidth = bandwidth;
    inst.gain.resize(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) inst.gain(j, i) = (i == j) ? 0.5 + unit(rng) : 0.05 * unit(rng);
    inst.self_interference.resize(n);
    inst.noise.resize(n);
    for (int i = 0; i < n; ++i) {
        inst.self_interference[i] = with_self_interference ? 0.02 * unit(rng) : 0.0;
        inst.noise[i] = 0.01 + 0.1 * unit(rng);
    }
    inst.users.resize(n);
    for (auto& u : inst.users) {
        u.weight = 1.0 / n;
        u.p_max = 0.5 + unit(rng);
        u.r_min = 0.0;
        u.mu = 1.0 + 4.0 * unit(rng);
        u.p_st = 0.1 + 0.5 * unit(rng);
    }
    inst.validate();
    return inst;
}

inline eemax::PowerVector random_power(std::mt19937_64& rng, const eemax::NetworkInstance& inst) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    eemax::PowerVector p(inst.n_users());
    for (int i = 0; i < p.size(); ++i) p[i] = inst.users[i].p_max * (0.01 + 0.99 * unit(rng));
    return p;
}

/// Central finite-difference gradient of f at x.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double step = 1e-5) {
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd xp = x, xm = x;
    for (int k = 0; k < x.size(); ++k) {
        xp[k] = x[k] + step;
        xm[k] = x[k] - step;
        g[k] = (f(xp) - f(xm)) / (2.0 * step);
        xp[k] = x[k];
        xm[k] = x[k];
    }
    return g;
}

inline Eigen::MatrixXd fd_hessian(const std::function<double(const Eigen::VectorXd&)>& f,
                                  const Eigen::VectorXd& x, double step = 1e-4) {
    const int n = static_cast<int>(x.size());
    Eigen::MatrixXd h(n, n);
    Eigen::VectorXd e = x;
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            e = x;
            e[a] += step;
            e[b] += step;
            const double fpp = f(e);
            e = x;
            e[a] += step;
            e[b] -= step;
            const double fpm = f(e);
            e = x;
            e[a] -= step;
            e[b] += step;
            const double fmp = f(e);
            e = x;
            e[a] -= step;
            e[b] -= step;
            const double fmm = f(e);
            h(a, b) = (fpp - fpm - fmp + fmm) / (4.0 * step * step);
        }
    }
    return h;
}

/// Golden-section search for the maximum of a unimodal f on [lo, hi].
inline double golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                                 double tol = 1e-12) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol * (std::abs(a) + std::abs(b)) + 1e-300) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
        if (b - a < 1e-15) break;
    }
    return 0.5 * (a + b);
}

inline double rel_diff(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

}  // namespace testutil
