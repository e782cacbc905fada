#pragma once

// Lawson-Hanson non-negative least squares: minimize ||A x - b|| with x >= 0.
// Small dense problems only (active-set KKT multiplier fitting).

#include <Eigen/Dense>

#include <vector>

namespace eemax {

inline Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int max_iter = 0) {
    const int n = static_cast<int>(a.cols());
    if (max_iter <= 0) max_iter = 3 * std::max(n, 10);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    std::vector<bool> passive(n, false);
    Eigen::VectorXd w = a.transpose() * (b - a * x);
    const double tol = 1e-12 * std::max(1.0, w.lpNorm<Eigen::Infinity>());

    for (int iter = 0; iter < max_iter; ++iter) {
        int best = -1;
        double best_w = tol;
        for (int j = 0; j < n; ++j) {
            if (!passive[j] && w[j] > best_w) {
                best_w = w[j];
                best = j;
            }
        }
        if (best < 0) break;
        passive[best] = true;

        for (int inner = 0; inner < max_iter; ++inner) {
            std::vector<int> idx;
            for (int j = 0; j < n; ++j)
                if (passive[j]) idx.push_back(j);
            Eigen::MatrixXd ap(a.rows(), idx.size());
            for (size_t k = 0; k < idx.size(); ++k) ap.col(k) = a.col(idx[k]);
            Eigen::VectorXd z =
                ap.colPivHouseholderQr().solve(b);
            bool all_positive = true;
            for (size_t k = 0; k < idx.size(); ++k)
                if (z[k] <= 0.0) all_positive = false;
            if (all_positive) {
                x.setZero();
                for (size_t k = 0; k < idx.size(); ++k) x[idx[k]] = z[k];
                break;
            }
            // Step toward z until the first passive coordinate hits zero.
            double alpha = 1.0;
            for (size_t k = 0; k < idx.size(); ++k) {
                if (z[k] <= 0.0) {
                    const double xk = x[idx[k]];
                    if (xk - z[k] > 0.0) alpha = std::min(alpha, xk / (xk - z[k]));
                }
            }
            for (size_t k = 0; k < idx.size(); ++k) {
                x[idx[k]] += alpha * (z[k] - x[idx[k]]);
                if (x[idx[k]] <= 1e-14) {
                    x[idx[k]] = 0.0;
                    passive[idx[k]] = false;
                }
            }
        }
        w = a.transpose() * (b - a * x);
    }
    return x;
}

}  // namespace eemax
