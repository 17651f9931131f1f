#pragma once

// Classical discrete-QR Lyapunov exponent estimator (textbook method:
// propagate an orthonormal frame, accumulate log of the triangular diagonal).
// Used as the reference against the factored product engine; deliberately
// built on Eigen's Householder QR and nothing else from this library.

#include <Eigen/Dense>
#include <cmath>
#include <functional>

namespace ncmet {

// exponents sorted descending; `factor(k)` is the k-th matrix of the product
inline Eigen::VectorXd qr_lyapunov_exponents(
    const std::function<Eigen::MatrixXcd(long)>& factor, int dim, long steps) {
    Eigen::MatrixXcd q = Eigen::MatrixXcd::Identity(dim, dim);
    Eigen::VectorXd sums = Eigen::VectorXd::Zero(dim);
    for (long k = 0; k < steps; ++k) {
        const Eigen::MatrixXcd m = factor(k) * q;
        Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
        Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
        q = qr.householderQ();
        for (int i = 0; i < dim; ++i) {
            const double d = std::abs(r(i, i));
            sums[i] += std::log(d);
            // keep the frame sign-consistent
            if (d > 0.0) q.col(i) *= r(i, i) / d;
        }
    }
    Eigen::VectorXd out = sums / static_cast<double>(steps);
    std::sort(out.data(), out.data() + out.size(), std::greater<double>());
    return out;
}

}  // namespace ncmet
