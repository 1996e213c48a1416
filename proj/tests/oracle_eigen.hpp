#pragma once

// Dense spectral oracle, independent of the power iteration it checks.
// Eigen's QR-based solver computes the full spectrum; the Perron root of an
// irreducible Metzler matrix is its eigenvalue of maximal real part.

#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "rsctmc/model.hpp"

namespace rsctmc::testing {

struct DensePerron {
    double eigenvalue;
    std::vector<double> eigenvector; // scaled so entry 0 equals 1
};

inline DensePerron dense_perron(const Matrix& A) {
    const auto n = static_cast<Eigen::Index>(A.size());
    Eigen::MatrixXd M(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            M(i, j) = A[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    Eigen::EigenSolver<Eigen::MatrixXd> solver(M);
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < n; ++k)
        if (solver.eigenvalues()(k).real() > solver.eigenvalues()(best).real()) best = k;

    DensePerron out;
    out.eigenvalue = solver.eigenvalues()(best).real();
    // materialize: col() would otherwise view a destroyed temporary
    const Eigen::VectorXcd v = solver.eigenvectors().col(best);
    out.eigenvector.resize(static_cast<std::size_t>(n));
    const std::complex<double> v0 = v(0);
    for (Eigen::Index i = 0; i < n; ++i)
        out.eigenvector[static_cast<std::size_t>(i)] = (v(i) / v0).real();
    return out;
}

}  // namespace rsctmc::testing
