#pragma once

// Shared generators and independent oracles for the test suites. Everything
// here is deliberately written against raw Eigen arithmetic so the checks do
// not reuse the library code paths they are meant to verify.

#include <Eigen/Dense>

#include <functional>
#include <random>

#include "vhgpr/voigt.hpp"

namespace vhtest {

using vhgpr::Matrix3;
using vhgpr::SymTensor3;

inline std::mt19937_64 make_rng(unsigned seed) { return std::mt19937_64(seed); }

inline Matrix3 random_matrix(std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    Matrix3 a;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a(i, j) = n(rng);
    return a;
}

inline SymTensor3 random_symmetric(std::mt19937_64& rng, double scale = 1.0) {
    const Matrix3 a = random_matrix(rng, scale);
    return SymTensor3::from_matrix(0.5 * (a + a.transpose()));
}

/// Random symmetric positive-definite matrix A A^T + eps I.
inline SymTensor3 random_spd(std::mt19937_64& rng, double eps = 0.1) {
    const Matrix3 a = random_matrix(rng);
    const Matrix3 s = a * a.transpose() + eps * Matrix3::Identity();
    return SymTensor3::from_matrix(s);
}

/// Random proper rotation from the QR factorization of a Gaussian matrix.
inline Matrix3 random_rotation(std::mt19937_64& rng) {
    const Matrix3 a = random_matrix(rng);
    Eigen::HouseholderQR<Matrix3> qr(a);
    Matrix3 q = qr.householderQ();
    if (q.determinant() < 0.0) q.col(0) *= -1.0;
    return q;
}

/// Random invertible deformation gradient with det > 0, moderately deformed.
inline Matrix3 random_deformation_gradient(std::mt19937_64& rng, double spread = 0.3) {
    Matrix3 f = Matrix3::Identity() + random_matrix(rng, spread);
    if (f.determinant() <= 0.05) f = Matrix3::Identity() + 0.1 * random_matrix(rng, spread);
    return f;
}

/// Central finite-difference gradient of a scalar function of a symmetric
/// tensor, using the independent-components convention: perturbing the (i,j)
/// and (j,i) slots together and dividing the off-diagonal response by two.
inline SymTensor3 fd_symmetric_gradient(const std::function<double(const SymTensor3&)>& f,
                                        const SymTensor3& at, double h = 1e-6) {
    SymTensor3 g;
    for (int k = 0; k < 6; ++k) {
        SymTensor3 plus = at;
        SymTensor3 minus = at;
        plus[k] += h;
        minus[k] -= h;
        const double df = (f(plus) - f(minus)) / (2.0 * h);
        // Voigt slots 3..5 carry both symmetric off-diagonal entries, so the
        // directional derivative picks up twice the gradient component.
        g[k] = (k < 3) ? df : 0.5 * df;
    }
    return g;
}

}  // namespace vhtest
