#pragma once

/**
 * @file voigt.hpp
 * @brief Symmetric 3x3 tensors in Voigt order (11, 22, 33, 23, 13, 12).
 *
 * The Voigt convention used throughout stores unit (not doubled) shear
 * components, so serialization round-trips exactly. Double contractions
 * account for the repeated off-diagonal entries explicitly.
 */

#include <Eigen/Dense>

#include <array>
#include <cmath>

namespace vhgpr {

using Matrix3 = Eigen::Matrix3d;
using Vector6 = Eigen::Matrix<double, 6, 1>;

/// Symmetric second-order tensor stored as six Voigt components.
class SymTensor3 {
public:
    SymTensor3() : v_{0, 0, 0, 0, 0, 0} {}

    SymTensor3(double s11, double s22, double s33, double s23, double s13, double s12)
        : v_{s11, s22, s33, s23, s13, s12} {}

    static SymTensor3 identity() { return SymTensor3(1, 1, 1, 0, 0, 0); }

    static SymTensor3 zero() { return SymTensor3(); }

    /// Symmetrizes nothing: the caller asserts A is symmetric; off-diagonal
    /// entries are read from the upper triangle.
    static SymTensor3 from_matrix(const Matrix3& a) {
        return SymTensor3(a(0, 0), a(1, 1), a(2, 2), a(1, 2), a(0, 2), a(0, 1));
    }

    Matrix3 to_matrix() const {
        Matrix3 a;
        a << v_[0], v_[5], v_[4],
             v_[5], v_[1], v_[3],
             v_[4], v_[3], v_[2];
        return a;
    }

    Vector6 to_voigt() const {
        Vector6 x;
        for (int i = 0; i < 6; ++i) x[i] = v_[i];
        return x;
    }

    static SymTensor3 from_voigt(const Vector6& x) {
        return SymTensor3(x[0], x[1], x[2], x[3], x[4], x[5]);
    }

    double operator[](int i) const { return v_[i]; }
    double& operator[](int i) { return v_[i]; }

    double trace() const { return v_[0] + v_[1] + v_[2]; }

    /// Full double contraction A : B, counting both symmetric off-diagonal slots.
    double ddot(const SymTensor3& o) const {
        return v_[0] * o.v_[0] + v_[1] * o.v_[1] + v_[2] * o.v_[2] +
               2.0 * (v_[3] * o.v_[3] + v_[4] * o.v_[4] + v_[5] * o.v_[5]);
    }

    /// Frobenius norm of the full tensor (off-diagonals counted twice).
    double norm() const { return std::sqrt(ddot(*this)); }

    /// Euclidean norm of the plain Voigt 6-vector (off-diagonals counted once).
    double voigt_norm() const { return to_voigt().norm(); }

    SymTensor3 operator+(const SymTensor3& o) const {
        SymTensor3 r;
        for (int i = 0; i < 6; ++i) r.v_[i] = v_[i] + o.v_[i];
        return r;
    }

    SymTensor3 operator-(const SymTensor3& o) const {
        SymTensor3 r;
        for (int i = 0; i < 6; ++i) r.v_[i] = v_[i] - o.v_[i];
        return r;
    }

    SymTensor3 operator*(double s) const {
        SymTensor3 r;
        for (int i = 0; i < 6; ++i) r.v_[i] = v_[i] * s;
        return r;
    }

    SymTensor3 operator-() const { return (*this) * -1.0; }

private:
    std::array<double, 6> v_;
};

inline SymTensor3 operator*(double s, const SymTensor3& t) { return t * s; }

/// Symmetric part of a general 3x3 matrix as a SymTensor3.
inline SymTensor3 symmetrize(const Matrix3& a) {
    Matrix3 s = 0.5 * (a + a.transpose());
    return SymTensor3::from_matrix(s);
}

}  // namespace vhgpr
