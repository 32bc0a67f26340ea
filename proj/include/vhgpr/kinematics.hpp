#pragma once

/**
 * @file kinematics.hpp
 * @brief Finite-strain kinematics: dilatational/isochoric split, strain and
 *        strain-rate invariants, the Lagrangian deviatoric operator, and the
 *        canonical deformation-mode generators.
 */

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "vhgpr/errors.hpp"
#include "vhgpr/voigt.hpp"

namespace vhgpr {

/// All kinematic quantities of one material point at one instant.
///
/// Immutable after construction; built through kinematics_from() or
/// kinematics_from_cauchy_green().
struct DeformationState {
    Matrix3 F = Matrix3::Identity();
    Matrix3 Fdot = Matrix3::Zero();
    SymTensor3 C = SymTensor3::identity();
    SymTensor3 Cdot;
    SymTensor3 Cbar = SymTensor3::identity();
    SymTensor3 Cbardot;
    double J = 1.0;
    double Jdot = 0.0;
};

namespace detail {

/// Populates C-derived fields given C, Cdot and a consistent (F, Fdot) pair.
inline DeformationState state_from_parts(const Matrix3& F, const Matrix3& Fdot,
                                         const Matrix3& C, const Matrix3& Cdot) {
    DeformationState s;
    s.F = F;
    s.Fdot = Fdot;
    s.C = symmetrize(C);
    s.Cdot = symmetrize(Cdot);

    const double detC = C.determinant();
    if (!(detC > 0.0)) {
        throw InvalidDeformationError("right Cauchy-Green tensor is not positive-definite, det(C) = " +
                                      std::to_string(detC));
    }
    s.J = std::sqrt(detC);
    // Jdot = (J/2) tr(C^{-1} Cdot); equals (J/2) tr(F^{-T} Cdot F^{-1}).
    const Matrix3 Cinv = C.inverse();
    s.Jdot = 0.5 * s.J * (Cinv * Cdot).trace();

    const double jm23 = std::pow(s.J, -2.0 / 3.0);
    const double jm53 = std::pow(s.J, -5.0 / 3.0);
    s.Cbar = SymTensor3::from_matrix(jm23 * C);
    s.Cbardot = SymTensor3::from_matrix(jm23 * Cdot - (2.0 / 3.0) * jm53 * s.Jdot * C);
    return s;
}

}  // namespace detail

/// Builds the full kinematic state from the deformation gradient and its rate.
/// Throws InvalidDeformationError unless det(F) > 0.
inline DeformationState kinematics_from(const Matrix3& F, const Matrix3& Fdot = Matrix3::Zero()) {
    const double detF = F.determinant();
    if (!(detF > 0.0)) {
        throw InvalidDeformationError("det(F) = " + std::to_string(detF) + " is not positive");
    }
    const Matrix3 C = F.transpose() * F;
    const Matrix3 Cdot = Fdot.transpose() * F + F.transpose() * Fdot;
    return detail::state_from_parts(F, Fdot, C, Cdot);
}

/// Builds a state directly from (C, Cdot) when no deformation gradient is
/// available (Algorithm-style datasets). A consistent gradient pair is
/// reconstructed from the principal square root: F = C^{1/2},
/// Fdot = F^{-1} Cdot / 2.
inline DeformationState kinematics_from_cauchy_green(const SymTensor3& C, const SymTensor3& Cdot) {
    const Matrix3 Cm = C.to_matrix();
    Eigen::SelfAdjointEigenSolver<Matrix3> eig(Cm);
    if (eig.eigenvalues().minCoeff() <= 0.0) {
        throw InvalidDeformationError("right Cauchy-Green tensor is not positive-definite");
    }
    const Matrix3 F = eig.operatorSqrt();
    const Matrix3 Fdot = 0.5 * F.inverse() * Cdot.to_matrix();
    return detail::state_from_parts(F, Fdot, Cm, Cdot.to_matrix());
}

/// The ten scalar invariants of one state: J plus the strain invariants of
/// Cbar and the rate invariants of (Cbar, Cbardot).
struct InvariantSet {
    double J = 1.0;
    double I1bar = 3.0;
    double I2bar = 3.0;
    double J1bar = 0.0;
    double J2bar = 0.0;
    double J3bar = 0.0;
    double J4bar = 0.0;
    double J5bar = 0.0;
    double J6bar = 0.0;
    double J7bar = 0.0;
};

inline InvariantSet invariants(const DeformationState& s) {
    const Matrix3 Cb = s.Cbar.to_matrix();
    const Matrix3 Cbd = s.Cbardot.to_matrix();
    const Matrix3 Cb2 = Cb * Cb;
    const Matrix3 Cbd2 = Cbd * Cbd;

    InvariantSet inv;
    inv.J = s.J;
    inv.I1bar = Cb.trace();
    inv.I2bar = 0.5 * (inv.I1bar * inv.I1bar - Cb2.trace());
    inv.J1bar = Cbd.trace();
    inv.J2bar = Cbd2.trace();
    inv.J3bar = Cbd.determinant();
    inv.J4bar = (Cb * Cbd).trace();
    inv.J5bar = (Cb * Cbd2).trace();
    inv.J6bar = (Cb2 * Cbd).trace();
    inv.J7bar = (Cb2 * Cbd2).trace();
    return inv;
}

/// Lagrangian deviatoric operator Dev(Z) = Z - (1/3)(Z : C) C^{-1}.
/// The result contracts to zero against C. Throws on singular C.
inline SymTensor3 deviatoric(const SymTensor3& Z, const SymTensor3& C) {
    const Matrix3 Cm = C.to_matrix();
    const double detC = Cm.determinant();
    if (std::abs(detC) < 1e-300) {
        throw InvalidDeformationError("deviatoric operator requires invertible C");
    }
    const Matrix3 Cinv = Cm.inverse();
    const double zc = Z.ddot(C);
    return SymTensor3::from_matrix(Z.to_matrix() - (zc / 3.0) * Cinv);
}

// ---------------------------------------------------------------------------
// Deformation-mode generators
// ---------------------------------------------------------------------------

/// Confined uniaxial mode F = I + (j - 1) e1 (x) E1, parameterized by the
/// target volumetric strain det(F) = j. Quasi-static (Fdot = 0).
inline DeformationState mode_confined_uniaxial(double j) {
    if (!(j > 0.0)) {
        throw InvalidDeformationError("confined mode requires volumetric strain j > 0, got " +
                                      std::to_string(j));
    }
    Matrix3 F = Matrix3::Identity();
    F(0, 0) = j;
    return kinematics_from(F, Matrix3::Zero());
}

/// Isochoric (volume-preserving) uniaxial mode at stretch lambda and stretch
/// rate lambda_dot:
///   F    = diag(lambda, lambda^{-1/2}, lambda^{-1/2})
///   Fdot = lambda_dot diag(1, -1/(2 lambda^{3/2}), -1/(2 lambda^{3/2}))
/// lambda_dot = 0 encodes the quasi-static limit exactly (Fdot = 0).
inline DeformationState mode_isochoric_uniaxial(double lambda, double lambda_dot = 0.0) {
    if (!(lambda > 0.0)) {
        throw InvalidDeformationError("uniaxial mode requires stretch > 0, got " +
                                      std::to_string(lambda));
    }
    Matrix3 F = Matrix3::Zero();
    F(0, 0) = lambda;
    F(1, 1) = F(2, 2) = 1.0 / std::sqrt(lambda);
    Matrix3 Fdot = Matrix3::Zero();
    if (lambda_dot != 0.0) {
        Fdot(0, 0) = lambda_dot;
        Fdot(1, 1) = Fdot(2, 2) = -lambda_dot / (2.0 * std::pow(lambda, 1.5));
    }
    return kinematics_from(F, Fdot);
}

/// Simple shear mode F = I + gamma e1 (x) E2, Fdot = gamma_dot e1 (x) E2.
/// det(F) = 1 exactly for any gamma.
inline DeformationState mode_simple_shear(double gamma, double gamma_dot = 0.0) {
    Matrix3 F = Matrix3::Identity();
    F(0, 1) = gamma;
    Matrix3 Fdot = Matrix3::Zero();
    Fdot(0, 1) = gamma_dot;
    return kinematics_from(F, Fdot);
}

}  // namespace vhgpr
