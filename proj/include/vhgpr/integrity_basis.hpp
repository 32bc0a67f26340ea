#pragma once

/**
 * @file integrity_basis.hpp
 * @brief The eight-component integrity basis of the total second
 *        Piola-Kirchhoff stress for isotropic visco-hyperelastic response.
 */

#include <Eigen/Dense>

#include <array>

#include "vhgpr/kinematics.hpp"
#include "vhgpr/voigt.hpp"

namespace vhgpr {

/// Relative singular-value cutoff for the pseudo-inverse of a rank-deficient
/// Cbardot (shared with the coefficient-extraction rank cutoff).
inline constexpr double kSingularValueCutoff = 1e-10;

/// Moore-Penrose pseudo-inverse of a symmetric 3x3 tensor. Eigenvalues with
/// magnitude below cutoff * max|eigenvalue| are treated as zero.
/// @param[out] degenerate set to true when any eigenvalue was dropped.
inline SymTensor3 sym_pseudo_inverse(const SymTensor3& A, bool* degenerate = nullptr,
                                     double cutoff = kSingularValueCutoff) {
    Eigen::SelfAdjointEigenSolver<Matrix3> eig(A.to_matrix());
    const Eigen::Vector3d w = eig.eigenvalues();
    const Matrix3 V = eig.eigenvectors();
    const double wmax = w.cwiseAbs().maxCoeff();
    const double tol = cutoff * wmax;

    bool dropped = false;
    Eigen::Vector3d winv = Eigen::Vector3d::Zero();
    for (int i = 0; i < 3; ++i) {
        if (std::abs(w[i]) > tol && wmax > 0.0) {
            winv[i] = 1.0 / w[i];
        } else {
            dropped = true;
        }
    }
    if (degenerate) *degenerate = dropped;
    return SymTensor3::from_matrix(V * winv.asDiagonal() * V.transpose());
}

/// The basis tensors G1..G8:
///   G1 = C^{-1}           G2 = Dev(I)          G3 = Dev(Cbar)
///   G4 = Dev(Cbar^{-1})   G5 = Dev(Cbardot)    G6 = Dev(Cbardot^{-1})
///   G7 = Dev(Cbar Cbardot + Cbardot Cbar)
///   G8 = Dev(Cbar^2 Cbardot + Cbardot Cbar^2)
/// G2..G8 are referential-deviatoric: Gk : C = 0.
struct IntegrityBasis {
    std::array<SymTensor3, 8> g;
    /// True when Cbardot is singular and G6 was built from the Moore-Penrose
    /// pseudo-inverse; downstream extraction drops that column.
    bool g6_degenerate = false;

    const SymTensor3& operator[](int k) const { return g[k]; }
};

inline IntegrityBasis integrity_basis(const DeformationState& s) {
    const Matrix3 Cb = s.Cbar.to_matrix();
    const Matrix3 Cbd = s.Cbardot.to_matrix();
    const Matrix3 Cb2 = Cb * Cb;

    IntegrityBasis b;
    b.g[0] = SymTensor3::from_matrix(s.C.to_matrix().inverse());
    b.g[1] = deviatoric(SymTensor3::identity(), s.C);
    b.g[2] = deviatoric(s.Cbar, s.C);
    b.g[3] = deviatoric(SymTensor3::from_matrix(Cb.inverse()), s.C);
    b.g[4] = deviatoric(s.Cbardot, s.C);

    const SymTensor3 cbd_inv = sym_pseudo_inverse(s.Cbardot, &b.g6_degenerate);
    b.g[5] = deviatoric(cbd_inv, s.C);

    b.g[6] = deviatoric(symmetrize(Cb * Cbd + Cbd * Cb), s.C);
    b.g[7] = deviatoric(symmetrize(Cb2 * Cbd + Cbd * Cb2), s.C);
    return b;
}

}  // namespace vhgpr
