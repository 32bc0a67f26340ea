#pragma once

/**
 * @file materials.hpp
 * @brief Closed-form volumetric, hyperelastic, and viscous reference models:
 *        energy densities, integrity-basis coefficients, and stresses.
 *
 * Every model is a small immutable parameter record; evaluation functions are
 * pure. Stress follows the assembly
 *
 *   S_vol    = zeta1(J) C^{-1}
 *   S_h,iso  = J^{-2/3} [ Gamma1 Dev(I) + Gamma2 Dev(Cbar) ]
 *   S_v,iso  = J^{-2/3} [ Phi1 Dev(I) + Phi2 Dev(Cbar) + Phi3 Dev(Cbar^{-1})
 *              + Phi4 Dev(Cbardot) + Phi6 Dev(Cbar Cbardot + Cbardot Cbar)
 *              + Phi7 Dev(Cbar^2 Cbardot + Cbardot Cbar^2) ]
 *
 * with Phi5 (the Dev(Cbardot^{-1}) coefficient) identically zero for all
 * shipped viscous potentials, so the analytic path never inverts Cbardot.
 */

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "vhgpr/errors.hpp"
#include "vhgpr/kinematics.hpp"
#include "vhgpr/voigt.hpp"

namespace vhgpr {

using json = nlohmann::json;

/// Stress branch of the additive decomposition.
enum class Branch { Vol, HIso, VIso };

inline std::string to_string(Branch b) {
    switch (b) {
        case Branch::Vol: return "vol";
        case Branch::HIso: return "h_iso";
        default: return "v_iso";
    }
}

inline Branch branch_from_string(const std::string& s) {
    if (s == "vol") return Branch::Vol;
    if (s == "h_iso") return Branch::HIso;
    if (s == "v_iso") return Branch::VIso;
    throw std::invalid_argument("unknown branch tag: " + s);
}

/// Integrity-basis coefficients of one stress branch:
/// {zeta1} | {Gamma1, Gamma2} | {Phi1..Phi7}.
struct CoefficientVector {
    Branch branch = Branch::Vol;
    std::vector<double> values;
};

// ---------------------------------------------------------------------------
// Volumetric energy densities U(J)
// ---------------------------------------------------------------------------

enum class VolumetricFamily { SimoMiehe, VolNeoHookean, VolOgden };

struct VolumetricModel {
    VolumetricFamily family = VolumetricFamily::SimoMiehe;
    double kappa = 1.0;  ///< bulk modulus, > 0
    double beta = 1.0;   ///< Ogden exponent, != 0 (unused otherwise)

    static VolumetricModel simo_miehe(double kappa) {
        require_positive_kappa(kappa);
        return {VolumetricFamily::SimoMiehe, kappa, 0.0};
    }
    static VolumetricModel vol_neo_hookean(double kappa) {
        require_positive_kappa(kappa);
        return {VolumetricFamily::VolNeoHookean, kappa, 0.0};
    }
    static VolumetricModel vol_ogden(double kappa, double beta) {
        require_positive_kappa(kappa);
        if (beta == 0.0) throw std::invalid_argument("volumetric Ogden model requires beta != 0");
        return {VolumetricFamily::VolOgden, kappa, beta};
    }

private:
    static void require_positive_kappa(double kappa) {
        if (!(kappa > 0.0)) {
            throw std::invalid_argument("bulk modulus must be positive, got " + std::to_string(kappa));
        }
    }
};

inline double energy(const VolumetricModel& m, double J) {
    switch (m.family) {
        case VolumetricFamily::SimoMiehe:
            return 0.5 * m.kappa * (0.5 * (J * J - 1.0) - std::log(J));
        case VolumetricFamily::VolNeoHookean:
            return 0.5 * m.kappa * (J - 1.0) * (J - 1.0);
        case VolumetricFamily::VolOgden:
            return m.kappa / (m.beta * m.beta) *
                   (std::pow(J, -m.beta) - 1.0 + m.beta * std::log(J));
    }
    return 0.0;
}

/// zeta1(J) = J dU/dJ.
inline double zeta1(const VolumetricModel& m, double J) {
    switch (m.family) {
        case VolumetricFamily::SimoMiehe:
            return 0.5 * m.kappa * (J * J - 1.0);
        case VolumetricFamily::VolNeoHookean:
            return m.kappa * J * (J - 1.0);
        case VolumetricFamily::VolOgden:
            return m.kappa / m.beta * (1.0 - std::pow(J, -m.beta));
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Isochoric hyperelastic energy densities Wbar_h(I1bar, I2bar)
// ---------------------------------------------------------------------------

enum class HyperelasticFamily { NeoHookean, MooneyRivlin, GeneralizedRivlin, Yeoh, Gent, GentGent };

struct HyperelasticModel {
    HyperelasticFamily family = HyperelasticFamily::NeoHookean;
    double p1 = 1.0;
    double p2 = 0.0;
    double p3 = 0.0;

    static HyperelasticModel neo_hookean(double a10) { return {HyperelasticFamily::NeoHookean, a10, 0, 0}; }
    static HyperelasticModel mooney_rivlin(double a10, double a01) {
        return {HyperelasticFamily::MooneyRivlin, a10, a01, 0};
    }
    static HyperelasticModel generalized_rivlin(double a10, double a01, double a11) {
        return {HyperelasticFamily::GeneralizedRivlin, a10, a01, a11};
    }
    static HyperelasticModel yeoh(double c1, double c2) { return {HyperelasticFamily::Yeoh, c1, c2, 0}; }
    static HyperelasticModel gent(double mu, double jm) { return {HyperelasticFamily::Gent, mu, jm, 0}; }
    static HyperelasticModel gent_gent(double mu, double jm, double c2) {
        return {HyperelasticFamily::GentGent, mu, jm, c2};
    }
};

namespace detail {

/// Gent logarithm argument; throws outside the model domain.
inline double gent_log_arg(double i1, double jm) {
    const double arg = 1.0 - (i1 - 3.0) / jm;
    if (!(arg > 0.0)) {
        throw DomainError("Gent model limit violated: I1bar - 3 = " + std::to_string(i1 - 3.0) +
                          " exceeds Jm = " + std::to_string(jm));
    }
    return arg;
}

/// Clamps the tiny negative round-off that unimodular invariants can carry
/// (I1bar, I2bar >= 3 holds exactly); genuine violations are domain errors.
inline double clamp_sqrt_arg(double x, const char* which) {
    if (x < 0.0) {
        if (x > -1e-12) return 0.0;
        throw DomainError(std::string(which) + " is negative: " + std::to_string(x));
    }
    return x;
}

}  // namespace detail

inline double energy(const HyperelasticModel& m, const InvariantSet& inv) {
    const double x1 = inv.I1bar - 3.0;
    const double x2 = inv.I2bar - 3.0;
    switch (m.family) {
        case HyperelasticFamily::NeoHookean:
            return m.p1 * x1;
        case HyperelasticFamily::MooneyRivlin:
            return m.p1 * x1 + m.p2 * x2;
        case HyperelasticFamily::GeneralizedRivlin:
            return m.p1 * x1 + m.p2 * x2 + m.p3 * x1 * x2;
        case HyperelasticFamily::Yeoh:
            return m.p1 * x1 + m.p2 * x1 * x1;
        case HyperelasticFamily::Gent:
            return -0.5 * m.p1 * m.p2 * std::log(detail::gent_log_arg(inv.I1bar, m.p2));
        case HyperelasticFamily::GentGent:
            return -0.5 * m.p1 * m.p2 * std::log(detail::gent_log_arg(inv.I1bar, m.p2)) +
                   1.5 * m.p3 * std::log(inv.I2bar / 3.0);
    }
    return 0.0;
}

/// Gamma1 = 2 (dW/dI1bar + I1bar dW/dI2bar), Gamma2 = -2 dW/dI2bar.
inline void gamma_coefficients(const HyperelasticModel& m, const InvariantSet& inv,
                               double& gamma1, double& gamma2) {
    const double x1 = inv.I1bar - 3.0;
    switch (m.family) {
        case HyperelasticFamily::NeoHookean:
            gamma1 = 2.0 * m.p1;
            gamma2 = 0.0;
            return;
        case HyperelasticFamily::MooneyRivlin:
            gamma1 = 2.0 * (m.p1 + inv.I1bar * m.p2);
            gamma2 = -2.0 * m.p2;
            return;
        case HyperelasticFamily::GeneralizedRivlin:
            gamma1 = 2.0 * (m.p1 + inv.I1bar * m.p2 +
                            m.p3 * (inv.I1bar * inv.I1bar - 3.0 * inv.I1bar + inv.I2bar - 3.0));
            gamma2 = -2.0 * (m.p2 + m.p3 * x1);
            return;
        case HyperelasticFamily::Yeoh:
            gamma1 = 2.0 * m.p1 + 4.0 * m.p2 * x1;
            gamma2 = 0.0;
            return;
        case HyperelasticFamily::Gent:
            gamma1 = m.p1 / detail::gent_log_arg(inv.I1bar, m.p2);
            gamma2 = 0.0;
            return;
        case HyperelasticFamily::GentGent:
            gamma1 = m.p1 / detail::gent_log_arg(inv.I1bar, m.p2) + 3.0 * m.p3 * inv.I1bar / inv.I2bar;
            gamma2 = -3.0 * m.p3 / inv.I2bar;
            return;
    }
}

// ---------------------------------------------------------------------------
// Viscous dissipation potentials Wbar_v
// ---------------------------------------------------------------------------

enum class ViscousFamily { Pioletti, GeneralizedPioletti, USS };

struct ViscousModel {
    ViscousFamily family = ViscousFamily::Pioletti;
    double p1 = 1.0;
    double p2 = 0.0;
    double p3 = 0.0;

    static ViscousModel pioletti(double eta) { return {ViscousFamily::Pioletti, eta, 0, 0}; }
    static ViscousModel generalized_pioletti(double eta, double beta) {
        return {ViscousFamily::GeneralizedPioletti, eta, beta, 0};
    }
    static ViscousModel uss(double k11, double k21, double c21) {
        if (!(c21 > 0.0 && c21 <= 1.0)) {
            throw std::invalid_argument("USS rate-sensitivity index c21 must lie in (0, 1]");
        }
        return {ViscousFamily::USS, k11, k21, c21};
    }
};

inline double energy(const ViscousModel& m, const InvariantSet& inv) {
    const double x1 = detail::clamp_sqrt_arg(inv.I1bar - 3.0, "I1bar - 3");
    const double x2 = detail::clamp_sqrt_arg(inv.I2bar - 3.0, "I2bar - 3");
    switch (m.family) {
        case ViscousFamily::Pioletti:
            return 0.25 * m.p1 * x1 * inv.J2bar;
        case ViscousFamily::GeneralizedPioletti:
            return m.p1 * std::pow(x1, m.p2) * inv.J2bar;
        case ViscousFamily::USS: {
            const double j5 = std::max(inv.J5bar, 0.0);
            return m.p1 * inv.J2bar * std::sqrt(x1) + m.p2 / m.p3 * std::pow(j5, m.p3) * std::sqrt(x2);
        }
    }
    return 0.0;
}

/// Phi1..Phi7 per Phi_k = c_k dWbar_v/dJbar_k (Phi4 carries the factor 4 from
/// dJ2bar/dCbardot = 2 Cbardot, Phi5 the J3bar weight). All three shipped
/// potentials are independent of J1bar, J3bar, J4bar, J6bar, and J7bar, so
/// only Phi4 and Phi6 are ever nonzero.
inline void phi_coefficients(const ViscousModel& m, const InvariantSet& inv, double phi[7]) {
    for (int i = 0; i < 7; ++i) phi[i] = 0.0;
    const double x1 = detail::clamp_sqrt_arg(inv.I1bar - 3.0, "I1bar - 3");
    switch (m.family) {
        case ViscousFamily::Pioletti:
            phi[3] = m.p1 * x1;
            return;
        case ViscousFamily::GeneralizedPioletti:
            phi[3] = 4.0 * m.p1 * std::pow(x1, m.p2);
            return;
        case ViscousFamily::USS: {
            const double x2 = detail::clamp_sqrt_arg(inv.I2bar - 3.0, "I2bar - 3");
            phi[3] = 4.0 * m.p1 * std::sqrt(x1);
            // J5bar = 0 only in the rate-free limit where the whole branch
            // vanishes; treat the 0 * inf product as 0.
            const double j5 = std::max(inv.J5bar, 0.0);
            if (j5 > 0.0 && x2 > 0.0) {
                phi[5] = 2.0 * m.p2 * std::pow(j5, m.p3 - 1.0) * std::sqrt(x2);
            }
            return;
        }
    }
}

// ---------------------------------------------------------------------------
// Coefficient vectors and stress assembly
// ---------------------------------------------------------------------------

inline CoefficientVector coefficients(const VolumetricModel& m, const InvariantSet& inv) {
    return {Branch::Vol, {zeta1(m, inv.J)}};
}

inline CoefficientVector coefficients(const HyperelasticModel& m, const InvariantSet& inv) {
    double g1 = 0.0, g2 = 0.0;
    gamma_coefficients(m, inv, g1, g2);
    return {Branch::HIso, {g1, g2}};
}

inline CoefficientVector coefficients(const ViscousModel& m, const InvariantSet& inv) {
    double phi[7];
    phi_coefficients(m, inv, phi);
    return {Branch::VIso, {phi[0], phi[1], phi[2], phi[3], phi[4], phi[5], phi[6]}};
}

inline double energy(const VolumetricModel& m, const DeformationState& s) { return energy(m, s.J); }
inline double energy(const HyperelasticModel& m, const DeformationState& s) { return energy(m, invariants(s)); }
inline double energy(const ViscousModel& m, const DeformationState& s) { return energy(m, invariants(s)); }

inline SymTensor3 stress(const VolumetricModel& m, const DeformationState& s) {
    const Matrix3 Cinv = s.C.to_matrix().inverse();
    return zeta1(m, s.J) * SymTensor3::from_matrix(Cinv);
}

inline SymTensor3 stress(const HyperelasticModel& m, const DeformationState& s) {
    const InvariantSet inv = invariants(s);
    double g1 = 0.0, g2 = 0.0;
    gamma_coefficients(m, inv, g1, g2);
    const double jm23 = std::pow(s.J, -2.0 / 3.0);
    const SymTensor3 dev_i = deviatoric(SymTensor3::identity(), s.C);
    const SymTensor3 dev_cb = deviatoric(s.Cbar, s.C);
    return jm23 * (g1 * dev_i + g2 * dev_cb);
}

inline SymTensor3 stress(const ViscousModel& m, const DeformationState& s) {
    const InvariantSet inv = invariants(s);
    double phi[7];
    phi_coefficients(m, inv, phi);

    const Matrix3 Cb = s.Cbar.to_matrix();
    const Matrix3 Cbd = s.Cbardot.to_matrix();
    const double jm23 = std::pow(s.J, -2.0 / 3.0);

    SymTensor3 acc = SymTensor3::zero();
    if (phi[0] != 0.0) acc = acc + phi[0] * deviatoric(SymTensor3::identity(), s.C);
    if (phi[1] != 0.0) acc = acc + phi[1] * deviatoric(s.Cbar, s.C);
    if (phi[2] != 0.0) acc = acc + phi[2] * deviatoric(SymTensor3::from_matrix(Cb.inverse()), s.C);
    if (phi[3] != 0.0) acc = acc + phi[3] * deviatoric(s.Cbardot, s.C);
    // phi[4] multiplies Dev(Cbardot^{-1}); zero for all shipped potentials.
    if (phi[5] != 0.0) acc = acc + phi[5] * deviatoric(symmetrize(Cb * Cbd + Cbd * Cb), s.C);
    if (phi[6] != 0.0) {
        const Matrix3 Cb2 = Cb * Cb;
        acc = acc + phi[6] * deviatoric(symmetrize(Cb2 * Cbd + Cbd * Cb2), s.C);
    }
    return jm23 * acc;
}

// ---------------------------------------------------------------------------
// Tagged union over the three families; convenient for datasets and the CLI
// ---------------------------------------------------------------------------

using MaterialModel = std::variant<VolumetricModel, HyperelasticModel, ViscousModel>;

inline SymTensor3 stress(const MaterialModel& m, const DeformationState& s) {
    return std::visit([&](const auto& model) { return stress(model, s); }, m);
}

inline Branch branch_of(const MaterialModel& m) {
    if (std::holds_alternative<VolumetricModel>(m)) return Branch::Vol;
    if (std::holds_alternative<HyperelasticModel>(m)) return Branch::HIso;
    return Branch::VIso;
}

// ---------------------------------------------------------------------------
// JSON round-trip: {"family": ..., "params": {...}}
// ---------------------------------------------------------------------------

inline json to_json(const VolumetricModel& m) {
    switch (m.family) {
        case VolumetricFamily::SimoMiehe:
            return {{"family", "simo_miehe"}, {"params", {{"kappa", m.kappa}}}};
        case VolumetricFamily::VolNeoHookean:
            return {{"family", "vol_neo_hookean"}, {"params", {{"kappa", m.kappa}}}};
        default:
            return {{"family", "vol_ogden"}, {"params", {{"kappa", m.kappa}, {"beta", m.beta}}}};
    }
}

inline json to_json(const HyperelasticModel& m) {
    switch (m.family) {
        case HyperelasticFamily::NeoHookean:
            return {{"family", "neo_hookean"}, {"params", {{"A10", m.p1}}}};
        case HyperelasticFamily::MooneyRivlin:
            return {{"family", "mooney_rivlin"}, {"params", {{"A10", m.p1}, {"A01", m.p2}}}};
        case HyperelasticFamily::GeneralizedRivlin:
            return {{"family", "generalized_rivlin"},
                    {"params", {{"A10", m.p1}, {"A01", m.p2}, {"A11", m.p3}}}};
        case HyperelasticFamily::Yeoh:
            return {{"family", "yeoh"}, {"params", {{"C1", m.p1}, {"C2", m.p2}}}};
        case HyperelasticFamily::Gent:
            return {{"family", "gent"}, {"params", {{"mu", m.p1}, {"Jm", m.p2}}}};
        default:
            return {{"family", "gent_gent"}, {"params", {{"mu", m.p1}, {"Jm", m.p2}, {"C2", m.p3}}}};
    }
}

inline json to_json(const ViscousModel& m) {
    switch (m.family) {
        case ViscousFamily::Pioletti:
            return {{"family", "pioletti"}, {"params", {{"eta_prime", m.p1}}}};
        case ViscousFamily::GeneralizedPioletti:
            return {{"family", "generalized_pioletti"}, {"params", {{"eta", m.p1}, {"beta", m.p2}}}};
        default:
            return {{"family", "uss"}, {"params", {{"k11", m.p1}, {"k21", m.p2}, {"c21", m.p3}}}};
    }
}

inline json to_json(const MaterialModel& m) {
    return std::visit([](const auto& model) { return to_json(model); }, m);
}

inline MaterialModel material_from_json(const json& j) {
    const std::string family = j.at("family").get<std::string>();
    const json& p = j.at("params");
    if (family == "simo_miehe") return VolumetricModel::simo_miehe(p.at("kappa"));
    if (family == "vol_neo_hookean") return VolumetricModel::vol_neo_hookean(p.at("kappa"));
    if (family == "vol_ogden") return VolumetricModel::vol_ogden(p.at("kappa"), p.at("beta"));
    if (family == "neo_hookean") return HyperelasticModel::neo_hookean(p.at("A10"));
    if (family == "mooney_rivlin") return HyperelasticModel::mooney_rivlin(p.at("A10"), p.at("A01"));
    if (family == "generalized_rivlin")
        return HyperelasticModel::generalized_rivlin(p.at("A10"), p.at("A01"), p.at("A11"));
    if (family == "yeoh") return HyperelasticModel::yeoh(p.at("C1"), p.at("C2"));
    if (family == "gent") return HyperelasticModel::gent(p.at("mu"), p.at("Jm"));
    if (family == "gent_gent") return HyperelasticModel::gent_gent(p.at("mu"), p.at("Jm"), p.at("C2"));
    if (family == "pioletti") return ViscousModel::pioletti(p.at("eta_prime"));
    if (family == "generalized_pioletti")
        return ViscousModel::generalized_pioletti(p.at("eta"), p.at("beta"));
    if (family == "uss") return ViscousModel::uss(p.at("k11"), p.at("k21"), p.at("c21"));
    throw std::invalid_argument("unknown material family: " + family);
}

}  // namespace vhgpr
