#include <gtest/gtest.h>

#include <cmath>
#include <variant>
#include <vector>

#include "test_support.hpp"
#include "vhgpr/integrity_basis.hpp"
#include "vhgpr/materials.hpp"

using namespace vhgpr;
using vhtest::make_rng;

namespace {

// Reference states reused across checks.
DeformationState uniaxial_static(double lam) { return mode_isochoric_uniaxial(lam); }
DeformationState uniaxial_dynamic(double lam, double rate) { return mode_isochoric_uniaxial(lam, rate); }

// Contraction of a coefficient vector against the integrity basis per the
// branch assembly rules; the independent route for the duality checks.
SymTensor3 contract_against_basis(const CoefficientVector& c, const DeformationState& s) {
    const IntegrityBasis b = integrity_basis(s);
    if (c.branch == Branch::Vol) return c.values[0] * b[0];
    const double jm23 = std::pow(s.J, -2.0 / 3.0);
    SymTensor3 acc = SymTensor3::zero();
    for (std::size_t k = 0; k < c.values.size(); ++k) acc = acc + c.values[k] * b[k + 1];
    return jm23 * acc;
}

std::vector<MaterialModel> model_zoo() {
    return {
        VolumetricModel::simo_miehe(10.0),
        VolumetricModel::vol_neo_hookean(11.56),
        VolumetricModel::vol_ogden(10.0, 2.0),
        VolumetricModel::vol_ogden(8.0, -1.5),
        HyperelasticModel::neo_hookean(1.0),
        HyperelasticModel::mooney_rivlin(1.0, 0.5),
        HyperelasticModel::generalized_rivlin(1.0, 0.5, 0.25),
        HyperelasticModel::yeoh(1.46, -0.21),
        HyperelasticModel::gent(1.0, 10.0),
        HyperelasticModel::gent_gent(1.0, 10.0, 0.3),
        ViscousModel::pioletti(6.94),
        ViscousModel::generalized_pioletti(2.0, 1.5),
        ViscousModel::uss(1.0, 1.0, 0.75),
    };
}

}  // namespace

// ---------------------------------------------------------------------------
// energy
// ---------------------------------------------------------------------------

TEST(Energy, VanishesInReferenceState) {
    const DeformationState id = kinematics_from(Matrix3::Identity());
    for (const auto& m : model_zoo()) {
        const double w = std::visit([&](const auto& model) { return energy(model, id); }, m);
        EXPECT_NEAR(w, 0.0, 1e-14) << to_json(m).dump();
    }
}

TEST(Energy, MooneyRivlinAtUniaxialStretch) {
    // W = A10 (I1bar - 3) + A01 (I2bar - 3) = 1 * 0.1625 + 0.5 * 0.14.
    const double w = energy(HyperelasticModel::mooney_rivlin(1.0, 0.5), uniaxial_static(1.25));
    EXPECT_NEAR(w, 0.2325, 1e-12);
}

TEST(Energy, UssVanishesAtIdentityForAnyRate) {
    const ViscousModel uss = ViscousModel::uss(1.0, 1.0, 0.75);
    EXPECT_NEAR(energy(uss, uniaxial_dynamic(1.0, 55.0)), 0.0, 1e-12);
}

TEST(Energy, GentDomainViolationThrows) {
    // I1bar - 3 = 0.25 at gamma = 0.5 shear; Jm below that is out of domain.
    const DeformationState s = mode_simple_shear(0.5);
    EXPECT_THROW(energy(HyperelasticModel::gent(1.0, 0.2), s), DomainError);
    EXPECT_NO_THROW(energy(HyperelasticModel::gent(1.0, 0.3), s));
}

TEST(Energy, UssDomainViolationThrows) {
    InvariantSet bad;
    bad.I1bar = 2.9;  // below 3 beyond round-off: outside the USS square root
    bad.I2bar = 3.1;
    EXPECT_THROW(energy(ViscousModel::uss(1, 1, 0.75), bad), DomainError);
    InvariantSet roundoff;
    roundoff.I1bar = 3.0 - 1e-14;
    roundoff.I2bar = 3.0 - 1e-14;
    EXPECT_NO_THROW(energy(ViscousModel::uss(1, 1, 0.75), roundoff));
}

// ---------------------------------------------------------------------------
// coefficients
// ---------------------------------------------------------------------------

TEST(Coefficients, SimoMieheRow) {
    InvariantSet inv;
    inv.J = 0.9;
    const CoefficientVector c = coefficients(VolumetricModel::simo_miehe(10.0), inv);
    ASSERT_EQ(c.values.size(), 1u);
    EXPECT_NEAR(c.values[0], -0.95, 1e-14);  // 5 (0.81 - 1)
}

TEST(Coefficients, MooneyRivlinRow) {
    InvariantSet inv;  // reference state: I1bar = I2bar = 3
    const CoefficientVector c = coefficients(HyperelasticModel::mooney_rivlin(1.0, 0.5), inv);
    ASSERT_EQ(c.values.size(), 2u);
    EXPECT_NEAR(c.values[0], 5.0, 1e-14);   // 2 (1 + 3 * 0.5)
    EXPECT_NEAR(c.values[1], -1.0, 1e-14);  // -2 * 0.5
}

TEST(Coefficients, PiolettiVanishesAtReference) {
    InvariantSet inv;
    inv.J2bar = 100.0;  // any rate: coefficients depend on I1bar - 3 only
    const CoefficientVector c = coefficients(ViscousModel::pioletti(6.94), inv);
    ASSERT_EQ(c.values.size(), 7u);
    for (double v : c.values) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(Coefficients, TableRowsMatchEnergyDerivatives) {
    // Independent check of every coefficient row: Phi_k and Gamma_k are fixed
    // multiples of the potential's partial derivatives with respect to the
    // invariants, evaluated here by central differences on the invariants.
    const DeformationState s = uniaxial_dynamic(1.3, 55.0);
    const InvariantSet inv = invariants(s);
    const double h = 1e-6;

    for (const auto& m : model_zoo()) {
        if (std::holds_alternative<VolumetricModel>(m)) {
            const auto& vol = std::get<VolumetricModel>(m);
            const double d = (energy(vol, inv.J + h) - energy(vol, inv.J - h)) / (2 * h);
            EXPECT_NEAR(coefficients(vol, inv).values[0], inv.J * d, 1e-6 * std::max(1.0, std::abs(d)))
                << to_json(m).dump();
        } else if (std::holds_alternative<HyperelasticModel>(m)) {
            const auto& hyp = std::get<HyperelasticModel>(m);
            auto w = [&](double i1, double i2) {
                InvariantSet v = inv;
                v.I1bar = i1;
                v.I2bar = i2;
                return energy(hyp, v);
            };
            const double dw1 = (w(inv.I1bar + h, inv.I2bar) - w(inv.I1bar - h, inv.I2bar)) / (2 * h);
            const double dw2 = (w(inv.I1bar, inv.I2bar + h) - w(inv.I1bar, inv.I2bar - h)) / (2 * h);
            const CoefficientVector c = coefficients(hyp, inv);
            EXPECT_NEAR(c.values[0], 2.0 * (dw1 + inv.I1bar * dw2), 1e-5) << to_json(m).dump();
            EXPECT_NEAR(c.values[1], -2.0 * dw2, 1e-6) << to_json(m).dump();
        } else {
            const auto& vis = std::get<ViscousModel>(m);
            auto w = [&](int which, double x) {
                InvariantSet v = inv;
                if (which == 2) v.J2bar = x;
                if (which == 5) v.J5bar = x;
                return energy(vis, v);
            };
            const double dw2 = (w(2, inv.J2bar + h) - w(2, inv.J2bar - h)) / (2 * h);
            const double dw5 = (w(5, inv.J5bar + h) - w(5, inv.J5bar - h)) / (2 * h);
            const CoefficientVector c = coefficients(vis, inv);
            EXPECT_NEAR(c.values[3], 4.0 * dw2, 1e-5 * std::max(1.0, std::abs(dw2))) << to_json(m).dump();
            EXPECT_NEAR(c.values[5], 2.0 * dw5, 1e-5 * std::max(1.0, std::abs(dw5))) << to_json(m).dump();
            for (int k : {0, 1, 2, 4, 6}) EXPECT_DOUBLE_EQ(c.values[k], 0.0) << to_json(m).dump();
        }
    }
}

// ---------------------------------------------------------------------------
// stress
// ---------------------------------------------------------------------------

TEST(Stress, SimoMieheConfinedCompression) {
    const DeformationState s = mode_confined_uniaxial(0.9);
    const SymTensor3 S = stress(VolumetricModel::simo_miehe(10.0), s);
    // S = zeta1 C^{-1} = -0.95 diag(1/0.81, 1, 1).
    EXPECT_NEAR(S[0], -0.95 / 0.81, 1e-12);
    EXPECT_NEAR(S[1], -0.95, 1e-12);
    EXPECT_NEAR(S[2], -0.95, 1e-12);
    EXPECT_DOUBLE_EQ(S[3], 0.0);
}

TEST(Stress, AllModelsVanishAtIdentity) {
    const DeformationState id = kinematics_from(Matrix3::Identity());
    for (const auto& m : model_zoo()) {
        EXPECT_NEAR(stress(m, id).norm(), 0.0, 1e-13) << to_json(m).dump();
    }
    // The viscous branch must also vanish at C = I under a nonzero rate.
    const DeformationState rated = uniaxial_dynamic(1.0, 55.0);
    EXPECT_NEAR(stress(MaterialModel(ViscousModel::uss(1, 1, 0.75)), rated).norm(), 0.0, 1e-12);
    EXPECT_NEAR(stress(MaterialModel(ViscousModel::pioletti(6.94)), rated).norm(), 0.0, 1e-12);
}

TEST(Stress, UssDualRouteAgreement) {
    // Route 1: the closed-form stress. Route 2: the Phi coefficients
    // contracted against the integrity basis.
    const ViscousModel uss = ViscousModel::uss(1.0, 1.0, 0.75);
    const DeformationState s = uniaxial_dynamic(1.2, 55.0);
    const SymTensor3 direct = stress(uss, s);
    EXPECT_GT(direct[0], 0.0);
    const SymTensor3 via_basis = contract_against_basis(coefficients(uss, invariants(s)), s);
    EXPECT_NEAR((direct - via_basis).norm(), 0.0, 1e-9 * std::max(1.0, direct.norm()));
}

TEST(Stress, CoefficientStressDuality) {
    // 1000 random in-domain states across the zoo.
    auto rng = make_rng(101);
    const auto zoo = model_zoo();
    for (int t = 0; t < 1000; ++t) {
        const Matrix3 f = vhtest::random_deformation_gradient(rng, 0.25);
        const Matrix3 fdot = vhtest::random_matrix(rng, 20.0);
        const DeformationState s = kinematics_from(f, fdot);
        const auto& m = zoo[t % zoo.size()];
        SymTensor3 direct, via_basis;
        try {
            direct = stress(m, s);
            via_basis = contract_against_basis(
                std::visit([&](const auto& model) { return coefficients(model, invariants(s)); }, m), s);
        } catch (const DomainError&) {
            continue;  // Gent limit can be exceeded by the random draw
        }
        EXPECT_NEAR((direct - via_basis).norm(), 0.0, 1e-9 * std::max(1.0, direct.norm()))
            << to_json(m).dump() << " at trial " << t;
    }
}

TEST(Stress, FiniteDifferenceConsistency) {
    // 2 dW/dC (volumetric, hyperelastic) and 2 dWv/dCdot (viscous) against
    // central differences with the symmetric-tensor convention.
    auto rng = make_rng(131);
    for (const auto& m : model_zoo()) {
        for (int t = 0; t < 5; ++t) {
            const Matrix3 f = vhtest::random_deformation_gradient(rng, 0.15);
            const Matrix3 fdot = vhtest::random_matrix(rng, 10.0);
            const DeformationState s = kinematics_from(f, fdot);

            SymTensor3 expected;
            if (std::holds_alternative<ViscousModel>(m)) {
                const auto& vis = std::get<ViscousModel>(m);
                expected = 2.0 * vhtest::fd_symmetric_gradient(
                                     [&](const SymTensor3& cdot) {
                                         return energy(vis, kinematics_from_cauchy_green(s.C, cdot));
                                     },
                                     s.Cdot, 1e-5);
            } else {
                auto w_of_c = [&](const SymTensor3& c) {
                    const DeformationState sc = kinematics_from_cauchy_green(c, s.Cdot);
                    if (std::holds_alternative<VolumetricModel>(m))
                        return energy(std::get<VolumetricModel>(m), sc);
                    return energy(std::get<HyperelasticModel>(m), sc);
                };
                expected = 2.0 * vhtest::fd_symmetric_gradient(w_of_c, s.C, 1e-6);
            }

            const SymTensor3 actual = stress(m, s);
            const double scale = std::max(1e-3, expected.norm());
            EXPECT_NEAR((actual - expected).norm() / scale, 0.0, 1e-5)
                << to_json(m).dump() << " at trial " << t;
        }
    }
}

TEST(Stress, ObjectivityUnderSuperposedRotation) {
    auto rng = make_rng(151);
    const auto zoo = model_zoo();
    for (int t = 0; t < 200; ++t) {
        const Matrix3 f = vhtest::random_deformation_gradient(rng, 0.2);
        const Matrix3 fdot = vhtest::random_matrix(rng, 10.0);
        const Matrix3 q = vhtest::random_rotation(rng);
        const auto& m = zoo[t % zoo.size()];
        try {
            const SymTensor3 a = stress(m, kinematics_from(f, fdot));
            const SymTensor3 b = stress(m, kinematics_from(q * f, q * fdot));
            EXPECT_NEAR((a - b).norm(), 0.0, 1e-9 * std::max(1.0, a.norm())) << to_json(m).dump();
        } catch (const DomainError&) {
            continue;
        }
    }
}

TEST(Stress, ReferenceViscousModelsDissipate) {
    // S_viso : Cdot >= 0 on the dynamic training grid.
    const ViscousModel uss = ViscousModel::uss(1.0, 1.0, 0.75);
    const ViscousModel pioletti = ViscousModel::pioletti(6.94);
    for (int ri = 0; ri < 5; ++ri) {
        const double rate = 10.0 + 90.0 * ri / 4.0;
        for (int li = 0; li < 31; ++li) {
            const double lam = 1.0 + 0.5 * li / 30.0;
            const DeformationState s = uniaxial_dynamic(lam, rate);
            EXPECT_GE(stress(uss, s).ddot(s.Cdot), -1e-12);
            EXPECT_GE(stress(pioletti, s).ddot(s.Cdot), -1e-12);
        }
    }
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

TEST(ModelJson, RoundTripsAllFamilies) {
    for (const auto& m : model_zoo()) {
        const json j = to_json(m);
        const MaterialModel back = material_from_json(j);
        const json j2 = to_json(back);
        EXPECT_EQ(j, j2);
        // Parameter round-trip at full precision: compare a stress sample.
        const DeformationState probe = uniaxial_dynamic(1.1, 20.0);
        const SymTensor3 a = stress(m, probe);
        const SymTensor3 b = stress(back, probe);
        EXPECT_NEAR((a - b).norm(), 0.0, 1e-15 * std::max(1.0, a.norm()));
    }
}

TEST(ModelJson, ValidatesParameters) {
    EXPECT_THROW(VolumetricModel::vol_ogden(10.0, 0.0), std::invalid_argument);
    EXPECT_THROW(VolumetricModel::simo_miehe(-1.0), std::invalid_argument);
    EXPECT_THROW(VolumetricModel::vol_neo_hookean(0.0), std::invalid_argument);
    EXPECT_THROW(ViscousModel::uss(1.0, 1.0, 0.0), std::invalid_argument);
    EXPECT_THROW(ViscousModel::uss(1.0, 1.0, 1.5), std::invalid_argument);
    EXPECT_NO_THROW(ViscousModel::uss(1.0, 1.0, 1.0));
    EXPECT_THROW(material_from_json(json{{"family", "unknown"}, {"params", json::object()}}),
                 std::invalid_argument);
}
