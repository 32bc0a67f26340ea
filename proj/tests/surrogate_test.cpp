#include <gtest/gtest.h>

#include <cmath>
#include <optional>
#include <vector>

#include "test_support.hpp"
#include "vhgpr/surrogate.hpp"

using namespace vhgpr;

namespace {

// Percent relative error (Voigt-vector form), computed locally as the oracle;
// nullopt for an identically zero truth.
std::optional<double> pct_err(const SymTensor3& pred, const SymTensor3& truth) {
    const double denom = truth.voigt_norm();
    if (denom == 0.0) return std::nullopt;
    return 100.0 * (pred - truth).voigt_norm() / denom;
}

BranchDataset confined_dataset(const VolumetricModel& truth, int n = 26, double lo = 0.75,
                               double hi = 1.0) {
    BranchDataset data;
    data.branch = Branch::Vol;
    for (int i = 0; i < n; ++i) {
        const double j = lo + (hi - lo) * i / (n - 1);
        const DeformationState s = mode_confined_uniaxial(j);
        data.records.push_back({s, stress(truth, s)});
    }
    return data;
}

BranchDataset uniaxial_dataset(const HyperelasticModel& truth, int n = 26, double lo = 1.0,
                               double hi = 1.25) {
    BranchDataset data;
    data.branch = Branch::HIso;
    for (int i = 0; i < n; ++i) {
        const double lam = lo + (hi - lo) * i / (n - 1);
        const DeformationState s = mode_isochoric_uniaxial(lam);
        data.records.push_back({s, stress(truth, s)});
    }
    return data;
}

BranchDataset dynamic_dataset(const ViscousModel& truth, int n_rates = 5, int n_stretch = 31) {
    BranchDataset data;
    data.branch = Branch::VIso;
    for (int r = 0; r < n_rates; ++r) {
        const double rate = 10.0 + 90.0 * r / (n_rates - 1);
        for (int i = 0; i < n_stretch; ++i) {
            const double lam = 1.0 + 0.5 * i / (n_stretch - 1);
            const DeformationState s = mode_isochoric_uniaxial(lam, rate);
            data.records.push_back({s, stress(truth, s)});
        }
    }
    return data;
}

std::vector<DeformationState> states_of(const BranchDataset& d) {
    std::vector<DeformationState> out;
    for (const auto& r : d.records) out.push_back(r.state);
    return out;
}

double mean_training_err(const auto& model, const BranchDataset& data) {
    double sum = 0.0;
    int count = 0;
    for (const auto& r : data.records) {
        if (auto e = pct_err(predict_stress(model, r.state), r.stress)) {
            sum += *e;
            ++count;
        }
    }
    return sum / count;
}

}  // namespace

// ---------------------------------------------------------------------------
// extract_coefficients
// ---------------------------------------------------------------------------

TEST(Extraction, VolumetricBranchRecoversZeta) {
    const VolumetricModel sm = VolumetricModel::simo_miehe(10.0);
    const DeformationState s = mode_confined_uniaxial(0.9);
    const ExtractionResult ex = extract_coefficients(Branch::Vol, s, stress(sm, s));
    EXPECT_NEAR(ex.coefficients.values[0], -0.95, 1e-10);
    EXPECT_LT(ex.residual, 1e-12);
}

TEST(Extraction, HyperelasticBranchRecoversGammasOnShear) {
    // On a simple-shear state Dev(I) and Dev(Cbar) are linearly independent,
    // so the 6x2 system is full-rank and extraction reproduces the analytic
    // row Gamma1 = 2 (1 + 0.5 I1bar), Gamma2 = -2 * 0.5.
    const HyperelasticModel mr = HyperelasticModel::mooney_rivlin(1.0, 0.5);
    const DeformationState s = mode_simple_shear(0.3);
    const double i1 = invariants(s).I1bar;
    const ExtractionResult ex = extract_coefficients(Branch::HIso, s, stress(mr, s));
    EXPECT_NEAR(ex.coefficients.values[0], 2.0 * (1.0 + 0.5 * i1), 1e-9);
    EXPECT_NEAR(ex.coefficients.values[1], -1.0, 1e-9);
    EXPECT_LT(ex.residual, 1e-10);
}

TEST(Extraction, UniaxialGammaSystemIsRankDeficient) {
    // Every deviatoric basis tensor of a uniaxial state lies on the same
    // one-dimensional line (diagonal (a, b, b) tensors with X : C = 0), so
    // the system is rank-1 and the minimum-norm solution is returned. It
    // differs from the analytic row but must still reconstruct the stress.
    const HyperelasticModel mr = HyperelasticModel::mooney_rivlin(1.0, 0.5);
    const DeformationState s = mode_isochoric_uniaxial(1.25);
    const IntegrityBasis b = integrity_basis(s);
    const double cross = b[1].to_voigt().normalized().dot(b[2].to_voigt().normalized());
    EXPECT_NEAR(std::abs(cross), 1.0, 1e-12);  // G2 parallel to G3

    const ExtractionResult ex = extract_coefficients(Branch::HIso, s, stress(mr, s));
    EXPECT_LT(ex.residual, 1e-12);
    // Minimum-norm: no longer than the analytic solution.
    const double analytic_norm = std::hypot(2.0 * (1.0 + 0.5 * 3.1625), 1.0);
    const double got_norm =
        std::hypot(ex.coefficients.values[0], ex.coefficients.values[1]);
    EXPECT_LE(got_norm, analytic_norm + 1e-12);
}

TEST(Extraction, ViscousIdentityGivesZeroMinimumNorm) {
    const DeformationState id = kinematics_from(Matrix3::Identity());
    const ExtractionResult ex = extract_coefficients(Branch::VIso, id, SymTensor3::zero());
    for (double v : ex.coefficients.values) EXPECT_DOUBLE_EQ(v, 0.0);
    EXPECT_DOUBLE_EQ(ex.residual, 0.0);
}

TEST(Extraction, ZeroDesignAgainstNonzeroStressThrows) {
    const DeformationState id = kinematics_from(Matrix3::Identity());
    EXPECT_THROW(extract_coefficients(Branch::VIso, id, SymTensor3(1, 0, 0, 0, 0, 0)),
                 ExtractionError);
    EXPECT_THROW(extract_coefficients(Branch::HIso, id, SymTensor3(1, 0, 0, 0, 0, 0)),
                 ExtractionError);
}

TEST(Extraction, DegenerateG6ColumnIsDropped) {
    // Simple shear has a singular Cbardot; the G6 coefficient must be pinned
    // at zero while the remaining columns still reconstruct the stress.
    const ViscousModel uss = ViscousModel::uss(1.0, 1.0, 0.75);
    const DeformationState s = mode_simple_shear(0.3, 55.0);
    ASSERT_TRUE(integrity_basis(s).g6_degenerate);
    const ExtractionResult ex = extract_coefficients(Branch::VIso, s, stress(uss, s));
    EXPECT_DOUBLE_EQ(ex.coefficients.values[4], 0.0);
    EXPECT_LT(ex.residual, 1e-8);
}

TEST(Extraction, ReconstructionClosure) {
    // Contracting extracted coefficients against the basis reproduces the
    // source stress on every training-style record of all three branches.
    const auto vol = confined_dataset(VolumetricModel::simo_miehe(10.0));
    const auto hiso = uniaxial_dataset(HyperelasticModel::mooney_rivlin(1.0, 0.5));
    const auto viso = dynamic_dataset(ViscousModel::uss(1.0, 1.0, 0.75));
    for (const BranchDataset* d : {&vol, &hiso, &viso}) {
        const StarDataset star = build_star_dataset(*d);
        for (Eigen::Index i = 0; i < star.size(); ++i) {
            EXPECT_LE(star.residuals[i], 1e-8) << to_string(d->branch) << " row " << i;
        }
    }
}

// ---------------------------------------------------------------------------
// build_star_dataset
// ---------------------------------------------------------------------------

TEST(StarDataset, VolumetricRowsFollowTheAnalyticCurve) {
    const StarDataset star = build_star_dataset(confined_dataset(VolumetricModel::simo_miehe(10.0)));
    ASSERT_EQ(star.size(), 26);
    for (Eigen::Index i = 0; i < star.size(); ++i) {
        const double j = star.inputs(i, 0);
        EXPECT_NEAR(star.outputs(i, 0), 5.0 * (j * j - 1.0), 1e-9);
    }
}

TEST(StarDataset, IdentityRecordMapsToReferenceRow) {
    BranchDataset data;
    data.branch = Branch::HIso;
    data.records.push_back({mode_isochoric_uniaxial(1.0), SymTensor3::zero()});
    const StarDataset star = build_star_dataset(data);
    ASSERT_EQ(star.size(), 1);
    EXPECT_NEAR(star.inputs(0, 0), 3.0, 1e-12);
    EXPECT_NEAR(star.inputs(0, 1), 3.0, 1e-12);
    EXPECT_DOUBLE_EQ(star.outputs(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(star.outputs(0, 1), 0.0);
}

TEST(StarDataset, DynamicUssSetHasExpectedShape) {
    const StarDataset star = build_star_dataset(dynamic_dataset(ViscousModel::uss(1.0, 1.0, 0.75)));
    EXPECT_EQ(star.size(), 155);
    EXPECT_EQ(star.inputs.cols(), 5);
    EXPECT_EQ(star.outputs.cols(), 7);
}

// ---------------------------------------------------------------------------
// train_surrogate / predict_stress
// ---------------------------------------------------------------------------

TEST(Surrogate, VolumetricTrainingAccuracy) {
    const auto data = confined_dataset(VolumetricModel::simo_miehe(10.0));
    const SurrogateModel m = train_surrogate(Branch::Vol, build_star_dataset(data));
    EXPECT_LE(mean_training_err(m, data), 1.0);
}

TEST(Surrogate, HyperelasticTrainingAccuracy) {
    const auto data = uniaxial_dataset(HyperelasticModel::mooney_rivlin(1.0, 0.5));
    const SurrogateModel m = train_surrogate(Branch::HIso, build_star_dataset(data));
    EXPECT_LE(mean_training_err(m, data), 10.0);
}

TEST(Surrogate, ConstrainedViscousTrainingAccuracyAndDissipation) {
    const auto data = dynamic_dataset(ViscousModel::uss(1.0, 1.0, 0.75));
    const SurrogateModel m =
        train_surrogate(Branch::VIso, build_star_dataset(data), 1e-4, states_of(data));
    EXPECT_TRUE(m.constrained);
    EXPECT_LE(mean_training_err(m, data), 5.0);
    for (const auto& r : data.records) {
        EXPECT_GE(dissipation(predict_stress(m, r.state), r.state.Cdot), -1e-8);
    }
}

TEST(Surrogate, ReferenceRowIsAppendedWhenMissing) {
    // Train on a grid that excludes the identity; the normalization condition
    // must still hold through the auto-appended reference row.
    const auto data = confined_dataset(VolumetricModel::simo_miehe(10.0), 20, 0.80, 0.95);
    const StarDataset star = build_star_dataset(data);
    const SurrogateModel m = train_surrogate(Branch::Vol, star);
    EXPECT_EQ(m.gp.n_train(), star.size() + 1);

    double scale = 0.0;
    for (const auto& r : data.records) scale = std::max(scale, r.stress.voigt_norm());
    const DeformationState id = kinematics_from(Matrix3::Identity());
    EXPECT_LE(predict_stress(m, id).voigt_norm(), 1e-3 * scale);
}

TEST(Surrogate, NormalizationAtReferenceState) {
    const auto vol_data = confined_dataset(VolumetricModel::simo_miehe(10.0));
    const auto hiso_data = uniaxial_dataset(HyperelasticModel::mooney_rivlin(1.0, 0.5));
    const auto viso_data = dynamic_dataset(ViscousModel::uss(1.0, 1.0, 0.75));

    const SurrogateModel mv = train_surrogate(Branch::Vol, build_star_dataset(vol_data));
    const SurrogateModel mh = train_surrogate(Branch::HIso, build_star_dataset(hiso_data));
    const SurrogateModel mu =
        train_surrogate(Branch::VIso, build_star_dataset(viso_data), 1e-4, states_of(viso_data));

    const DeformationState id = kinematics_from(Matrix3::Identity());
    auto scale_of = [](const BranchDataset& d) {
        double s = 0.0;
        for (const auto& r : d.records) s = std::max(s, r.stress.voigt_norm());
        return s;
    };
    EXPECT_LE(predict_stress(mv, id).voigt_norm(), 1e-3 * scale_of(vol_data));
    EXPECT_LE(predict_stress(mh, id).voigt_norm(), 1e-3 * scale_of(hiso_data));
    EXPECT_LE(predict_stress(mu, id).voigt_norm(), 1e-3 * scale_of(viso_data));
    // The viscous branch vanishes at the reference state for any rate.
    const DeformationState rated = mode_isochoric_uniaxial(1.0, 120.0);
    EXPECT_LE(predict_stress(mu, rated).voigt_norm(), 1e-3 * scale_of(viso_data));
}

TEST(Surrogate, VolumetricExtrapolationStaysAccurate) {
    const VolumetricModel sm = VolumetricModel::simo_miehe(10.0);
    const SurrogateModel m = train_surrogate(Branch::Vol, build_star_dataset(confined_dataset(sm)));
    const DeformationState s = mode_confined_uniaxial(0.6);
    const auto e = pct_err(predict_stress(m, s), stress(sm, s));
    ASSERT_TRUE(e.has_value());
    EXPECT_LE(*e, 5.0);
}

TEST(Surrogate, HyperelasticCrossModeShearPrediction) {
    const HyperelasticModel mr = HyperelasticModel::mooney_rivlin(1.0, 0.5);
    const SurrogateModel m = train_surrogate(Branch::HIso, build_star_dataset(uniaxial_dataset(mr)));
    const DeformationState shear = mode_simple_shear(0.25);
    const SymTensor3 truth = stress(mr, shear);
    const SymTensor3 pred = predict_stress(m, shear);
    ASSERT_NE(truth[5], 0.0);
    EXPECT_NE(pred[5], 0.0);
    EXPECT_LE(std::abs(pred[5] - truth[5]) / std::abs(truth[5]), 0.20);
}

TEST(Surrogate, PredictionsAreRotationInvariant) {
    const HyperelasticModel mr = HyperelasticModel::mooney_rivlin(1.0, 0.5);
    const SurrogateModel m = train_surrogate(Branch::HIso, build_star_dataset(uniaxial_dataset(mr)));
    auto rng = vhtest::make_rng(7);
    for (int t = 0; t < 20; ++t) {
        const Matrix3 q = vhtest::random_rotation(rng);
        const DeformationState a = mode_simple_shear(0.2 + 0.01 * t);
        const DeformationState b = kinematics_from(q * a.F, q * a.Fdot);
        const SymTensor3 sa = predict_stress(m, a);
        const SymTensor3 sb = predict_stress(m, b);
        EXPECT_NEAR((sa - sb).norm(), 0.0, 1e-9 * std::max(1.0, sa.norm()));
    }
}

// ---------------------------------------------------------------------------
// classical baseline
// ---------------------------------------------------------------------------

TEST(Classical, UniaxialTrainingPredictsExactlyZeroShearStress) {
    const auto data = uniaxial_dataset(HyperelasticModel::mooney_rivlin(1.0, 0.5));
    const ClassicalModel m = train_classical(data, /*rate_dependent=*/false);
    for (double g : {0.1, 0.25, 0.5}) {
        const SymTensor3 pred = predict_stress(m, mode_simple_shear(g));
        EXPECT_EQ(pred[5], 0.0);  // 12-component: zero target column, exactly
        EXPECT_EQ(pred[3], 0.0);
        EXPECT_EQ(pred[4], 0.0);
    }
}

TEST(Classical, InGridAccuracyOnConfinedData) {
    const VolumetricModel sm = VolumetricModel::simo_miehe(10.0);
    const auto data = confined_dataset(sm);
    const ClassicalModel m = train_classical(data, false);
    EXPECT_LE(mean_training_err(m, data), 1.0);
}

TEST(Classical, IdentityQueryAfterTrainingWithReferenceState) {
    const auto data = confined_dataset(VolumetricModel::simo_miehe(10.0));  // includes J = 1
    const ClassicalModel m = train_classical(data, false);
    const SymTensor3 pred = predict_stress(m, kinematics_from(Matrix3::Identity()));
    double scale = 0.0;
    for (int c = 0; c < 6; ++c) scale = std::max(scale, m.gp.y_scale[c]);
    EXPECT_LE(pred.voigt_norm(), 10.0 * m.alpha * 6.0 * scale);
}

// ---------------------------------------------------------------------------
// dissipation
// ---------------------------------------------------------------------------

TEST(Dissipation, ZeroRateGivesZero) {
    EXPECT_DOUBLE_EQ(dissipation(SymTensor3(1, 2, 3, 4, 5, 6), SymTensor3::zero()), 0.0);
}

TEST(Dissipation, UssOverstressIsPositiveInTension) {
    const ViscousModel uss = ViscousModel::uss(1.0, 1.0, 0.75);
    const DeformationState s = mode_isochoric_uniaxial(1.2, 55.0);
    const SymTensor3 S = stress(uss, s);
    const double xi = dissipation(S, s.Cdot);
    EXPECT_GT(xi, 0.0);
    // Oracle: the contraction written out longhand.
    double direct = 0.0;
    const Matrix3 a = S.to_matrix(), b = s.Cdot.to_matrix();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) direct += a(i, j) * b(i, j);
    EXPECT_NEAR(xi, direct, 1e-12 * std::abs(direct));
}

TEST(Dissipation, AntiParallelStressIsStrictlyNegative) {
    const SymTensor3 cdot(1.0, -2.0, 0.5, 0.3, -0.1, 0.7);
    EXPECT_DOUBLE_EQ(dissipation(-1.0 * cdot, cdot), -cdot.ddot(cdot));
    EXPECT_LT(dissipation(-1.0 * cdot, cdot), 0.0);
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

TEST(SurrogateJson, EnvelopeRoundTrip) {
    const auto data = confined_dataset(VolumetricModel::simo_miehe(10.0));
    const SurrogateModel m = train_surrogate(Branch::Vol, build_star_dataset(data));
    const SurrogateModel back = surrogate_from_json(nlohmann::json::parse(to_json(m).dump()));
    EXPECT_EQ(back.branch, Branch::Vol);
    EXPECT_EQ(back.dataset_hash, m.dataset_hash);
    for (double j : {0.6, 0.8, 1.0, 1.3}) {
        const DeformationState s = mode_confined_uniaxial(j);
        const SymTensor3 a = predict_stress(m, s);
        const SymTensor3 b = predict_stress(back, s);
        EXPECT_NEAR((a - b).norm(), 0.0, 1e-12 * std::max(1.0, a.norm()));
    }

    const auto hdata = uniaxial_dataset(HyperelasticModel::mooney_rivlin(1.0, 0.5));
    const ClassicalModel c = train_classical(hdata, false);
    const ClassicalModel cback = classical_from_json(nlohmann::json::parse(to_json(c).dump()));
    const DeformationState probe = mode_isochoric_uniaxial(1.1);
    EXPECT_NEAR((predict_stress(c, probe) - predict_stress(cback, probe)).norm(), 0.0, 1e-12);
}
