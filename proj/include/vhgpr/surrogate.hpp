#pragma once

/**
 * @file surrogate.hpp
 * @brief The physics-informed surrogate pipeline: integrity-basis coefficient
 *        extraction from stress data, star-dataset construction, training of
 *        the three branch surrogates, stress reconstruction, the classical
 *        black-box baseline, and the dissipation functional.
 */

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vhgpr/dataset.hpp"
#include "vhgpr/errors.hpp"
#include "vhgpr/gpr.hpp"
#include "vhgpr/integrity_basis.hpp"
#include "vhgpr/kinematics.hpp"
#include "vhgpr/materials.hpp"

namespace vhgpr {

/// Surrogate input dimension per branch: [J] | [I1bar, I2bar] |
/// [I1bar, I2bar, J1bar, J4bar, J6bar]. The rate invariants J2bar, J3bar,
/// J5bar, J7bar are deliberately excluded so the reference state maps to a
/// single input point.
inline int star_input_dim(Branch b) { return b == Branch::Vol ? 1 : (b == Branch::HIso ? 2 : 5); }

/// Coefficient count per branch: {zeta1} | {Gamma1, Gamma2} | {Phi1..Phi7}.
inline int star_output_dim(Branch b) { return b == Branch::Vol ? 1 : (b == Branch::HIso ? 2 : 7); }

inline VectorXd star_inputs(Branch b, const InvariantSet& inv) {
    VectorXd x(star_input_dim(b));
    switch (b) {
        case Branch::Vol:
            x << inv.J;
            break;
        case Branch::HIso:
            x << inv.I1bar, inv.I2bar;
            break;
        case Branch::VIso:
            x << inv.I1bar, inv.I2bar, inv.J1bar, inv.J4bar, inv.J6bar;
            break;
    }
    return x;
}

/// Surrogate input vector at the stress-free reference state.
inline VectorXd reference_inputs(Branch b) {
    VectorXd x = VectorXd::Zero(star_input_dim(b));
    if (b == Branch::Vol) {
        x << 1.0;
    } else {
        x[0] = 3.0;
        x[1] = 3.0;
    }
    return x;
}

// ---------------------------------------------------------------------------
// Coefficient extraction (the data -> star mapping)
// ---------------------------------------------------------------------------

struct ExtractionResult {
    CoefficientVector coefficients;
    /// ||A x - b||_2 / ||b||_2 of the Voigt system (0 for a zero stress).
    double residual = 0.0;
};

/// Solves the branch's Voigt system for the integrity-basis coefficients.
/// The 6x7 viscous system is rank-deficient by construction; the minimum-norm
/// solution is taken with relative singular-value cutoff 1e-10, and a
/// degenerate G6 column (singular Cbardot) is dropped with its coefficient
/// pinned to zero.
inline ExtractionResult extract_coefficients(Branch branch, const DeformationState& state,
                                             const SymTensor3& stress) {
    const IntegrityBasis basis = integrity_basis(state);
    const int p = star_output_dim(branch);

    Eigen::MatrixXd A(6, p);
    Eigen::VectorXd b;
    if (branch == Branch::Vol) {
        A.col(0) = basis[0].to_voigt();
        b = stress.to_voigt();
    } else {
        // Isochoric branches carry the J^{-2/3} prefactor on the left side.
        const double j23 = std::pow(state.J, 2.0 / 3.0);
        for (int k = 0; k < p; ++k) A.col(k) = basis[k + 1].to_voigt();
        if (branch == Branch::VIso && basis.g6_degenerate) A.col(4).setZero();
        b = j23 * stress.to_voigt();
    }

    const double bnorm = b.norm();
    ExtractionResult out;
    out.coefficients.branch = branch;
    out.coefficients.values.assign(p, 0.0);

    if (A.lpNorm<Eigen::Infinity>() == 0.0) {
        if (bnorm > 0.0) {
            throw ExtractionError("zero design matrix against nonzero stress (branch " +
                                  to_string(branch) + ")");
        }
        return out;  // 0 = 0: minimum-norm solution is zero
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(kSingularValueCutoff);
    const Eigen::VectorXd x = svd.solve(b);
    for (int k = 0; k < p; ++k) out.coefficients.values[k] = x[k];
    out.residual = bnorm > 0.0 ? (A * x - b).norm() / bnorm : 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// Star datasets
// ---------------------------------------------------------------------------

/// Invariant-input / coefficient-output training records, one row per source
/// record, in source order.
struct StarDataset {
    Branch branch = Branch::Vol;
    Eigen::MatrixXd inputs;
    Eigen::MatrixXd outputs;
    Eigen::VectorXd residuals;

    Eigen::Index size() const { return inputs.rows(); }
};

inline StarDataset build_star_dataset(const BranchDataset& data) {
    StarDataset star;
    star.branch = data.branch;
    const Eigen::Index n = static_cast<Eigen::Index>(data.records.size());
    star.inputs.resize(n, star_input_dim(data.branch));
    star.outputs.resize(n, star_output_dim(data.branch));
    star.residuals.resize(n);

    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& rec = data.records[i];
        star.inputs.row(i) = star_inputs(data.branch, invariants(rec.state)).transpose();
        try {
            const ExtractionResult ex = extract_coefficients(data.branch, rec.state, rec.stress);
            for (int k = 0; k < star.outputs.cols(); ++k) star.outputs(i, k) = ex.coefficients.values[k];
            star.residuals[i] = ex.residual;
        } catch (const ExtractionError& e) {
            throw ExtractionError("record " + std::to_string(i) + ": " + e.what());
        }
    }
    return star;
}

// ---------------------------------------------------------------------------
// Surrogate models
// ---------------------------------------------------------------------------

struct SurrogateModel {
    Branch branch = Branch::Vol;
    GpModel gp;
    bool constrained = false;
    // Pipeline provenance carried into the serialized envelope.
    std::uint64_t dataset_hash = 0;
    double alpha = 1e-4;
    int constraint_count = 0;
};

/// FNV-1a over the star rows; the default provenance stamp of a surrogate.
inline std::uint64_t star_dataset_hash(const StarDataset& star) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](double x) {
        std::uint64_t bits;
        std::memcpy(&bits, &x, sizeof(bits));
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xffu;
            h *= 1099511628211ull;
        }
    };
    mix(static_cast<double>(star_input_dim(star.branch)));
    for (Eigen::Index i = 0; i < star.size(); ++i) {
        for (Eigen::Index c = 0; c < star.inputs.cols(); ++c) mix(star.inputs(i, c));
        for (Eigen::Index c = 0; c < star.outputs.cols(); ++c) mix(star.outputs(i, c));
    }
    return h;
}

/// The Clausius-Planck functional of one state as a linear functional of the
/// predicted Phi vector: S(C, Cdot) : Cdot = J^{-2/3} sum_m Phi_m (G_{m+1} : Cdot).
/// Returns nothing when the functional vanishes identically (Cdot = 0).
inline std::optional<OutputConstraint> dissipation_constraint(const DeformationState& s) {
    const IntegrityBasis basis = integrity_basis(s);
    const double jm23 = std::pow(s.J, -2.0 / 3.0);
    VectorXd coeffs(7);
    for (int m = 0; m < 7; ++m) coeffs[m] = jm23 * basis[m + 1].ddot(s.Cdot);
    if (coeffs.lpNorm<Eigen::Infinity>() < 1e-14) return std::nullopt;
    return OutputConstraint{star_inputs(Branch::VIso, invariants(s)), coeffs};
}

/// Trains one branch surrogate on a star dataset. The stress-free reference
/// row is appended with zero coefficients when absent. For the viscous branch
/// a non-empty constraint-state list switches training to C-GPR with the
/// dissipation functional enforced at those states.
inline SurrogateModel train_surrogate(Branch branch, const StarDataset& star, double alpha = 1e-4,
                                      const std::vector<DeformationState>& constraint_states = {},
                                      const GprOptions& opts = {}) {
    if (star.size() == 0) throw FitError("empty star dataset");
    if (star.branch != branch) throw std::invalid_argument("star dataset branch mismatch");

    Eigen::MatrixXd X = star.inputs;
    Eigen::MatrixXd Y = star.outputs;

    const VectorXd ref = reference_inputs(branch);
    bool has_reference = false;
    for (Eigen::Index i = 0; i < X.rows() && !has_reference; ++i) {
        has_reference = (X.row(i).transpose() - ref).norm() <= 1e-9;
    }
    if (!has_reference) {
        X.conservativeResize(X.rows() + 1, Eigen::NoChange);
        Y.conservativeResize(Y.rows() + 1, Eigen::NoChange);
        X.row(X.rows() - 1) = ref.transpose();
        Y.row(Y.rows() - 1).setZero();
    }

    SurrogateModel model;
    model.branch = branch;
    model.alpha = alpha;
    model.dataset_hash = star_dataset_hash(star);

    if (branch == Branch::VIso && !constraint_states.empty()) {
        ConstraintSet constraints;
        for (const auto& s : constraint_states) {
            if (auto c = dissipation_constraint(s)) constraints.push_back(std::move(*c));
        }
        if (constraints.empty()) {
            throw std::invalid_argument("every constraint state has a vanishing rate");
        }
        model.gp = fit_constrained(X, Y, alpha, constraints, opts);
        model.constrained = true;
        model.constraint_count = static_cast<int>(constraints.size());
    } else {
        model.gp = fit(X, Y, alpha, opts);
    }
    return model;
}

/// Branch stress reconstruction: predicted coefficients contracted against
/// the integrity basis, with the J^{-2/3} prefactor on isochoric branches.
inline SymTensor3 predict_stress(const SurrogateModel& model, const DeformationState& state) {
    const VectorXd coeffs = predict(model.gp, star_inputs(model.branch, invariants(state)));
    const IntegrityBasis basis = integrity_basis(state);
    if (model.branch == Branch::Vol) return coeffs[0] * basis[0];
    SymTensor3 acc = SymTensor3::zero();
    for (int k = 0; k < static_cast<int>(coeffs.size()); ++k) acc = acc + coeffs[k] * basis[k + 1];
    return std::pow(state.J, -2.0 / 3.0) * acc;
}

/// Predicted coefficient vector at one state (exposed for reports and tests).
inline CoefficientVector predict_coefficients(const SurrogateModel& model,
                                              const DeformationState& state) {
    const VectorXd c = predict(model.gp, star_inputs(model.branch, invariants(state)));
    CoefficientVector out;
    out.branch = model.branch;
    out.values.assign(c.data(), c.data() + c.size());
    return out;
}

// ---------------------------------------------------------------------------
// Classical black-box baseline
// ---------------------------------------------------------------------------

/// Standard GPR straight from strain (rate) components to stress components:
/// vec(C) [+ vec(Cdot)] -> vec(S).
struct ClassicalModel {
    GpModel gp;
    bool rate_dependent = false;
    std::uint64_t dataset_hash = 0;
    double alpha = 1e-4;
};

inline VectorXd classical_inputs(const DeformationState& s, bool rate_dependent) {
    VectorXd x(rate_dependent ? 12 : 6);
    x.head<6>() = s.C.to_voigt();
    if (rate_dependent) x.tail<6>() = s.Cdot.to_voigt();
    return x;
}

inline ClassicalModel train_classical(const BranchDataset& data, bool rate_dependent,
                                      double alpha = 1e-4, const GprOptions& opts = {}) {
    if (data.records.empty()) throw FitError("empty training dataset");
    const Eigen::Index n = static_cast<Eigen::Index>(data.records.size());
    Eigen::MatrixXd X(n, rate_dependent ? 12 : 6), Y(n, 6);
    for (Eigen::Index i = 0; i < n; ++i) {
        X.row(i) = classical_inputs(data.records[i].state, rate_dependent).transpose();
        Y.row(i) = data.records[i].stress.to_voigt().transpose();
    }
    ClassicalModel model;
    model.rate_dependent = rate_dependent;
    model.alpha = alpha;
    model.dataset_hash = dataset_hash(data);
    model.gp = fit(X, Y, alpha, opts);
    return model;
}

inline SymTensor3 predict_stress(const ClassicalModel& model, const DeformationState& state) {
    const VectorXd y = predict(model.gp, classical_inputs(state, model.rate_dependent));
    return SymTensor3::from_voigt(y);
}

// ---------------------------------------------------------------------------
// Dissipation functional
// ---------------------------------------------------------------------------

/// Internal dissipation Xi = S : Cdot, both off-diagonal slots counted.
inline double dissipation(const SymTensor3& stress_v_iso, const SymTensor3& cdot) {
    return stress_v_iso.ddot(cdot);
}

// ---------------------------------------------------------------------------
// Serialization envelopes
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const SurrogateModel& m) {
    return {{"kind", "surrogate"},
            {"branch", to_string(m.branch)},
            {"constrained", m.constrained},
            {"alpha", m.alpha},
            {"dataset_hash", m.dataset_hash},
            {"constraint_count", m.constraint_count},
            {"gp", to_json(m.gp)}};
}

inline SurrogateModel surrogate_from_json(const nlohmann::json& j) {
    if (j.at("kind").get<std::string>() != "surrogate") {
        throw std::invalid_argument("not a surrogate model envelope");
    }
    SurrogateModel m;
    m.branch = branch_from_string(j.at("branch").get<std::string>());
    m.constrained = j.at("constrained").get<bool>();
    m.alpha = j.at("alpha").get<double>();
    m.dataset_hash = j.at("dataset_hash").get<std::uint64_t>();
    m.constraint_count = j.at("constraint_count").get<int>();
    m.gp = gp_from_json(j.at("gp"));
    return m;
}

inline nlohmann::json to_json(const ClassicalModel& m) {
    return {{"kind", "classical"},
            {"rate_dependent", m.rate_dependent},
            {"alpha", m.alpha},
            {"dataset_hash", m.dataset_hash},
            {"gp", to_json(m.gp)}};
}

inline ClassicalModel classical_from_json(const nlohmann::json& j) {
    if (j.at("kind").get<std::string>() != "classical") {
        throw std::invalid_argument("not a classical model envelope");
    }
    ClassicalModel m;
    m.rate_dependent = j.at("rate_dependent").get<bool>();
    m.alpha = j.at("alpha").get<double>();
    m.dataset_hash = j.at("dataset_hash").get<std::uint64_t>();
    m.gp = gp_from_json(j.at("gp"));
    return m;
}

}  // namespace vhgpr
