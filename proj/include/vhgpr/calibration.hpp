#pragma once

/**
 * @file calibration.hpp
 * @brief Least-squares calibration of the closed-form model families against
 *        stress-strain(-strain rate) datasets.
 *
 * Every family is linear in its moduli once exponent-like parameters are
 * fixed, so calibration is an unweighted linear least squares over the Voigt
 * components of every record; the nonlinear parameter (Ogden beta, Gent Jm,
 * generalized-Pioletti beta, USS c21) is resolved by a 1-D grid search
 * wrapped around the linear solve.
 */

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "vhgpr/dataset.hpp"
#include "vhgpr/errors.hpp"
#include "vhgpr/materials.hpp"

namespace vhgpr {

namespace detail {

/// Solves min ||A x - b||_2 with a rank check; throws CalibrationError naming
/// the deficient parameter directions.
inline Eigen::VectorXd solve_least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                           const std::vector<std::string>& param_names) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double tol = 1e-12 * sv.maxCoeff();
    const int p = static_cast<int>(A.cols());

    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv[i] > tol) ++rank;
    if (rank < p) {
        // Name the null-space directions by their dominant parameter.
        std::string deficient;
        for (int i = rank; i < p; ++i) {
            int dominant = 0;
            svd.matrixV().col(i).cwiseAbs().maxCoeff(&dominant);
            if (!deficient.empty()) deficient += ", ";
            deficient += param_names[dominant];
        }
        throw CalibrationError("rank-deficient calibration system (rank " + std::to_string(rank) +
                               " of " + std::to_string(p) + "); unresolved directions: " + deficient);
    }
    return svd.solve(b);
}

/// Stacks per-record regressor tensors into the (6N x p) design matrix and
/// solves for the linear moduli. Returns the residual sum of squares.
inline double fit_linear(const std::vector<StressRecord>& data,
                         const std::function<std::vector<SymTensor3>(const StressRecord&)>& regressors,
                         const std::vector<std::string>& param_names, Eigen::VectorXd& params) {
    const int n = static_cast<int>(data.size());
    const int p = static_cast<int>(param_names.size());
    Eigen::MatrixXd A(6 * n, p);
    Eigen::VectorXd b(6 * n);
    for (int i = 0; i < n; ++i) {
        const std::vector<SymTensor3> cols = regressors(data[i]);
        for (int j = 0; j < p; ++j) A.block<6, 1>(6 * i, j) = cols[j].to_voigt();
        b.segment<6>(6 * i) = data[i].stress.to_voigt();
    }
    params = solve_least_squares(A, b, param_names);
    return (A * params - b).squaredNorm();
}

/// Grid search over one nonlinear parameter with a linear solve per
/// candidate. Returns the candidate minimizing the residual.
inline double fit_grid(const std::vector<double>& grid,
                       const std::function<double(double, Eigen::VectorXd&)>& solve_at,
                       Eigen::VectorXd& best_params) {
    double best_value = grid.front();
    double best_rss = std::numeric_limits<double>::infinity();
    for (double g : grid) {
        Eigen::VectorXd params;
        double rss;
        try {
            rss = solve_at(g, params);
        } catch (const DomainError&) {
            continue;  // candidate puts a record outside the model domain
        }
        if (rss < best_rss) {
            best_rss = rss;
            best_value = g;
            best_params = params;
        }
    }
    if (!std::isfinite(best_rss)) {
        throw CalibrationError("no admissible value of the nonlinear parameter on its search grid");
    }
    return best_value;
}

inline std::vector<double> uniform_grid(double lo, double hi, int count) {
    std::vector<double> g(count);
    for (int i = 0; i < count; ++i) g[i] = lo + (hi - lo) * i / (count - 1);
    return g;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Volumetric families
// ---------------------------------------------------------------------------

inline VolumetricModel calibrate(VolumetricFamily family, const std::vector<StressRecord>& data) {
    if (data.empty()) throw CalibrationError("empty calibration dataset");

    auto g1_scaled = [](const StressRecord& r, double factor) {
        return factor * SymTensor3::from_matrix(r.state.C.to_matrix().inverse());
    };

    switch (family) {
        case VolumetricFamily::SimoMiehe: {
            Eigen::VectorXd params;
            detail::fit_linear(
                data,
                [&](const StressRecord& r) {
                    return std::vector<SymTensor3>{g1_scaled(r, 0.5 * (r.state.J * r.state.J - 1.0))};
                },
                {"kappa"}, params);
            return VolumetricModel::simo_miehe(params[0]);
        }
        case VolumetricFamily::VolNeoHookean: {
            Eigen::VectorXd params;
            detail::fit_linear(
                data,
                [&](const StressRecord& r) {
                    return std::vector<SymTensor3>{g1_scaled(r, r.state.J * (r.state.J - 1.0))};
                },
                {"kappa"}, params);
            return VolumetricModel::vol_neo_hookean(params[0]);
        }
        case VolumetricFamily::VolOgden: {
            Eigen::VectorXd best;
            auto solve_at = [&](double beta, Eigen::VectorXd& params) {
                return detail::fit_linear(
                    data,
                    [&](const StressRecord& r) {
                        const double f = (1.0 - std::pow(r.state.J, -beta)) / beta;
                        return std::vector<SymTensor3>{g1_scaled(r, f)};
                    },
                    {"kappa"}, params);
            };
            std::vector<double> grid;
            for (double b : detail::uniform_grid(-10.0, 10.0, 401))
                if (std::abs(b) > 0.04) grid.push_back(b);
            const double beta = detail::fit_grid(grid, solve_at, best);
            return VolumetricModel::vol_ogden(best[0], beta);
        }
    }
    throw CalibrationError("unknown volumetric family");
}

// ---------------------------------------------------------------------------
// Hyperelastic families
// ---------------------------------------------------------------------------

inline HyperelasticModel calibrate(HyperelasticFamily family, const std::vector<StressRecord>& data) {
    if (data.empty()) throw CalibrationError("empty calibration dataset");

    struct Parts {
        double jm23, i1, i2;
        SymTensor3 dev_i, dev_cb;
    };
    auto parts_of = [](const StressRecord& r) {
        const InvariantSet inv = invariants(r.state);
        return Parts{std::pow(r.state.J, -2.0 / 3.0), inv.I1bar, inv.I2bar,
                     deviatoric(SymTensor3::identity(), r.state.C), deviatoric(r.state.Cbar, r.state.C)};
    };

    switch (family) {
        case HyperelasticFamily::NeoHookean: {
            Eigen::VectorXd params;
            detail::fit_linear(
                data,
                [&](const StressRecord& r) {
                    const Parts p = parts_of(r);
                    return std::vector<SymTensor3>{2.0 * p.jm23 * p.dev_i};
                },
                {"A10"}, params);
            return HyperelasticModel::neo_hookean(params[0]);
        }
        case HyperelasticFamily::MooneyRivlin: {
            Eigen::VectorXd params;
            detail::fit_linear(
                data,
                [&](const StressRecord& r) {
                    const Parts p = parts_of(r);
                    return std::vector<SymTensor3>{2.0 * p.jm23 * p.dev_i,
                                                   p.jm23 * (2.0 * p.i1 * p.dev_i - 2.0 * p.dev_cb)};
                },
                {"A10", "A01"}, params);
            return HyperelasticModel::mooney_rivlin(params[0], params[1]);
        }
        case HyperelasticFamily::GeneralizedRivlin: {
            Eigen::VectorXd params;
            detail::fit_linear(
                data,
                [&](const StressRecord& r) {
                    const Parts p = parts_of(r);
                    const double q = p.i1 * p.i1 - 3.0 * p.i1 + p.i2 - 3.0;
                    return std::vector<SymTensor3>{
                        2.0 * p.jm23 * p.dev_i, p.jm23 * (2.0 * p.i1 * p.dev_i - 2.0 * p.dev_cb),
                        p.jm23 * (2.0 * q * p.dev_i - 2.0 * (p.i1 - 3.0) * p.dev_cb)};
                },
                {"A10", "A01", "A11"}, params);
            return HyperelasticModel::generalized_rivlin(params[0], params[1], params[2]);
        }
        case HyperelasticFamily::Yeoh: {
            Eigen::VectorXd params;
            detail::fit_linear(
                data,
                [&](const StressRecord& r) {
                    const Parts p = parts_of(r);
                    return std::vector<SymTensor3>{2.0 * p.jm23 * p.dev_i,
                                                   4.0 * (p.i1 - 3.0) * p.jm23 * p.dev_i};
                },
                {"C1", "C2"}, params);
            return HyperelasticModel::yeoh(params[0], params[1]);
        }
        case HyperelasticFamily::Gent:
        case HyperelasticFamily::GentGent: {
            // Jm must exceed max(I1bar - 3) over the dataset; search a log
            // grid above that limit.
            double x1_max = 0.0;
            for (const auto& r : data) x1_max = std::max(x1_max, invariants(r.state).I1bar - 3.0);
            const double jm_lo = std::max(1.01 * x1_max, 1e-3);
            std::vector<double> grid(200);
            for (int i = 0; i < 200; ++i)
                grid[i] = jm_lo * std::pow(1e4 / jm_lo, i / 199.0);

            const bool two_term = family == HyperelasticFamily::GentGent;
            Eigen::VectorXd best;
            auto solve_at = [&](double jm, Eigen::VectorXd& params) {
                return detail::fit_linear(
                    data,
                    [&](const StressRecord& r) {
                        const Parts p = parts_of(r);
                        std::vector<SymTensor3> cols{p.jm23 / detail::gent_log_arg(p.i1, jm) * p.dev_i};
                        if (two_term) {
                            cols.push_back(p.jm23 * (3.0 * p.i1 / p.i2 * p.dev_i - 3.0 / p.i2 * p.dev_cb));
                        }
                        return cols;
                    },
                    two_term ? std::vector<std::string>{"mu", "C2"} : std::vector<std::string>{"mu"},
                    params);
            };
            const double jm = detail::fit_grid(grid, solve_at, best);
            return two_term ? HyperelasticModel::gent_gent(best[0], jm, best[1])
                            : HyperelasticModel::gent(best[0], jm);
        }
    }
    throw CalibrationError("unknown hyperelastic family");
}

// ---------------------------------------------------------------------------
// Viscous families
// ---------------------------------------------------------------------------

inline ViscousModel calibrate(ViscousFamily family, const std::vector<StressRecord>& data) {
    if (data.empty()) throw CalibrationError("empty calibration dataset");

    struct Parts {
        double jm23, i1, i2, j5;
        SymTensor3 dev_cbd, dev_mix;
    };
    auto parts_of = [](const StressRecord& r) {
        const InvariantSet inv = invariants(r.state);
        const Matrix3 cb = r.state.Cbar.to_matrix();
        const Matrix3 cbd = r.state.Cbardot.to_matrix();
        return Parts{std::pow(r.state.J, -2.0 / 3.0), inv.I1bar, inv.I2bar, inv.J5bar,
                     deviatoric(r.state.Cbardot, r.state.C),
                     deviatoric(symmetrize(cb * cbd + cbd * cb), r.state.C)};
    };

    switch (family) {
        case ViscousFamily::Pioletti: {
            Eigen::VectorXd params;
            detail::fit_linear(
                data,
                [&](const StressRecord& r) {
                    const Parts p = parts_of(r);
                    return std::vector<SymTensor3>{p.jm23 * (p.i1 - 3.0) * p.dev_cbd};
                },
                {"eta_prime"}, params);
            return ViscousModel::pioletti(params[0]);
        }
        case ViscousFamily::GeneralizedPioletti: {
            Eigen::VectorXd best;
            auto solve_at = [&](double beta, Eigen::VectorXd& params) {
                return detail::fit_linear(
                    data,
                    [&](const StressRecord& r) {
                        const Parts p = parts_of(r);
                        const double x1 = detail::clamp_sqrt_arg(p.i1 - 3.0, "I1bar - 3");
                        return std::vector<SymTensor3>{4.0 * p.jm23 * std::pow(x1, beta) * p.dev_cbd};
                    },
                    {"eta"}, params);
            };
            const double beta =
                detail::fit_grid(detail::uniform_grid(0.1, 5.0, 99), solve_at, best);
            return ViscousModel::generalized_pioletti(best[0], beta);
        }
        case ViscousFamily::USS: {
            Eigen::VectorXd best;
            auto solve_at = [&](double c21, Eigen::VectorXd& params) {
                return detail::fit_linear(
                    data,
                    [&](const StressRecord& r) {
                        const Parts p = parts_of(r);
                        const double x1 = detail::clamp_sqrt_arg(p.i1 - 3.0, "I1bar - 3");
                        const double x2 = detail::clamp_sqrt_arg(p.i2 - 3.0, "I2bar - 3");
                        SymTensor3 b2 = SymTensor3::zero();
                        if (p.j5 > 0.0 && x2 > 0.0) {
                            b2 = 2.0 * p.jm23 * std::pow(p.j5, c21 - 1.0) * std::sqrt(x2) * p.dev_mix;
                        }
                        return std::vector<SymTensor3>{4.0 * p.jm23 * std::sqrt(x1) * p.dev_cbd, b2};
                    },
                    {"k11", "k21"}, params);
            };
            const double c21 =
                detail::fit_grid(detail::uniform_grid(0.01, 1.0, 100), solve_at, best);
            return ViscousModel::uss(best[0], best[1], c21);
        }
    }
    throw CalibrationError("unknown viscous family");
}

}  // namespace vhgpr
