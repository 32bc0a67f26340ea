#pragma once

/**
 * @file gpr.hpp
 * @brief Gaussian process regression on the Matern 3/2 kernel: maximum
 *        log-likelihood hyperparameter training with multi-start local
 *        search, exact-inference prediction with variance, and the
 *        inequality-constrained training variant (C-GPR).
 *
 * Inputs and targets are standardized to zero mean and unit variance before
 * fitting; the kernel hyperparameters theta = (sigma_f, l) live in the
 * standardized space and are shared across all output columns. Constrained
 * training restricts theta so that user-supplied linear functionals of the
 * (raw) predicted outputs stay non-negative at chosen evaluation points,
 * enforced through an exterior penalty with escalating weight.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vhgpr/errors.hpp"

namespace vhgpr {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Matern 3/2 kernel hyperparameters plus the stabilization noise.
struct KernelParams {
    double sigma_f = 1.0;  ///< signal scale, > 0
    double length = 1.0;   ///< characteristic length scale, > 0
    double alpha = 1e-4;   ///< noise added on coincident inputs
};

/// k(x, x') = sigma_f^2 (1 + sqrt(3) d / l) exp(-sqrt(3) d / l) + alpha [x = x'].
inline double kernel_eval(const VectorXd& x, const VectorXd& x_prime, const KernelParams& p) {
    const double d = (x - x_prime).norm();
    const double s = std::sqrt(3.0) * d / p.length;
    double k = p.sigma_f * p.sigma_f * (1.0 + s) * std::exp(-s);
    if (d == 0.0) k += p.alpha;
    return k;
}

/// Search-box and restart schedule for hyperparameter training. The box is
/// wide enough that the near-linear likelihood ridge of smooth low-noise data
/// is reachable; clamping it tighter visibly degrades extrapolation.
struct GprOptions {
    double log_sigma_lo = -6.0;
    double log_sigma_hi = 6.0;
    double log_length_lo = -6.0;
    double log_length_hi = 6.0;
    int restarts = 8;              ///< Latin-hypercube starts over the log box
    int max_evals_per_start = 200; ///< Nelder-Mead objective-evaluation budget
    std::uint64_t seed = 0;        ///< restart-schedule seed
    double feasibility_tol = 1e-8; ///< constrained fits: allowed scaled violation
};

/// A linear functional of the raw model output at one evaluation point;
/// the constrained fit enforces coeffs . y_hat(input) >= 0.
struct OutputConstraint {
    VectorXd input;
    VectorXd coeffs;
};

using ConstraintSet = std::vector<OutputConstraint>;

/// Trained Gaussian-process regressor. Immutable after fit; prediction is
/// pure and thread-safe.
struct GpModel {
    MatrixXd X;  ///< standardized training inputs, N x n_i
    MatrixXd Y;  ///< standardized training targets, N x n_o
    KernelParams params;
    double jitter = 1e-4;  ///< diagonal noise actually used (>= alpha)

    VectorXd x_mean, x_scale, y_mean, y_scale;

    // Cached factorization state.
    Eigen::LLT<MatrixXd> factorization;
    MatrixXd weights;  ///< K^{-1} Y, N x n_o

    double lml = 0.0;           ///< log marginal likelihood at the final theta
    double lml_at_start = 0.0;  ///< at the first restart's starting theta
    bool converged = true;      ///< false when any restart hit its budget

    int input_dim() const { return static_cast<int>(X.cols()); }
    int output_dim() const { return static_cast<int>(Y.cols()); }
    int n_train() const { return static_cast<int>(X.rows()); }
};

namespace gpdetail {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline MatrixXd pairwise_distances(const MatrixXd& A, const MatrixXd& B) {
    MatrixXd D(A.rows(), B.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < B.rows(); ++j) D(i, j) = (A.row(i) - B.row(j)).norm();
    return D;
}

/// Noise-free Matern 3/2 values for a precomputed distance matrix.
inline MatrixXd matern32(const MatrixXd& D, double sigma_f, double length) {
    const double c = std::sqrt(3.0) / length;
    const double s2 = sigma_f * sigma_f;
    return (s2 * (1.0 + c * D.array()) * (-c * D.array()).exp()).matrix();
}

struct Standardization {
    VectorXd mean, scale;
};

/// Columnwise mean and standard deviation; constant columns get unit scale so
/// they standardize to exact zeros.
inline Standardization standardize_columns(MatrixXd& M) {
    Standardization st;
    st.mean = M.colwise().mean().transpose();
    M.rowwise() -= st.mean.transpose();
    st.scale = M.array().square().colwise().mean().sqrt().transpose();
    for (Eigen::Index c = 0; c < st.scale.size(); ++c) {
        if (st.scale[c] < 1e-300) st.scale[c] = 1.0;
        M.col(c) /= st.scale[c];
    }
    return st;
}

/// Likelihood (and optionally penalty) evaluation shared by both fit paths.
struct Objective {
    const MatrixXd& D;    // training distance matrix
    const MatrixXd& Ys;   // standardized targets
    double alpha;
    // Constrained-fit state (empty for plain fits).
    const MatrixXd* Dc = nullptr;         // constraint-to-training distances (Nc x N)
    const MatrixXd* coeffs_std = nullptr; // Nc x n_o, functional in standardized outputs
    const VectorXd* offsets = nullptr;    // Nc, functional value at the target mean
    const VectorXd* scales = nullptr;     // Nc, normalization of each functional
    double penalty_weight = 0.0;

    struct Eval {
        double lml = kNegInf;
        double value = kNegInf;  ///< lml minus penalty
        double min_violation = 0.0;
        double jitter = 0.0;
        bool ok = false;
    };

    Eval operator()(double log_sigma, double log_length) const {
        Eval out;
        const double sigma_f = std::exp(log_sigma);
        const double length = std::exp(log_length);
        const Eigen::Index n = D.rows();

        MatrixXd K = matern32(D, sigma_f, length);
        Eigen::LLT<MatrixXd> llt;
        double jitter = alpha;
        for (int attempt = 0; attempt <= 3; ++attempt) {
            MatrixXd Kj = K + jitter * MatrixXd::Identity(n, n);
            llt.compute(Kj);
            if (llt.info() == Eigen::Success) {
                out.jitter = jitter;
                out.ok = true;
                break;
            }
            jitter = jitter > 0.0 ? 10.0 * jitter : 1e-10;
        }
        if (!out.ok) return out;

        const MatrixXd W = llt.solve(Ys);
        const double quad = (Ys.array() * W.array()).sum();
        double logdet = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) logdet += std::log(llt.matrixLLT()(i, i));
        logdet *= 2.0;
        const double no = static_cast<double>(Ys.cols());
        out.lml = -0.5 * quad - 0.5 * no * logdet -
                  0.5 * static_cast<double>(n) * no * std::log(2.0 * M_PI);
        out.value = out.lml;

        if (Dc != nullptr && Dc->rows() > 0) {
            const MatrixXd Kc = matern32(*Dc, sigma_f, length);  // Nc x N
            const MatrixXd pred = Kc * W;                        // Nc x n_o (standardized)
            // Penalize shortfall below a small positive margin so that
            // active constraints equilibrate on the feasible side.
            constexpr double kMargin = 1e-4;
            double penalty = 0.0;
            double min_v = std::numeric_limits<double>::infinity();
            for (Eigen::Index k = 0; k < Dc->rows(); ++k) {
                const double raw = (*offsets)[k] + coeffs_std->row(k).dot(pred.row(k));
                const double v = raw / (*scales)[k];
                min_v = std::min(min_v, v);
                const double shortfall = kMargin - v;
                if (shortfall > 0.0) penalty += shortfall * shortfall;
            }
            out.min_violation = min_v;
            out.value = out.lml - penalty_weight * penalty;
        }
        return out;
    }
};

struct NelderMeadResult {
    double x0 = 0.0, x1 = 0.0, f = kNegInf;
    bool converged = false;
};

/// Deterministic 2-D Nelder-Mead maximizer with box clamping.
template <typename F>
NelderMeadResult nelder_mead_2d(const F& f, double sx, double sy, const double lo[2],
                                const double hi[2], int max_evals) {
    auto clamp = [&](double v[2]) {
        v[0] = std::min(std::max(v[0], lo[0]), hi[0]);
        v[1] = std::min(std::max(v[1], lo[1]), hi[1]);
    };

    double pts[3][2] = {{sx, sy},
                        {sx + 0.25 * (hi[0] - lo[0]) * 0.1, sy},
                        {sx, sy + 0.25 * (hi[1] - lo[1]) * 0.1}};
    double fv[3];
    int evals = 0;
    for (auto& p : pts) clamp(p);
    for (int i = 0; i < 3; ++i) {
        fv[i] = f(pts[i][0], pts[i][1]);
        ++evals;
    }

    NelderMeadResult res;
    while (evals < max_evals) {
        int order[3] = {0, 1, 2};
        std::sort(order, order + 3, [&](int a, int b) { return fv[a] > fv[b]; });
        const int best = order[0], mid = order[1], worst = order[2];

        const double spread = std::abs(fv[best] - fv[worst]);
        const double size = std::max(std::hypot(pts[best][0] - pts[worst][0], pts[best][1] - pts[worst][1]),
                                     std::hypot(pts[best][0] - pts[mid][0], pts[best][1] - pts[mid][1]));
        if (spread < 1e-9 * (1.0 + std::abs(fv[best])) && size < 1e-7) {
            res.converged = true;
            break;
        }

        const double cx = 0.5 * (pts[best][0] + pts[mid][0]);
        const double cy = 0.5 * (pts[best][1] + pts[mid][1]);

        double refl[2] = {cx + (cx - pts[worst][0]), cy + (cy - pts[worst][1])};
        clamp(refl);
        const double fr = f(refl[0], refl[1]);
        ++evals;

        if (fr > fv[best]) {
            double exp_[2] = {cx + 2.0 * (cx - pts[worst][0]), cy + 2.0 * (cy - pts[worst][1])};
            clamp(exp_);
            const double fe = f(exp_[0], exp_[1]);
            ++evals;
            if (fe > fr) {
                pts[worst][0] = exp_[0]; pts[worst][1] = exp_[1]; fv[worst] = fe;
            } else {
                pts[worst][0] = refl[0]; pts[worst][1] = refl[1]; fv[worst] = fr;
            }
        } else if (fr > fv[mid]) {
            pts[worst][0] = refl[0]; pts[worst][1] = refl[1]; fv[worst] = fr;
        } else {
            double con[2] = {cx + 0.5 * (pts[worst][0] - cx), cy + 0.5 * (pts[worst][1] - cy)};
            clamp(con);
            const double fc = f(con[0], con[1]);
            ++evals;
            if (fc > fv[worst]) {
                pts[worst][0] = con[0]; pts[worst][1] = con[1]; fv[worst] = fc;
            } else {
                for (int i : {mid, worst}) {
                    pts[i][0] = pts[best][0] + 0.5 * (pts[i][0] - pts[best][0]);
                    pts[i][1] = pts[best][1] + 0.5 * (pts[i][1] - pts[best][1]);
                    fv[i] = f(pts[i][0], pts[i][1]);
                    ++evals;
                }
            }
        }
    }

    const int best = static_cast<int>(std::max_element(fv, fv + 3) - fv);
    res.x0 = pts[best][0];
    res.x1 = pts[best][1];
    res.f = fv[best];
    return res;
}

/// Latin-hypercube starting points over the 2-D log box.
inline std::vector<std::array<double, 2>> lhs_starts(int count, const double lo[2],
                                                     const double hi[2], std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<int> perm0(count), perm1(count);
    std::iota(perm0.begin(), perm0.end(), 0);
    std::iota(perm1.begin(), perm1.end(), 0);
    std::shuffle(perm0.begin(), perm0.end(), rng);
    std::shuffle(perm1.begin(), perm1.end(), rng);
    std::vector<std::array<double, 2>> starts(count);
    for (int i = 0; i < count; ++i) {
        starts[i][0] = lo[0] + (perm0[i] + unit(rng)) / count * (hi[0] - lo[0]);
        starts[i][1] = lo[1] + (perm1[i] + unit(rng)) / count * (hi[1] - lo[1]);
    }
    return starts;
}

/// Standardizes, deduplicates coincident rows, and rejects contradictions.
inline void prepare_training_data(const MatrixXd& X, const MatrixXd& Y, MatrixXd& Xs, MatrixXd& Ys,
                                  Standardization& xstat, Standardization& ystat) {
    if (X.rows() != Y.rows()) throw FitError("input/target row mismatch");
    if (X.rows() < 2) throw FitError("at least two training points are required");

    Xs = X;
    Ys = Y;
    xstat = standardize_columns(Xs);
    ystat = standardize_columns(Ys);

    // Coincident standardized inputs: identical targets collapse to one row,
    // differing targets are contradictory.
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < Xs.rows(); ++i) {
        bool duplicate = false;
        for (Eigen::Index j : keep) {
            if ((Xs.row(i) - Xs.row(j)).norm() < 1e-12) {
                if ((Ys.row(i) - Ys.row(j)).lpNorm<Eigen::Infinity>() > 1e-9) {
                    throw FitError("duplicate training inputs with differing targets (rows " +
                                   std::to_string(j) + ", " + std::to_string(i) + ")");
                }
                duplicate = true;
                break;
            }
        }
        if (!duplicate) keep.push_back(i);
    }
    if (keep.size() < static_cast<std::size_t>(Xs.rows())) {
        MatrixXd Xk(keep.size(), Xs.cols()), Yk(keep.size(), Ys.cols());
        for (std::size_t r = 0; r < keep.size(); ++r) {
            Xk.row(r) = Xs.row(keep[r]);
            Yk.row(r) = Ys.row(keep[r]);
        }
        Xs = Xk;
        Ys = Yk;
    }
    if (Xs.rows() < 2) throw FitError("fewer than two distinct training points");
}

/// Runs the multi-start schedule and finalizes the model at the best theta.
/// Xs/Ys must outlive the call (the objective references them).
inline GpModel run_fit(const MatrixXd& Xs, const MatrixXd& Ys, const Standardization& xstat,
                       const Standardization& ystat, double alpha, const GprOptions& opts,
                       const Objective& objective) {
    const double lo[2] = {opts.log_sigma_lo, opts.log_length_lo};
    const double hi[2] = {opts.log_sigma_hi, opts.log_length_hi};
    const auto starts = lhs_starts(opts.restarts, lo, hi, opts.seed);

    auto value_of = [&](double ls, double ll) { return objective(ls, ll).value; };

    double best_f = kNegInf, best_theta[2] = {0.0, 0.0};
    double lml_at_start = kNegInf;
    bool all_converged = true;
    for (std::size_t r = 0; r < starts.size(); ++r) {
        if (r == 0) lml_at_start = objective(starts[r][0], starts[r][1]).lml;
        const auto res = nelder_mead_2d(value_of, starts[r][0], starts[r][1], lo, hi,
                                        opts.max_evals_per_start);
        all_converged = all_converged && res.converged;
        if (res.f > best_f) {
            best_f = res.f;
            best_theta[0] = res.x0;
            best_theta[1] = res.x1;
        }
    }
    if (!std::isfinite(best_f)) {
        throw FitError("kernel matrix is not positive-definite at any probed hyperparameters");
    }

    const auto final_eval = objective(best_theta[0], best_theta[1]);

    GpModel model;
    model.X = Xs;
    model.Y = Ys;
    model.params.sigma_f = std::exp(best_theta[0]);
    model.params.length = std::exp(best_theta[1]);
    model.params.alpha = alpha;
    model.jitter = final_eval.jitter;
    model.x_mean = xstat.mean;
    model.x_scale = xstat.scale;
    model.y_mean = ystat.mean;
    model.y_scale = ystat.scale;
    model.lml = final_eval.lml;
    model.lml_at_start = lml_at_start;
    model.converged = all_converged;

    const MatrixXd D = pairwise_distances(model.X, model.X);
    MatrixXd K = matern32(D, model.params.sigma_f, model.params.length) +
                 model.jitter * MatrixXd::Identity(model.X.rows(), model.X.rows());
    model.factorization.compute(K);
    if (model.factorization.info() != Eigen::Success) {
        throw FitError("final kernel factorization failed unexpectedly");
    }
    model.weights = model.factorization.solve(model.Y);
    return model;
}

}  // namespace gpdetail

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

/// Maximum-likelihood fit with a shared kernel across all output columns.
inline GpModel fit(const MatrixXd& X, const MatrixXd& Y, double alpha = 1e-4,
                   const GprOptions& opts = {}) {
    MatrixXd Xs, Ys;
    gpdetail::Standardization xstat, ystat;
    gpdetail::prepare_training_data(X, Y, Xs, Ys, xstat, ystat);

    const MatrixXd D = gpdetail::pairwise_distances(Xs, Xs);
    const gpdetail::Objective objective{D, Ys, alpha};
    return gpdetail::run_fit(Xs, Ys, xstat, ystat, alpha, opts, objective);
}

// ---------------------------------------------------------------------------
// Prediction
// ---------------------------------------------------------------------------

namespace gpdetail {

inline VectorXd standardize_query(const GpModel& m, const VectorXd& x_raw) {
    if (x_raw.size() != m.input_dim()) {
        throw std::invalid_argument("query dimension " + std::to_string(x_raw.size()) +
                                    " does not match model input dimension " +
                                    std::to_string(m.input_dim()));
    }
    return ((x_raw - m.x_mean).array() / m.x_scale.array()).matrix();
}

inline VectorXd cross_covariance(const GpModel& m, const VectorXd& xs) {
    VectorXd k(m.n_train());
    const double c = std::sqrt(3.0) / m.params.length;
    const double s2 = m.params.sigma_f * m.params.sigma_f;
    for (int i = 0; i < m.n_train(); ++i) {
        const double d = (m.X.row(i).transpose() - xs).norm();
        k[i] = s2 * (1.0 + c * d) * std::exp(-c * d);
    }
    return k;
}

}  // namespace gpdetail

/// Predictive mean, de-standardized to raw target units.
inline VectorXd predict(const GpModel& m, const VectorXd& x_raw) {
    const VectorXd xs = gpdetail::standardize_query(m, x_raw);
    const VectorXd k = gpdetail::cross_covariance(m, xs);
    const VectorXd mean_std = m.weights.transpose() * k;
    return m.y_mean + (m.y_scale.array() * mean_std.array()).matrix();
}

/// Predictive variance in standardized target units, clamped at zero.
inline double predict_variance(const GpModel& m, const VectorXd& x_raw) {
    const VectorXd xs = gpdetail::standardize_query(m, x_raw);
    const VectorXd k = gpdetail::cross_covariance(m, xs);
    const VectorXd v = m.factorization.solve(k);
    const double prior = m.params.sigma_f * m.params.sigma_f + m.params.alpha;
    return std::max(0.0, prior - k.dot(v));
}

// ---------------------------------------------------------------------------
// Log marginal likelihood surface (exposed for verification)
// ---------------------------------------------------------------------------

/// Log marginal likelihood of standardized data (X, Y) at theta, summed over
/// output columns, with noise alpha on the diagonal.
inline double log_marginal_likelihood(const MatrixXd& Xs, const MatrixXd& Ys,
                                      const KernelParams& p) {
    const MatrixXd D = gpdetail::pairwise_distances(Xs, Xs);
    const gpdetail::Objective obj{D, Ys, p.alpha};
    const auto e = obj(std::log(p.sigma_f), std::log(p.length));
    if (!e.ok) throw FitError("kernel matrix not positive-definite");
    return e.lml;
}

/// Analytic gradient of the log marginal likelihood with respect to
/// (log sigma_f, log l); the reference for the finite-difference checks.
inline Eigen::Vector2d log_marginal_likelihood_gradient(const MatrixXd& Xs, const MatrixXd& Ys,
                                                        const KernelParams& p) {
    const Eigen::Index n = Xs.rows();
    const MatrixXd D = gpdetail::pairwise_distances(Xs, Xs);
    const MatrixXd Km = gpdetail::matern32(D, p.sigma_f, p.length);
    MatrixXd K = Km + p.alpha * MatrixXd::Identity(n, n);
    Eigen::LLT<MatrixXd> llt(K);
    if (llt.info() != Eigen::Success) throw FitError("kernel matrix not positive-definite");

    const MatrixXd W = llt.solve(Ys);                       // K^{-1} Y
    const MatrixXd Kinv = llt.solve(MatrixXd::Identity(n, n));
    const double no = static_cast<double>(Ys.cols());

    // dK/dlog sigma_f = 2 Km; dK/dlog l = sigma_f^2 s^2 exp(-s), s = sqrt(3) d / l.
    const MatrixXd S = std::sqrt(3.0) / p.length * D;
    const MatrixXd dK_dlogl =
        (p.sigma_f * p.sigma_f) * (S.array().square() * (-S.array()).exp()).matrix();

    auto directional = [&](const MatrixXd& dK) {
        const double data_term = (W.transpose() * dK * W).trace();
        const double trace_term = (Kinv.array() * dK.array()).sum();
        return 0.5 * data_term - 0.5 * no * trace_term;
    };
    return {directional(2.0 * Km), directional(dK_dlogl)};
}

// ---------------------------------------------------------------------------
// Constrained fitting (C-GPR)
// ---------------------------------------------------------------------------

/// Maximum-likelihood fit subject to coeffs_k . y_hat(x_k) >= 0 at every
/// constraint point. Exterior penalty with weights 1e2, 1e4, 1e6; a stage
/// that ends feasible (scaled violation >= -feasibility_tol) is accepted.
/// Throws ConstrainedFitError when every stage ends infeasible.
inline GpModel fit_constrained(const MatrixXd& X, const MatrixXd& Y, double alpha,
                               const ConstraintSet& constraints, const GprOptions& opts = {}) {
    if (constraints.empty()) throw std::invalid_argument("constrained fit requires constraints");

    MatrixXd Xs, Ys;
    gpdetail::Standardization xstat, ystat;
    gpdetail::prepare_training_data(X, Y, Xs, Ys, xstat, ystat);
    const Eigen::Index no = Ys.cols();

    // Constraint functionals in standardized output space:
    //   c . y_raw = c . y_mean + (c o y_scale) . y_std.
    const Eigen::Index nc = static_cast<Eigen::Index>(constraints.size());
    MatrixXd Xc(nc, Xs.cols());
    MatrixXd coeffs_std(nc, no);
    VectorXd offsets(nc), scales(nc);
    for (Eigen::Index k = 0; k < nc; ++k) {
        const auto& c = constraints[k];
        if (c.input.size() != Xs.cols() || c.coeffs.size() != no) {
            throw std::invalid_argument("constraint dimension mismatch at point " + std::to_string(k));
        }
        if (c.coeffs.lpNorm<Eigen::Infinity>() == 0.0) {
            throw std::invalid_argument("constraint functional " + std::to_string(k) +
                                        " has no nonzero coefficient");
        }
        Xc.row(k) = ((c.input - xstat.mean).array() / xstat.scale.array()).transpose();
        coeffs_std.row(k) = (c.coeffs.array() * ystat.scale.array()).transpose();
        offsets[k] = c.coeffs.dot(ystat.mean);
        scales[k] = std::max(1.0, coeffs_std.row(k).norm());
    }

    const MatrixXd D = gpdetail::pairwise_distances(Xs, Xs);
    const MatrixXd Dc = gpdetail::pairwise_distances(Xc, Xs);

    const double weights[3] = {1e2, 1e4, 1e6};
    double best_infeasible_violation = -std::numeric_limits<double>::infinity();
    int worst_point = 0;

    for (int stage = 0; stage < 3; ++stage) {
        gpdetail::Objective objective{D, Ys, alpha, &Dc, &coeffs_std, &offsets, &scales, weights[stage]};
        GpModel model = gpdetail::run_fit(Xs, Ys, xstat, ystat, alpha, opts, objective);

        // Feasibility check at the returned theta.
        gpdetail::Objective check{D, Ys, alpha, &Dc, &coeffs_std, &offsets, &scales, 0.0};
        const auto eval = check(std::log(model.params.sigma_f), std::log(model.params.length));
        if (eval.min_violation >= -opts.feasibility_tol) {
            return model;
        }
        if (eval.min_violation > best_infeasible_violation) {
            best_infeasible_violation = eval.min_violation;
            // Identify the most-violated point for the error report.
            const MatrixXd Kc = gpdetail::matern32(Dc, model.params.sigma_f, model.params.length);
            const MatrixXd pred = Kc * model.weights;
            double worst = std::numeric_limits<double>::infinity();
            for (Eigen::Index k = 0; k < nc; ++k) {
                const double v = (offsets[k] + coeffs_std.row(k).dot(pred.row(k))) / scales[k];
                if (v < worst) {
                    worst = v;
                    worst_point = static_cast<int>(k);
                }
            }
        }
    }
    throw ConstrainedFitError("constrained fit infeasible after penalty escalation; worst point " +
                                  std::to_string(worst_point) + " with scaled violation " +
                                  std::to_string(best_infeasible_violation),
                              worst_point, best_infeasible_violation);
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace gpdetail {

inline nlohmann::json matrix_to_json(const MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline MatrixXd matrix_from_json(const nlohmann::json& j) {
    const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    const Eigen::Index cols = rows == 0 ? 0 : static_cast<Eigen::Index>(j[0].size());
    MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
    return m;
}

inline nlohmann::json vector_to_json(const VectorXd& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

inline VectorXd vector_from_json(const nlohmann::json& j) {
    VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = j[i].get<double>();
    return v;
}

}  // namespace gpdetail

inline nlohmann::json to_json(const GpModel& m) {
    return {{"theta", {{"sigma_f", m.params.sigma_f}, {"length", m.params.length}}},
            {"alpha", m.params.alpha},
            {"jitter", m.jitter},
            {"x_mean", gpdetail::vector_to_json(m.x_mean)},
            {"x_scale", gpdetail::vector_to_json(m.x_scale)},
            {"y_mean", gpdetail::vector_to_json(m.y_mean)},
            {"y_scale", gpdetail::vector_to_json(m.y_scale)},
            {"X", gpdetail::matrix_to_json(m.X)},
            {"Y", gpdetail::matrix_to_json(m.Y)},
            {"lml", m.lml},
            {"lml_at_start", m.lml_at_start},
            {"converged", m.converged}};
}

inline GpModel gp_from_json(const nlohmann::json& j) {
    GpModel m;
    m.params.sigma_f = j.at("theta").at("sigma_f").get<double>();
    m.params.length = j.at("theta").at("length").get<double>();
    m.params.alpha = j.at("alpha").get<double>();
    m.jitter = j.at("jitter").get<double>();
    m.x_mean = gpdetail::vector_from_json(j.at("x_mean"));
    m.x_scale = gpdetail::vector_from_json(j.at("x_scale"));
    m.y_mean = gpdetail::vector_from_json(j.at("y_mean"));
    m.y_scale = gpdetail::vector_from_json(j.at("y_scale"));
    m.X = gpdetail::matrix_from_json(j.at("X"));
    m.Y = gpdetail::matrix_from_json(j.at("Y"));
    m.lml = j.at("lml").get<double>();
    m.lml_at_start = j.at("lml_at_start").get<double>();
    m.converged = j.at("converged").get<bool>();

    const MatrixXd D = gpdetail::pairwise_distances(m.X, m.X);
    MatrixXd K = gpdetail::matern32(D, m.params.sigma_f, m.params.length) +
                 m.jitter * MatrixXd::Identity(m.X.rows(), m.X.rows());
    m.factorization.compute(K);
    if (m.factorization.info() != Eigen::Success) {
        throw FitError("deserialized kernel matrix is not positive-definite");
    }
    m.weights = m.factorization.solve(m.Y);
    return m;
}

}  // namespace vhgpr
