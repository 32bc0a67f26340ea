#pragma once

/**
 * @file experiment.hpp
 * @brief Experiment harness: dataset generation for the three loading
 *        protocols, error metrics, surrogate-versus-baseline evaluation over
 *        training / same-mode / cross-mode regions, dissipation audits,
 *        dataset-size sweeps, and plot-ready CSV + JSON reports.
 */

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vhgpr/calibration.hpp"
#include "vhgpr/dataset.hpp"
#include "vhgpr/dataset_csv.hpp"
#include "vhgpr/errors.hpp"
#include "vhgpr/materials.hpp"
#include "vhgpr/surrogate.hpp"

namespace vhgpr {

enum class ExperimentId { Hydrostatic, Quasistatic, Dynamic };
enum class Mode { Confined, Uniaxial, SimpleShear };

inline std::string to_string(ExperimentId id) {
    switch (id) {
        case ExperimentId::Hydrostatic: return "hydrostatic";
        case ExperimentId::Quasistatic: return "quasistatic";
        default: return "dynamic";
    }
}

inline ExperimentId experiment_from_string(const std::string& s) {
    if (s == "hydrostatic") return ExperimentId::Hydrostatic;
    if (s == "quasistatic") return ExperimentId::Quasistatic;
    if (s == "dynamic") return ExperimentId::Dynamic;
    throw std::invalid_argument("unknown experiment id: " + s);
}

inline std::string to_string(Mode m) {
    switch (m) {
        case Mode::Confined: return "confined";
        case Mode::Uniaxial: return "uniaxial";
        default: return "shear";
    }
}

inline Mode mode_from_string(const std::string& s) {
    if (s == "confined") return Mode::Confined;
    if (s == "uniaxial") return Mode::Uniaxial;
    if (s == "shear") return Mode::SimpleShear;
    throw std::invalid_argument("unknown deformation mode: " + s);
}

inline Branch branch_of(ExperimentId id) {
    switch (id) {
        case ExperimentId::Hydrostatic: return Branch::Vol;
        case ExperimentId::Quasistatic: return Branch::HIso;
        default: return Branch::VIso;
    }
}

/// One uniform grid over a deformation-mode parameter, optionally crossed
/// with a list of loading rates (empty = quasi-static, rate 0).
struct GridSpec {
    Mode mode = Mode::Confined;
    double lo = 0.75;
    double hi = 1.0;
    int count = 26;
    std::vector<double> rates;
};

struct ExperimentSpec {
    ExperimentId id = ExperimentId::Hydrostatic;
    MaterialModel truth = VolumetricModel::simo_miehe(10.0);
    GridSpec train;
    std::vector<GridSpec> test_same;
    std::vector<GridSpec> test_cross;
    std::string conventional;  ///< baseline family to calibrate, "" = none
    bool classical = true;
    double alpha = 1e-4;
    std::uint64_t seed = 0;
    int restarts = 8;
    std::string outdir;  ///< "" = in-memory report only
};

/// Packaged default specification of each experiment.
inline ExperimentSpec default_spec(ExperimentId id) {
    ExperimentSpec s;
    s.id = id;
    switch (id) {
        case ExperimentId::Hydrostatic:
            s.truth = VolumetricModel::simo_miehe(10.0);
            s.train = {Mode::Confined, 0.75, 1.0, 26, {}};
            s.test_same = {{Mode::Confined, 0.5, 1.0, 51, {}}};
            s.test_cross = {{Mode::Confined, 1.0, 1.5, 51, {}}};
            s.conventional = "vol_neo_hookean";
            break;
        case ExperimentId::Quasistatic:
            s.truth = HyperelasticModel::mooney_rivlin(1.0, 0.5);
            s.train = {Mode::Uniaxial, 1.0, 1.25, 26, {}};
            s.test_same = {{Mode::Uniaxial, 1.0, 1.5, 51, {}}};
            s.test_cross = {{Mode::Uniaxial, 0.5, 1.0, 51, {}},
                            {Mode::SimpleShear, 0.0, 0.5, 51, {}}};
            s.conventional = "yeoh";
            break;
        case ExperimentId::Dynamic: {
            s.truth = ViscousModel::uss(1.0, 1.0, 0.75);
            s.train = {Mode::Uniaxial, 1.0, 1.5, 31, {10.0, 32.5, 55.0, 77.5, 100.0}};
            const std::vector<double> test_rates = {10.0, 32.5, 55.0, 77.5, 100.0, 122.5, 145.0};
            std::vector<double> neg_rates;
            for (double r : test_rates) neg_rates.push_back(-r);
            s.test_same = {{Mode::Uniaxial, 1.0, 1.75, 51, test_rates}};
            s.test_cross = {{Mode::Uniaxial, 0.5, 1.0, 51, neg_rates},
                            {Mode::SimpleShear, 0.0, 0.5, 51, test_rates}};
            s.conventional = "pioletti";
            break;
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Grid expansion and dataset generation
// ---------------------------------------------------------------------------

struct GridPoint {
    Mode mode = Mode::Confined;
    double value = 1.0;  ///< j, lambda, or gamma
    double rate = 0.0;
    DeformationState state;
};

inline DeformationState make_state(Mode mode, double value, double rate) {
    switch (mode) {
        case Mode::Confined:
            if (rate != 0.0) throw ExperimentError("confined mode is quasi-static only");
            return mode_confined_uniaxial(value);
        case Mode::Uniaxial:
            return mode_isochoric_uniaxial(value, rate);
        default:
            return mode_simple_shear(value, rate);
    }
}

inline std::vector<GridPoint> expand_grid(const GridSpec& g) {
    if (g.count < 2) throw ExperimentError("grid needs at least 2 points");
    std::vector<double> rates = g.rates.empty() ? std::vector<double>{0.0} : g.rates;
    std::vector<GridPoint> pts;
    pts.reserve(rates.size() * g.count);
    for (double rate : rates) {
        for (int i = 0; i < g.count; ++i) {
            const double v = g.lo + (g.hi - g.lo) * i / (g.count - 1);
            pts.push_back({g.mode, v, rate, make_state(g.mode, v, rate)});
        }
    }
    return pts;
}

/// Training dataset over the experiment's training grid with ground-truth stresses.
inline BranchDataset generate_dataset(const ExperimentSpec& spec) {
    BranchDataset data;
    data.branch = branch_of(spec.id);
    for (const GridPoint& p : expand_grid(spec.train)) {
        try {
            data.records.push_back({p.state, stress(spec.truth, p.state)});
        } catch (const DomainError& e) {
            throw ExperimentError("ground-truth domain violation at " + to_string(p.mode) + " " +
                                  std::to_string(p.value) + " rate " + std::to_string(p.rate) +
                                  ": " + e.what());
        }
    }
    return data;
}

// ---------------------------------------------------------------------------
// Error metrics
// ---------------------------------------------------------------------------

/// Percent relative error 100 ||vec(pred) - vec(truth)|| / ||vec(truth)||;
/// undefined (nullopt) for an identically zero truth.
inline std::optional<double> err(const SymTensor3& pred, const SymTensor3& truth) {
    const double denom = truth.voigt_norm();
    if (denom == 0.0) return std::nullopt;
    return 100.0 * (pred - truth).voigt_norm() / denom;
}

/// Arithmetic mean; absent for an empty list.
inline std::optional<double> mean_err(const std::vector<double>& errs) {
    if (errs.empty()) return std::nullopt;
    double sum = 0.0;
    for (double e : errs) sum += e;
    return sum / static_cast<double>(errs.size());
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct RegionStats {
    std::optional<double> mean_err;
    double max_err = 0.0;
    int count = 0;     ///< points entering the mean
    int excluded = 0;  ///< zero or near-zero truth, kept out of the mean
};

struct EvaluatedPoint {
    Mode mode = Mode::Confined;
    double value = 0.0;
    double rate = 0.0;
    SymTensor3 truth, pred;
    std::optional<double> err;
    bool excluded = false;
    double dissipation_pred = 0.0;
    double dissipation_truth = 0.0;
};

struct ModelReport {
    std::string name;
    std::map<std::string, std::vector<EvaluatedPoint>> points;  // per region
    std::map<std::string, RegionStats> regions;  // training/same_mode/cross_mode/testing
    std::map<std::string, double> dissipation_min;  // tension/compression/shear (dynamic)
};

struct ErrorReport {
    ExperimentId id = ExperimentId::Hydrostatic;
    std::vector<ModelReport> models;
    nlohmann::json calibrated;  // conventional baseline family + parameters
    bool has_shear_grid = false;
    bool classical_shear12_zero = false;
    double near_zero_threshold = 0.0;

    const ModelReport& model(const std::string& name) const {
        for (const auto& m : models)
            if (m.name == name) return m;
        throw std::out_of_range("no model named " + name);
    }

    nlohmann::json summary() const {
        nlohmann::json j;
        j["experiment"] = to_string(id);
        j["near_zero_threshold"] = near_zero_threshold;
        if (!calibrated.is_null()) j["calibrated"] = calibrated;
        nlohmann::json jm;
        for (const auto& m : models) {
            nlohmann::json r;
            for (const auto& [region, stats] : m.regions) {
                nlohmann::json s;
                if (stats.mean_err) s["mean_err"] = *stats.mean_err;
                s["max_err"] = stats.max_err;
                s["count"] = stats.count;
                s["excluded"] = stats.excluded;
                r[region] = std::move(s);
            }
            if (!m.dissipation_min.empty()) {
                nlohmann::json d;
                for (const auto& [mode, v] : m.dissipation_min) d[mode] = v;
                r["dissipation_min"] = std::move(d);
            }
            jm[m.name] = std::move(r);
        }
        j["models"] = std::move(jm);
        j["flags"] = {{"classical_shear12_zero", classical_shear12_zero},
                      {"has_shear_grid", has_shear_grid}};
        return j;
    }
};

// ---------------------------------------------------------------------------
// Experiment runner
// ---------------------------------------------------------------------------

/// Calibrates a named conventional family against the training records.
inline MaterialModel calibrate_by_name(const std::string& family,
                                       const std::vector<StressRecord>& records) {
    if (family == "simo_miehe") return calibrate(VolumetricFamily::SimoMiehe, records);
    if (family == "vol_neo_hookean") return calibrate(VolumetricFamily::VolNeoHookean, records);
    if (family == "vol_ogden") return calibrate(VolumetricFamily::VolOgden, records);
    if (family == "neo_hookean") return calibrate(HyperelasticFamily::NeoHookean, records);
    if (family == "mooney_rivlin") return calibrate(HyperelasticFamily::MooneyRivlin, records);
    if (family == "generalized_rivlin") return calibrate(HyperelasticFamily::GeneralizedRivlin, records);
    if (family == "yeoh") return calibrate(HyperelasticFamily::Yeoh, records);
    if (family == "gent") return calibrate(HyperelasticFamily::Gent, records);
    if (family == "gent_gent") return calibrate(HyperelasticFamily::GentGent, records);
    if (family == "pioletti") return calibrate(ViscousFamily::Pioletti, records);
    if (family == "generalized_pioletti") return calibrate(ViscousFamily::GeneralizedPioletti, records);
    if (family == "uss") return calibrate(ViscousFamily::USS, records);
    throw std::invalid_argument("unknown conventional family: " + family);
}

namespace expdetail {

inline bool same_state(const DeformationState& a, const DeformationState& b) {
    return (a.F - b.F).cwiseAbs().maxCoeff() < 1e-12 &&
           (a.Fdot - b.Fdot).cwiseAbs().maxCoeff() < 1e-12;
}

inline std::vector<GridPoint> expand_without_training(const std::vector<GridSpec>& grids,
                                                      const std::vector<GridPoint>& train_pts) {
    std::vector<GridPoint> out;
    for (const auto& g : grids) {
        for (auto& p : expand_grid(g)) {
            bool duplicate = false;
            for (const auto& t : train_pts) {
                if (same_state(p.state, t.state)) {
                    duplicate = true;
                    break;
                }
            }
            if (!duplicate) out.push_back(std::move(p));
        }
    }
    return out;
}

inline std::string dissipation_group(const EvaluatedPoint& p) {
    if (p.mode == Mode::SimpleShear) return "shear";
    return p.rate < 0.0 ? "compression" : "tension";
}

inline std::string region_csv(const std::vector<EvaluatedPoint>& pts) {
    std::string out =
        "mode,value,rate,S11_true,S22_true,S33_true,S23_true,S13_true,S12_true,"
        "S11_pred,S22_pred,S33_pred,S23_pred,S13_pred,S12_pred,err,excluded,"
        "dissipation_pred,dissipation_true\n";
    for (const auto& p : pts) {
        out += to_string(p.mode);
        out += ',' + csvdetail::format_double(p.value) + ',' + csvdetail::format_double(p.rate);
        for (int k = 0; k < 6; ++k) out += ',' + csvdetail::format_double(p.truth[k]);
        for (int k = 0; k < 6; ++k) out += ',' + csvdetail::format_double(p.pred[k]);
        out += ',';
        if (p.err) out += csvdetail::format_double(*p.err);
        out += ',';
        out += p.excluded ? '1' : '0';
        out += ',' + csvdetail::format_double(p.dissipation_pred);
        out += ',' + csvdetail::format_double(p.dissipation_truth);
        out += '\n';
    }
    return out;
}

}  // namespace expdetail

inline ErrorReport run_experiment(const ExperimentSpec& spec) {
    const BranchDataset train_data = generate_dataset(spec);
    const std::vector<GridPoint> train_pts = expand_grid(spec.train);
    const std::vector<GridPoint> same_pts =
        expdetail::expand_without_training(spec.test_same, train_pts);
    const std::vector<GridPoint> cross_pts =
        expdetail::expand_without_training(spec.test_cross, train_pts);

    // Trained models, uniformly wrapped as stress predictors.
    struct Predictor {
        std::string name;
        std::function<SymTensor3(const DeformationState&)> predict;
    };
    std::vector<Predictor> predictors;

    GprOptions opts;
    opts.seed = spec.seed;
    opts.restarts = spec.restarts;

    const StarDataset star = build_star_dataset(train_data);
    std::vector<DeformationState> constraint_states;
    if (spec.id == ExperimentId::Dynamic) {
        for (const auto& r : train_data.records) constraint_states.push_back(r.state);
    }
    const SurrogateModel surrogate =
        train_surrogate(branch_of(spec.id), star, spec.alpha, constraint_states, opts);
    predictors.push_back(
        {"surrogate", [surrogate](const DeformationState& s) { return predict_stress(surrogate, s); }});

    std::optional<ClassicalModel> classical;
    if (spec.classical) {
        classical = train_classical(train_data, spec.id == ExperimentId::Dynamic, spec.alpha, opts);
        const ClassicalModel m = *classical;
        predictors.push_back(
            {"classical", [m](const DeformationState& s) { return predict_stress(m, s); }});
    }

    ErrorReport report;
    report.id = spec.id;
    if (!spec.conventional.empty()) {
        const MaterialModel fitted = calibrate_by_name(spec.conventional, train_data.records);
        report.calibrated = to_json(fitted);
        predictors.push_back(
            {"conventional", [fitted](const DeformationState& s) { return stress(fitted, s); }});
    }

    // Ground truth over every region; the near-zero cutoff spans the whole
    // experiment.
    struct RegionPoints {
        std::string name;
        const std::vector<GridPoint>* pts;
    };
    const std::vector<RegionPoints> regions = {
        {"training", &train_pts}, {"same_mode", &same_pts}, {"cross_mode", &cross_pts}};

    std::map<std::string, std::vector<SymTensor3>> truths;
    double max_truth = 0.0;
    for (const auto& region : regions) {
        auto& t = truths[region.name];
        for (const auto& p : *region.pts) {
            try {
                t.push_back(stress(spec.truth, p.state));
            } catch (const DomainError& e) {
                throw ExperimentError("ground-truth domain violation in " + region.name + " at " +
                                      to_string(p.mode) + " " + std::to_string(p.value) + ": " +
                                      e.what());
            }
            max_truth = std::max(max_truth, t.back().voigt_norm());
        }
        for (const auto& p : *region.pts) report.has_shear_grid |= p.mode == Mode::SimpleShear;
    }
    report.near_zero_threshold = 1e-6 * max_truth;

    for (const auto& predictor : predictors) {
        ModelReport mr;
        mr.name = predictor.name;
        std::vector<double> testing_errs;
        RegionStats testing_stats;
        std::map<std::string, double> diss_min;

        for (const auto& region : regions) {
            std::vector<EvaluatedPoint> pts;
            std::vector<double> errs;
            RegionStats stats;
            const auto& region_truths = truths[region.name];
            for (std::size_t i = 0; i < region.pts->size(); ++i) {
                const GridPoint& gp = (*region.pts)[i];
                EvaluatedPoint ep;
                ep.mode = gp.mode;
                ep.value = gp.value;
                ep.rate = gp.rate;
                ep.truth = region_truths[i];
                ep.pred = predictor.predict(gp.state);
                ep.err = err(ep.pred, ep.truth);
                ep.excluded = !ep.err || ep.truth.voigt_norm() < report.near_zero_threshold;
                if (spec.id == ExperimentId::Dynamic) {
                    ep.dissipation_pred = dissipation(ep.pred, gp.state.Cdot);
                    ep.dissipation_truth = dissipation(ep.truth, gp.state.Cdot);
                    const std::string group = expdetail::dissipation_group(ep);
                    auto it = diss_min.find(group);
                    if (it == diss_min.end()) {
                        diss_min[group] = ep.dissipation_pred;
                    } else {
                        it->second = std::min(it->second, ep.dissipation_pred);
                    }
                }
                if (ep.excluded) {
                    ++stats.excluded;
                } else {
                    errs.push_back(*ep.err);
                    stats.max_err = std::max(stats.max_err, *ep.err);
                    ++stats.count;
                    if (region.name != "training") {
                        testing_errs.push_back(*ep.err);
                        testing_stats.max_err = std::max(testing_stats.max_err, *ep.err);
                        ++testing_stats.count;
                    }
                }
                pts.push_back(std::move(ep));
            }
            if (region.name != "training") {
                testing_stats.excluded += stats.excluded;
            }
            stats.mean_err = mean_err(errs);
            mr.regions[region.name] = stats;
            mr.points[region.name] = std::move(pts);
        }
        testing_stats.mean_err = mean_err(testing_errs);
        mr.regions["testing"] = testing_stats;
        if (spec.id == ExperimentId::Dynamic) mr.dissipation_min = std::move(diss_min);
        report.models.push_back(std::move(mr));
    }

    // The classical baseline's shear 12-component: exactly zero when trained
    // on diagonal-only data.
    if (classical && report.has_shear_grid) {
        double max_s12 = 0.0;
        const ModelReport& cm = report.model("classical");
        for (const auto& [region, pts] : cm.points) {
            for (const auto& p : pts) {
                if (p.mode == Mode::SimpleShear) max_s12 = std::max(max_s12, std::abs(p.pred[5]));
            }
        }
        report.classical_shear12_zero = max_s12 == 0.0;
    }

    if (!spec.outdir.empty()) {
        std::filesystem::create_directories(spec.outdir);
        for (const auto& m : report.models) {
            for (const auto& [region, pts] : m.points) {
                if (pts.empty()) continue;
                csvdetail::atomic_write(spec.outdir + "/" + m.name + "_" + region + ".csv",
                                        expdetail::region_csv(pts));
            }
        }
        csvdetail::atomic_write(spec.outdir + "/summary.json", report.summary().dump(2) + "\n");
    }
    return report;
}

// ---------------------------------------------------------------------------
// Dataset-size sweeps
// ---------------------------------------------------------------------------

struct SweepRow {
    int size = 0;
    /// model name -> (training mean err, testing mean err)
    std::map<std::string, std::pair<std::optional<double>, std::optional<double>>> means;
};

/// Adjusts the training grid of `spec` to the requested record count. The
/// dynamic grid is a rates-by-stretches product; sizes must factor as
/// n_rates in {5, 6, 7} times a stretch count.
inline ExperimentSpec spec_with_size(const ExperimentSpec& spec, int size) {
    ExperimentSpec s = spec;
    if (spec.id != ExperimentId::Dynamic) {
        if (size < 2) throw ExperimentError("training size must be at least 2");
        s.train.count = size;
        return s;
    }
    for (int n_rates : {5, 6, 7}) {
        if (size % n_rates != 0) continue;
        const int n_stretch = size / n_rates;
        if (n_stretch < 2) continue;
        s.train.count = n_stretch;
        s.train.rates.resize(n_rates);
        for (int i = 0; i < n_rates; ++i) {
            s.train.rates[i] = 10.0 + (100.0 - 10.0) * i / (n_rates - 1);
        }
        return s;
    }
    throw ExperimentError("dynamic size " + std::to_string(size) +
                          " does not factor into {5,6,7} rates x stretches");
}

inline std::vector<SweepRow> size_sweep(const ExperimentSpec& spec, std::vector<int> sizes) {
    std::sort(sizes.begin(), sizes.end());
    std::vector<SweepRow> rows;
    for (int size : sizes) {
        ExperimentSpec s = spec_with_size(spec, size);
        s.outdir.clear();  // sweeps report through their own table
        const ErrorReport report = run_experiment(s);
        SweepRow row;
        row.size = size;
        for (const auto& m : report.models) {
            row.means[m.name] = {m.regions.at("training").mean_err,
                                 m.regions.at("testing").mean_err};
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "size,model,train_mean_err,test_mean_err\n";
    for (const auto& row : rows) {
        for (const auto& [name, means] : row.means) {
            out += std::to_string(row.size) + "," + name + ",";
            if (means.first) out += csvdetail::format_double(*means.first);
            out += ",";
            if (means.second) out += csvdetail::format_double(*means.second);
            out += "\n";
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// ExperimentSpec JSON mirror
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const GridSpec& g) {
    return {{"mode", to_string(g.mode)}, {"lo", g.lo}, {"hi", g.hi}, {"count", g.count},
            {"rates", g.rates}};
}

inline GridSpec grid_from_json(const nlohmann::json& j) {
    GridSpec g;
    g.mode = mode_from_string(j.at("mode").get<std::string>());
    g.lo = j.at("lo").get<double>();
    g.hi = j.at("hi").get<double>();
    g.count = j.at("count").get<int>();
    if (j.contains("rates")) g.rates = j.at("rates").get<std::vector<double>>();
    return g;
}

inline nlohmann::json to_json(const ExperimentSpec& s) {
    nlohmann::json grids_same = nlohmann::json::array();
    for (const auto& g : s.test_same) grids_same.push_back(to_json(g));
    nlohmann::json grids_cross = nlohmann::json::array();
    for (const auto& g : s.test_cross) grids_cross.push_back(to_json(g));
    return {{"experiment", to_string(s.id)},
            {"truth", to_json(s.truth)},
            {"train", to_json(s.train)},
            {"test_same", grids_same},
            {"test_cross", grids_cross},
            {"conventional", s.conventional},
            {"classical", s.classical},
            {"alpha", s.alpha},
            {"seed", s.seed},
            {"restarts", s.restarts},
            {"outdir", s.outdir}};
}

/// Builds a spec from JSON: starts from the experiment's packaged defaults and
/// overrides whichever keys are present.
inline ExperimentSpec spec_from_json(const nlohmann::json& j) {
    ExperimentSpec s = default_spec(experiment_from_string(j.at("experiment").get<std::string>()));
    if (j.contains("truth")) s.truth = material_from_json(j.at("truth"));
    if (j.contains("train")) s.train = grid_from_json(j.at("train"));
    if (j.contains("test_same")) {
        s.test_same.clear();
        for (const auto& g : j.at("test_same")) s.test_same.push_back(grid_from_json(g));
    }
    if (j.contains("test_cross")) {
        s.test_cross.clear();
        for (const auto& g : j.at("test_cross")) s.test_cross.push_back(grid_from_json(g));
    }
    if (j.contains("conventional")) s.conventional = j.at("conventional").get<std::string>();
    if (j.contains("classical")) s.classical = j.at("classical").get<bool>();
    if (j.contains("alpha")) s.alpha = j.at("alpha").get<double>();
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("restarts")) s.restarts = j.at("restarts").get<int>();
    if (j.contains("outdir")) s.outdir = j.at("outdir").get<std::string>();
    return s;
}

}  // namespace vhgpr
