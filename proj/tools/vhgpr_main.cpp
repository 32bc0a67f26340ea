// Command-line front end: dataset generation, model training, prediction,
// evaluation, dataset-size sweeps, and the three packaged experiments.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "vhgpr/dataset_csv.hpp"
#include "vhgpr/experiment.hpp"
#include "vhgpr/surrogate.hpp"

namespace {

using namespace vhgpr;

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ExperimentError("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

ExperimentSpec spec_from_cli(const std::string& experiment, const std::string& config_path,
                             std::optional<std::uint64_t> seed) {
    ExperimentSpec spec;
    if (!config_path.empty()) {
        nlohmann::json j = load_json(config_path);
        if (!j.contains("experiment") && !experiment.empty()) j["experiment"] = experiment;
        spec = spec_from_json(j);
    } else {
        spec = default_spec(experiment_from_string(experiment));
    }
    if (seed) spec.seed = *seed;
    if (const char* env = std::getenv("VHGPR_OUTDIR"); env && *env) spec.outdir = env;
    return spec;
}

// Either flavor of serialized model behind one prediction interface.
struct LoadedModel {
    std::optional<SurrogateModel> surrogate;
    std::optional<ClassicalModel> classical;

    SymTensor3 predict(const DeformationState& s) const {
        return surrogate ? predict_stress(*surrogate, s) : predict_stress(*classical, s);
    }
};

LoadedModel load_model(const std::string& path) {
    const nlohmann::json j = load_json(path);
    LoadedModel m;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "surrogate") {
        m.surrogate = surrogate_from_json(j);
    } else if (kind == "classical") {
        m.classical = classical_from_json(j);
    } else {
        throw ExperimentError("unknown model kind: " + kind);
    }
    return m;
}

int cmd_generate(const std::string& experiment, const std::string& config,
                 std::optional<std::uint64_t> seed, std::string out) {
    const ExperimentSpec spec = spec_from_cli(experiment, config, seed);
    if (out.empty()) out = to_string(spec.id) + "_train.csv";
    const BranchDataset data = generate_dataset(spec);
    write_dataset_csv(out, data.records);
    std::cout << "wrote " << data.records.size() << " records (" << to_string(data.branch)
              << " branch) to " << out << "\n";
    return 0;
}

int cmd_train(const std::string& data_path, const std::string& branch_name, bool rate_dependent_flag,
              bool quasi_static_flag, bool unconstrained, double alpha, std::uint64_t seed,
              std::string out) {
    const auto records = read_dataset_csv(data_path);
    if (out.empty()) out = branch_name + "_model.json";

    GprOptions opts;
    opts.seed = seed;

    nlohmann::json payload;
    if (branch_name == "classical") {
        bool rate_dependent = rate_dependent_flag;
        if (!rate_dependent_flag && !quasi_static_flag) {
            for (const auto& r : records) {
                rate_dependent |= r.state.Fdot.cwiseAbs().maxCoeff() > 0.0;
            }
        }
        BranchDataset data{Branch::HIso, records};
        const ClassicalModel model = train_classical(data, rate_dependent, alpha, opts);
        payload = to_json(model);
        std::cout << "classical model (" << (rate_dependent ? "rate-dependent" : "quasi-static")
                  << "), lml " << model.gp.lml << "\n";
    } else {
        const Branch branch = branch_from_string(branch_name);
        BranchDataset data{branch, records};
        const StarDataset star = build_star_dataset(data);
        std::vector<DeformationState> constraints;
        if (branch == Branch::VIso && !unconstrained) {
            for (const auto& r : records) constraints.push_back(r.state);
        }
        const SurrogateModel model = train_surrogate(branch, star, alpha, constraints, opts);
        payload = to_json(model);
        std::cout << to_string(branch) << " surrogate"
                  << (model.constrained ? " (constrained, " + std::to_string(model.constraint_count) +
                                              " points)"
                                        : "")
                  << ", lml " << model.gp.lml << "\n";
    }
    csvdetail::atomic_write(out, payload.dump(2) + "\n");
    std::cout << "wrote " << out << "\n";
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& states_path, std::string out) {
    const LoadedModel model = load_model(model_path);
    const auto states = read_dataset_csv(states_path, /*require_stress=*/false);
    if (out.empty()) out = "predicted_stress.csv";

    std::string csv = "S11,S22,S33,S23,S13,S12\n";
    for (const auto& r : states) {
        const SymTensor3 s = model.predict(r.state);
        for (int k = 0; k < 6; ++k) {
            csv += csvdetail::format_double(s[k]);
            csv += k < 5 ? ',' : '\n';
        }
    }
    csvdetail::atomic_write(out, csv);
    std::cout << "wrote " << states.size() << " predictions to " << out << "\n";
    return 0;
}

int cmd_evaluate(const std::string& model_path, const std::string& truth_path, std::string out) {
    const LoadedModel model = load_model(model_path);
    const auto records = read_dataset_csv(truth_path);

    double max_truth = 0.0;
    for (const auto& r : records) max_truth = std::max(max_truth, r.stress.voigt_norm());
    const double near_zero = 1e-6 * max_truth;

    std::vector<double> errs;
    int excluded = 0;
    double max_err = 0.0;
    std::optional<double> min_dissipation;
    nlohmann::json points = nlohmann::json::array();
    for (const auto& r : records) {
        const SymTensor3 pred = model.predict(r.state);
        const auto e = err(pred, r.stress);
        const bool exclude = !e || r.stress.voigt_norm() < near_zero;
        nlohmann::json p = {{"excluded", exclude}};
        if (e) p["err"] = *e;
        if (r.state.Fdot.cwiseAbs().maxCoeff() > 0.0) {
            const double xi = dissipation(pred, r.state.Cdot);
            p["dissipation"] = xi;
            min_dissipation = min_dissipation ? std::min(*min_dissipation, xi) : xi;
        }
        if (exclude) {
            ++excluded;
        } else {
            errs.push_back(*e);
            max_err = std::max(max_err, *e);
        }
        points.push_back(std::move(p));
    }

    nlohmann::json report = {{"count", static_cast<int>(errs.size())},
                             {"excluded", excluded},
                             {"max_err", max_err},
                             {"points", std::move(points)}};
    if (const auto m = mean_err(errs)) report["mean_err"] = *m;
    if (min_dissipation) report["min_dissipation"] = *min_dissipation;

    if (!out.empty()) csvdetail::atomic_write(out, report.dump(2) + "\n");
    nlohmann::json summary = report;
    summary.erase("points");
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int cmd_sweep(const std::string& experiment, const std::string& config, const std::string& sizes_arg,
              std::optional<std::uint64_t> seed, std::string out) {
    ExperimentSpec spec = spec_from_cli(experiment, config, seed);
    spec.outdir.clear();

    std::vector<int> sizes;
    if (!sizes_arg.empty()) {
        std::istringstream in(sizes_arg);
        std::string tok;
        while (std::getline(in, tok, ',')) sizes.push_back(std::stoi(tok));
    } else if (spec.id == ExperimentId::Dynamic) {
        sizes = {155, 186, 217, 305, 366, 427, 455, 546, 637};
    } else {
        sizes = {26, 51, 101, 201};
    }

    const auto rows = size_sweep(spec, sizes);
    const std::string csv = sweep_csv(rows);
    if (out.empty()) out = to_string(spec.id) + "_sweep.csv";
    csvdetail::atomic_write(out, csv);
    std::cout << csv << "wrote " << out << "\n";
    return 0;
}

int cmd_reproduce(const std::string& section, std::string outdir,
                  std::optional<std::uint64_t> seed) {
    ExperimentId id;
    if (section == "5.1") {
        id = ExperimentId::Hydrostatic;
    } else if (section == "5.2") {
        id = ExperimentId::Quasistatic;
    } else if (section == "5.3") {
        id = ExperimentId::Dynamic;
    } else {
        throw ExperimentError("unknown experiment section: " + section + " (use 5.1, 5.2, or 5.3)");
    }
    ExperimentSpec spec = default_spec(id);
    if (seed) spec.seed = *seed;
    if (outdir.empty()) {
        if (const char* env = std::getenv("VHGPR_OUTDIR"); env && *env) outdir = env;
    }
    spec.outdir = outdir.empty() ? "reproduce_" + section : outdir;

    const ErrorReport report = run_experiment(spec);
    std::cout << report.summary().dump(2) << "\n";
    std::cout << "report written to " << spec.outdir << "/\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Physics-informed Gaussian-process surrogate models for visco-hyperelastic materials"};
    app.require_subcommand(1);

    std::string experiment = "hydrostatic", config, out, data_path, branch = "vol";
    std::string model_path, states_path, truth_path, sizes, section, outdir;
    double alpha = 1e-4;
    std::uint64_t seed_value = 0;
    bool seed_given = false, rate_dependent = false, quasi_static = false, unconstrained = false;

    auto add_seed = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed_value, "restart-schedule seed")
            ->each([&](const std::string&) { seed_given = true; });
    };
    auto seed_opt = [&]() -> std::optional<std::uint64_t> {
        return seed_given ? std::optional<std::uint64_t>(seed_value) : std::nullopt;
    };

    auto* generate = app.add_subcommand("generate", "generate a training dataset CSV");
    generate->add_option("--experiment", experiment, "hydrostatic | quasistatic | dynamic");
    generate->add_option("--config", config, "experiment spec JSON (overrides defaults)");
    generate->add_option("--out", out, "output CSV path");
    add_seed(generate);

    auto* train = app.add_subcommand("train", "train a model from a dataset CSV");
    train->add_option("--data", data_path, "dataset CSV")->required();
    train->add_option("--branch", branch, "vol | h_iso | v_iso | classical")->required();
    train->add_flag("--rate-dependent", rate_dependent, "classical: include vec(Cdot) inputs");
    train->add_flag("--quasi-static", quasi_static, "classical: strain-only inputs");
    train->add_flag("--unconstrained", unconstrained, "v_iso: skip the dissipation constraints");
    train->add_option("--alpha", alpha, "kernel noise (default 1e-4)");
    train->add_option("--out", out, "output model JSON path");
    add_seed(train);

    auto* predict = app.add_subcommand("predict", "predict stresses for states in a CSV");
    predict->add_option("--model", model_path, "model JSON")->required();
    predict->add_option("--states", states_path, "state CSV (stress columns optional)")->required();
    predict->add_option("--out", out, "output stress CSV path");

    auto* evaluate = app.add_subcommand("evaluate", "error report of a model against a truth CSV");
    evaluate->add_option("--model", model_path, "model JSON")->required();
    evaluate->add_option("--truth", truth_path, "dataset CSV with ground-truth stresses")->required();
    evaluate->add_option("--out", out, "report JSON path");

    auto* sweep = app.add_subcommand("sweep", "training-set size sweep");
    sweep->add_option("--experiment", experiment, "hydrostatic | quasistatic | dynamic");
    sweep->add_option("--config", config, "experiment spec JSON");
    sweep->add_option("--sizes", sizes, "comma-separated sizes (default: standard ladder)");
    sweep->add_option("--out", out, "output CSV path");
    add_seed(sweep);

    auto* reproduce = app.add_subcommand("reproduce", "run a packaged experiment with its default protocol");
    reproduce->add_option("section", section, "5.1 | 5.2 | 5.3")->required();
    reproduce->add_option("--outdir", outdir, "report directory");
    add_seed(reproduce);

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed()) return cmd_generate(experiment, config, seed_opt(), out);
        if (train->parsed())
            return cmd_train(data_path, branch, rate_dependent, quasi_static, unconstrained, alpha,
                             seed_given ? seed_value : 0, out);
        if (predict->parsed()) return cmd_predict(model_path, states_path, out);
        if (evaluate->parsed()) return cmd_evaluate(model_path, truth_path, out);
        if (sweep->parsed()) return cmd_sweep(experiment, config, sizes, seed_opt(), out);
        if (reproduce->parsed()) return cmd_reproduce(section, outdir, seed_opt());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
