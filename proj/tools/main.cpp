// gpsdefense command line: simulate, train, evaluate, sweep, tune-cusum.
//
// Exit codes: 0 success, 1 configuration error, 2 run failure.

#include "gpsdefense/gpsdefense.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace gpsdefense;

namespace {

constexpr int exit_config = 1;
constexpr int exit_run = 2;

struct CommonArgs {
    std::string config;
    std::vector<std::string> overrides;
    std::string out;
    std::string model;
    int workers = -1;
};

ScenarioConfig load_config(const CommonArgs& a) {
    ScenarioConfig cfg = a.config.empty() ? ScenarioConfig{} : load_scenario(a.config);
    for (const auto& kv : a.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects section.key=value, got '" + kv + "'");
        set_option(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!a.model.empty()) cfg.model = a.model;
    if (!a.out.empty()) cfg.output_dir = a.out;
    if (a.workers >= 0) cfg.workers = static_cast<unsigned>(a.workers);
    cfg.validate();
    return cfg;
}

std::shared_ptr<const IsolationForest> forest_for(const ScenarioConfig& cfg, bool required) {
    if (!cfg.model.empty()) {
        std::shared_ptr<const IsolationForest> f;
        try {
            f = std::make_shared<const IsolationForest>(IsolationForest::load(cfg.model));
        } catch (const InvalidInput& e) {
            throw ConfigError(e.what());
        }
        if (f->window() != cfg.window)
            throw ConfigError("model window " + std::to_string(f->window()) + " differs from detector.window");
        return f;
    }
    if (!required) return nullptr;
    std::cerr << "no model given; training one from the scenario's training section\n";
    return std::make_shared<const IsolationForest>(train_forest(cfg));
}

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream out(p);
    if (!out) throw Error("cannot write " + p.string());
    out << s;
}

std::string trip_name(std::size_t index) {
    std::ostringstream s;
    s << "trip_" << std::setw(4) << std::setfill('0') << index;
    return s.str();
}

void write_outputs(const BatchReport& rep, const ScenarioConfig& cfg, const fs::path& dir) {
    fs::create_directories(dir / "epochs");
    const auto json_path = dir / "report.json";
    write_text(json_path, report_json(rep, cfg).dump(2) + "\n");
    std::ostringstream txt;
    write_report_text(txt, rep);
    write_text(dir / "report.txt", txt.str());
    std::cout << txt.str();
    std::cout << "wrote " << json_path.string() << "\n";
    std::cout << "wrote " << (dir / "report.txt").string() << "\n";
    std::size_t csvs = 0;
    for (std::size_t i = 0; i < rep.epoch_logs.size(); ++i) {
        const auto& t = rep.trips[i];
        if (!t.ok) continue;
        std::ofstream out(dir / "epochs" / (trip_name(i) + ".csv"));
        write_epoch_csv(out, rep.epoch_logs[i], *rep.trajectories[t.trajectory]);
        ++csvs;
    }
    std::cout << "wrote " << csvs << " epoch logs under " << (dir / "epochs").string() << "\n";
}

void add_common(CLI::App* cmd, CommonArgs& a, bool need_config = true) {
    auto* opt = cmd->add_option("--config,-c", a.config, "scenario INI file")->check(CLI::ExistingFile);
    if (need_config) opt->required();
    cmd->add_option("--set", a.overrides, "override a config key: section.key=value")->take_all();
    cmd->add_option("--workers", a.workers, "worker threads (0 = all cores)");
}

int run_simulate(const CommonArgs& a, std::size_t trip) {
    ScenarioConfig cfg = load_config(a);
    const auto trajs = evaluation_trajectories(cfg);
    const std::size_t n = trajs.size() * cfg.repetitions;
    if (trip >= n) throw ConfigError("--trip " + std::to_string(trip) + " out of range (" + std::to_string(n) + " trips)");
    const auto forest = forest_for(cfg, cfg.gating == DetectorId::iforest);

    BatchReport rep;
    rep.trajectories = trajs;
    TripReport tr;
    tr.index = trip;
    tr.trajectory = trip / cfg.repetitions;
    tr.repetition = trip % cfg.repetitions;
    tr.seed = substream_seed(cfg.seed, trip);
    const auto in = build_trip(trajs[tr.trajectory], cfg, tr.seed, cfg.attack);
    tr.schedule = in.schedule;
    std::vector<EpochRecord> gated_log;
    for (auto d : all_detectors) {
        if (d == DetectorId::iforest && !forest) continue;
        const auto run = run_pipeline(in, cfg, make_pipeline_config(cfg, d, forest));
        tr.metrics[d] = trip_metrics(run, d);
        tr.rsu_counts[d] = {run.rsu_fixes, run.rsu_rejected};
        if (d == cfg.gating) gated_log = run.log;
    }
    // Report the single trip under its own index.
    rep.trips.push_back(tr);
    for (auto d : all_detectors)
        if (tr.metrics.count(d)) rep.means[d] = aggregate(rep.trips, d);
    const fs::path dir = cfg.output_dir;
    fs::create_directories(dir / "epochs");
    write_text(dir / "report.json", report_json(rep, cfg).dump(2) + "\n");
    std::ostringstream txt;
    write_report_text(txt, rep);
    write_text(dir / "report.txt", txt.str());
    const auto csv = dir / "epochs" / (trip_name(trip) + ".csv");
    std::ofstream out(csv);
    write_epoch_csv(out, gated_log, *trajs[tr.trajectory]);
    std::cout << txt.str();
    std::cout << "wrote " << (dir / "report.json").string() << "\n"
              << "wrote " << (dir / "report.txt").string() << "\n"
              << "wrote " << csv.string() << "\n";
    return 0;
}

int run_train(const CommonArgs& a, const std::string& out) {
    ScenarioConfig cfg = load_config(a);
    const auto t0 = std::chrono::steady_clock::now();
    const IsolationForest f = train_forest(cfg);
    f.save(out);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "trained " << f.trees().size() << " trees (psi " << f.psi() << ", threshold " << f.threshold()
              << ") in " << std::setprecision(3) << secs << " s\n";
    std::cout << "wrote " << out << "\n";
    return 0;
}

int run_evaluate(const CommonArgs& a) {
    ScenarioConfig cfg = load_config(a);
    const auto forest = forest_for(cfg, true);
    BatchOptions opt;
    opt.keep_epoch_logs = true;
    const auto rep = run_batch(cfg, forest, opt);
    write_outputs(rep, cfg, cfg.output_dir);
    return rep.failures == 0 ? 0 : exit_run;
}

int run_sweep_cmd(const CommonArgs& a, const std::string& axis_name, const std::string& values) {
    ScenarioConfig cfg = load_config(a);
    const SweepAxis axis = parse_sweep_axis(axis_name);
    std::vector<double> vals;
    for (const auto& v : detail::split_list(values)) vals.push_back(detail::parse_double("--values", v));
    const auto pts = run_sweep(cfg, axis, vals);
    const fs::path dir = cfg.output_dir;
    fs::create_directories(dir);
    const auto path = dir / "sweep.csv";
    std::ofstream out(path);
    write_sweep_csv(out, axis, pts);
    std::size_t failures = 0;
    for (const auto& p : pts) {
        std::cout << to_string(axis) << " = " << p.value << "\n";
        write_report_text(std::cout, p.report);
        failures += p.report.failures;
    }
    std::cout << "wrote " << path.string() << "\n";
    return failures == 0 ? 0 : exit_run;
}

int run_tune(const CommonArgs& a) {
    ScenarioConfig cfg = load_config(a);
    const auto res = tune_cusum(cfg);
    const fs::path dir = cfg.output_dir;
    fs::create_directories(dir);
    const auto path = dir / "cusum_tuning.csv";
    std::ofstream out(path);
    out << "drift,threshold,f1\n";
    for (const auto& [p, f1] : res.grid) out << p.drift << ',' << p.threshold << ',' << f1 << '\n';
    std::cout << "best drift = " << res.best.drift << ", threshold = " << res.best.threshold
              << " (mean F1 " << std::setprecision(3) << res.best_f1 << ")\n";
    std::cout << "set [detector] cusum_drift = " << res.best.drift
              << " and cusum_threshold = " << res.best.threshold << " to use it\n";
    std::cout << "wrote " << path.string() << "\n";
    return 0;
}

int run_generate(std::size_t count, std::uint64_t seed, const std::string& out) {
    fs::create_directories(out);
    const auto trajs = generate_trajectory_set(count, seed);
    for (std::size_t i = 0; i < trajs.size(); ++i) {
        const auto p = fs::path(out) / (trip_name(i) + ".csv");
        std::ofstream f(p);
        write_trajectory(f, trajs[i]);
    }
    std::cout << "wrote " << trajs.size() << " trajectories under " << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RSU-assisted GPS spoofing detection and correction simulator"};
    app.require_subcommand(1);

    CommonArgs common;
    std::size_t trip = 0;
    std::string model_out, axis, values, gen_out = "trajectories";
    std::size_t gen_count = 20;
    std::uint64_t gen_seed = 7;

    auto* sim = app.add_subcommand("simulate", "replay one trip with every detector");
    add_common(sim, common);
    sim->add_option("--trip", trip, "trip index (trajectory * repetitions + repetition)");
    sim->add_option("--model", common.model, "forest model file");
    sim->add_option("--out", common.out, "output directory");

    auto* train = app.add_subcommand("train", "train the isolation forest on attack-free runs");
    add_common(train, common);
    train->add_option("--out", model_out, "model file to write")->required();

    auto* eval = app.add_subcommand("evaluate", "run the batch and write reports");
    add_common(eval, common);
    eval->add_option("--model", common.model, "forest model file (trained on the fly if omitted)");
    eval->add_option("--out", common.out, "output directory");

    auto* sweep = app.add_subcommand("sweep", "re-run the batch over one parameter");
    add_common(sweep, common);
    sweep->add_option("--axis", axis, "D_RSU, alpha or sigma_rsu")->required();
    sweep->add_option("--values", values, "comma-separated values")->required();
    sweep->add_option("--out", common.out, "output directory");

    auto* tune = app.add_subcommand("tune-cusum", "grid-search CUSUM drift and threshold");
    add_common(tune, common);
    tune->add_option("--out", common.out, "output directory");

    auto* gen = app.add_subcommand("gen-trajectories", "write synthetic trajectory CSVs");
    gen->add_option("--count", gen_count, "number of trajectories");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--out", gen_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_config;
    }

    try {
        if (*sim) return run_simulate(common, trip);
        if (*train) return run_train(common, model_out);
        if (*eval) return run_evaluate(common);
        if (*sweep) return run_sweep_cmd(common, axis, values);
        if (*tune) return run_tune(common);
        if (*gen) return run_generate(gen_count, gen_seed, gen_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_run;
    }
    return 0;
}
