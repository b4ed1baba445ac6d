// Trip replay, forest training, batch evaluation, sensitivity sweeps and
// CUSUM tuning.
//
// A trip is one trajectory with one seed. Its sensor streams, attack and
// RSU ranges are synthesized once; the pipeline is then replayed once per
// gating detector on identical inputs so detectors are compared on the same
// noise realization.
#pragma once

#include "gpsdefense/attack.hpp"
#include "gpsdefense/detectors.hpp"
#include "gpsdefense/iforest.hpp"
#include "gpsdefense/metrics.hpp"
#include "gpsdefense/pipeline.hpp"
#include "gpsdefense/rsu.hpp"
#include "gpsdefense/scenario.hpp"
#include "gpsdefense/sensor_sim.hpp"
#include "gpsdefense/trajectory_gen.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace gpsdefense {

inline constexpr std::array<DetectorId, 3> all_detectors{DetectorId::iforest, DetectorId::chi2,
                                                         DetectorId::cusum};

// ---------------------------------------------------------------------------
// Trip inputs

struct TripInputs {
    std::shared_ptr<const Trajectory> traj;
    std::uint64_t seed = 0;
    std::vector<ImuSample> imu;
    std::vector<GpsFix> gps;          // after the attack was applied
    AttackSchedule schedule;
    std::vector<RsuSite> sites;
    std::vector<std::optional<RangeSample>> ranges;  // one slot per trajectory step
};

inline std::vector<RsuSite> layout_sites(const Trajectory& traj, const ScenarioConfig& cfg) {
    if (cfg.rsu_sites.empty())
        return place_rsus(traj, cfg.rsu_spacing, cfg.rsu_radius, cfg.lateral_offset,
                          cfg.broadcast_rate);
    std::vector<RsuSite> sites;
    for (const auto& p : cfg.rsu_sites) {
        RsuSite s;
        s.id = static_cast<int>(sites.size());
        s.coord = p;
        s.service_radius = cfg.rsu_radius;
        s.broadcast_rate = cfg.broadcast_rate;
        sites.push_back(s);
    }
    return sites;
}

inline std::size_t broadcast_stride(const ScenarioConfig& cfg) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(1.0 / (cfg.broadcast_rate * cfg.dt))));
}

inline TripInputs build_trip(std::shared_ptr<const Trajectory> traj, const ScenarioConfig& cfg,
                             std::uint64_t seed, AttackKind attack) {
    TripInputs in;
    in.traj = std::move(traj);
    in.seed = seed;
    const Trajectory& tr = *in.traj;
    if (std::abs(tr.dt - cfg.dt) > 1e-12) throw InvalidInput("trajectory dt differs from scenario dt");

    SensorNoiseConfig noise = cfg.sensors;
    noise.seed = seed;
    in.imu = synthesize_imu(tr, noise);
    in.gps = synthesize_gps(tr, noise);

    if (attack != AttackKind::none) {
        AttackSchedule s;
        if (cfg.random_schedule) {
            Rng rng(seed, Stream::attack);
            s = random_schedule(rng, attack, tr.duration(), cfg.attack_params);
        } else {
            s.kind = attack;
            s.t_start = cfg.t_start;
            s.t_end = cfg.t_end;
            s.m = cfg.attack_params.m;
            s.n = cfg.attack_params.n;
        }
        in.schedule = orient_schedule(s, tr, cfg.attack_params);
        Attacker attacker(in.schedule);
        for (auto& f : in.gps) f = attacker.apply(f);
    }

    in.sites = layout_sites(tr, cfg);
    in.ranges.assign(tr.size(), std::nullopt);
    Rng rng(seed, Stream::rsu);
    const std::size_t stride = broadcast_stride(cfg);
    for (std::size_t k = 0; k < tr.size(); k += stride) {
        const Vec2 p = tr.samples[k].state.position();
        const RsuSite* best = nullptr;
        double best_d = 0.0;
        for (const auto& s : in.sites) {
            const double d = (p - s.coord).norm();
            if (d <= s.service_radius && (!best || d < best_d)) {
                best = &s;
                best_d = d;
            }
        }
        if (best) in.ranges[k] = sample_range(p, *best, cfg.rsu_sigma, rng, tr.samples[k].t);
    }
    return in;
}

// ---------------------------------------------------------------------------
// Pipeline replay

struct TripRun {
    DetectorId gating = DetectorId::none;
    std::vector<EpochRecord> log;
    std::vector<TrackPoint> track;
    double rmse = 0.0;
    std::size_t rsu_fixes = 0;
    std::size_t rsu_rejected = 0;
};

using StepObserver =
    std::function<void(const Pipeline&, const Event&, const Estimate& before, bool isolated_before)>;

inline PipelineConfig make_pipeline_config(const ScenarioConfig& cfg, DetectorId gating,
                                           std::shared_ptr<const IsolationForest> forest) {
    PipelineConfig p;
    p.ekf = cfg.ekf_config();
    p.anchor = cfg.anchor;
    p.anchor_variance = cfg.anchor_variance;
    p.gating = gating;
    // Baselines isolate GPS on alarm but have no infrastructure to correct with.
    p.rsu_correction = gating == DetectorId::iforest || gating == DetectorId::none;
    p.reinstate_after = cfg.reinstate_after;
    p.chi2_confidence = cfg.chi2_confidence;
    p.cusum = cfg.cusum;
    p.forest = std::move(forest);
    p.window = cfg.window;
    p.latency_compensation = cfg.latency_compensation;
    return p;
}

inline TripRun run_pipeline(const TripInputs& in, const ScenarioConfig& cfg, const PipelineConfig& pcfg,
                            const StepObserver& observer = {}) {
    const Trajectory& tr = *in.traj;
    Estimate init{tr.samples.front().state, initial_covariance()};
    Pipeline pipe(pcfg, init, tr.start_time());
    LatencyChannel channel(cfg.latency_ms / 1000.0);
    TripRun run;
    run.gating = pcfg.gating;

    auto apply = [&](const Event& ev) {
        if (observer) {
            const Estimate before = pipe.estimate();
            const bool iso = pipe.gps_isolated();
            pipe.step(ev);
            observer(pipe, ev, before, iso);
        } else {
            pipe.step(ev);
        }
    };

    const std::size_t per_second = steps_per_second(cfg.dt);
    const std::size_t stride = broadcast_stride(cfg);
    LocalizeConfig lcfg;
    lcfg.sigma = cfg.rsu_sigma;
    lcfg.dt = cfg.dt;
    lcfg.latency = cfg.latency_ms / 1000.0;

    std::size_t gps_idx = 0;
    for (std::size_t k = 0; k < tr.size(); ++k) {
        const double t = tr.samples[k].t;
        for (const auto& fix : channel.deliver(t)) apply(fix);

        if (gps_idx < in.gps.size() && std::abs(in.gps[gps_idx].t - t) <= 1e-6) apply(in.gps[gps_idx++]);

        // Vehicle-side RSU localization once per GPS period, from the last o + 1 broadcasts.
        if (k > 0 && k % per_second == 0 && in.ranges[k]) {
            const int site_id = in.ranges[k]->rsu_id;
            std::vector<RangeSample> seq;
            const std::size_t span = cfg.sequence_length * stride;
            const std::size_t first = k >= span ? k - span : 0;
            for (std::size_t j = first; j <= k; j += stride)
                if (in.ranges[j] && in.ranges[j]->rsu_id == site_id) seq.push_back(*in.ranges[j]);
            const auto prior = seq.empty() ? std::nullopt : pipe.state_at(seq.front().t);
            if (seq.size() >= 3 && prior) {
                const auto j0 = static_cast<std::size_t>(std::llround((seq.front().t - tr.start_time()) / cfg.dt));
                const auto site = std::find_if(in.sites.begin(), in.sites.end(),
                                               [&](const RsuSite& s) { return s.id == site_id; });
                try {
                    const RsuFix fix = localize(seq, *site, std::span(in.imu).subspan(j0, k - j0), *prior, lcfg);
                    const double worst = std::sqrt(Eigen::SelfAdjointEigenSolver<Mat2>(fix.cov).eigenvalues().maxCoeff());
                    if (cfg.max_fix_std > 0.0 && !(worst <= cfg.max_fix_std)) {
                        ++run.rsu_rejected;
                    } else {
                        channel.send(fix);
                        ++run.rsu_fixes;
                    }
                } catch (const LocalizationError&) {
                    ++run.rsu_rejected;
                }
            }
        }

        if (k + 1 < tr.size()) apply(in.imu[k]);
        else pipe.finish();
    }

    run.log = pipe.epoch_log();
    run.track = pipe.track();
    std::vector<Vec2> est, truth;
    est.reserve(run.track.size());
    truth.reserve(tr.size());
    for (const auto& p : run.track) est.push_back(p.estimate);
    for (const auto& s : tr.samples) truth.push_back(s.state.position());
    run.rmse = compute_rmse(est, truth);
    return run;
}

inline TripMetrics trip_metrics(const TripRun& run, DetectorId detector) {
    return make_metrics(compute_confusion(run.log, detector), run.rmse);
}

// ---------------------------------------------------------------------------
// Trajectory sets

inline std::vector<std::shared_ptr<const Trajectory>> evaluation_trajectories(const ScenarioConfig& cfg) {
    std::vector<std::shared_ptr<const Trajectory>> out;
    if (!cfg.trajectories.empty()) {
        for (const auto& p : cfg.trajectories)
            out.push_back(std::make_shared<const Trajectory>(load_trajectory(p, cfg.dt)));
    } else {
        TrajectoryGenConfig g;
        g.dt = cfg.dt;
        for (auto& t : generate_trajectory_set(cfg.synthetic_trips, cfg.trajectory_seed, g))
            out.push_back(std::make_shared<const Trajectory>(std::move(t)));
    }
    return out;
}

/// Attack-free trajectories for training: fresh synthetic ones, or the
/// scenario's files replayed with training seeds.
inline std::vector<std::shared_ptr<const Trajectory>> training_trajectories(const ScenarioConfig& cfg) {
    if (!cfg.trajectories.empty()) return evaluation_trajectories(cfg);
    TrajectoryGenConfig g;
    g.dt = cfg.dt;
    std::vector<std::shared_ptr<const Trajectory>> out;
    for (auto& t : generate_trajectory_set(cfg.training_trips, cfg.training_seed, g))
        out.push_back(std::make_shared<const Trajectory>(std::move(t)));
    return out;
}

// ---------------------------------------------------------------------------
// Parallel map with deterministic result placement

template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
}

// ---------------------------------------------------------------------------
// Training

/// Flattened feature windows from attack-free runs, one row per GPS epoch.
inline std::vector<double> collect_training_windows(const ScenarioConfig& cfg) {
    const auto trajs = training_trajectories(cfg);
    const std::size_t n = trajs.size() * cfg.training_repetitions;
    std::vector<std::vector<double>> rows(n);
    parallel_for(n, cfg.workers, [&](std::size_t i) {
        const auto& traj = trajs[i / cfg.training_repetitions];
        const auto in = build_trip(traj, cfg, substream_seed(cfg.training_seed, i), AttackKind::none);
        const auto run = run_pipeline(in, cfg, make_pipeline_config(cfg, DetectorId::none, nullptr));
        FeatureWindow w(cfg.window);
        for (const auto& rec : run.log) {
            w.push(rec.features);
            const auto flat = w.flatten();
            rows[i].insert(rows[i].end(), flat.begin(), flat.end());
        }
    });
    std::vector<double> out;
    for (const auto& r : rows) out.insert(out.end(), r.begin(), r.end());
    return out;
}

inline IsolationForest train_forest(const ScenarioConfig& cfg) {
    const auto data = collect_training_windows(cfg);
    ForestParams fp;
    fp.trees = cfg.trees;
    fp.max_samples = cfg.max_samples;
    fp.contamination = cfg.alpha;
    fp.window = cfg.window;
    fp.seed = cfg.training_seed;
    fp.workers = cfg.workers;
    return IsolationForest::train(data, 3 * cfg.window, fp);
}

// ---------------------------------------------------------------------------
// Batch evaluation

struct TripReport {
    std::size_t index = 0;
    std::size_t trajectory = 0;
    std::size_t repetition = 0;
    std::uint64_t seed = 0;
    AttackSchedule schedule;
    std::map<DetectorId, TripMetrics> metrics;
    std::map<DetectorId, std::pair<std::size_t, std::size_t>> rsu_counts;  // fixes, rejected
    bool ok = true;
    std::string error;
};

struct MeanMetrics {
    double f1 = 0.0, precision = 0.0, recall = 0.0, latency = 0.0, rmse = 0.0;
    std::size_t trips = 0;
};

struct BatchReport {
    std::vector<TripReport> trips;
    std::map<DetectorId, MeanMetrics> means;
    std::size_t failures = 0;
    // Epoch logs of the configured gating detector's run, kept on request.
    std::vector<std::vector<EpochRecord>> epoch_logs;
    std::vector<std::shared_ptr<const Trajectory>> trajectories;
};

struct BatchOptions {
    bool keep_epoch_logs = false;
    std::vector<DetectorId> detectors{all_detectors.begin(), all_detectors.end()};
    StepObserver observer;  // must be thread-safe when workers > 1
};

inline MeanMetrics aggregate(const std::vector<TripReport>& trips, DetectorId d) {
    MeanMetrics m;
    std::size_t with_attack = 0;
    for (const auto& t : trips) {
        if (!t.ok) continue;
        const auto it = t.metrics.find(d);
        if (it == t.metrics.end()) continue;
        const auto& tm = it->second;
        ++m.trips;
        m.f1 += tm.f1;
        m.precision += tm.precision;
        m.recall += tm.recall;
        m.rmse += tm.rmse;
        if (tm.confusion.spoofed > 0) {
            m.latency += tm.latency;
            ++with_attack;
        }
    }
    if (m.trips > 0) {
        const auto n = static_cast<double>(m.trips);
        m.f1 /= n;
        m.precision /= n;
        m.recall /= n;
        m.rmse /= n;
    }
    if (with_attack > 0) m.latency /= static_cast<double>(with_attack);
    return m;
}

inline BatchReport run_batch(const ScenarioConfig& cfg, std::shared_ptr<const IsolationForest> forest,
                             const BatchOptions& opt = {}) {
    BatchReport rep;
    rep.trajectories = evaluation_trajectories(cfg);
    const std::size_t n = rep.trajectories.size() * cfg.repetitions;
    rep.trips.resize(n);
    if (opt.keep_epoch_logs) rep.epoch_logs.resize(n);

    std::vector<DetectorId> detectors;
    for (auto d : opt.detectors)
        if (d != DetectorId::iforest || forest) detectors.push_back(d);
    if (detectors.empty()) throw ConfigError("run_batch: no detector to evaluate");

    parallel_for(n, cfg.workers, [&](std::size_t i) {
        TripReport& tr = rep.trips[i];
        tr.index = i;
        tr.trajectory = i / cfg.repetitions;
        tr.repetition = i % cfg.repetitions;
        tr.seed = substream_seed(cfg.seed, i);
        try {
            const auto in = build_trip(rep.trajectories[tr.trajectory], cfg, tr.seed, cfg.attack);
            tr.schedule = in.schedule;
            for (auto d : detectors) {
                const auto run = run_pipeline(in, cfg, make_pipeline_config(cfg, d, forest), opt.observer);
                tr.metrics[d] = trip_metrics(run, d);
                tr.rsu_counts[d] = {run.rsu_fixes, run.rsu_rejected};
                if (opt.keep_epoch_logs && d == cfg.gating) rep.epoch_logs[i] = run.log;
            }
        } catch (const std::exception& e) {
            tr.ok = false;
            tr.error = e.what();
        }
    });
    for (const auto& t : rep.trips) rep.failures += t.ok ? 0 : 1;
    for (auto d : detectors) rep.means[d] = aggregate(rep.trips, d);
    return rep;
}

// ---------------------------------------------------------------------------
// Reports

namespace detail {
inline nlohmann::json metrics_json(const TripMetrics& m) {
    return {{"f1", m.f1},          {"precision", m.precision}, {"recall", m.recall},
            {"latency", m.latency}, {"rmse", m.rmse},           {"tp", m.confusion.tp},
            {"fp", m.confusion.fp}, {"fn", m.confusion.fn},     {"tn", m.confusion.tn}};
}
inline nlohmann::json mean_json(const MeanMetrics& m) {
    return {{"f1", m.f1},           {"precision", m.precision}, {"recall", m.recall},
            {"latency", m.latency}, {"rmse", m.rmse},           {"trips", m.trips}};
}
}  // namespace detail

inline nlohmann::json schedule_json(const AttackSchedule& s) {
    return {{"kind", to_string(s.kind)}, {"t_start", s.t_start}, {"t_end", s.t_end},
            {"bias", {s.bias.x(), s.bias.y()}}, {"m", s.m}, {"n", s.n},
            {"direction", {s.direction.x(), s.direction.y()}}};
}

inline nlohmann::json report_json(const BatchReport& rep, const ScenarioConfig& cfg) {
    nlohmann::json j;
    j["config"] = to_json(cfg);
    for (const auto& [d, m] : rep.means) j["means"][std::string(to_string(d))] = detail::mean_json(m);
    j["failures"] = rep.failures;
    auto& trips = j["trips"] = nlohmann::json::array();
    for (const auto& t : rep.trips) {
        nlohmann::json tj{{"trip", t.index}, {"trajectory", t.trajectory}, {"repetition", t.repetition},
                          {"seed", t.seed}, {"ok", t.ok}};
        if (!t.ok) tj["error"] = t.error;
        tj["schedule"] = schedule_json(t.schedule);
        for (const auto& [d, m] : t.metrics) {
            auto mj = detail::metrics_json(m);
            const auto rc = t.rsu_counts.find(d);
            if (rc != t.rsu_counts.end()) {
                mj["rsu_fixes"] = rc->second.first;
                mj["rsu_rejected"] = rc->second.second;
            }
            tj["metrics"][std::string(to_string(d))] = std::move(mj);
        }
        trips.push_back(std::move(tj));
    }
    return j;
}

inline void write_report_text(std::ostream& out, const BatchReport& rep) {
    out << std::left << std::setw(10) << "detector" << std::right << std::setw(8) << "F1"
        << std::setw(11) << "precision" << std::setw(8) << "recall" << std::setw(9) << "latency"
        << std::setw(9) << "RMSE" << std::setw(7) << "trips" << '\n';
    out << std::fixed;
    for (const auto& [d, m] : rep.means)
        out << std::left << std::setw(10) << to_string(d) << std::right << std::setprecision(3)
            << std::setw(8) << m.f1 << std::setw(11) << m.precision << std::setw(8) << m.recall
            << std::setprecision(2) << std::setw(9) << m.latency << std::setw(9) << m.rmse
            << std::setw(7) << m.trips << '\n';
    out.unsetf(std::ios::fixed);
    if (rep.failures > 0) {
        out << rep.failures << " trip(s) failed:\n";
        for (const auto& t : rep.trips)
            if (!t.ok) out << "  trip " << t.index << ": " << t.error << '\n';
    }
}

/// Per-epoch CSV; truth columns come from the trajectory sample at each fix time.
inline void write_epoch_csv(std::ostream& out, const std::vector<EpochRecord>& log, const Trajectory& traj) {
    out << "t,nees,r_rsu,s_rsu,verdict_iforest,verdict_chi2,verdict_cusum,est_x,est_y,true_x,true_y,spoofed,isolated\n";
    out << std::setprecision(10);
    for (const auto& r : log) {
        const auto k = static_cast<std::size_t>(std::llround((r.t - traj.start_time()) / traj.dt));
        const auto& truth = traj.samples[std::min(k, traj.size() - 1)].state;
        out << r.t << ',' << r.features.nees << ',' << r.features.r_rsu << ',' << r.features.s_rsu << ','
            << r.iforest.delta << ',' << r.chi2.delta << ',' << r.cusum.delta << ',' << r.estimate.x()
            << ',' << r.estimate.y() << ',' << truth.px << ',' << truth.py << ',' << (r.spoofed ? 1 : 0)
            << ',' << (r.isolated ? 1 : 0) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Sweeps

enum class SweepAxis { rsu_spacing, alpha, sigma_rsu };

inline SweepAxis parse_sweep_axis(std::string_view s) {
    if (s == "D_RSU" || s == "rsu_spacing" || s == "spacing") return SweepAxis::rsu_spacing;
    if (s == "alpha") return SweepAxis::alpha;
    if (s == "sigma_rsu" || s == "sigma_RSU") return SweepAxis::sigma_rsu;
    throw ConfigError("unknown sweep axis '" + std::string(s) + "'");
}

inline std::string_view to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::rsu_spacing: return "D_RSU";
        case SweepAxis::alpha: return "alpha";
        case SweepAxis::sigma_rsu: return "sigma_rsu";
    }
    return "";
}

inline ScenarioConfig with_axis(ScenarioConfig cfg, SweepAxis axis, double value) {
    switch (axis) {
        case SweepAxis::rsu_spacing: cfg.rsu_spacing = value; break;
        case SweepAxis::alpha: cfg.alpha = value; break;
        case SweepAxis::sigma_rsu: cfg.rsu_sigma = value; break;
    }
    cfg.validate();
    return cfg;
}

struct SweepPoint {
    double value = 0.0;
    BatchReport report;
};

/// One batch per value with shared seeds. The forest is retrained for each
/// value because every axis changes either the features or the cutoff.
inline std::vector<SweepPoint> run_sweep(const ScenarioConfig& cfg, SweepAxis axis,
                                         const std::vector<double>& values, const BatchOptions& opt = {}) {
    if (values.empty()) throw ConfigError("sweep: no values");
    std::vector<SweepPoint> out;
    for (double v : values) {
        const ScenarioConfig c = with_axis(cfg, axis, v);
        const bool need_forest = std::find(opt.detectors.begin(), opt.detectors.end(),
                                           DetectorId::iforest) != opt.detectors.end();
        std::shared_ptr<const IsolationForest> forest;
        if (need_forest) forest = std::make_shared<const IsolationForest>(train_forest(c));
        out.push_back({v, run_batch(c, forest, opt)});
    }
    return out;
}

inline void write_sweep_csv(std::ostream& out, SweepAxis axis, const std::vector<SweepPoint>& pts) {
    out << "axis,value,detector,metric,mean\n";
    out << std::setprecision(10);
    for (const auto& p : pts)
        for (const auto& [d, m] : p.report.means) {
            const std::pair<const char*, double> rows[] = {{"f1", m.f1}, {"precision", m.precision},
                                                           {"recall", m.recall}, {"latency", m.latency},
                                                           {"rmse", m.rmse}};
            for (const auto& [name, val] : rows)
                out << to_string(axis) << ',' << p.value << ',' << to_string(d) << ',' << name << ',' << val
                    << '\n';
        }
}

// ---------------------------------------------------------------------------
// CUSUM tuning

struct CusumTuning {
    CusumParams best;
    double best_f1 = -1.0;
    std::vector<std::pair<CusumParams, double>> grid;
};

/// Grid search over drift {1..6} x threshold {2, 5, 10, 20, 40} for the
/// highest mean F1 of CUSUM-gated runs on a separate validation set.
inline CusumTuning tune_cusum(const ScenarioConfig& cfg) {
    ScenarioConfig v = cfg;
    v.trajectories.clear();
    v.synthetic_trips = cfg.tuning_trips;
    v.trajectory_seed = cfg.tuning_seed;
    v.seed = cfg.tuning_seed;
    v.repetitions = 1;
    if (!cfg.trajectories.empty()) {
        v.trajectories = cfg.trajectories;
    }
    CusumTuning out;
    BatchOptions opt;
    opt.detectors = {DetectorId::cusum};
    for (int b = 1; b <= 6; ++b)
        for (double tau : {2.0, 5.0, 10.0, 20.0, 40.0}) {
            v.cusum = {static_cast<double>(b), tau};
            const auto rep = run_batch(v, nullptr, opt);
            const double f1 = rep.means.at(DetectorId::cusum).f1;
            out.grid.push_back({v.cusum, f1});
            if (f1 > out.best_f1) {
                out.best_f1 = f1;
                out.best = v.cusum;
            }
        }
    return out;
}

}  // namespace gpsdefense
