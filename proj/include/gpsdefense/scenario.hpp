// Scenario configuration: an INI-style key-value file with one section per
// subsystem. Every key is optional; defaults reproduce the reference setup
// (4 m constant bias, RSUs every 1500 m with 500 m service radius, range
// sigma 0.25 m, contamination 0.2).
#pragma once

#include "gpsdefense/attack.hpp"
#include "gpsdefense/detectors.hpp"
#include "gpsdefense/pipeline.hpp"
#include "gpsdefense/rsu.hpp"
#include "gpsdefense/sensor_sim.hpp"
#include "gpsdefense/state_estimation.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace gpsdefense {

struct ScenarioConfig {
    // [scenario]
    std::vector<std::string> trajectories;  // CSV paths; empty = synthetic
    std::size_t synthetic_trips = 20;
    std::uint64_t trajectory_seed = 7;
    std::size_t repetitions = 5;
    std::uint64_t seed = 1;
    unsigned workers = 0;
    double dt = 0.1;

    // [sensors]
    SensorNoiseConfig sensors;

    // [ekf] noise model; unset values follow the sensor sigmas
    std::optional<double> q_accel_sigma, q_gyro_sigma, r_gps_sigma;

    // [rsu]
    double rsu_spacing = 1500.0;
    double rsu_radius = 500.0;
    double rsu_sigma = 0.25;
    double broadcast_rate = 10.0;
    std::size_t sequence_length = 10;  // o: fixes use the last o + 1 ranges
    double latency_ms = 100.0;
    double lateral_offset = 25.0;
    double max_fix_std = 1.0;          // 0 disables the quality gate
    AnchorConfig anchor;
    AnchorVariance anchor_variance = AnchorVariance::ekf;
    bool latency_compensation = true;
    std::vector<Vec2> rsu_sites;       // explicit layout overrides placement

    // [attack]
    AttackKind attack = AttackKind::constant_bias;
    bool random_schedule = true;
    double t_start = 0.0, t_end = 0.0;  // trip-relative, when not random
    AttackParams attack_params;

    // [detector]
    DetectorId gating = DetectorId::iforest;
    std::string model;
    double alpha = 0.2;
    std::size_t window = 3;
    std::size_t trees = 100;
    std::size_t max_samples = 256;
    std::size_t reinstate_after = 3;
    double chi2_confidence = 0.95;
    CusumParams cusum;

    // [training]
    std::size_t training_trips = 20;
    std::uint64_t training_seed = 1001;
    std::size_t training_repetitions = 1;

    // [tuning]
    std::size_t tuning_trips = 10;
    std::uint64_t tuning_seed = 2002;

    // [output]
    std::string output_dir = "out";

    EkfConfig ekf_config() const {
        EkfConfig e;
        e.dt = dt;
        const double qa = q_accel_sigma.value_or(sensors.imu_accel_sigma);
        const double qg = q_gyro_sigma.value_or(sensors.imu_gyro_sigma);
        const double rg = r_gps_sigma.value_or(sensors.gps_sigma);
        // A zero-noise sensor still needs a positive-definite filter model.
        e.Q = Vec2(std::max(qa * qa, 1e-12), std::max(qg * qg, 1e-12)).asDiagonal();
        e.R_gps = Mat2::Identity() * std::max(rg * rg, 1e-12);
        return e;
    }

    void validate() const {
        if (!(dt > 0.0)) throw ConfigError("scenario.dt must be > 0");
        if (trajectories.empty() && synthetic_trips == 0)
            throw ConfigError("scenario: no trajectories and synthetic_trips = 0");
        if (repetitions == 0) throw ConfigError("scenario.repetitions must be >= 1");
        for (const auto& p : trajectories)
            if (!std::filesystem::exists(p)) throw ConfigError("trajectory file not found: " + p);
        sensors.validate();
        ekf_config().validate();
        if (!(rsu_spacing > 0.0)) throw ConfigError("rsu.spacing must be > 0");
        if (!(rsu_radius > 0.0)) throw ConfigError("rsu.radius must be > 0");
        if (!(rsu_sigma > 0.0)) throw ConfigError("rsu.sigma must be > 0");
        if (!(broadcast_rate > 0.0)) throw ConfigError("rsu.broadcast_rate must be > 0");
        if (sequence_length < 2) throw ConfigError("rsu.sequence_length must be >= 2");
        if (!(latency_ms >= 0.0)) throw ConfigError("rsu.latency_ms must be >= 0");
        if (!(max_fix_std >= 0.0)) throw ConfigError("rsu.max_fix_std must be >= 0");
        if (!(anchor.heading_var >= 0.0) || !(anchor.speed_var >= 0.0))
            throw ConfigError("rsu anchor variances must be >= 0");
        if (attack != AttackKind::none && !random_schedule && !(t_start < t_end))
            throw ConfigError("attack: t_start must precede t_end");
        if (attack == AttackKind::stealthy && (!(attack_params.n > 1.0) || !(attack_params.m > 0.0)))
            throw ConfigError("attack: stealthy needs m > 0 and n > 1");
        if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("detector.alpha must lie in (0, 1)");
        if (window == 0) throw ConfigError("detector.window must be >= 1");
        if (trees == 0) throw ConfigError("detector.trees must be >= 1");
        if (max_samples < 2) throw ConfigError("detector.max_samples must be >= 2");
        if (reinstate_after == 0) throw ConfigError("detector.reinstate_after must be >= 1");
        if (!(chi2_confidence > 0.0 && chi2_confidence < 1.0))
            throw ConfigError("detector.chi2_confidence must lie in (0, 1)");
        if (!(cusum.drift >= 0.0) || !(cusum.threshold >= 0.0))
            throw ConfigError("detector.cusum_* must be >= 0");
        if (training_trips == 0 || training_repetitions == 0)
            throw ConfigError("training.trips and training.repetitions must be >= 1");
    }
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

inline double parse_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double d = 0.0;
    try {
        d = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size() || !std::isfinite(d))
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    return d;
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    unsigned long long u = 0;
    try {
        if (!v.empty() && v[0] != '-') u = std::stoull(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size())
        throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
    return u;
}

}  // namespace detail

/// Apply one `section.key = value` assignment. Unknown keys are errors.
inline void set_option(ScenarioConfig& c, const std::string& key, const std::string& raw) {
    using namespace detail;
    const std::string v = trim(raw);
    auto num = [&] { return parse_double(key, v); };
    auto uint = [&] { return parse_uint(key, v); };
    auto size = [&] { return static_cast<std::size_t>(parse_uint(key, v)); };

    if (key == "scenario.trajectories") c.trajectories = split_list(v);
    else if (key == "scenario.synthetic_trips") c.synthetic_trips = size();
    else if (key == "scenario.trajectory_seed") c.trajectory_seed = uint();
    else if (key == "scenario.repetitions") c.repetitions = size();
    else if (key == "scenario.seed") c.seed = uint();
    else if (key == "scenario.workers") c.workers = static_cast<unsigned>(uint());
    else if (key == "scenario.dt") c.dt = num();
    else if (key == "sensors.gps_sigma") c.sensors.gps_sigma = num();
    else if (key == "sensors.imu_accel_sigma") c.sensors.imu_accel_sigma = num();
    else if (key == "sensors.imu_gyro_sigma") c.sensors.imu_gyro_sigma = num();
    else if (key == "ekf.q_accel_sigma") c.q_accel_sigma = num();
    else if (key == "ekf.q_gyro_sigma") c.q_gyro_sigma = num();
    else if (key == "ekf.r_gps_sigma") c.r_gps_sigma = num();
    else if (key == "rsu.spacing") c.rsu_spacing = num();
    else if (key == "rsu.radius") c.rsu_radius = num();
    else if (key == "rsu.sigma") c.rsu_sigma = num();
    else if (key == "rsu.broadcast_rate") c.broadcast_rate = num();
    else if (key == "rsu.sequence_length") c.sequence_length = size();
    else if (key == "rsu.latency_ms") c.latency_ms = num();
    else if (key == "rsu.lateral_offset") c.lateral_offset = num();
    else if (key == "rsu.max_fix_std") c.max_fix_std = num();
    else if (key == "rsu.anchor_heading_var") c.anchor.heading_var = num();
    else if (key == "rsu.anchor_speed_var") c.anchor.speed_var = num();
    else if (key == "rsu.anchor_variance") {
        if (v == "config") c.anchor_variance = AnchorVariance::config;
        else if (v == "ekf") c.anchor_variance = AnchorVariance::ekf;
        else throw ConfigError(key + ": expected 'config' or 'ekf'");
    } else if (key == "rsu.latency_compensation") c.latency_compensation = parse_bool(key, v);
    else if (key == "rsu.sites") {
        c.rsu_sites.clear();
        try {
            for (const auto& p : nlohmann::json::parse(v)) {
                const auto xy = p.get<std::vector<double>>();
                if (xy.size() != 2) throw ConfigError(key + ": each site needs [x, y]");
                c.rsu_sites.emplace_back(xy[0], xy[1]);
            }
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(key + ": " + e.what());
        }
    } else if (key == "attack.kind") c.attack = parse_attack_kind(v);
    else if (key == "attack.schedule") {
        if (v == "random") c.random_schedule = true;
        else if (v == "fixed") c.random_schedule = false;
        else throw ConfigError(key + ": expected 'random' or 'fixed'");
    } else if (key == "attack.t_start") c.t_start = num();
    else if (key == "attack.t_end") c.t_end = num();
    else if (key == "attack.bias_lateral") c.attack_params.bias_road.x() = num();
    else if (key == "attack.bias_longitudinal") c.attack_params.bias_road.y() = num();
    else if (key == "attack.m") c.attack_params.m = num();
    else if (key == "attack.n") c.attack_params.n = num();
    else if (key == "detector.gating") c.gating = parse_detector(v);
    else if (key == "detector.model") c.model = v;
    else if (key == "detector.alpha") c.alpha = num();
    else if (key == "detector.window") c.window = size();
    else if (key == "detector.trees") c.trees = size();
    else if (key == "detector.max_samples") c.max_samples = size();
    else if (key == "detector.reinstate_after") c.reinstate_after = size();
    else if (key == "detector.chi2_confidence") c.chi2_confidence = num();
    else if (key == "detector.cusum_drift") c.cusum.drift = num();
    else if (key == "detector.cusum_threshold") c.cusum.threshold = num();
    else if (key == "training.trips") c.training_trips = size();
    else if (key == "training.seed") c.training_seed = uint();
    else if (key == "training.repetitions") c.training_repetitions = size();
    else if (key == "tuning.trips") c.tuning_trips = size();
    else if (key == "tuning.seed") c.tuning_seed = uint();
    else if (key == "output.dir") c.output_dir = v;
    else throw ConfigError("unknown option '" + key + "'");
}

/// Parse INI text. Relative trajectory and model paths resolve against `base_dir`.
inline ScenarioConfig parse_scenario(std::istream& in, const std::filesystem::path& base_dir = {}) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    ScenarioConfig c;
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw ConfigError("config: key '" + section + "' outside a section");
        for (const auto& [key, value] : body) set_option(c, section + "." + key, value.data());
    }
    if (!base_dir.empty()) {
        for (auto& p : c.trajectories)
            if (std::filesystem::path(p).is_relative()) p = (base_dir / p).string();
        if (!c.model.empty() && std::filesystem::path(c.model).is_relative())
            c.model = (base_dir / c.model).string();
    }
    return c;
}

inline ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    return parse_scenario(in, std::filesystem::path(path).parent_path());
}

inline nlohmann::json to_json(const ScenarioConfig& c) {
    nlohmann::json j;
    j["scenario"] = {{"trajectories", c.trajectories}, {"synthetic_trips", c.synthetic_trips},
                     {"trajectory_seed", c.trajectory_seed}, {"repetitions", c.repetitions},
                     {"seed", c.seed}, {"dt", c.dt}};
    j["sensors"] = {{"gps_sigma", c.sensors.gps_sigma},
                    {"imu_accel_sigma", c.sensors.imu_accel_sigma},
                    {"imu_gyro_sigma", c.sensors.imu_gyro_sigma}};
    const EkfConfig e = c.ekf_config();
    j["ekf"] = {{"q_accel_sigma", std::sqrt(e.Q(0, 0))}, {"q_gyro_sigma", std::sqrt(e.Q(1, 1))},
                {"r_gps_sigma", std::sqrt(e.R_gps(0, 0))}};
    std::vector<std::vector<double>> sites;
    for (const auto& s : c.rsu_sites) sites.push_back({s.x(), s.y()});
    j["rsu"] = {{"spacing", c.rsu_spacing}, {"radius", c.rsu_radius}, {"sigma", c.rsu_sigma},
                {"broadcast_rate", c.broadcast_rate}, {"sequence_length", c.sequence_length},
                {"latency_ms", c.latency_ms}, {"lateral_offset", c.lateral_offset},
                {"max_fix_std", c.max_fix_std}, {"anchor_heading_var", c.anchor.heading_var},
                {"anchor_speed_var", c.anchor.speed_var},
                {"anchor_variance", c.anchor_variance == AnchorVariance::ekf ? "ekf" : "config"},
                {"latency_compensation", c.latency_compensation}, {"sites", sites}};
    j["attack"] = {{"kind", to_string(c.attack)},
                   {"schedule", c.random_schedule ? "random" : "fixed"},
                   {"t_start", c.t_start}, {"t_end", c.t_end},
                   {"bias_lateral", c.attack_params.bias_road.x()},
                   {"bias_longitudinal", c.attack_params.bias_road.y()},
                   {"m", c.attack_params.m}, {"n", c.attack_params.n}};
    j["detector"] = {{"gating", to_string(c.gating)}, {"model", c.model}, {"alpha", c.alpha},
                     {"window", c.window}, {"trees", c.trees}, {"max_samples", c.max_samples},
                     {"reinstate_after", c.reinstate_after}, {"chi2_confidence", c.chi2_confidence},
                     {"cusum_drift", c.cusum.drift}, {"cusum_threshold", c.cusum.threshold}};
    j["training"] = {{"trips", c.training_trips}, {"seed", c.training_seed},
                     {"repetitions", c.training_repetitions}};
    j["tuning"] = {{"trips", c.tuning_trips}, {"seed", c.tuning_seed}};
    return j;
}

}  // namespace gpsdefense
