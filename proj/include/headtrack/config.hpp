#pragma once

#include "headtrack/imaging.hpp"
#include "headtrack/simulation.hpp"
#include "headtrack/stewart.hpp"

#include <array>
#include <charconv>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

// Flat, human-readable run configuration: `[section]` headers and
// `key = value` lines, `#` or `;` comments. Every knob of a run lives here;
// command-line flags overlay the same keys. The effective configuration is
// echoed byte-stably into each run directory.

namespace headtrack {

struct RunConfig {
    // [geometry] canonical 6-6 layout parameters
    double base_radius = 150.0;
    std::array<double, 6> base_angles_deg{25.0, 95.0, 145.0, 215.0, 265.0, 335.0};
    double platform_radius = 110.0;
    std::array<double, 6> platform_angles_deg{35.0, 85.0, 155.0, 205.0, 275.0, 325.0};
    double vertical_offset = 120.0;

    // [encoders]
    double counts_per_mm = 60.0;
    bool ideal_encoders = false;
    double leg_noise_std = 0.0;

    // [rig]
    double screen_distance = 190.0;
    double pixel_pitch = 0.1;
    double exposure = 0.015;
    bool quantize_pixels = true;

    // [gains]
    double ur5_kp = 12.0;
    double ur3_kp = 3.0;
    double delta_t_max = 20.0;
    double delta_r_max = 14.0;

    // [plant]
    double velocity_limit_linear = 250.0;
    double velocity_limit_angular = 60.0;
    double accel_limit_linear = 2500.0;
    double accel_limit_angular = 300.0;
    bool ur5_enabled = true;

    // [schedule]
    int encoder_rate = 1000;
    int ur5_rate = 125;
    int ur3_rate = 60;
    int camera_rate = 30;
    double duration = 30.0;

    // [latency]
    double measurement_delay = 0.004;
    int filter_window = 30;
    double robot_delay = 0.016;

    // [noise]
    std::uint64_t seed = 1;

    // [signal] parameters of the built-in test trajectories
    double sine_frequency = 2.0;
    double sine_amplitude = 10.0;
    int sine_axis = 0;
    double ramp_speed = 80.0;
    double ramp_distance = 200.0;
    int ramp_axis = 0;
    std::uint64_t head_seed = 7;
    double signal_rate = 60.0;

    StewartGeometry to_geometry() const {
        StewartGeometry g;
        for (int i = 0; i < 6; ++i) {
            const double ab = base_angles_deg[i] * kRadPerDeg;
            const double ap = platform_angles_deg[i] * kRadPerDeg;
            g.base_points[i] = Vec3(base_radius * std::cos(ab), base_radius * std::sin(ab), 0.0);
            g.platform_points[i] =
                Vec3(platform_radius * std::cos(ap), platform_radius * std::sin(ap), 0.0);
        }
        g.nominal_pose = Pose::translate(0.0, 0.0, vertical_offset);
        return g;
    }

    ImagingRig to_rig() const {
        return make_default_rig(to_geometry().nominal_pose, screen_distance, pixel_pitch, exposure);
    }

    RateSchedule to_schedule() const {
        return {encoder_rate, ur5_rate, ur3_rate, camera_rate, duration};
    }

    LatencyConfig to_latencies() const {
        return {measurement_delay, filter_window, robot_delay};
    }

    SensorConfig to_sensors() const {
        return {counts_per_mm, ideal_encoders, leg_noise_std, quantize_pixels, seed};
    }

    ControlConfig to_control() const {
        ControlConfig c;
        c.ur5_gains = {ur5_kp, delta_t_max, delta_r_max};
        c.ur3_kp = ur3_kp;
        c.ur5_limits = c.ur3_limits = PlantLimits{velocity_limit_linear, velocity_limit_angular,
                                                  accel_limit_linear, accel_limit_angular};
        c.ur5_enabled = ur5_enabled;
        return c;
    }
};

namespace detail {

struct ConfigField {
    std::string section;
    std::string key;
    std::function<std::string(const RunConfig&)> get;
    std::function<bool(RunConfig&, const std::string&)> set;
};

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline bool parse_double(const std::string& s, double& out) {
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end != s.c_str() && *end == '\0' && std::isfinite(out);
}

inline bool parse_bool(const std::string& s, bool& out) {
    if (s == "true" || s == "1") { out = true; return true; }
    if (s == "false" || s == "0") { out = false; return true; }
    return false;
}

inline const std::vector<ConfigField>& config_fields() {
    static const std::vector<ConfigField> fields = [] {
        std::vector<ConfigField> f;
        auto add_double = [&f](const char* sec, const char* key, double RunConfig::*member) {
            f.push_back({sec, key,
                         [member](const RunConfig& c) { return format_double(c.*member); },
                         [member](RunConfig& c, const std::string& s) {
                             double v;
                             if (!parse_double(s, v)) return false;
                             c.*member = v;
                             return true;
                         }});
        };
        auto add_int = [&f](const char* sec, const char* key, int RunConfig::*member) {
            f.push_back({sec, key,
                         [member](const RunConfig& c) { return std::to_string(c.*member); },
                         [member](RunConfig& c, const std::string& s) {
                             double v;
                             if (!parse_double(s, v) || v != std::floor(v)) return false;
                             c.*member = static_cast<int>(v);
                             return true;
                         }});
        };
        auto add_u64 = [&f](const char* sec, const char* key, std::uint64_t RunConfig::*member) {
            f.push_back({sec, key,
                         [member](const RunConfig& c) { return std::to_string(c.*member); },
                         [member](RunConfig& c, const std::string& s) {
                             std::uint64_t v = 0;
                             const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
                             if (ec != std::errc{} || p != s.data() + s.size()) return false;
                             c.*member = v;
                             return true;
                         }});
        };
        auto add_bool = [&f](const char* sec, const char* key, bool RunConfig::*member) {
            f.push_back({sec, key,
                         [member](const RunConfig& c) { return c.*member ? "true" : "false"; },
                         [member](RunConfig& c, const std::string& s) {
                             return parse_bool(s, c.*member);
                         }});
        };
        auto add_angles = [&f](const char* sec, const char* key,
                               std::array<double, 6> RunConfig::*member) {
            f.push_back({sec, key,
                         [member](const RunConfig& c) {
                             std::string out;
                             for (int i = 0; i < 6; ++i) {
                                 if (i) out += ' ';
                                 out += format_double((c.*member)[i]);
                             }
                             return out;
                         },
                         [member](RunConfig& c, const std::string& s) {
                             std::istringstream in(s);
                             std::array<double, 6> v{};
                             for (int i = 0; i < 6; ++i) {
                                 if (!(in >> v[i])) return false;
                             }
                             std::string rest;
                             if (in >> rest) return false;
                             c.*member = v;
                             return true;
                         }});
        };

        add_double("geometry", "base_radius", &RunConfig::base_radius);
        add_angles("geometry", "base_angles_deg", &RunConfig::base_angles_deg);
        add_double("geometry", "platform_radius", &RunConfig::platform_radius);
        add_angles("geometry", "platform_angles_deg", &RunConfig::platform_angles_deg);
        add_double("geometry", "vertical_offset", &RunConfig::vertical_offset);

        add_double("encoders", "counts_per_mm", &RunConfig::counts_per_mm);
        add_bool("encoders", "ideal_encoders", &RunConfig::ideal_encoders);
        add_double("encoders", "leg_noise_std", &RunConfig::leg_noise_std);

        add_double("rig", "screen_distance", &RunConfig::screen_distance);
        add_double("rig", "pixel_pitch", &RunConfig::pixel_pitch);
        add_double("rig", "exposure", &RunConfig::exposure);
        add_bool("rig", "quantize_pixels", &RunConfig::quantize_pixels);

        add_double("gains", "ur5_kp", &RunConfig::ur5_kp);
        add_double("gains", "ur3_kp", &RunConfig::ur3_kp);
        add_double("gains", "delta_t_max", &RunConfig::delta_t_max);
        add_double("gains", "delta_r_max", &RunConfig::delta_r_max);

        add_double("plant", "velocity_limit_linear", &RunConfig::velocity_limit_linear);
        add_double("plant", "velocity_limit_angular", &RunConfig::velocity_limit_angular);
        add_double("plant", "accel_limit_linear", &RunConfig::accel_limit_linear);
        add_double("plant", "accel_limit_angular", &RunConfig::accel_limit_angular);
        add_bool("plant", "ur5_enabled", &RunConfig::ur5_enabled);

        add_int("schedule", "encoder_rate", &RunConfig::encoder_rate);
        add_int("schedule", "ur5_rate", &RunConfig::ur5_rate);
        add_int("schedule", "ur3_rate", &RunConfig::ur3_rate);
        add_int("schedule", "camera_rate", &RunConfig::camera_rate);
        add_double("schedule", "duration", &RunConfig::duration);

        add_double("latency", "measurement_delay", &RunConfig::measurement_delay);
        add_int("latency", "filter_window", &RunConfig::filter_window);
        add_double("latency", "robot_delay", &RunConfig::robot_delay);

        add_u64("noise", "seed", &RunConfig::seed);

        add_double("signal", "sine_frequency", &RunConfig::sine_frequency);
        add_double("signal", "sine_amplitude", &RunConfig::sine_amplitude);
        add_int("signal", "sine_axis", &RunConfig::sine_axis);
        add_double("signal", "ramp_speed", &RunConfig::ramp_speed);
        add_double("signal", "ramp_distance", &RunConfig::ramp_distance);
        add_int("signal", "ramp_axis", &RunConfig::ramp_axis);
        add_u64("signal", "head_seed", &RunConfig::head_seed);
        add_double("signal", "signal_rate", &RunConfig::signal_rate);
        return f;
    }();
    return fields;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

// Applies `[section] key = value` text onto `config`. Returns a list of
// problems ("line N: ..."); empty means success. Unknown keys are errors so
// typos cannot silently fall back to defaults.
inline std::vector<std::string> apply_config_text(RunConfig& config, const std::string& text) {
    std::vector<std::string> errors;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                errors.push_back("line " + std::to_string(lineno) + ": malformed section header");
                continue;
            }
            section = detail::trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        bool found = false;
        for (const auto& field : detail::config_fields()) {
            if (field.section == section && field.key == key) {
                found = true;
                if (!field.set(config, value)) {
                    errors.push_back("line " + std::to_string(lineno) + ": bad value for " +
                                     section + "." + key + ": '" + value + "'");
                }
                break;
            }
        }
        if (!found) {
            errors.push_back("line " + std::to_string(lineno) + ": unknown key " +
                             (section.empty() ? key : section + "." + key));
        }
    }
    return errors;
}

// Applies one "section.key=value" override (command-line form).
inline std::optional<std::string> apply_config_override(RunConfig& config, const std::string& spec) {
    const auto eq = spec.find('=');
    const auto dot = spec.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
        return "override '" + spec + "': expected section.key=value";
    }
    const std::string section = detail::trim(spec.substr(0, dot));
    const std::string key = detail::trim(spec.substr(dot + 1, eq - dot - 1));
    const std::string value = detail::trim(spec.substr(eq + 1));
    for (const auto& field : detail::config_fields()) {
        if (field.section == section && field.key == key) {
            if (!field.set(config, value)) {
                return "override '" + spec + "': bad value";
            }
            return std::nullopt;
        }
    }
    return "override '" + spec + "': unknown key";
}

// Canonical serialization (stable ordering; suitable for byte-wise diffing).
inline std::string serialize_config(const RunConfig& config) {
    std::string out;
    std::string section;
    for (const auto& field : detail::config_fields()) {
        if (field.section != section) {
            if (!out.empty()) out += '\n';
            out += '[' + field.section + "]\n";
            section = field.section;
        }
        out += field.key + " = " + field.get(config) + '\n';
    }
    return out;
}

// Range validation; returns every violation, not just the first.
inline std::vector<std::string> validate_config(const RunConfig& c) {
    std::vector<std::string> errors;
    auto require = [&errors](bool ok, const std::string& msg) {
        if (!ok) errors.push_back(msg);
    };
    require(c.base_radius > 0.0, "geometry.base_radius must be positive");
    require(c.platform_radius > 0.0, "geometry.platform_radius must be positive");
    require(c.vertical_offset > 0.0, "geometry.vertical_offset must be positive");
    require(c.counts_per_mm > 0.0, "encoders.counts_per_mm must be positive");
    require(c.leg_noise_std >= 0.0, "encoders.leg_noise_std must be non-negative");
    require(c.screen_distance > 0.0, "rig.screen_distance must be positive");
    require(c.pixel_pitch > 0.0, "rig.pixel_pitch must be positive");
    require(c.exposure > 0.0, "rig.exposure must be positive");
    require(c.ur5_kp >= 0.0, "gains.ur5_kp must be non-negative");
    require(c.ur3_kp >= 0.0, "gains.ur3_kp must be non-negative");
    require(c.delta_t_max > 0.0, "gains.delta_t_max must be positive");
    require(c.delta_r_max > 0.0, "gains.delta_r_max must be positive");
    require(c.velocity_limit_linear > 0.0, "plant.velocity_limit_linear must be positive");
    require(c.velocity_limit_angular > 0.0, "plant.velocity_limit_angular must be positive");
    require(c.accel_limit_linear > 0.0, "plant.accel_limit_linear must be positive");
    require(c.accel_limit_angular > 0.0, "plant.accel_limit_angular must be positive");
    require(c.encoder_rate > 0, "schedule.encoder_rate must be positive");
    require(c.ur5_rate > 0, "schedule.ur5_rate must be positive");
    require(c.ur3_rate > 0, "schedule.ur3_rate must be positive");
    require(c.camera_rate > 0, "schedule.camera_rate must be positive");
    require(c.encoder_rate >= std::max({c.ur5_rate, c.ur3_rate, c.camera_rate}),
            "schedule.encoder_rate must be the fastest rate");
    require(c.duration > 0.0, "schedule.duration must be positive");
    require(c.measurement_delay >= 0.0, "latency.measurement_delay must be non-negative");
    require(c.filter_window >= 1, "latency.filter_window must be >= 1");
    require(c.robot_delay >= 0.0, "latency.robot_delay must be non-negative");
    require(c.sine_frequency > 0.0, "signal.sine_frequency must be positive");
    require(c.sine_amplitude > 0.0, "signal.sine_amplitude must be positive");
    require(c.sine_axis >= 0 && c.sine_axis <= 5, "signal.sine_axis must be 0..5");
    require(c.ramp_speed > 0.0, "signal.ramp_speed must be positive");
    require(c.ramp_distance > 0.0, "signal.ramp_distance must be positive");
    require(c.ramp_axis >= 0 && c.ramp_axis <= 5, "signal.ramp_axis must be 0..5");
    require(c.signal_rate > 0.0, "signal.signal_rate must be positive");
    return errors;
}

}  // namespace headtrack
