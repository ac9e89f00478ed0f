// Command-line front end: run closed-loop experiments, process marker
// captures, and emit metric reports plus plot-ready data files.
//
// Exit codes: 0 ok, 1 config error, 2 input error, 3 numerical failure.

#include "headtrack/headtrack.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace headtrack;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

struct CommonOptions {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_base = "runs";
    std::string run_dir;  // exact output directory; overrides out_base
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config_path, "configuration file");
    cmd->add_option("--set", opts.overrides, "override a config value (section.key=value)")
        ->take_all();
    cmd->add_option("--out", opts.out_base, "base directory for run outputs");
    cmd->add_option("--run-dir", opts.run_dir, "exact output directory (default: timestamped)");
}

// Loads file config and applies overrides; exits with code 1 on any problem,
// listing every problem first.
RunConfig load_config(const CommonOptions& opts) {
    RunConfig cfg;
    std::vector<std::string> errors;
    if (!opts.config_path.empty()) {
        std::ifstream in(opts.config_path);
        if (!in) {
            std::cerr << "config error: cannot open " << opts.config_path << "\n";
            std::exit(kExitConfig);
        }
        std::stringstream buf;
        buf << in.rdbuf();
        for (const std::string& e : apply_config_text(cfg, buf.str())) {
            errors.push_back(opts.config_path + ": " + e);
        }
    }
    for (const std::string& o : opts.overrides) {
        if (auto err = apply_config_override(cfg, o)) errors.push_back(*err);
    }
    for (const std::string& e : validate_config(cfg)) errors.push_back(e);
    if (!errors.empty()) {
        for (const std::string& e : errors) std::cerr << "config error: " << e << "\n";
        std::exit(kExitConfig);
    }
    return cfg;
}

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
    return buf;
}

fs::path make_run_dir(const CommonOptions& opts, const std::string& command) {
    fs::path dir;
    if (!opts.run_dir.empty()) {
        dir = opts.run_dir;
    } else {
        dir = fs::path(opts.out_base) / (command + "-" + timestamp_utc());
        for (int n = 2; fs::exists(dir); ++n) {
            dir = fs::path(opts.out_base) / (command + "-" + timestamp_utc() + "-" + std::to_string(n));
        }
    }
    fs::create_directories(dir);
    return dir;
}

int run_experiment(const std::string& command, const CommonOptions& opts, const RunConfig& cfg,
                   const std::vector<TrajectorySample>& trajectory) {
    const fs::path dir = make_run_dir(opts, command);
    io_detail::write_file((dir / "config.ini").string(), serialize_config(cfg));
    write_trajectory_file((dir / "trajectory.csv").string(), trajectory);

    SimLog log;
    try {
        log = run_closed_loop(trajectory, cfg.to_geometry(), cfg.to_rig(), cfg.to_control(),
                              cfg.to_schedule(), cfg.to_latencies(), cfg.to_sensors());
    } catch (const InvalidConfig& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    }

    write_simlog_file((dir / "simlog.csv").string(), log);
    write_camera_file((dir / "cameras.csv").string(), log);
    const Metrics metrics = compute_metrics(log);
    const std::string metrics_text = metrics_to_text(metrics);
    io_detail::write_file((dir / "metrics.txt").string(), metrics_text);

    std::cout << "run directory: " << dir.string() << "\n" << metrics_text;
    return kExitOk;
}

void print_stats_table(const TrajectoryStats& st) {
    const std::array<const char*, 6> axes{"X", "Y", "Z", "Yaw", "Pitch", "Roll"};
    std::printf("%-6s %12s %12s %12s %12s %12s %12s\n", "axis", "disp_mean", "disp_sd",
                "vel_mean", "vel_sd", "acc_mean", "acc_sd");
    for (int k = 0; k < 6; ++k) {
        std::printf("%-6s %12.4g %12.4g %12.4g %12.4g %12.4g %12.4g\n", axes[k],
                    st.displacement[k].mean, st.displacement[k].sd, st.velocity[k].mean,
                    st.velocity[k].sd, st.acceleration[k].mean, st.acceleration[k].sd);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"robotic head-motion measurement and compensation simulator"};
    app.require_subcommand(1);

    // process-markers
    auto* markers_cmd = app.add_subcommand(
        "process-markers", "convert an optical marker capture into a trajectory file");
    std::string markers_in, markers_out;
    double stats_skip = 1.0;
    markers_cmd->add_option("--input", markers_in, "marker capture file")->required();
    markers_cmd->add_option("--output", markers_out, "trajectory file to write")->required();
    markers_cmd->add_option("--skip-initial", stats_skip,
                            "seconds excluded from the printed statistics");

    // experiment commands
    CommonOptions sine_opts, ramp_opts, head_opts, run_opts;
    auto* sine_cmd = app.add_subcommand("sine", "run the sinusoid measurement experiment");
    add_common(sine_cmd, sine_opts);
    std::optional<double> sine_freq, sine_amp, duration_sine;
    std::optional<int> sine_axis;
    sine_cmd->add_option("--frequency", sine_freq, "sine frequency, Hz");
    sine_cmd->add_option("--amplitude", sine_amp, "sine amplitude, mm or deg");
    sine_cmd->add_option("--axis", sine_axis, "axis 0..5 (x,y,z,yaw,pitch,roll)");
    sine_cmd->add_option("--duration", duration_sine, "run duration, s");

    auto* ramp_cmd = app.add_subcommand("ramp", "run the constant-velocity latency experiment");
    add_common(ramp_cmd, ramp_opts);
    std::optional<double> ramp_speed, ramp_distance, duration_ramp;
    std::optional<int> ramp_axis;
    ramp_cmd->add_option("--speed", ramp_speed, "ramp speed, mm/s");
    ramp_cmd->add_option("--distance", ramp_distance, "ramp travel, mm");
    ramp_cmd->add_option("--axis", ramp_axis, "axis 0..5");
    ramp_cmd->add_option("--duration", duration_ramp, "run duration, s");

    auto* head_cmd =
        app.add_subcommand("head", "run the synthetic head-motion tracking experiment");
    add_common(head_cmd, head_opts);
    std::optional<double> duration_head;
    std::optional<std::uint64_t> head_seed;
    head_cmd->add_option("--duration", duration_head, "run duration, s");
    head_cmd->add_option("--head-seed", head_seed, "phase seed of the synthetic trajectory");

    auto* run_cmd = app.add_subcommand("run", "run the closed loop on a trajectory file");
    add_common(run_cmd, run_opts);
    std::string run_traj;
    std::optional<double> duration_run;
    run_cmd->add_option("--trajectory", run_traj, "trajectory file")->required();
    run_cmd->add_option("--duration", duration_run, "run duration, s");

    // report
    auto* report_cmd =
        app.add_subcommand("report", "emit per-axis plot data (time, reference, tracked, difference)");
    std::string report_log, report_pair = "coarse", report_out;
    report_cmd->add_option("--log", report_log, "simlog.csv from a run")->required();
    report_cmd->add_option("--pair", report_pair, "coarse (head vs ring) or reproduction");
    report_cmd->add_option("--out-dir", report_out, "directory for report files (default: log's)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*markers_cmd) {
            std::vector<MarkerFrame> frames;
            std::vector<TrajectorySample> traj;
            try {
                frames = read_marker_file(markers_in);
                traj = markers_to_trajectory(frames);
            } catch (const Error& e) {
                std::cerr << "input error: " << e.what() << "\n";
                return kExitInput;
            }
            write_trajectory_file(markers_out, traj);
            std::cout << "wrote " << traj.size() << " samples to " << markers_out << "\n";
            try {
                print_stats_table(trajectory_statistics(traj, stats_skip));
            } catch (const DegenerateInput&) {
                std::cout << "(capture too short for statistics past the skip window)\n";
            }
            return kExitOk;
        }

        if (*sine_cmd) {
            RunConfig cfg = load_config(sine_opts);
            if (sine_freq) cfg.sine_frequency = *sine_freq;
            if (sine_amp) cfg.sine_amplitude = *sine_amp;
            if (sine_axis) cfg.sine_axis = *sine_axis;
            if (duration_sine) cfg.duration = *duration_sine;
            if (auto errors = validate_config(cfg); !errors.empty()) {
                for (const auto& e : errors) std::cerr << "config error: " << e << "\n";
                return kExitConfig;
            }
            const auto traj = generate_sine(cfg.sine_frequency, cfg.sine_amplitude, cfg.sine_axis,
                                            cfg.duration + 0.5, cfg.signal_rate);
            return run_experiment("sine", sine_opts, cfg, traj);
        }

        if (*ramp_cmd) {
            RunConfig cfg = load_config(ramp_opts);
            if (ramp_speed) cfg.ramp_speed = *ramp_speed;
            if (ramp_distance) cfg.ramp_distance = *ramp_distance;
            if (ramp_axis) cfg.ramp_axis = *ramp_axis;
            if (duration_ramp) cfg.duration = *duration_ramp;
            if (auto errors = validate_config(cfg); !errors.empty()) {
                for (const auto& e : errors) std::cerr << "config error: " << e << "\n";
                return kExitConfig;
            }
            const double motion = cfg.ramp_distance / cfg.ramp_speed;
            const double tail = std::max(1.5, cfg.duration - motion + 0.5);
            const auto traj =
                generate_ramp(cfg.ramp_speed, cfg.ramp_distance, cfg.ramp_axis, cfg.signal_rate, tail);
            return run_experiment("ramp", ramp_opts, cfg, traj);
        }

        if (*head_cmd) {
            RunConfig cfg = load_config(head_opts);
            if (duration_head) cfg.duration = *duration_head;
            if (head_seed) cfg.head_seed = *head_seed;
            if (auto errors = validate_config(cfg); !errors.empty()) {
                for (const auto& e : errors) std::cerr << "config error: " << e << "\n";
                return kExitConfig;
            }
            const auto traj = generate_head_motion(cfg.duration + 0.5, cfg.head_seed, cfg.signal_rate);
            return run_experiment("head", head_opts, cfg, traj);
        }

        if (*run_cmd) {
            RunConfig cfg = load_config(run_opts);
            if (duration_run) cfg.duration = *duration_run;
            std::vector<TrajectorySample> traj;
            try {
                traj = read_trajectory_file(run_traj);
            } catch (const Error& e) {
                std::cerr << "input error: " << e.what() << "\n";
                return kExitInput;
            }
            return run_experiment("run", run_opts, cfg, traj);
        }

        if (*report_cmd) {
            SimLog log;
            try {
                log = read_simlog_file(report_log);
            } catch (const Error& e) {
                std::cerr << "input error: " << e.what() << "\n";
                return kExitInput;
            }
            const fs::path dir =
                report_out.empty() ? fs::path(report_log).parent_path() : fs::path(report_out);
            if (!dir.empty()) fs::create_directories(dir);
            try {
                write_report_files(dir.string(), log, report_pair);
            } catch (const InvalidConfig& e) {
                std::cerr << "config error: " << e.what() << "\n";
                return kExitConfig;
            }
            std::cout << "wrote report_{x,y,z,yaw,pitch,roll}.csv to "
                      << (dir.empty() ? "." : dir.string()) << "\n";
            return kExitOk;
        }
    } catch (const InvalidConfig& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DegenerateInput& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const Error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}
