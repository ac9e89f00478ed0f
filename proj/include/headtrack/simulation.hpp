#pragma once

#include "headtrack/control.hpp"
#include "headtrack/encoder.hpp"
#include "headtrack/imaging.hpp"
#include "headtrack/stewart.hpp"
#include "headtrack/trajectory.hpp"

#include <cstdint>
#include <deque>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

// Deterministic multi-rate closed-loop executive: head trajectory -> head
// robot plant -> string encoders (delay, quantization, edge-timed velocity,
// forward kinematics, averaging filters) -> ring controller -> ring robot
// plant -> mock imaging, plus the metrics over the resulting log.
//
// One integer clock at the least common multiple of the four rates drives
// everything; rate domains exchange latest-value snapshots, which is exactly
// the latency-relevant semantics of the free-running components they model.

namespace headtrack {

struct RateSchedule {
    int encoder_rate = 1000;  // Hz
    int ur5_rate = 125;       // ring robot controller
    int ur3_rate = 60;        // head robot controller (16.7 ms steps)
    int camera_rate = 30;
    double duration = 30.0;   // s
};

struct LatencyConfig {
    double measurement_delay = 0.004;  // s, applied to true leg lengths
    int filter_window = 30;            // samples at the encoder rate
    double robot_delay = 0.016;        // s, command delay of both plants
};

struct SensorConfig {
    double counts_per_mm = 60.0;
    bool ideal_encoders = false;   // bypass quantization and edge timing
    double leg_noise_std = 0.0;    // mm, gaussian, added after the delay
    bool quantize_pixels = true;
    std::uint64_t seed = 1;
};

struct ControlConfig {
    GainConfig ur5_gains{};        // k_p, delta_t_max, delta_r_max
    double ur3_kp = 3.0;           // 1/s
    PlantLimits ur5_limits{};
    PlantLimits ur3_limits{};
    bool ur5_enabled = true;       // false: ring robot parked (measurement-only runs)
};

struct EncoderLogRow {
    double t = 0.0;
    Vec6 desired_head = Vec6::Zero();    // commanded head pose (x,y,z,yaw,pitch,roll)
    Vec6 head_pose = Vec6::Zero();       // head robot true pose
    Vec6 head_twist = Vec6::Zero();
    Vec6 ring_pose = Vec6::Zero();       // ring robot true pose
    Vec6 ring_twist = Vec6::Zero();
    Vec6 rel_true = Vec6::Zero();        // true deviation from nominal (trans + rotvec deg)
    Vec6 rel_meas_raw = Vec6::Zero();
    Vec6 rel_meas_filt = Vec6::Zero();
    Vec6 relvel_true = Vec6::Zero();
    Vec6 relvel_meas_raw = Vec6::Zero();
    Vec6 relvel_meas_filt = Vec6::Zero();
    Vec6 ur5_cmd = Vec6::Zero();
    Vec6 ur3_cmd = Vec6::Zero();
};

struct CameraLogRow {
    double t = 0.0;
    std::array<Vec2, 4> coords{};
    std::array<Vec2, 4> smear_min{};
    std::array<Vec2, 4> smear_max{};
    Vec3 recon = Vec3::Zero();
    double gap = 0.0;
    double residual = 0.0;
    bool direction_change = false;
};

struct SimLog {
    RateSchedule schedule;
    LatencyConfig latencies;
    Pose nominal_pose;
    std::vector<EncoderLogRow> encoder_rows;
    std::vector<CameraLogRow> camera_rows;
};

struct Metrics {
    double xy_error_max = 0.0, xy_error_mean = 0.0;    // mm, true relative deviation
    double xyz_error_max = 0.0, xyz_error_mean = 0.0;  // mm
    double rot_error_max = 0.0, rot_error_mean = 0.0;  // deg
    double lag_typical = 0.0, lag_max = 0.0;           // s, ring vs head
    double meas_pos_error_mean = 0.0, meas_pos_error_sd = 0.0;  // mm, latency-aligned
    double meas_vel_error_mean = 0.0, meas_vel_error_sd = 0.0;  // mm/s, latency-aligned
    double recon_residual_mean = 0.0, recon_residual_sd = 0.0;  // mm
    double clearance_min = 0.0;                        // mm, 18 - max xy error
};

// ----------------------------------------------------------------------------
// Relative kinematics
// ----------------------------------------------------------------------------

// Twist of body H relative to body G, expressed in G's frame.
inline Twist relative_twist(const Pose& g, const Twist& g_twist, const Pose& h,
                            const Twist& h_twist) {
    const Mat3 rgt = g.rotation.transpose();
    const Vec3 wg_rad = g_twist.angular * kRadPerDeg;
    Twist out;
    out.linear = rgt * (h_twist.linear - g_twist.linear - wg_rad.cross(h.translation - g.translation));
    out.angular = rgt * (h_twist.angular - g_twist.angular);
    return out;
}

// ----------------------------------------------------------------------------
// Lag estimation
// ----------------------------------------------------------------------------

// Delay of `tracked` behind `reference`: the shift in [0, max_lag] that best
// aligns the two series in the mean-squared-error sense, refined to
// sub-sample resolution with a parabolic fit around the minimum. For
// stationary signals this selects the same shift as the cross-correlation
// peak; unlike per-overlap-normalized correlation it also stays sharp on
// trend-dominated inputs (ramps), where correlation is nearly flat across
// lags. The correlation coefficient at the chosen shift gates the result.
inline double estimate_lag(std::span<const double> reference, std::span<const double> tracked,
                           double rate_hz, double max_lag_s = 0.2) {
    const size_t n = std::min(reference.size(), tracked.size());
    if (n < static_cast<size_t>(2.0 * rate_hz)) {
        throw DegenerateInput("estimate_lag: need at least 2 s of data");
    }
    const int max_k = std::min<int>(static_cast<int>(std::lround(max_lag_s * rate_hz)),
                                    static_cast<int>(n) - 2);
    std::vector<double> mse(max_k + 1, 0.0);
    for (int k = 0; k <= max_k; ++k) {
        double sum = 0.0;
        const size_t count = n - static_cast<size_t>(k);
        for (size_t i = 0; i < count; ++i) {
            const double d = reference[i] - tracked[i + k];
            sum += d * d;
        }
        mse[k] = sum / static_cast<double>(count);
    }
    int best = 0;
    for (int k = 1; k <= max_k; ++k) {
        if (mse[k] < mse[best]) best = k;
    }

    // Pearson correlation over the overlap at the selected shift.
    {
        const size_t count = n - static_cast<size_t>(best);
        double mr = 0.0, mt = 0.0;
        for (size_t i = 0; i < count; ++i) {
            mr += reference[i];
            mt += tracked[i + best];
        }
        mr /= static_cast<double>(count);
        mt /= static_cast<double>(count);
        double num = 0.0, ra = 0.0, tb = 0.0;
        for (size_t i = 0; i < count; ++i) {
            const double a = reference[i] - mr;
            const double b = tracked[i + best] - mt;
            num += a * b;
            ra += a * a;
            tb += b * b;
        }
        if (ra <= 0.0 || tb <= 0.0 || num / std::sqrt(ra * tb) < 0.5) {
            throw LowCorrelation("estimate_lag: correlation at best alignment below 0.5");
        }
    }

    double refined = best;
    if (best > 0 && best < max_k) {
        const double denom = mse[best - 1] - 2.0 * mse[best] + mse[best + 1];
        if (std::abs(denom) > 1e-30) {
            refined += 0.5 * (mse[best - 1] - mse[best + 1]) / denom;
        }
    }
    return std::clamp(refined, 0.0, static_cast<double>(max_k)) / rate_hz;
}

// ----------------------------------------------------------------------------
// Closed-loop run
// ----------------------------------------------------------------------------

inline SimLog run_closed_loop(const std::vector<TrajectorySample>& trajectory,
                              const StewartGeometry& geom, const ImagingRig& rig,
                              const ControlConfig& control, const RateSchedule& schedule,
                              const LatencyConfig& latencies, const SensorConfig& sensors) {
    if (schedule.encoder_rate <= 0 || schedule.ur5_rate <= 0 || schedule.ur3_rate <= 0 ||
        schedule.camera_rate <= 0) {
        throw InvalidConfig("schedule: all rates must be positive");
    }
    if (schedule.encoder_rate < std::max({schedule.ur5_rate, schedule.ur3_rate, schedule.camera_rate})) {
        throw InvalidConfig("schedule: encoder rate must be the fastest");
    }
    if (!(schedule.duration > 0.0)) throw InvalidConfig("schedule: duration must be positive");
    if (latencies.filter_window < 1) throw InvalidConfig("latency: filter window must be >= 1");
    if (latencies.measurement_delay < 0.0 || latencies.robot_delay < 0.0) {
        throw InvalidConfig("latency: delays must be non-negative");
    }
    if (trajectory.size() < 2) throw InvalidConfig("trajectory: need at least 2 samples");
    if (trajectory.back().t + 1e-9 < schedule.duration) {
        throw InvalidConfig("trajectory: does not cover the configured duration");
    }

    long base = std::lcm(static_cast<long>(schedule.encoder_rate), static_cast<long>(schedule.ur5_rate));
    base = std::lcm(base, static_cast<long>(schedule.ur3_rate));
    base = std::lcm(base, static_cast<long>(schedule.camera_rate));
    if (base > 1000000L) throw InvalidConfig("schedule: rates have no practical common clock");
    const long div_enc = base / schedule.encoder_rate;
    const long div_ur5 = base / schedule.ur5_rate;
    const long div_ur3 = base / schedule.ur3_rate;
    const long div_cam = base / schedule.camera_rate;
    const double dt_base = 1.0 / static_cast<double>(base);

    const TrajectorySampler sampler(trajectory);
    const Pose nominal = geom.nominal_pose;
    // The trajectory's first pose is reproduced at the nominal configuration;
    // recorded captures carry absolute marker offsets that must not land in
    // the leg workspace.
    const Mat3 start_rot_inv = trajectory.front().pose.rotation.transpose();
    const Vec3 start_trans = trajectory.front().pose.translation;
    const auto desired_pose = [&](const TrajectorySample& s) {
        return Pose{(s.pose.rotation * start_rot_inv) * nominal.rotation,
                    nominal.translation + s.pose.translation - start_trans};
    };

    RobotPlant head(desired_pose(sampler.at(0.0)), 1.0 / schedule.ur3_rate, latencies.robot_delay,
                    control.ur3_limits);
    RobotPlant ring(Pose::identity(), 1.0 / schedule.ur5_rate, latencies.robot_delay,
                    control.ur5_limits);

    std::array<EncoderChannel, 6> channels;
    channels.fill(EncoderChannel(sensors.counts_per_mm));
    const int delay_ticks =
        static_cast<int>(std::lround(latencies.measurement_delay * schedule.encoder_rate));
    std::deque<LegLengths> delay_line;

    AveragingFilter ex_filter(latencies.filter_window);
    AveragingFilter exdot_filter(latencies.filter_window);

    std::mt19937_64 rng(sensors.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Pose measured_rel = nominal;  // forward-kinematics warm start
    Twist measured_twist;
    LegLengths prev_delayed{};
    bool have_prev_delayed = false;

    std::deque<ExposureSample> exposure_history;
    Twist ur5_cmd, ur3_cmd;

    SimLog log;
    log.schedule = schedule;
    log.latencies = latencies;
    log.nominal_pose = nominal;
    const long total_ticks = std::lround(schedule.duration * static_cast<double>(base));
    log.encoder_rows.reserve(static_cast<size_t>(total_ticks / div_enc) + 1);

    for (long tick = 0; tick <= total_ticks; ++tick) {
        const double t = static_cast<double>(tick) / static_cast<double>(base);

        if (tick % div_enc == 0) {
            const Pose true_rel = compose(inverse(ring.pose()), head.pose());
            LegLengths lengths = inverse_kinematics(true_rel, geom);
            delay_line.push_back(lengths);
            if (delay_line.size() > static_cast<size_t>(delay_ticks) + 1) delay_line.pop_front();
            LegLengths delayed = delay_line.front();

            if (sensors.leg_noise_std > 0.0) {
                for (double& l : delayed) l += sensors.leg_noise_std * gauss(rng);
            }

            LegLengths meas_len;
            LegRates meas_rate{};
            if (sensors.ideal_encoders) {
                meas_len = delayed;
                if (have_prev_delayed) {
                    for (int i = 0; i < 6; ++i) {
                        meas_rate[i] = (delayed[i] - prev_delayed[i]) * schedule.encoder_rate;
                    }
                }
                prev_delayed = delayed;
                have_prev_delayed = true;
            } else {
                for (int i = 0; i < 6; ++i) {
                    meas_rate[i] = channels[i].advance(delayed[i], t);
                    meas_len[i] = channels[i].measured_length();
                }
            }

            try {
                measured_rel = forward_kinematics(meas_len, geom, measured_rel);
            } catch (const NoConvergence& e) {
                throw NoConvergence("encoder tick " + std::to_string(log.encoder_rows.size()) +
                                        " (t=" + std::to_string(t) + " s): " + e.what(),
                                    e.residual);
            }
            measured_twist = twist_from_leg_rates(measured_rel, geom, meas_rate);

            const Vec6 e_x_raw = pose_error(measured_rel, nominal).vector();
            ex_filter.push(e_x_raw);
            exdot_filter.push(measured_twist.vector());

            exposure_history.push_back({t, project_lasers(true_rel, rig)});
            while (!exposure_history.empty() &&
                   exposure_history.front().t < t - rig.exposure - 1e-9) {
                exposure_history.pop_front();
            }

            EncoderLogRow row;
            row.t = t;
            const TrajectorySample des = sampler.at(t);
            row.desired_head = encode_pose(desired_pose(des));
            row.head_pose = encode_pose(head.pose());
            row.head_twist = head.twist().vector();
            row.ring_pose = encode_pose(ring.pose());
            row.ring_twist = ring.twist().vector();
            row.rel_true = pose_error(true_rel, nominal).vector();
            row.rel_meas_raw = e_x_raw;
            row.rel_meas_filt = ex_filter.mean();
            row.relvel_true =
                relative_twist(ring.pose(), ring.twist(), head.pose(), head.twist()).vector();
            row.relvel_meas_raw = measured_twist.vector();
            row.relvel_meas_filt = exdot_filter.mean();
            row.ur5_cmd = ur5_cmd.vector();
            row.ur3_cmd = ur3_cmd.vector();
            log.encoder_rows.push_back(row);
        }

        if (tick % div_ur3 == 0) {
            const TrajectorySample s = sampler.at(t);
            ur3_cmd = reproduction_command(desired_pose(s), s.twist, head.pose(), head.twist(),
                                           control.ur3_kp, 1.0 / schedule.ur3_rate);
            head.control_tick(ur3_cmd, t);
        }

        if (control.ur5_enabled && tick % div_ur5 == 0) {
            ur5_cmd = coarse_command(ex_filter.mean(), Twist::from_vector(exdot_filter.mean()),
                                     ring.twist(), control.ur5_gains);
            ring.control_tick(ur5_cmd, t);
        }

        if (tick % div_cam == 0 && !exposure_history.empty()) {
            const std::vector<ExposureSample> window(exposure_history.begin(),
                                                     exposure_history.end());
            const CameraObservation obs = camera_observe(window, rig, sensors.quantize_pixels);
            const ReconResult recon = reconstruct_source(obs, rig);

            CameraLogRow row;
            row.t = t;
            row.coords = obs.coords;
            row.smear_min = obs.smear_min;
            row.smear_max = obs.smear_max;
            row.recon = recon.p;
            row.gap = recon.gap;
            row.residual = fine_motion_correct(recon, measured_rel, rig.source_helmet);
            for (bool f : obs.direction_change) row.direction_change |= f;
            log.camera_rows.push_back(row);
        }

        head.integrate(dt_base);
        ring.integrate(dt_base);
    }
    return log;
}

// ----------------------------------------------------------------------------
// Metrics
// ----------------------------------------------------------------------------

namespace detail {

inline int dominant_axis(const std::vector<EncoderLogRow>& rows, size_t begin,
                         Vec6 EncoderLogRow::*field, int first, int count) {
    Eigen::Matrix<double, 6, 1> mean = Vec6::Zero(), var = Vec6::Zero();
    const double n = static_cast<double>(rows.size() - begin);
    for (size_t i = begin; i < rows.size(); ++i) mean += rows[i].*field;
    mean /= n;
    for (size_t i = begin; i < rows.size(); ++i) {
        const Vec6 d = rows[i].*field - mean;
        var += d.cwiseProduct(d);
    }
    int best = first;
    for (int k = first; k < first + count; ++k) {
        if (var(k) > var(best)) best = k;
    }
    return best;
}

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;
};

inline MeanSd mean_sd(const std::vector<double>& xs) {
    if (xs.empty()) return {};
    double m = 0.0;
    for (double x : xs) m += x;
    m /= static_cast<double>(xs.size());
    double v = 0.0;
    for (double x : xs) v += (x - m) * (x - m);
    return {m, std::sqrt(v / static_cast<double>(xs.size()))};
}

// Aligned error norms between two logged Vec3 series: estimate the tracked
// series' lag on the dominant axis, shift by the nearest whole sample, then
// take norms of the differences.
inline MeanSd aligned_error(const std::vector<EncoderLogRow>& rows, size_t begin,
                            Vec6 EncoderLogRow::*truth, Vec6 EncoderLogRow::*measured,
                            double rate) {
    const int axis = dominant_axis(rows, begin, truth, 0, 3);
    std::vector<double> ref, trk;
    ref.reserve(rows.size() - begin);
    for (size_t i = begin; i < rows.size(); ++i) {
        ref.push_back((rows[i].*truth)(axis));
        trk.push_back((rows[i].*measured)(axis));
    }
    size_t shift = 0;
    try {
        shift = static_cast<size_t>(std::lround(estimate_lag(ref, trk, rate) * rate));
    } catch (const Error&) {
        shift = 0;  // static or short series: compare unshifted
    }
    std::vector<double> norms;
    for (size_t i = begin + shift; i < rows.size(); ++i) {
        const Vec3 err = (rows[i].*measured).head<3>() - (rows[i - shift].*truth).head<3>();
        norms.push_back(err.norm());
    }
    return mean_sd(norms);
}

}  // namespace detail

inline Metrics compute_metrics(const SimLog& log, double skip_initial = 1.0) {
    const auto& rows = log.encoder_rows;
    if (rows.empty()) throw DegenerateInput("compute_metrics: empty log");
    const double t0 = rows.front().t + skip_initial;
    if (rows.back().t <= t0) throw DegenerateInput("compute_metrics: log shorter than skip window");
    size_t begin = 0;
    while (begin < rows.size() && rows[begin].t < t0) ++begin;

    Metrics m;
    double sum_xy = 0.0, sum_xyz = 0.0, sum_rot = 0.0;
    for (size_t i = begin; i < rows.size(); ++i) {
        const Vec6& dev = rows[i].rel_true;
        const double xy = dev.head<2>().norm();
        const double xyz = dev.head<3>().norm();
        const double rot = dev.tail<3>().norm();
        m.xy_error_max = std::max(m.xy_error_max, xy);
        m.xyz_error_max = std::max(m.xyz_error_max, xyz);
        m.rot_error_max = std::max(m.rot_error_max, rot);
        sum_xy += xy;
        sum_xyz += xyz;
        sum_rot += rot;
    }
    const double n = static_cast<double>(rows.size() - begin);
    m.xy_error_mean = sum_xy / n;
    m.xyz_error_mean = sum_xyz / n;
    m.rot_error_mean = sum_rot / n;
    m.clearance_min = 18.0 - m.xy_error_max;

    const double rate = log.schedule.encoder_rate;

    // Ring-vs-head lag over sliding windows on the dominant translation axis.
    {
        const int axis = detail::dominant_axis(rows, begin, &EncoderLogRow::head_pose, 0, 3);
        std::vector<double> ref, trk;
        for (size_t i = begin; i < rows.size(); ++i) {
            ref.push_back(rows[i].head_pose(axis));
            trk.push_back(rows[i].ring_pose(axis));
        }
        const size_t win = static_cast<size_t>(5.0 * rate);
        const size_t hop = win / 2;
        std::vector<double> lags;
        if (ref.size() <= win) {
            try {
                lags.push_back(estimate_lag(ref, trk, rate));
            } catch (const Error&) {}
        } else {
            for (size_t start = 0; start + win <= ref.size(); start += hop) {
                try {
                    lags.push_back(estimate_lag({ref.data() + start, win}, {trk.data() + start, win},
                                                rate));
                } catch (const Error&) {}
            }
        }
        if (!lags.empty()) {
            std::sort(lags.begin(), lags.end());
            m.lag_typical = lags[lags.size() / 2];
            m.lag_max = lags.back();
        } else {
            m.lag_typical = std::numeric_limits<double>::quiet_NaN();
            m.lag_max = std::numeric_limits<double>::quiet_NaN();
        }
    }

    const detail::MeanSd pos = detail::aligned_error(rows, begin, &EncoderLogRow::rel_true,
                                                     &EncoderLogRow::rel_meas_raw, rate);
    m.meas_pos_error_mean = pos.mean;
    m.meas_pos_error_sd = pos.sd;
    const detail::MeanSd vel = detail::aligned_error(rows, begin, &EncoderLogRow::relvel_true,
                                                     &EncoderLogRow::relvel_meas_filt, rate);
    m.meas_vel_error_mean = vel.mean;
    m.meas_vel_error_sd = vel.sd;

    std::vector<double> residuals;
    for (const CameraLogRow& row : log.camera_rows) {
        if (row.t >= t0) residuals.push_back(row.residual);
    }
    if (!residuals.empty()) {
        const detail::MeanSd r = detail::mean_sd(residuals);
        m.recon_residual_mean = r.mean;
        m.recon_residual_sd = r.sd;
    } else {
        m.recon_residual_mean = std::numeric_limits<double>::quiet_NaN();
        m.recon_residual_sd = std::numeric_limits<double>::quiet_NaN();
    }
    return m;
}

}  // namespace headtrack
