#pragma once

#include "headtrack/geometry.hpp"
#include "headtrack/savgol.hpp"

#include <array>
#include <random>
#include <span>
#include <vector>

// Head-motion trajectories: conversion of optical marker frames into smooth
// 6-DOF pose/velocity/acceleration series, plus synthetic test signals.
//
// The 6-vector encoding used throughout is (x, y, z, yaw, pitch, roll):
// translation in mm, intrinsic ZYX angles in degrees.

namespace headtrack {

struct MarkerFrame {
    double t = 0.0;  // s
    Vec3 leye, reye, lear, rear, c7;  // mm
};

struct TrajectorySample {
    double t = 0.0;
    Pose pose;
    Twist twist;                 // linear mm/s, angular-velocity vector deg/s
    Vec6 accel = Vec6::Zero();   // second derivative of the 6-vector encoding
};

// Per-coordinate linear fit of a marker position against time.
struct LineFit {
    Vec3 point = Vec3::Zero();      // value at t = 0
    Vec3 direction = Vec3::Zero();  // mm/s
    double residual_rms = 0.0;

    Vec3 at(double t) const { return point + direction * t; }
};

// ----------------------------------------------------------------------------
// Encoding helpers
// ----------------------------------------------------------------------------

inline Vec6 encode_pose(const Pose& p) {
    const EulerZyx e = euler_zyx_from_rotation(p.rotation);
    Vec6 v;
    v << p.translation, e.yaw, e.pitch, e.roll;
    return v;
}

inline Pose decode_pose(const Vec6& v) {
    return {rotation_from_euler_zyx({v(3), v(4), v(5), false}), v.head<3>()};
}

// Inverse of euler_rates_to_angular_velocity; undefined at gimbal lock.
inline Vec3 angular_velocity_to_euler_rates(const EulerZyx& e, const Vec3& w_deg) {
    const double cy = std::cos(e.yaw * kRadPerDeg), sy = std::sin(e.yaw * kRadPerDeg);
    const double cp = std::cos(e.pitch * kRadPerDeg), sp = std::sin(e.pitch * kRadPerDeg);
    Mat3 m;
    m.col(0) = Vec3(0.0, 0.0, 1.0);
    m.col(1) = Vec3(-sy, cy, 0.0);
    m.col(2) = Vec3(cy * cp, sy * cp, -sp);
    if (std::abs(m.determinant()) < 1e-9) {
        throw DegenerateGeometry("angular_velocity_to_euler_rates: gimbal lock");
    }
    return m.partialPivLu().solve(w_deg);
}

// ----------------------------------------------------------------------------
// Marker pipeline
// ----------------------------------------------------------------------------

// Ordinary least squares of each C7 coordinate against time; removes the
// overground-walking drift so the result resembles treadmill walking.
inline LineFit fit_c7_line(std::span<const MarkerFrame> frames) {
    if (frames.size() < 2) throw DegenerateInput("fit_c7_line: need at least 2 frames");
    const double n = static_cast<double>(frames.size());
    double t_mean = 0.0;
    Vec3 p_mean = Vec3::Zero();
    for (const MarkerFrame& f : frames) {
        t_mean += f.t;
        p_mean += f.c7;
    }
    t_mean /= n;
    p_mean /= n;

    double stt = 0.0;
    Vec3 stp = Vec3::Zero();
    for (const MarkerFrame& f : frames) {
        const double dt = f.t - t_mean;
        stt += dt * dt;
        stp += dt * (f.c7 - p_mean);
    }
    if (stt < 1e-12) throw DegenerateInput("fit_c7_line: all frames share one timestamp");

    LineFit fit;
    fit.direction = stp / stt;
    fit.point = p_mean - fit.direction * t_mean;
    double ss = 0.0;
    for (const MarkerFrame& f : frames) ss += (f.c7 - fit.at(f.t)).squaredNorm();
    fit.residual_rms = std::sqrt(ss / n);
    return fit;
}

// Head-center translation: mean of the four head markers minus the fitted
// body-center position.
inline Vec3 head_center_translation(const MarkerFrame& f, const LineFit& c7fit) {
    return 0.25 * (f.leye + f.reye + f.lear + f.rear) - c7fit.at(f.t);
}

// Head orientation from the four head markers: r_z is the best-fit plane
// normal (positive z), r_x the eye-pair minus ear-pair direction projected
// into the plane, r_y completes the frame.
inline Mat3 head_orientation(const MarkerFrame& f) {
    const std::array<Vec3, 4> pts{f.leye, f.reye, f.lear, f.rear};
    const Vec3 r_z = best_fit_plane(pts);

    const Vec3 d = (f.leye + f.reye) - (f.lear + f.rear);
    if (d.norm() < 1e-9) throw ZeroDirection("head_orientation: eye/ear difference is zero");
    Vec3 r_x = d - d.dot(r_z) * r_z;
    if (r_x.norm() < 1e-9) {
        throw ZeroDirection("head_orientation: eye/ear direction parallel to plane normal");
    }
    r_x.normalize();

    Mat3 r;
    r.col(0) = r_x;
    r.col(1) = r_z.cross(r_x);
    r.col(2) = r_z;
    return r;
}

// Poses per frame, rotation re-expressed relative to the first frame: the
// inverse of the starting rotation is applied to every rotation so the
// sequence begins at identity. Twist/accel fields are left zero.
inline std::vector<TrajectorySample> normalize_and_encode(std::span<const MarkerFrame> frames) {
    if (frames.empty()) throw DegenerateInput("normalize_and_encode: no frames");
    const LineFit c7fit = frames.size() >= 2 ? fit_c7_line(frames) : LineFit{frames[0].c7, Vec3::Zero(), 0.0};
    const Mat3 r0_inv = head_orientation(frames[0]).transpose();

    std::vector<TrajectorySample> out;
    out.reserve(frames.size());
    for (const MarkerFrame& f : frames) {
        TrajectorySample s;
        s.t = f.t;
        s.pose.rotation = r0_inv * head_orientation(f);
        s.pose.translation = head_center_translation(f, c7fit);
        out.push_back(s);
    }
    return out;
}

// Full pipeline: normalized poses -> Euler 6-vectors -> Savitzky-Golay
// smoothing and differentiation -> samples with twist and acceleration.
inline std::vector<TrajectorySample> markers_to_trajectory(std::span<const MarkerFrame> frames,
                                                           int window = 17, int degree = 4) {
    std::vector<TrajectorySample> samples = normalize_and_encode(frames);
    const int n = static_cast<int>(samples.size());
    if (n < window) throw DegenerateInput("markers_to_trajectory: fewer frames than filter window");

    // Uniform spacing check (1 percent tolerance).
    const double dt = (samples.back().t - samples.front().t) / (n - 1);
    if (!(dt > 0.0)) throw DegenerateInput("markers_to_trajectory: non-increasing timestamps");
    for (int i = 1; i < n; ++i) {
        const double step = samples[i].t - samples[i - 1].t;
        if (std::abs(step - dt) > 0.01 * dt) {
            throw DegenerateInput("markers_to_trajectory: non-uniform frame spacing at index " +
                                  std::to_string(i));
        }
    }

    Eigen::MatrixXd enc(n, 6);
    for (int i = 0; i < n; ++i) enc.row(i) = encode_pose(samples[i].pose).transpose();

    const SavitzkyGolay filt(window, degree, dt);
    const Eigen::MatrixXd smooth = filt.filter(enc, 0);
    const Eigen::MatrixXd rate = filt.filter(enc, 1);
    const Eigen::MatrixXd accel = filt.filter(enc, 2);

    for (int i = 0; i < n; ++i) {
        const Vec6 p = smooth.row(i).transpose();
        const Vec6 v = rate.row(i).transpose();
        samples[i].pose = decode_pose(p);
        samples[i].twist.linear = v.head<3>();
        const EulerZyx e{p(3), p(4), p(5), false};
        samples[i].twist.angular = euler_rates_to_angular_velocity(e, v.tail<3>());
        samples[i].accel = accel.row(i).transpose();
    }
    return samples;
}

// ----------------------------------------------------------------------------
// Synthetic signals
// ----------------------------------------------------------------------------

// axis 0..2: translation x/y/z (mm); axis 3..5: yaw/pitch/roll (deg).
inline std::vector<TrajectorySample> generate_sine(double freq_hz, double amplitude, int axis,
                                                   double duration, double rate_hz = 60.0) {
    if (axis < 0 || axis > 5) throw InvalidConfig("generate_sine: axis must be 0..5");
    if (!(freq_hz > 0.0) || !(rate_hz > 0.0) || !(duration > 0.0)) {
        throw InvalidConfig("generate_sine: frequency, rate and duration must be positive");
    }
    const double w = 2.0 * kPi * freq_hz;
    const int n = static_cast<int>(std::llround(duration * rate_hz)) + 1;
    std::vector<TrajectorySample> out(n);
    for (int i = 0; i < n; ++i) {
        const double t = i / rate_hz;
        Vec6 p = Vec6::Zero(), v = Vec6::Zero(), a = Vec6::Zero();
        p(axis) = amplitude * std::sin(w * t);
        v(axis) = amplitude * w * std::cos(w * t);
        a(axis) = -amplitude * w * w * std::sin(w * t);
        out[i].t = t;
        out[i].pose = decode_pose(p);
        out[i].twist.linear = v.head<3>();
        out[i].twist.angular =
            euler_rates_to_angular_velocity({p(3), p(4), p(5), false}, v.tail<3>());
        out[i].accel = a;
    }
    return out;
}

// Constant-velocity ramp to `distance`, then hold.
inline std::vector<TrajectorySample> generate_ramp(double speed, double distance, int axis,
                                                   double rate_hz = 60.0, double tail_s = 1.5) {
    if (axis < 0 || axis > 5) throw InvalidConfig("generate_ramp: axis must be 0..5");
    if (!(speed > 0.0) || !(distance > 0.0)) {
        throw InvalidConfig("generate_ramp: speed and distance must be positive");
    }
    const double t_end = distance / speed;
    const int n = static_cast<int>(std::llround((t_end + tail_s) * rate_hz)) + 1;
    std::vector<TrajectorySample> out(n);
    for (int i = 0; i < n; ++i) {
        const double t = i / rate_hz;
        Vec6 p = Vec6::Zero(), v = Vec6::Zero();
        if (t < t_end) {
            p(axis) = speed * t;
            v(axis) = speed;
        } else {
            p(axis) = distance;
        }
        out[i].t = t;
        out[i].pose = decode_pose(p);
        out[i].twist.linear = v.head<3>();
        out[i].twist.angular =
            euler_rates_to_angular_velocity({p(3), p(4), p(5), false}, v.tail<3>());
    }
    return out;
}

// Head-like locomotion trajectory: one sinusoid per axis whose frequency and
// amplitude reproduce the recorded velocity and acceleration standard
// deviations per axis (x, y, z in mm; yaw, pitch, roll in deg), with seeded
// random phases. Peaks stay inside the default robot limits.
inline std::vector<TrajectorySample> generate_head_motion(double duration, std::uint64_t seed,
                                                          double rate_hz = 60.0) {
    if (!(duration > 0.0) || !(rate_hz > 0.0)) {
        throw InvalidConfig("generate_head_motion: duration and rate must be positive");
    }
    // Velocity / acceleration standard deviations of recorded head motion
    // during walking, per axis.
    constexpr std::array<double, 6> vel_sd{141.0, 69.5, 78.3, 8.52, 10.57, 13.1};
    constexpr std::array<double, 6> acc_sd{815.0, 439.0, 767.0, 103.0, 138.0, 116.0};

    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
    std::array<double, 6> w{}, amp{}, ph{};
    for (int k = 0; k < 6; ++k) {
        w[k] = acc_sd[k] / vel_sd[k];                   // rad/s
        amp[k] = std::sqrt(2.0) * vel_sd[k] / w[k];
        ph[k] = phase(gen);
    }

    const int n = static_cast<int>(std::llround(duration * rate_hz)) + 1;
    std::vector<TrajectorySample> out(n);
    for (int i = 0; i < n; ++i) {
        const double t = i / rate_hz;
        Vec6 p, v, a;
        for (int k = 0; k < 6; ++k) {
            const double s = std::sin(w[k] * t + ph[k]) - std::sin(ph[k]);  // start at 0
            p(k) = amp[k] * s;
            v(k) = amp[k] * w[k] * std::cos(w[k] * t + ph[k]);
            a(k) = -amp[k] * w[k] * w[k] * std::sin(w[k] * t + ph[k]);
        }
        out[i].t = t;
        out[i].pose = decode_pose(p);
        out[i].twist.linear = v.head<3>();
        out[i].twist.angular =
            euler_rates_to_angular_velocity({p(3), p(4), p(5), false}, v.tail<3>());
        out[i].accel = a;
    }
    return out;
}

// ----------------------------------------------------------------------------
// Statistics (displacement / velocity / acceleration, mean and S.D. per axis)
// ----------------------------------------------------------------------------

struct AxisStats {
    double mean = 0.0;
    double sd = 0.0;
};

struct TrajectoryStats {
    std::array<AxisStats, 6> displacement;  // mm / deg
    std::array<AxisStats, 6> velocity;      // mm/s / deg/s (Euler rates)
    std::array<AxisStats, 6> acceleration;  // mm/s^2 / deg/s^2
};

// Motion statistics excluding the first `skip_initial` seconds.
inline TrajectoryStats trajectory_statistics(std::span<const TrajectorySample> samples,
                                             double skip_initial = 1.0) {
    std::vector<Vec6> disp, vel, acc;
    for (const TrajectorySample& s : samples) {
        if (s.t < samples.front().t + skip_initial) continue;
        disp.push_back(encode_pose(s.pose));
        const EulerZyx e = euler_zyx_from_rotation(s.pose.rotation);
        Vec6 v;
        v << s.twist.linear, angular_velocity_to_euler_rates(e, s.twist.angular);
        vel.push_back(v);
        acc.push_back(s.accel);
    }
    if (disp.size() < 2) throw DegenerateInput("trajectory_statistics: not enough samples past skip");

    auto stats_of = [](const std::vector<Vec6>& rows) {
        std::array<AxisStats, 6> out{};
        const double n = static_cast<double>(rows.size());
        Vec6 mean = Vec6::Zero();
        for (const Vec6& r : rows) mean += r;
        mean /= n;
        Vec6 var = Vec6::Zero();
        for (const Vec6& r : rows) var += (r - mean).cwiseProduct(r - mean);
        var /= n;
        for (int k = 0; k < 6; ++k) out[k] = {mean(k), std::sqrt(var(k))};
        return out;
    };
    return {stats_of(disp), stats_of(vel), stats_of(acc)};
}

// ----------------------------------------------------------------------------
// Resampling
// ----------------------------------------------------------------------------

// Cubic-Hermite interpolation of the 6-vector encoding, slopes taken from the
// stored derivatives. Queries on the sample grid return the samples verbatim.
class TrajectorySampler {
  public:
    explicit TrajectorySampler(std::span<const TrajectorySample> samples)
        : samples_(samples.begin(), samples.end()) {
        if (samples_.size() < 2) throw DegenerateInput("TrajectorySampler: need at least 2 samples");
        enc_.reserve(samples_.size());
        rate_.reserve(samples_.size());
        for (const TrajectorySample& s : samples_) {
            enc_.push_back(encode_pose(s.pose));
            const EulerZyx e = euler_zyx_from_rotation(s.pose.rotation);
            Vec6 v;
            v << s.twist.linear, angular_velocity_to_euler_rates(e, s.twist.angular);
            rate_.push_back(v);
        }
    }

    double start_time() const { return samples_.front().t; }
    double end_time() const { return samples_.back().t; }

    TrajectorySample at(double t) const {
        const double t0 = samples_.front().t, t1 = samples_.back().t;
        if (t <= t0) return samples_.front();
        if (t >= t1) return samples_.back();

        const auto it = std::lower_bound(samples_.begin(), samples_.end(), t,
                                         [](const TrajectorySample& s, double x) { return s.t < x; });
        const size_t hi = static_cast<size_t>(it - samples_.begin());
        const size_t lo = hi - 1;
        const double h = samples_[hi].t - samples_[lo].t;
        const double u = (t - samples_[lo].t) / h;
        if (u < 1e-9) return samples_[lo];
        if (u > 1.0 - 1e-9) return samples_[hi];

        const double u2 = u * u, u3 = u2 * u;
        const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u;
        const double h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
        const double g00 = 6 * u2 - 6 * u, g10 = 3 * u2 - 4 * u + 1;
        const double g01 = -6 * u2 + 6 * u, g11 = 3 * u2 - 2 * u;

        const Vec6 p = h00 * enc_[lo] + h10 * h * rate_[lo] + h01 * enc_[hi] + h11 * h * rate_[hi];
        const Vec6 v = (g00 * enc_[lo] + g10 * h * rate_[lo] + g01 * enc_[hi] + g11 * h * rate_[hi]) / h;

        TrajectorySample s;
        s.t = t;
        s.pose = decode_pose(p);
        s.twist.linear = v.head<3>();
        s.twist.angular = euler_rates_to_angular_velocity({p(3), p(4), p(5), false}, v.tail<3>());
        s.accel = (samples_[lo].accel * (1.0 - u) + samples_[hi].accel * u);
        return s;
    }

  private:
    std::vector<TrajectorySample> samples_;
    std::vector<Vec6> enc_;
    std::vector<Vec6> rate_;
};

}  // namespace headtrack
