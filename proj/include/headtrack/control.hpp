#pragma once

#include "headtrack/geometry.hpp"

#include <deque>
#include <limits>
#include <vector>

namespace headtrack {

// ----------------------------------------------------------------------------
// Gains
// ----------------------------------------------------------------------------

struct GainConfig {
    double k_p = 12.0;         // 1/s, proportional gain on pose error
    double delta_t_max = 20.0; // mm
    double delta_r_max = 14.0; // deg
};

// Nonlinear feedforward gain: (d/dmax) * exp(d/dmax - 1) below the threshold,
// exactly 1 at and beyond it. Continuous and monotone on [0, delta_max].
inline double exp_gain(double delta, double delta_max) {
    if (delta >= delta_max) return 1.0;
    const double x = delta / delta_max;
    return x * std::exp(x - 1.0);
}

// ----------------------------------------------------------------------------
// Pose error
// ----------------------------------------------------------------------------

struct PoseError {
    Vec3 translational = Vec3::Zero();  // mm
    Mat3 rotational = Mat3::Identity(); // relative rotation

    // [translation; axis-angle vector in degrees]
    Vec6 vector() const {
        Vec6 v;
        v << translational, rotvec_deg_from_rotation(rotational);
        return v;
    }
    static PoseError from_vector(const Vec6& v) {
        return {v.head<3>(), rotation_from_rotvec_deg(v.tail<3>())};
    }
};

// Error taking `actual` to `target`, expressed in the common parent frame.
inline PoseError pose_error(const Pose& target, const Pose& actual) {
    return {target.translation - actual.translation,
            target.rotation * actual.rotation.transpose()};
}

// ----------------------------------------------------------------------------
// Averaging filter
// ----------------------------------------------------------------------------

// Arithmetic mean of the last min(window, n) samples.
class AveragingFilter {
  public:
    explicit AveragingFilter(int window) : window_(window) {
        if (window < 1) throw InvalidConfig("AveragingFilter: window must be >= 1");
        buf_.reserve(static_cast<size_t>(window));
    }

    void push(const Vec6& sample) {
        if (buf_.size() < static_cast<size_t>(window_)) {
            buf_.push_back(sample);
        } else {
            buf_[next_] = sample;
            next_ = (next_ + 1) % buf_.size();
        }
    }

    Vec6 mean() const {
        if (buf_.empty()) return Vec6::Zero();
        Vec6 sum = Vec6::Zero();
        for (const Vec6& s : buf_) sum += s;
        return sum / static_cast<double>(buf_.size());
    }

    int window() const { return window_; }
    size_t size() const { return buf_.size(); }
    void reset() { buf_.clear(); next_ = 0; }

  private:
    int window_;
    std::vector<Vec6> buf_;
    size_t next_ = 0;
};

// ----------------------------------------------------------------------------
// Controllers
// ----------------------------------------------------------------------------

// Ring-tracking velocity law: proportional pose correction plus the desired
// velocity (robot velocity + measured relative velocity), the latter scaled
// per block by the exponential gain so small noisy errors feed little
// velocity forward. e_x and e_xdot are expected pre-filtered at the encoder
// rate; xdot_m arrives smooth from the robot and is used as-is.
inline Twist coarse_command(const PoseError& e_x, const Twist& e_xdot, const Twist& xdot_m,
                            const GainConfig& gains) {
    const Twist xdot_d = xdot_m + e_xdot;
    const double ke_t = exp_gain(e_x.translational.norm(), gains.delta_t_max);
    const double ke_r = exp_gain(axis_angle_magnitude_deg(e_x.rotational), gains.delta_r_max);
    const Vec6 ev = e_x.vector();
    Twist out;
    out.linear = gains.k_p * ev.head<3>() + ke_t * xdot_d.linear;
    out.angular = gains.k_p * ev.tail<3>() + ke_r * xdot_d.angular;
    return out;
}

// Same law over the filtered 6-vector form of e_x (norm of the rotation part
// of the vector equals the axis-angle magnitude).
inline Twist coarse_command(const Vec6& e_x, const Twist& e_xdot, const Twist& xdot_m,
                            const GainConfig& gains) {
    const Twist xdot_d = xdot_m + e_xdot;
    const double ke_t = exp_gain(e_x.head<3>().norm(), gains.delta_t_max);
    const double ke_r = exp_gain(e_x.tail<3>().norm(), gains.delta_r_max);
    Twist out;
    out.linear = gains.k_p * e_x.head<3>() + ke_t * xdot_d.linear;
    out.angular = gains.k_p * e_x.tail<3>() + ke_r * xdot_d.angular;
    return out;
}

// Head-reproduction velocity law: feedforward of the desired velocity plus a
// proportional correction against the robot's predicted pose one step ahead.
inline Twist reproduction_command(const Pose& x_d, const Twist& xdot_d, const Pose& x_m,
                                  const Twist& xdot_m, double k_p, double dt) {
    if (!(dt > 0.0)) throw InvalidConfig("reproduction_command: dt must be positive");
    const Pose predicted{rotation_from_rotvec_deg(xdot_m.angular * dt) * x_m.rotation,
                         x_m.translation + xdot_m.linear * dt};
    const Vec6 ev = pose_error(x_d, predicted).vector();
    return {xdot_d.linear + k_p * ev.head<3>(), xdot_d.angular + k_p * ev.tail<3>()};
}

// ----------------------------------------------------------------------------
// Robot plant
// ----------------------------------------------------------------------------

struct PlantLimits {
    double velocity_linear = 250.0;   // mm/s per axis
    double velocity_angular = 60.0;   // deg/s per axis
    double accel_linear = 2500.0;     // mm/s^2 per axis
    double accel_angular = 300.0;     // deg/s^2 per axis

    static PlantLimits unlimited() {
        const double inf = std::numeric_limits<double>::infinity();
        return {inf, inf, inf, inf};
    }
};

// Discrete velocity-mode plant. Commands enter a delay FIFO and take effect
// at the first control tick at or after now + command_delay (sub-period
// delays round up to the tick grid). The executed twist slews toward the
// newest matured command under the acceleration limit and is clamped to the
// velocity limit. Command handling (control_tick) and pose integration
// (integrate) are split so a multi-rate loop can integrate on a finer clock;
// step() does both for single-rate use.
class RobotPlant {
  public:
    RobotPlant(const Pose& initial, double control_period, double command_delay,
               const PlantLimits& limits)
        : pose_(initial), period_(control_period), delay_(command_delay), limits_(limits) {
        if (!(control_period > 0.0)) throw InvalidConfig("RobotPlant: control period must be > 0");
        if (delay_ < 0.0) throw InvalidConfig("RobotPlant: command delay must be >= 0");
    }

    void control_tick(const Twist& command, double now) {
        fifo_.push_back({now + delay_, command});
        while (!fifo_.empty() && fifo_.front().mature_time <= now + 1e-9) {
            target_ = fifo_.front().command;
            fifo_.pop_front();
        }
        const double dv_lin = limits_.accel_linear * period_;
        const double dv_ang = limits_.accel_angular * period_;
        for (int i = 0; i < 3; ++i) {
            executed_.linear(i) += std::clamp(target_.linear(i) - executed_.linear(i), -dv_lin, dv_lin);
            executed_.linear(i) = std::clamp(executed_.linear(i), -limits_.velocity_linear,
                                             limits_.velocity_linear);
            executed_.angular(i) += std::clamp(target_.angular(i) - executed_.angular(i), -dv_ang, dv_ang);
            executed_.angular(i) = std::clamp(executed_.angular(i), -limits_.velocity_angular,
                                              limits_.velocity_angular);
        }
    }

    void integrate(double dt) {
        pose_.translation += executed_.linear * dt;
        if (executed_.angular.squaredNorm() > 0.0) {
            pose_.rotation = rotation_from_rotvec_deg(executed_.angular * dt) * pose_.rotation;
            if (orthonormality_error(pose_.rotation) > 1e-9) {
                pose_.rotation = orthonormalized(pose_.rotation);
            }
        }
    }

    void step(const Twist& command, double now) {
        control_tick(command, now);
        integrate(period_);
    }

    const Pose& pose() const { return pose_; }
    const Twist& twist() const { return executed_; }
    double control_period() const { return period_; }
    double command_delay() const { return delay_; }

  private:
    struct Pending {
        double mature_time;
        Twist command;
    };

    Pose pose_;
    double period_;
    double delay_;
    PlantLimits limits_;
    std::deque<Pending> fifo_;
    Twist target_;
    Twist executed_;
};

}  // namespace headtrack
