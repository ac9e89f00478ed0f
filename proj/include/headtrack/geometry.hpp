#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>

// Rigid-body math shared by every module. Units are fixed repo-wide:
// millimeters, degrees, seconds.

namespace headtrack {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kDegPerRad = 180.0 / kPi;
inline constexpr double kRadPerDeg = kPi / 180.0;

// ----------------------------------------------------------------------------
// Error taxonomy
// ----------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateGeometry : Error { using Error::Error; };
struct DegenerateInput : Error { using Error::Error; };
struct ZeroDirection : Error { using Error::Error; };
struct SingularJacobian : Error { using Error::Error; };
struct RayMiss : Error { using Error::Error; };
struct ParallelLines : Error { using Error::Error; };
struct InvalidConfig : Error { using Error::Error; };
struct LowCorrelation : Error { using Error::Error; };

struct NoConvergence : Error {
    explicit NoConvergence(const std::string& what, double residual_mm)
        : Error(what), residual(residual_mm) {}
    double residual;  // worst leg residual at abort, mm
};

// ----------------------------------------------------------------------------
// Basic types
// ----------------------------------------------------------------------------

inline Mat3 skew(const Vec3& v) {
    Mat3 m;
    m << 0.0, -v.z(), v.y(),
         v.z(), 0.0, -v.x(),
         -v.y(), v.x(), 0.0;
    return m;
}

// Intrinsic Z-Y'-X'' angles in degrees. pitch in [-90, 90]; yaw, roll in
// (-180, 180]. gimbal_lock reports the roll = 0 convention was applied.
struct EulerZyx {
    double yaw = 0.0;
    double pitch = 0.0;
    double roll = 0.0;
    bool gimbal_lock = false;
};

// Cartesian velocity: linear mm/s, angular deg/s (rotation-vector rate).
struct Twist {
    Vec3 linear = Vec3::Zero();
    Vec3 angular = Vec3::Zero();

    Vec6 vector() const {
        Vec6 v;
        v << linear, angular;
        return v;
    }
    static Twist from_vector(const Vec6& v) {
        return Twist{v.head<3>(), v.tail<3>()};
    }

    Twist operator+(const Twist& o) const { return {linear + o.linear, angular + o.angular}; }
    Twist operator-(const Twist& o) const { return {linear - o.linear, angular - o.angular}; }
    Twist operator*(double s) const { return {linear * s, angular * s}; }

    bool is_finite() const { return linear.allFinite() && angular.allFinite(); }
};

// Rigid transform: rotation + translation (mm).
struct Pose {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    static Pose identity() { return {}; }
    static Pose translate(double x, double y, double z) {
        return {Mat3::Identity(), Vec3(x, y, z)};
    }

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

    bool is_finite() const { return rotation.allFinite() && translation.allFinite(); }
};

// ----------------------------------------------------------------------------
// Rotation constructors and conversions
// ----------------------------------------------------------------------------

inline Mat3 rotation_about_x(double deg) {
    const double c = std::cos(deg * kRadPerDeg), s = std::sin(deg * kRadPerDeg);
    Mat3 r;
    r << 1, 0, 0,
         0, c, -s,
         0, s, c;
    return r;
}

inline Mat3 rotation_about_y(double deg) {
    const double c = std::cos(deg * kRadPerDeg), s = std::sin(deg * kRadPerDeg);
    Mat3 r;
    r << c, 0, s,
         0, 1, 0,
         -s, 0, c;
    return r;
}

inline Mat3 rotation_about_z(double deg) {
    const double c = std::cos(deg * kRadPerDeg), s = std::sin(deg * kRadPerDeg);
    Mat3 r;
    r << c, -s, 0,
         s, c, 0,
         0, 0, 1;
    return r;
}

inline Mat3 rotation_from_euler_zyx(const EulerZyx& e) {
    return rotation_about_z(e.yaw) * rotation_about_y(e.pitch) * rotation_about_x(e.roll);
}

// Maps atan2's -180 output onto the (-180, 180] convention.
inline double wrap_half_open_deg(double deg) {
    return (deg <= -180.0) ? deg + 360.0 : deg;
}

inline EulerZyx euler_zyx_from_rotation(const Mat3& r) {
    EulerZyx e;
    const double sp = std::clamp(-r(2, 0), -1.0, 1.0);
    e.pitch = std::asin(sp) * kDegPerRad;
    if (90.0 - std::abs(e.pitch) < 1e-6) {
        // Gimbal lock: only yaw -/+ roll is observable; report roll = 0.
        e.gimbal_lock = true;
        e.roll = 0.0;
        e.yaw = wrap_half_open_deg(std::atan2(-r(0, 1), r(1, 1)) * kDegPerRad);
    } else {
        e.yaw = wrap_half_open_deg(std::atan2(r(1, 0), r(0, 0)) * kDegPerRad);
        e.roll = wrap_half_open_deg(std::atan2(r(2, 1), r(2, 2)) * kDegPerRad);
    }
    return e;
}

// Rotation angle of r in degrees: acos((trace - 1) / 2), clamped into [0, 180].
inline double axis_angle_magnitude_deg(const Mat3& r) {
    const double c = std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
    return std::acos(c) * kDegPerRad;
}

// Exponential map; w is axis * angle in degrees.
inline Mat3 rotation_from_rotvec_deg(const Vec3& w_deg) {
    const double theta = w_deg.norm() * kRadPerDeg;
    if (theta < 1e-12) {
        const Mat3 k = skew(w_deg * kRadPerDeg);
        return Mat3::Identity() + k + 0.5 * k * k;
    }
    const Mat3 k = skew(w_deg.normalized());
    return Mat3::Identity() + std::sin(theta) * k + (1.0 - std::cos(theta)) * k * k;
}

// Log map; returns axis * angle in degrees. Goes through the quaternion form,
// which stays accurate near 0 and 180 deg.
inline Vec3 rotvec_deg_from_rotation(const Mat3& r) {
    const Eigen::AngleAxisd aa(r);
    return aa.axis() * aa.angle() * kDegPerRad;
}

// ----------------------------------------------------------------------------
// Orthonormality maintenance
// ----------------------------------------------------------------------------

inline double orthonormality_error(const Mat3& r) {
    return (r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff();
}

// Nearest proper rotation in the Frobenius sense.
inline Mat3 orthonormalized(const Mat3& r) {
    Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 u = svd.matrixU();
    if ((u * svd.matrixV().transpose()).determinant() < 0.0) {
        u.col(2) *= -1.0;
    }
    return u * svd.matrixV().transpose();
}

// ----------------------------------------------------------------------------
// Pose algebra
// ----------------------------------------------------------------------------

// Applies b, then a.
inline Pose compose(const Pose& a, const Pose& b) {
    Pose out{a.rotation * b.rotation, a.rotation * b.translation + a.translation};
    if (orthonormality_error(out.rotation) > 1e-9) {
        out.rotation = orthonormalized(out.rotation);
    }
    return out;
}

inline Pose inverse(const Pose& p) {
    const Mat3 rt = p.rotation.transpose();
    return {rt, -(rt * p.translation)};
}

// ----------------------------------------------------------------------------
// Plane fitting
// ----------------------------------------------------------------------------

// Least-squares plane normal (smallest singular vector of the centered point
// matrix), sign fixed so the z-component is positive.
inline Vec3 best_fit_plane(std::span<const Vec3> points) {
    if (points.size() < 3) {
        throw DegenerateInput("best_fit_plane: need at least 3 points");
    }
    Vec3 centroid = Vec3::Zero();
    for (const Vec3& p : points) centroid += p;
    centroid /= static_cast<double>(points.size());

    Eigen::MatrixXd m(points.size(), 3);
    for (size_t i = 0; i < points.size(); ++i) {
        m.row(i) = (points[i] - centroid).transpose();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (sv(1) - sv(2) < 1e-9) {
        throw DegenerateGeometry("best_fit_plane: normal not unique (collinear points)");
    }
    Vec3 normal = svd.matrixV().col(2);
    if (normal.z() < 0.0) normal = -normal;
    return normal.normalized();
}

// ----------------------------------------------------------------------------
// Euler-rate kinematics
// ----------------------------------------------------------------------------

// Angular velocity (deg/s, world frame) from ZYX Euler-angle rates (deg/s).
inline Vec3 euler_rates_to_angular_velocity(const EulerZyx& e, const Vec3& rates_ypr) {
    const double cy = std::cos(e.yaw * kRadPerDeg), sy = std::sin(e.yaw * kRadPerDeg);
    const double cp = std::cos(e.pitch * kRadPerDeg), sp = std::sin(e.pitch * kRadPerDeg);
    const Vec3 z_axis(0.0, 0.0, 1.0);
    const Vec3 y_after_yaw(-sy, cy, 0.0);
    const Vec3 x_after_yaw_pitch(cy * cp, sy * cp, -sp);
    return rates_ypr.x() * z_axis + rates_ypr.y() * y_after_yaw + rates_ypr.z() * x_after_yaw_pitch;
}

}  // namespace headtrack
