#pragma once

#include "headtrack/geometry.hpp"

#include <array>
#include <cstdio>

// Parallel string-encoder kinematics: six legs between an imaging-ring base
// and a helmet platform. Leg convention: leg i runs from base_points[i]
// (ring frame) to platform_points[i] (helmet frame).

namespace headtrack {

using LegLengths = std::array<double, 6>;
using LegRates = std::array<double, 6>;

struct StewartGeometry {
    std::array<Vec3, 6> base_points;      // ring frame, mm
    std::array<Vec3, 6> platform_points;  // helmet frame, mm
    Pose nominal_pose;                    // helmet w.r.t. ring at nominal
};

struct LegState {
    LegLengths lengths{};  // mm
    LegRates rates{};      // mm/s
};

// Canonical 6-6 layout used when no measured attachment coordinates exist:
// base points on a 150 mm circle, platform points on a 110 mm circle,
// platform 120 mm above the base at nominal. Well-conditioned across the
// +/-20 mm / +/-14 deg workspace.
inline StewartGeometry canonical_geometry() {
    constexpr std::array<double, 6> base_angles{25.0, 95.0, 145.0, 215.0, 265.0, 335.0};
    constexpr std::array<double, 6> platform_angles{35.0, 85.0, 155.0, 205.0, 275.0, 325.0};
    StewartGeometry g;
    for (int i = 0; i < 6; ++i) {
        const double ab = base_angles[i] * kRadPerDeg;
        const double ap = platform_angles[i] * kRadPerDeg;
        g.base_points[i] = Vec3(150.0 * std::cos(ab), 150.0 * std::sin(ab), 0.0);
        g.platform_points[i] = Vec3(110.0 * std::cos(ap), 110.0 * std::sin(ap), 0.0);
    }
    g.nominal_pose = Pose::translate(0.0, 0.0, 120.0);
    return g;
}

// Degenerate-by-construction layout (all legs parallel): x/y translation is
// unobservable, so the Jacobian is singular. Used by tests.
inline StewartGeometry vertical_leg_geometry(double radius = 120.0, double height = 100.0) {
    StewartGeometry g;
    for (int i = 0; i < 6; ++i) {
        const double a = (30.0 + 60.0 * i) * kRadPerDeg;
        g.base_points[i] = Vec3(radius * std::cos(a), radius * std::sin(a), 0.0);
        g.platform_points[i] = Vec3(radius * std::cos(a), radius * std::sin(a), 0.0);
    }
    g.nominal_pose = Pose::translate(0.0, 0.0, height);
    return g;
}

// l_i = | R h_i + t - b_i |
inline LegLengths inverse_kinematics(const Pose& pose, const StewartGeometry& geom) {
    LegLengths lengths;
    for (int i = 0; i < 6; ++i) {
        lengths[i] = (pose.apply(geom.platform_points[i]) - geom.base_points[i]).norm();
    }
    return lengths;
}

inline LegLengths nominal_lengths(const StewartGeometry& geom) {
    return inverse_kinematics(geom.nominal_pose, geom);
}

// Maps Cartesian rates [mm/s; deg/s] to leg rates: row i is
// [u_i^T, ((R h_i) x u_i)^T * pi/180] with u_i the unit leg direction.
// The deg scaling keeps the twist convention uniform across the library.
inline Mat6 leg_jacobian(const Pose& pose, const StewartGeometry& geom) {
    Mat6 j;
    for (int i = 0; i < 6; ++i) {
        const Vec3 arm = pose.rotation * geom.platform_points[i];
        const Vec3 leg = arm + pose.translation - geom.base_points[i];
        const Vec3 u = leg.normalized();
        j.block<1, 3>(i, 0) = u.transpose();
        j.block<1, 3>(i, 3) = (arm.cross(u) * kRadPerDeg).transpose();
    }
    return j;
}

// Cartesian velocity from measured leg rates (linear solve, not an inverse).
inline Twist twist_from_leg_rates(const Pose& pose, const StewartGeometry& geom,
                                  const LegRates& rates) {
    const Mat6 j = leg_jacobian(pose, geom);
    const Eigen::JacobiSVD<Mat6> svd(j, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double smin = svd.singularValues()(5);
    if (!(smin > 0.0) || svd.singularValues()(0) / smin > 1e12) {
        throw SingularJacobian("twist_from_leg_rates: leg Jacobian is singular");
    }
    Vec6 ldot;
    for (int i = 0; i < 6; ++i) ldot(i) = rates[i];
    return Twist::from_vector(svd.solve(ldot));
}

struct FkOptions {
    double tolerance = 1e-11;       // worst-leg residual, mm
    int max_iterations = 50;
    double lambda0 = 1e-6;          // Levenberg damping
    double condition_limit = 1e12;
};

// Iterative pose recovery from leg lengths: damped Gauss-Newton on the
// six-leg residual, rotation updated through the exponential map. Seed with
// the previous cycle's pose (nominal_pose at startup); the solver is meant
// for the 1 kHz sequential use where the seed is already close.
inline Pose forward_kinematics(const LegLengths& lengths, const StewartGeometry& geom,
                               const Pose& seed, const FkOptions& opts = {}) {
    Pose pose = seed;
    double lambda = opts.lambda0;

    auto residual = [&](const Pose& p) {
        const LegLengths l = inverse_kinematics(p, geom);
        Vec6 r;
        for (int i = 0; i < 6; ++i) r(i) = l[i] - lengths[i];
        return r;
    };

    Vec6 r = residual(pose);
    double r_norm = r.cwiseAbs().maxCoeff();
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        if (r_norm < opts.tolerance) return pose;

        const Mat6 j = leg_jacobian(pose, geom);
        const Eigen::JacobiSVD<Mat6> svd(j);
        const double smin = svd.singularValues()(5);
        if (smin <= 0.0 || svd.singularValues()(0) / smin > opts.condition_limit) {
            throw SingularJacobian("forward_kinematics: leg Jacobian condition number over limit");
        }

        const Mat6 jtj = j.transpose() * j;
        const Vec6 step = (jtj + lambda * Mat6::Identity()).ldlt().solve(-j.transpose() * r);

        Pose trial = pose;
        trial.translation += step.head<3>();
        trial.rotation = rotation_from_rotvec_deg(step.tail<3>()) * trial.rotation;

        const Vec6 r_trial = residual(trial);
        const double r_trial_norm = r_trial.cwiseAbs().maxCoeff();
        if (r_trial_norm < r_norm) {
            pose = trial;
            r = r_trial;
            r_norm = r_trial_norm;
            lambda = std::max(opts.lambda0, lambda * 0.1);
        } else {
            lambda *= 10.0;
            if (lambda > 1e12) break;
        }
    }
    if (r_norm < opts.tolerance) return pose;

    char msg[128];
    std::snprintf(msg, sizeof(msg),
                  "forward_kinematics: no convergence, residual %.3e mm", r_norm);
    throw NoConvergence(msg, r_norm);
}

}  // namespace headtrack
