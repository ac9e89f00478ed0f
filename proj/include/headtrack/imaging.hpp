#pragma once

#include "headtrack/geometry.hpp"

#include <array>
#include <span>

// Mock PET rig: four backward-facing lasers on the helmet standing in for
// positron pairs, four screens/cameras on the imaging ring standing in for
// detectors. Point-source reconstruction intersects the two lines through
// opposite hit points; fine motion correction compares the reconstruction
// against the source position predicted from the encoder-measured pose.

namespace headtrack {

using Vec2 = Eigen::Vector2d;

struct Screen {
    Vec3 center;     // ring frame, nominal hit point = 2D origin
    Vec3 normal;     // unit, outward
    Vec3 u_axis;     // in-plane horizontal
    Vec3 v_axis;     // in-plane vertical
    double halfwidth = 100.0;  // mm
};

struct ImagingRig {
    Vec3 source_helmet = Vec3::Zero();           // laser mount, helmet frame
    std::array<Vec3, 4> laser_dirs_helmet;       // unit, helmet frame
    std::array<Screen, 4> screens;               // ring frame
    double pixel_pitch = 0.1;                    // mm per pixel
    double exposure = 0.015;                     // s
};

// Lasers outward at 0/90/180/270 deg; screens at `screen_distance` from the
// nominal laser mount, facing it, aligned so the nominal pose hits each
// screen origin. Opposite screens are paired (0,2) and (1,3).
inline ImagingRig make_default_rig(const Pose& nominal_pose, double screen_distance = 190.0,
                                   double pixel_pitch = 0.1, double exposure = 0.015) {
    if (!(screen_distance > 0.0)) throw InvalidConfig("rig: screen distance must be positive");
    if (!(pixel_pitch > 0.0)) throw InvalidConfig("rig: pixel pitch must be positive");
    if (!(exposure > 0.0)) throw InvalidConfig("rig: exposure must be positive");

    ImagingRig rig;
    rig.pixel_pitch = pixel_pitch;
    rig.exposure = exposure;
    const Vec3 mount = nominal_pose.apply(rig.source_helmet);
    for (int i = 0; i < 4; ++i) {
        const double a = 90.0 * i * kRadPerDeg;
        rig.laser_dirs_helmet[i] = Vec3(std::cos(a), std::sin(a), 0.0);
        const Vec3 dir_world = nominal_pose.rotation * rig.laser_dirs_helmet[i];
        Screen& s = rig.screens[i];
        s.center = mount + screen_distance * dir_world;
        s.normal = dir_world;
        s.u_axis = Vec3(0.0, 0.0, 1.0).cross(s.normal).normalized();
        s.v_axis = s.normal.cross(s.u_axis);
    }
    return rig;
}

// Ray-plane intersection of every laser with its screen, in screen 2D
// coordinates relative to the nominal hit point. Exact (no camera effects).
inline std::array<Vec2, 4> project_lasers(const Pose& relative_pose, const ImagingRig& rig) {
    std::array<Vec2, 4> coords;
    const Vec3 origin = relative_pose.apply(rig.source_helmet);
    for (int i = 0; i < 4; ++i) {
        const Vec3 dir = relative_pose.rotation * rig.laser_dirs_helmet[i];
        const Screen& s = rig.screens[i];
        const double denom = dir.dot(s.normal);
        if (std::abs(denom) < 1e-9) {
            throw RayMiss("project_lasers: ray parallel to screen " + std::to_string(i));
        }
        const double t = (s.center - origin).dot(s.normal) / denom;
        if (t <= 0.0) {
            throw RayMiss("project_lasers: ray diverges from screen " + std::to_string(i));
        }
        const Vec3 hit = origin + t * dir - s.center;
        coords[i] = Vec2(hit.dot(s.u_axis), hit.dot(s.v_axis));
    }
    return coords;
}

struct CameraObservation {
    double t = 0.0;                       // exposure-end instant
    std::array<Vec2, 4> coords;           // reported (pixel-quantized) positions
    std::array<Vec2, 4> smear_min;        // trail extent over the exposure
    std::array<Vec2, 4> smear_max;
    std::array<bool, 4> direction_change{};  // end of trail not at an extreme
};

struct ExposureSample {
    double t;
    std::array<Vec2, 4> coords;
};

// Collapses the exact hit trajectory over one exposure window into what the
// camera reports: the end-of-trail position quantized to the pixel pitch,
// plus the trail extent. A direction change inside the window is flagged,
// not resolved.
inline CameraObservation camera_observe(std::span<const ExposureSample> window,
                                        const ImagingRig& rig, bool quantize_pixels = true) {
    if (window.empty()) throw DegenerateInput("camera_observe: empty exposure window");
    CameraObservation obs;
    obs.t = window.back().t;
    for (int i = 0; i < 4; ++i) {
        Vec2 lo = window.front().coords[i], hi = lo;
        for (const ExposureSample& s : window) {
            lo = lo.cwiseMin(s.coords[i]);
            hi = hi.cwiseMax(s.coords[i]);
        }
        const Vec2 end = window.back().coords[i];
        obs.smear_min[i] = lo;
        obs.smear_max[i] = hi;
        obs.direction_change[i] =
            (end.x() - lo.x() > 1e-9 && hi.x() - end.x() > 1e-9) ||
            (end.y() - lo.y() > 1e-9 && hi.y() - end.y() > 1e-9);
        obs.coords[i] = end;
        if (quantize_pixels) {
            obs.coords[i] = Vec2(std::round(end.x() / rig.pixel_pitch) * rig.pixel_pitch,
                                 std::round(end.y() / rig.pixel_pitch) * rig.pixel_pitch);
        }
        const Screen& s = rig.screens[i];
        if (std::abs(obs.coords[i].x()) > s.halfwidth || std::abs(obs.coords[i].y()) > s.halfwidth) {
            throw RayMiss("camera_observe: hit outside screen " + std::to_string(i));
        }
    }
    return obs;
}

struct ReconResult {
    Vec3 p = Vec3::Zero();  // ring frame, mm
    double gap = 0.0;       // closest distance between the two lines
};

// Lifts the four 2D observations back to 3D screen points and intersects the
// line through screens (0,2) with the line through screens (1,3). Skew lines
// (from noise) resolve to the midpoint of the mutual closest points, with the
// gap kept as a quality diagnostic.
inline ReconResult reconstruct_source(const CameraObservation& obs, const ImagingRig& rig) {
    std::array<Vec3, 4> pts;
    for (int i = 0; i < 4; ++i) {
        const Screen& s = rig.screens[i];
        pts[i] = s.center + obs.coords[i].x() * s.u_axis + obs.coords[i].y() * s.v_axis;
    }
    const Vec3 a = pts[0], da = (pts[2] - pts[0]).normalized();
    const Vec3 b = pts[1], db = (pts[3] - pts[1]).normalized();
    if (da.cross(db).norm() < 1e-9) {
        throw ParallelLines("reconstruct_source: reconstruction lines are parallel");
    }
    const Vec3 w = a - b;
    const double bb = da.dot(db);
    const double d = da.dot(w), e = db.dot(w);
    const double denom = 1.0 - bb * bb;
    const double sa = (bb * e - d) / denom;
    const double sb = (e - bb * d) / denom;
    const Vec3 pa = a + sa * da;
    const Vec3 pb = b + sb * db;
    return {0.5 * (pa + pb), (pa - pb).norm()};
}

// Residual between the reconstructed source and the position predicted from
// the encoder-measured pose; zero when measurement and cameras are perfect.
inline double fine_motion_correct(const ReconResult& recon, const Pose& measured_pose,
                                  const Vec3& nominal_source_helmet) {
    return (recon.p - measured_pose.apply(nominal_source_helmet)).norm();
}

}  // namespace headtrack
