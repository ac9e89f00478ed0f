#pragma once

#include "headtrack/simulation.hpp"
#include "headtrack/trajectory.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

// Delimited-text readers and writers. All files are comma-separated with a
// single '#'-prefixed header naming the columns; numbers are written with
// %.12g so identical runs serialize byte-identically.
//
// Marker file:      t,leye_x,..,c7_z                      (1 + 15 columns)
// Trajectory file:  t,pose(6),twist(6),accel(6)           (1 + 18 columns)
// Sim log:          t plus thirteen 6-column groups       (see kSimLogHeader)
// Camera log:       t,cam coords/smears,recon,gap,residual

namespace headtrack {

namespace io_detail {

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline void append_vec6(std::string& line, const Vec6& v) {
    for (int i = 0; i < 6; ++i) {
        line += ',';
        line += fmt(v(i));
    }
}

inline std::vector<double> parse_row(const std::string& line, size_t expected,
                                     const std::string& file, int lineno) {
    std::vector<double> out;
    out.reserve(expected);
    size_t pos = 0;
    while (pos <= line.size()) {
        size_t next = line.find(',', pos);
        if (next == std::string::npos) next = line.size();
        const std::string tok = line.substr(pos, next - pos);
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str() || *end != '\0') {
            throw DegenerateInput(file + ":" + std::to_string(lineno) + ": bad number '" + tok + "'");
        }
        if (!std::isfinite(v)) {
            throw DegenerateInput(file + ":" + std::to_string(lineno) + ": non-finite value '" +
                                  tok + "'");
        }
        out.push_back(v);
        pos = next + 1;
        if (next == line.size()) break;
    }
    if (out.size() != expected) {
        throw DegenerateInput(file + ":" + std::to_string(lineno) + ": expected " +
                              std::to_string(expected) + " columns, got " +
                              std::to_string(out.size()));
    }
    return out;
}

inline std::vector<std::string> read_data_lines(const std::string& path,
                                                std::vector<int>* linenos = nullptr) {
    std::ifstream in(path);
    if (!in) throw DegenerateInput(path + ": cannot open");
    std::vector<std::string> lines;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        lines.push_back(line);
        if (linenos) linenos->push_back(lineno);
    }
    return lines;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(path + ": cannot open for writing");
    out << content;
    if (!out) throw Error(path + ": write failed");
}

}  // namespace io_detail

// ----------------------------------------------------------------------------
// Marker files
// ----------------------------------------------------------------------------

inline constexpr const char* kMarkerHeader =
    "# t,leye_x,leye_y,leye_z,reye_x,reye_y,reye_z,lear_x,lear_y,lear_z,"
    "rear_x,rear_y,rear_z,c7_x,c7_y,c7_z";

inline void write_marker_file(const std::string& path, std::span<const MarkerFrame> frames) {
    std::string out(kMarkerHeader);
    out += '\n';
    for (const MarkerFrame& f : frames) {
        std::string line = io_detail::fmt(f.t);
        for (const Vec3* p : {&f.leye, &f.reye, &f.lear, &f.rear, &f.c7}) {
            for (int i = 0; i < 3; ++i) {
                line += ',';
                line += io_detail::fmt((*p)(i));
            }
        }
        out += line;
        out += '\n';
    }
    io_detail::write_file(path, out);
}

inline std::vector<MarkerFrame> read_marker_file(const std::string& path) {
    std::vector<int> linenos;
    const auto lines = io_detail::read_data_lines(path, &linenos);
    if (lines.empty()) throw DegenerateInput(path + ": no marker frames");
    std::vector<MarkerFrame> frames;
    frames.reserve(lines.size());
    for (size_t i = 0; i < lines.size(); ++i) {
        const auto v = io_detail::parse_row(lines[i], 16, path, linenos[i]);
        MarkerFrame f;
        f.t = v[0];
        f.leye = Vec3(v[1], v[2], v[3]);
        f.reye = Vec3(v[4], v[5], v[6]);
        f.lear = Vec3(v[7], v[8], v[9]);
        f.rear = Vec3(v[10], v[11], v[12]);
        f.c7 = Vec3(v[13], v[14], v[15]);
        if (!frames.empty() && f.t <= frames.back().t) {
            throw DegenerateInput(path + ":" + std::to_string(linenos[i]) +
                                  ": timestamps must be strictly increasing");
        }
        frames.push_back(f);
    }
    return frames;
}

// ----------------------------------------------------------------------------
// Trajectory files
// ----------------------------------------------------------------------------

inline constexpr const char* kTrajectoryHeader =
    "# t,x,y,z,yaw,pitch,roll,vx,vy,vz,wx,wy,wz,ax,ay,az,ayaw,apitch,aroll";

inline void write_trajectory_file(const std::string& path,
                                  std::span<const TrajectorySample> samples) {
    std::string out(kTrajectoryHeader);
    out += '\n';
    for (const TrajectorySample& s : samples) {
        std::string line = io_detail::fmt(s.t);
        io_detail::append_vec6(line, encode_pose(s.pose));
        io_detail::append_vec6(line, s.twist.vector());
        io_detail::append_vec6(line, s.accel);
        out += line;
        out += '\n';
    }
    io_detail::write_file(path, out);
}

inline std::vector<TrajectorySample> read_trajectory_file(const std::string& path) {
    std::vector<int> linenos;
    const auto lines = io_detail::read_data_lines(path, &linenos);
    if (lines.size() < 2) throw DegenerateInput(path + ": need at least 2 trajectory samples");
    std::vector<TrajectorySample> samples;
    samples.reserve(lines.size());
    for (size_t i = 0; i < lines.size(); ++i) {
        const auto v = io_detail::parse_row(lines[i], 19, path, linenos[i]);
        TrajectorySample s;
        s.t = v[0];
        Vec6 p, tw, acc;
        for (int k = 0; k < 6; ++k) {
            p(k) = v[1 + k];
            tw(k) = v[7 + k];
            acc(k) = v[13 + k];
        }
        s.pose = decode_pose(p);
        s.twist = Twist::from_vector(tw);
        s.accel = acc;
        if (!samples.empty() && s.t <= samples.back().t) {
            throw DegenerateInput(path + ":" + std::to_string(linenos[i]) +
                                  ": timestamps must be strictly increasing");
        }
        samples.push_back(s);
    }
    return samples;
}

// ----------------------------------------------------------------------------
// Sim log files
// ----------------------------------------------------------------------------

namespace io_detail {

inline constexpr std::array<const char*, 13> kSimLogGroups{
    "des", "head", "headv", "ring", "ringv", "rel", "relraw", "relfilt",
    "relvt", "relvraw", "relvfilt", "cmd5", "cmd3"};

inline std::string simlog_header() {
    // Pose-encoded groups use yaw/pitch/roll; twist and rotation-vector
    // groups use rx/ry/rz.
    std::string h = "# t";
    for (const char* g : kSimLogGroups) {
        const bool pose_encoded = std::string_view(g) == "des" || std::string_view(g) == "head" ||
                                  std::string_view(g) == "ring";
        const char* suffix[6] = {"x", "y", "z", pose_encoded ? "yaw" : "rx",
                                 pose_encoded ? "pitch" : "ry", pose_encoded ? "roll" : "rz"};
        for (const char* s : suffix) {
            h += ',';
            h += g;
            h += '_';
            h += s;
        }
    }
    return h;
}

}  // namespace io_detail

inline void write_simlog_file(const std::string& path, const SimLog& log) {
    std::string out;
    out += "# encoder_rate = " + std::to_string(log.schedule.encoder_rate) + "\n";
    out += "# ur5_rate = " + std::to_string(log.schedule.ur5_rate) + "\n";
    out += "# ur3_rate = " + std::to_string(log.schedule.ur3_rate) + "\n";
    out += "# camera_rate = " + std::to_string(log.schedule.camera_rate) + "\n";
    out += "# duration = " + io_detail::fmt(log.schedule.duration) + "\n";
    out += "# nominal = ";
    {
        const Vec6 nom = encode_pose(log.nominal_pose);
        for (int i = 0; i < 6; ++i) {
            if (i) out += ' ';
            out += io_detail::fmt(nom(i));
        }
        out += '\n';
    }
    out += io_detail::simlog_header() + "\n";
    for (const EncoderLogRow& r : log.encoder_rows) {
        std::string line = io_detail::fmt(r.t);
        for (const Vec6* v :
             {&r.desired_head, &r.head_pose, &r.head_twist, &r.ring_pose, &r.ring_twist,
              &r.rel_true, &r.rel_meas_raw, &r.rel_meas_filt, &r.relvel_true, &r.relvel_meas_raw,
              &r.relvel_meas_filt, &r.ur5_cmd, &r.ur3_cmd}) {
            io_detail::append_vec6(line, *v);
        }
        out += line;
        out += '\n';
    }
    io_detail::write_file(path, out);
}

// Reads a sim log back (metadata comments restore the schedule fields the
// metrics need). Truncated or malformed rows are reported with line numbers.
inline SimLog read_simlog_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DegenerateInput(path + ": cannot open");
    SimLog log;
    std::string line;
    int lineno = 0;
    bool saw_rate = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream meta(line.substr(1));
            std::string key, eq;
            meta >> key >> eq;
            if (eq == "=") {
                if (key == "encoder_rate") { meta >> log.schedule.encoder_rate; saw_rate = true; }
                else if (key == "ur5_rate") meta >> log.schedule.ur5_rate;
                else if (key == "ur3_rate") meta >> log.schedule.ur3_rate;
                else if (key == "camera_rate") meta >> log.schedule.camera_rate;
                else if (key == "duration") meta >> log.schedule.duration;
                else if (key == "nominal") {
                    Vec6 nom;
                    for (int i = 0; i < 6; ++i) meta >> nom(i);
                    log.nominal_pose = decode_pose(nom);
                }
            }
            continue;
        }
        const auto v = io_detail::parse_row(line, 1 + 13 * 6, path, lineno);
        EncoderLogRow r;
        r.t = v[0];
        Vec6* groups[13] = {&r.desired_head, &r.head_pose,      &r.head_twist,  &r.ring_pose,
                            &r.ring_twist,   &r.rel_true,       &r.rel_meas_raw, &r.rel_meas_filt,
                            &r.relvel_true,  &r.relvel_meas_raw, &r.relvel_meas_filt, &r.ur5_cmd,
                            &r.ur3_cmd};
        for (int g = 0; g < 13; ++g) {
            for (int k = 0; k < 6; ++k) (*groups[g])(k) = v[1 + g * 6 + k];
        }
        if (!log.encoder_rows.empty() && r.t <= log.encoder_rows.back().t) {
            throw DegenerateInput(path + ":" + std::to_string(lineno) +
                                  ": timestamps must be strictly increasing");
        }
        log.encoder_rows.push_back(r);
    }
    if (!saw_rate || log.encoder_rows.empty()) {
        throw DegenerateInput(path + ": not a sim log (missing metadata or rows)");
    }
    return log;
}

// ----------------------------------------------------------------------------
// Camera log and metrics files
// ----------------------------------------------------------------------------

inline void write_camera_file(const std::string& path, const SimLog& log) {
    std::string out =
        "# t,c0_x,c0_y,c1_x,c1_y,c2_x,c2_y,c3_x,c3_y,"
        "smear0,smear1,smear2,smear3,recon_x,recon_y,recon_z,gap,residual,direction_change\n";
    for (const CameraLogRow& r : log.camera_rows) {
        std::string line = io_detail::fmt(r.t);
        for (int i = 0; i < 4; ++i) {
            line += ',' + io_detail::fmt(r.coords[i].x()) + ',' + io_detail::fmt(r.coords[i].y());
        }
        for (int i = 0; i < 4; ++i) {
            line += ',' + io_detail::fmt((r.smear_max[i] - r.smear_min[i]).norm());
        }
        for (int i = 0; i < 3; ++i) line += ',' + io_detail::fmt(r.recon(i));
        line += ',' + io_detail::fmt(r.gap);
        line += ',' + io_detail::fmt(r.residual);
        line += r.direction_change ? ",1" : ",0";
        out += line;
        out += '\n';
    }
    io_detail::write_file(path, out);
}

inline std::string metrics_to_text(const Metrics& m) {
    std::string out;
    const auto put = [&out](const char* key, double v) {
        out += key;
        out += " = ";
        out += io_detail::fmt(v);
        out += '\n';
    };
    put("xy_error_max", m.xy_error_max);
    put("xy_error_mean", m.xy_error_mean);
    put("xyz_error_max", m.xyz_error_max);
    put("xyz_error_mean", m.xyz_error_mean);
    put("rot_error_max", m.rot_error_max);
    put("rot_error_mean", m.rot_error_mean);
    put("lag_typical", m.lag_typical);
    put("lag_max", m.lag_max);
    put("measurement_error_mean", m.meas_pos_error_mean);
    put("measurement_error_sd", m.meas_pos_error_sd);
    put("measurement_velocity_error_mean", m.meas_vel_error_mean);
    put("measurement_velocity_error_sd", m.meas_vel_error_sd);
    put("recon_residual_mean", m.recon_residual_mean);
    put("recon_residual_sd", m.recon_residual_sd);
    put("clearance_min", m.clearance_min);
    return out;
}

// ----------------------------------------------------------------------------
// Plot-ready report files
// ----------------------------------------------------------------------------

// Writes report_<axis>.csv files (time, reference, tracked, difference) into
// `dir`. pair = "coarse": head displacement vs ring displacement.
// pair = "reproduction": commanded head pose vs actual head pose.
inline void write_report_files(const std::string& dir, const SimLog& log, const std::string& pair) {
    if (pair != "coarse" && pair != "reproduction") {
        throw InvalidConfig("report: pair must be 'coarse' or 'reproduction'");
    }
    if (log.encoder_rows.empty()) throw DegenerateInput("report: empty log");
    const std::array<const char*, 6> axes{"x", "y", "z", "yaw", "pitch", "roll"};
    const Vec6 head0 = log.encoder_rows.front().head_pose;
    const Vec6 ring0 = log.encoder_rows.front().ring_pose;
    const Vec6 des0 = log.encoder_rows.front().desired_head;
    for (int axis = 0; axis < 6; ++axis) {
        std::string out = "# t,reference,tracked,difference\n";
        for (const EncoderLogRow& r : log.encoder_rows) {
            double ref, trk;
            if (pair == "coarse") {
                ref = r.head_pose(axis) - head0(axis);
                trk = r.ring_pose(axis) - ring0(axis);
            } else {
                ref = r.desired_head(axis) - des0(axis);
                trk = r.head_pose(axis) - des0(axis);
            }
            out += io_detail::fmt(r.t) + ',' + io_detail::fmt(ref) + ',' + io_detail::fmt(trk) +
                   ',' + io_detail::fmt(ref - trk) + '\n';
        }
        io_detail::write_file((std::filesystem::path(dir) / ("report_" + std::string(axes[axis]) + ".csv")).string(),
                              out);
    }
}

}  // namespace headtrack
