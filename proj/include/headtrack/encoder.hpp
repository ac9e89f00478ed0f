#pragma once

#include "headtrack/geometry.hpp"

#include <cmath>
#include <cstdint>

namespace headtrack {

// count = floor(length * counts_per_mm); monotone non-decreasing in length.
inline std::int64_t quantize(double length_mm, double counts_per_mm = 60.0) {
    return static_cast<std::int64_t>(std::floor(length_mm * counts_per_mm));
}

// One quadrature channel with edge-timed velocity estimation: velocity is the
// count width divided by the time between encoder edges, not a position
// difference. Edge hardware timestamps edges on its own clock, far finer than
// the sample rate, so edge times are recovered by interpolating the length
// between samples. Returns 0 until two edge events have been observed. When
// the time since the last edge exceeds the previous edge interval, the
// magnitude is capped at (1/counts_per_mm) / (now - last_edge_time): a stale
// estimate shrinks toward zero instead of holding.
class EncoderChannel {
  public:
    explicit EncoderChannel(double counts_per_mm = 60.0, std::int64_t counts_per_index = 4000)
        : counts_per_mm_(counts_per_mm), counts_per_index_(counts_per_index) {}

    // Feed one sample; returns the current velocity estimate in mm/s.
    double advance(double length_mm, double now) {
        const std::int64_t new_count = quantize(length_mm, counts_per_mm_);
        if (!primed_) {
            count_ = new_count;
            prev_len_ = length_mm;
            prev_time_ = now;
            primed_ = true;
            return 0.0;
        }
        const std::int64_t dc = new_count - count_;
        if (dc != 0) {
            // Last boundary crossed inside (prev_time, now]; recover its time
            // by interpolating the length trajectory across the sample gap.
            const double boundary =
                (dc > 0 ? static_cast<double>(new_count) : static_cast<double>(new_count + 1)) /
                counts_per_mm_;
            double t_edge = now;
            if (std::abs(length_mm - prev_len_) > 1e-15) {
                const double frac = std::clamp((boundary - prev_len_) / (length_mm - prev_len_), 0.0, 1.0);
                t_edge = prev_time_ + frac * (now - prev_time_);
            }
            if (has_edge_) {
                const double dt = t_edge - last_edge_time_;
                if (dt > 0.0) {
                    velocity_ = (static_cast<double>(dc) / counts_per_mm_) / dt;
                    prev_edge_interval_ = dt / static_cast<double>(std::abs(dc));
                }
            }
            has_edge_ = true;
            last_edge_time_ = t_edge;
            latch_index_crossings(new_count);
            count_ = new_count;
        }
        prev_len_ = length_mm;
        prev_time_ = now;
        return velocity_estimate(now);
    }

    double velocity_estimate(double now) const {
        if (!has_edge_ || prev_edge_interval_ <= 0.0) return 0.0;
        const double stale = now - last_edge_time_;
        if (stale > prev_edge_interval_) {
            const double cap = (1.0 / counts_per_mm_) / stale;
            return std::copysign(std::min(std::abs(velocity_), cap), velocity_);
        }
        return velocity_;
    }

    double measured_length() const { return static_cast<double>(count_) / counts_per_mm_; }

    double counts_per_mm() const { return counts_per_mm_; }
    std::int64_t count() const { return count_; }
    double last_edge_time() const { return last_edge_time_; }
    double prev_edge_interval() const { return prev_edge_interval_; }
    std::int64_t index_latch() const { return index_latch_; }
    bool index_seen() const { return index_seen_; }

  private:
    void latch_index_crossings(std::int64_t new_count) {
        const auto bucket = [this](std::int64_t c) {
            // Floor division, valid for negative counts too.
            std::int64_t q = c / counts_per_index_;
            if (c % counts_per_index_ != 0 && c < 0) --q;
            return q;
        };
        const std::int64_t b_old = bucket(count_), b_new = bucket(new_count);
        if (b_old != b_new) {
            index_latch_ = (b_new > b_old ? b_new : b_old) * counts_per_index_;
            index_seen_ = true;
        }
    }

    double counts_per_mm_;
    std::int64_t counts_per_index_;
    std::int64_t count_ = 0;
    std::int64_t index_latch_ = 0;
    double last_edge_time_ = 0.0;
    double prev_edge_interval_ = 0.0;
    double velocity_ = 0.0;
    double prev_len_ = 0.0;
    double prev_time_ = 0.0;
    bool primed_ = false;
    bool has_edge_ = false;
    bool index_seen_ = false;
};

}  // namespace headtrack
