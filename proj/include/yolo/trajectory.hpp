// Timestamped 2-D motion samples: ingestion, fixed-window segmentation,
// normalization and the `t x y` text format.

#pragma once

#include <algorithm>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "yolo/core.hpp"

namespace yolo {

struct TimedPoint {
    double t{0};  // seconds since session start
    double x{0};  // meters
    double y{0};  // meters

    [[nodiscard]] Vec2 position() const noexcept { return {x, y}; }
    friend bool operator==(const TimedPoint&, const TimedPoint&) = default;
};

[[nodiscard]] inline bool is_valid(const TimedPoint& p) noexcept {
    return std::isfinite(p.t) && p.t >= 0 && std::isfinite(p.x) && std::isfinite(p.y);
}

class Trajectory {
public:
    Trajectory() = default;

    // Validates ordering; throws NonMonotonicTimestamp.
    explicit Trajectory(std::vector<TimedPoint> points) {
        points_.reserve(points.size());
        for (const auto& p : points) append(p);
    }

    void append(const TimedPoint& p) {
        if (!is_valid(p)) throw NonMonotonicTimestamp("sample has non-finite or negative fields");
        if (!points_.empty() && !(p.t > points_.back().t))
            throw NonMonotonicTimestamp("sample at t=" + format_exact(p.t) +
                                        " does not follow t=" + format_exact(points_.back().t));
        points_.push_back(p);
    }

    [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }
    [[nodiscard]] bool empty() const noexcept { return points_.empty(); }
    [[nodiscard]] const TimedPoint& operator[](std::size_t i) const noexcept { return points_[i]; }
    [[nodiscard]] const TimedPoint& front() const noexcept { return points_.front(); }
    [[nodiscard]] const TimedPoint& back() const noexcept { return points_.back(); }
    [[nodiscard]] std::span<const TimedPoint> points() const noexcept { return points_; }
    [[nodiscard]] auto begin() const noexcept { return points_.begin(); }
    [[nodiscard]] auto end() const noexcept { return points_.end(); }

    [[nodiscard]] double duration() const noexcept {
        return points_.size() < 2 ? 0.0 : points_.back().t - points_.front().t;
    }

    [[nodiscard]] std::vector<Vec2> positions() const {
        std::vector<Vec2> out;
        out.reserve(points_.size());
        for (const auto& p : points_) out.push_back(p.position());
        return out;
    }

    friend bool operator==(const Trajectory&, const Trajectory&) = default;

private:
    std::vector<TimedPoint> points_;
};

// Value-returning append; the argument is left untouched when passed as an lvalue.
[[nodiscard]] inline Trajectory append_sample(Trajectory traj, const TimedPoint& p) {
    traj.append(p);
    return traj;
}

[[nodiscard]] inline double path_length(std::span<const Vec2> pts) noexcept {
    double len = 0;
    for (std::size_t i = 1; i < pts.size(); ++i) len += distance(pts[i - 1], pts[i]);
    return len;
}

[[nodiscard]] inline double path_length(const Trajectory& traj) {
    double len = 0;
    for (std::size_t i = 1; i < traj.size(); ++i)
        len += distance(traj[i - 1].position(), traj[i].position());
    return len;
}

// ─── Segmentation ────────────────────────────────────────────────────────────
struct SegmentationConfig {
    double window{3.0};            // seconds
    std::size_t min_points{8};
    double min_path_length{0.02};  // meters

    void validate() const {
        if (!(window > 0) || min_points < 3 || !(min_path_length > 0))
            throw ConfigError("segmentation config requires window > 0, min_points >= 3, "
                              "min_path_length > 0");
    }
};

struct Segment {
    Trajectory points;
    bool idle{false};
};

[[nodiscard]] inline bool is_idle(const Trajectory& seg, const SegmentationConfig& cfg) {
    return seg.size() < cfg.min_points || path_length(seg) < cfg.min_path_length;
}

// Partitions the stream into consecutive windows. A window opens at its first
// sample and holds every sample with t < start + window.
[[nodiscard]] inline std::vector<Segment> split_windows(const Trajectory& traj,
                                                        const SegmentationConfig& cfg) {
    cfg.validate();
    std::vector<Segment> out;
    std::size_t i = 0;
    while (i < traj.size()) {
        const double start = traj[i].t;
        Segment seg;
        while (i < traj.size() && traj[i].t < start + cfg.window) seg.points.append(traj[i++]);
        seg.idle = is_idle(seg.points, cfg);
        out.push_back(std::move(seg));
    }
    return out;
}

// Non-idle windows only.
[[nodiscard]] inline std::vector<Trajectory> segment(const Trajectory& traj,
                                                     const SegmentationConfig& cfg = {}) {
    std::vector<Trajectory> kept;
    for (auto& s : split_windows(traj, cfg))
        if (!s.idle) kept.push_back(std::move(s.points));
    return kept;
}

// ─── Normalization ───────────────────────────────────────────────────────────
// Centroid to origin, bounding-box diagonal to 1, timestamps preserved.
[[nodiscard]] inline Trajectory normalize(const Trajectory& traj) {
    if (traj.size() < 2) throw DegenerateTrajectory("normalize needs at least 2 points");
    Vec2 lo{traj[0].x, traj[0].y};
    Vec2 hi = lo;
    Vec2 sum{};
    for (const auto& p : traj) {
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
        sum += p.position();
    }
    const double diag = norm(hi - lo);
    if (!(diag > 0) || !std::isfinite(diag))
        throw DegenerateTrajectory("normalize needs a nonzero bounding-box diagonal");
    const Vec2 centroid = sum * (1.0 / static_cast<double>(traj.size()));
    std::vector<TimedPoint> pts;
    pts.reserve(traj.size());
    for (const auto& p : traj) {
        const Vec2 q = (p.position() - centroid) * (1.0 / diag);
        pts.push_back({p.t, q.x, q.y});
    }
    return Trajectory(std::move(pts));
}

// ─── `t x y` text format ─────────────────────────────────────────────────────
inline void write_trajectory(std::ostream& os, const Trajectory& traj) {
    for (const auto& p : traj)
        os << format_exact(p.t) << ' ' << format_exact(p.x) << ' ' << format_exact(p.y) << '\n';
}

[[nodiscard]] inline Trajectory read_trajectory(std::istream& is) {
    Trajectory traj;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto fields = split(body);
        if (fields.size() != 3)
            throw ParseError("line " + std::to_string(lineno) + ": expected 't x y'");
        traj.append({parse_double(fields[0]), parse_double(fields[1]), parse_double(fields[2])});
    }
    return traj;
}

}  // namespace yolo
