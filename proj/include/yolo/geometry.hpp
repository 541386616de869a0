// Convex hull of a stroke and the 8-component feature vector the shape
// classifier consumes.
//
// Feature set (all dimensionless, rotation/translation/scale invariant):
//   f1 hull_vertex_count   vertices of the convex hull
//   f2 extent              hull area / minimum-area enclosing rectangle area
//   f3 overlap             hull perimeter / path length
//   f4 closure             |last - first| / path length
//   f5 aspect              short / long side of the minimum-area rectangle
//   f6 winding_abs         sum |turning angle| / 2pi
//   f7 winding_net         |sum turning angle| / 2pi
//   f8 corner_count        turns sharper than 80 degrees
// f6-f8 are measured on the path resampled to 32 equidistant points.

#pragma once

#include <algorithm>
#include <array>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "yolo/core.hpp"
#include "yolo/trajectory.hpp"

namespace yolo {

// ─── Convex hull ─────────────────────────────────────────────────────────────
[[nodiscard]] constexpr double orient(Vec2 o, Vec2 a, Vec2 b) noexcept {
    return cross(a - o, b - o);
}

struct HullPolygon {
    std::vector<Vec2> vertices;  // counter-clockwise, no collinear vertices

    [[nodiscard]] bool degenerate() const noexcept { return vertices.size() < 3; }

    [[nodiscard]] double area() const noexcept {
        double a = 0;
        for (std::size_t i = 0; i < vertices.size(); ++i)
            a += cross(vertices[i], vertices[(i + 1) % vertices.size()]);
        return 0.5 * a;
    }

    // A two-vertex hull is a segment walked there and back.
    [[nodiscard]] double perimeter() const noexcept {
        if (vertices.size() == 2) return 2.0 * distance(vertices[0], vertices[1]);
        double p = 0;
        for (std::size_t i = 0; i < vertices.size(); ++i)
            p += distance(vertices[i], vertices[(i + 1) % vertices.size()]);
        return p;
    }

    [[nodiscard]] bool contains(Vec2 p, double tol = 1e-9) const noexcept {
        if (vertices.size() < 3) {
            if (vertices.size() < 2) return false;
            return std::abs(orient(vertices[0], vertices[1], p)) <= tol;
        }
        for (std::size_t i = 0; i < vertices.size(); ++i)
            if (orient(vertices[i], vertices[(i + 1) % vertices.size()], p) < -tol) return false;
        return true;
    }
};

// Andrew's monotone chain with an exact cross-product predicate. Collinear
// points on hull edges are discarded; an all-collinear input yields its two
// extreme points.
[[nodiscard]] inline HullPolygon convex_hull(std::span<const Vec2> input) {
    std::vector<Vec2> pts(input.begin(), input.end());
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 2) throw TooFewPoints("convex hull needs at least 2 distinct points");

    std::vector<Vec2> hull(2 * pts.size());
    std::size_t k = 0;
    for (const Vec2& p : pts) {
        while (k >= 2 && orient(hull[k - 2], hull[k - 1], p) <= 0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && orient(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return HullPolygon{std::move(hull)};
}

// Hull vertices whose turn is lost in rounding (sine below tol) do not count;
// rotating a straight run otherwise adds or removes them at random.
[[nodiscard]] inline std::size_t significant_vertex_count(const HullPolygon& hull, double tol = 1e-9) {
    std::vector<Vec2> v = hull.vertices;
    for (bool changed = true; changed && v.size() > 3;) {
        changed = false;
        for (std::size_t i = 0; i < v.size() && v.size() > 3; ++i) {
            const Vec2 a = v[(i + v.size() - 1) % v.size()], b = v[i], c = v[(i + 1) % v.size()];
            if (orient(a, b, c) <= tol * norm(b - a) * norm(c - b)) {
                v.erase(v.begin() + static_cast<std::ptrdiff_t>(i));
                changed = true;
            }
        }
    }
    return v.size();
}

struct OrientedBox {
    double long_side{0};
    double short_side{0};
    [[nodiscard]] double area() const noexcept { return long_side * short_side; }
};

// Rotating calipers over hull edges; the optimal rectangle is flush with one.
[[nodiscard]] inline OrientedBox min_area_rect(const HullPolygon& hull) {
    const auto& v = hull.vertices;
    if (v.size() < 2) return {};
    if (v.size() == 2) return {distance(v[0], v[1]), 0.0};
    OrientedBox best{};
    double best_area = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Vec2 edge = v[(i + 1) % v.size()] - v[i];
        const double len = norm(edge);
        if (len == 0) continue;
        const Vec2 u = edge * (1.0 / len);
        const Vec2 n{-u.y, u.x};
        double lo_u = 0, hi_u = 0, hi_n = 0;
        for (const Vec2& p : v) {
            const Vec2 d = p - v[i];
            lo_u = std::min(lo_u, dot(d, u));
            hi_u = std::max(hi_u, dot(d, u));
            hi_n = std::max(hi_n, dot(d, n));
        }
        const double w = hi_u - lo_u;
        if (w * hi_n < best_area) {
            best_area = w * hi_n;
            best = {std::max(w, hi_n), std::min(w, hi_n)};
        }
    }
    return best;
}

// ─── Path resampling and turning ─────────────────────────────────────────────
inline constexpr std::size_t kResampleCount = 32;
inline constexpr double kCornerThreshold = 80.0 * kPi / 180.0;
inline constexpr double kCollinearRatio = 1e-9;

// n points equally spaced in arc length, endpoints included.
[[nodiscard]] inline std::vector<Vec2> resample(std::span<const Vec2> pts, std::size_t n) {
    const double total = path_length(pts);
    if (pts.size() < 2 || !(total > 0) || n < 2)
        throw DegenerateTrajectory("resampling needs a path of nonzero length");
    std::vector<Vec2> out;
    out.reserve(n);
    out.push_back(pts.front());
    const double step = total / static_cast<double>(n - 1);
    double walked = 0;  // arc length at pts[seg]
    std::size_t seg = 0;
    for (std::size_t k = 1; k + 1 < n; ++k) {
        const double target = step * static_cast<double>(k);
        while (seg + 1 < pts.size() && walked + distance(pts[seg], pts[seg + 1]) < target) {
            walked += distance(pts[seg], pts[seg + 1]);
            ++seg;
        }
        if (seg + 1 >= pts.size()) {
            out.push_back(pts.back());
            continue;
        }
        const double len = distance(pts[seg], pts[seg + 1]);
        const double f = len > 0 ? (target - walked) / len : 0.0;
        out.push_back(pts[seg] + (pts[seg + 1] - pts[seg]) * f);
    }
    out.push_back(pts.back());
    return out;
}

// Signed exterior angle at each interior vertex, in (-pi, pi].
[[nodiscard]] inline std::vector<double> turning_angles(std::span<const Vec2> pts) {
    std::vector<double> out;
    if (pts.size() < 3) return out;
    out.reserve(pts.size() - 2);
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
        const Vec2 a = pts[i] - pts[i - 1];
        const Vec2 b = pts[i + 1] - pts[i];
        if (norm(a) == 0 || norm(b) == 0) continue;
        out.push_back(std::atan2(cross(a, b), dot(a, b)));
    }
    return out;
}

// A corner that falls between two resampled points shows up as two same-sign
// turns; such a pair is counted once when its sum clears the threshold.
[[nodiscard]] inline std::size_t count_corners(std::span<const double> turns,
                                               double threshold = kCornerThreshold) {
    std::size_t corners = 0;
    std::size_t i = 0;
    while (i < turns.size()) {
        if (std::abs(turns[i]) > threshold) {
            ++corners;
            ++i;
        } else if (i + 1 < turns.size() && (turns[i] > 0) == (turns[i + 1] > 0) &&
                   std::abs(turns[i] + turns[i + 1]) > threshold) {
            ++corners;
            i += 2;
        } else {
            ++i;
        }
    }
    return corners;
}

// ─── FeatureVector ───────────────────────────────────────────────────────────
inline constexpr std::size_t kFeatureCount = 8;

struct FeatureVector {
    std::array<double, kFeatureCount> values{};

    [[nodiscard]] double hull_vertex_count() const noexcept { return values[0]; }
    [[nodiscard]] double extent() const noexcept { return values[1]; }
    [[nodiscard]] double overlap() const noexcept { return values[2]; }
    [[nodiscard]] double closure() const noexcept { return values[3]; }
    [[nodiscard]] double aspect() const noexcept { return values[4]; }
    [[nodiscard]] double winding_abs() const noexcept { return values[5]; }
    [[nodiscard]] double winding_net() const noexcept { return values[6]; }
    [[nodiscard]] double corner_count() const noexcept { return values[7]; }

    [[nodiscard]] double operator[](std::size_t i) const noexcept { return values[i]; }
    double& operator[](std::size_t i) noexcept { return values[i]; }

    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

[[nodiscard]] inline FeatureVector extract_features(const Trajectory& seg) {
    if (seg.size() < 3) throw DegenerateTrajectory("feature extraction needs at least 3 points");
    const Trajectory norm_seg = normalize(seg);
    const std::vector<Vec2> pts = norm_seg.positions();
    const double length = path_length(pts);
    if (!(length > 0)) throw DegenerateTrajectory("feature extraction needs nonzero path length");

    const HullPolygon hull = convex_hull(pts);
    const OrientedBox box = min_area_rect(hull);
    const auto turns = turning_angles(resample(pts, kResampleCount));
    double abs_turn = 0, net_turn = 0;
    for (double a : turns) {
        abs_turn += std::abs(a);
        net_turn += a;
    }

    // Rounding can lift a straight stroke off its line; such slivers are
    // treated as the collinear two-vertex hull.
    const bool collinear = hull.degenerate() || !(box.short_side > kCollinearRatio * box.long_side);

    FeatureVector f;
    f[0] = collinear ? 2.0 : static_cast<double>(significant_vertex_count(hull));
    f[1] = collinear ? 0.0 : std::clamp(hull.area() / box.area(), 0.0, 1.0);
    f[2] = hull.perimeter() / length;
    f[3] = std::clamp(distance(pts.front(), pts.back()) / length, 0.0, 1.0);
    f[4] = !collinear ? std::clamp(box.short_side / box.long_side, 0.0, 1.0) : 0.0;
    f[5] = abs_turn / kTwoPi;
    f[6] = std::abs(net_turn) / kTwoPi;
    f[7] = static_cast<double>(count_corners(turns));
    return f;
}

// ─── Feature corpus text format: `label f1 ... f8` ───────────────────────────
struct LabeledFeatures {
    FeatureVector features;
    ShapeClass label{};
};

inline void write_feature_line(std::ostream& os, const FeatureVector& f, ShapeClass label) {
    os << to_string(label);
    for (double v : f.values) os << ' ' << format_exact(v);
    os << '\n';
}

[[nodiscard]] inline LabeledFeatures parse_feature_line(std::string_view line) {
    const auto fields = split(trim(line));
    if (fields.size() != kFeatureCount + 1)
        throw ParseError("feature record needs a label and " + std::to_string(kFeatureCount) +
                         " values");
    const auto label = parse_shape(fields[0]);
    if (!label) throw ParseError("unknown shape label '" + std::string(fields[0]) + "'");
    LabeledFeatures rec{{}, *label};
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        rec.features[i] = parse_double(fields[i + 1]);
        if (!std::isfinite(rec.features[i])) throw ParseError("feature values must be finite");
    }
    return rec;
}

inline void write_feature_corpus(std::ostream& os, std::span<const LabeledFeatures> corpus) {
    for (const auto& r : corpus) write_feature_line(os, r.features, r.label);
}

[[nodiscard]] inline std::vector<LabeledFeatures> read_feature_corpus(std::istream& is) {
    std::vector<LabeledFeatures> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        try {
            out.push_back(parse_feature_line(body));
        } catch (const ParseError& e) {
            throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace yolo
