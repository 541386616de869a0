// Synthetic stroke generators for the six movement shapes. The same outlines
// drive the robot's own movements (at zero noise) and the training/evaluation
// corpora (with per-example style variation and sensor noise).

#pragma once

#include <cmath>
#include <algorithm>
#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "yolo/core.hpp"
#include "yolo/geometry.hpp"
#include "yolo/trajectory.hpp"

namespace yolo {

struct NoiseProfile {
    double jitter_sigma{0};   // fraction of shape scale
    double drop_rate{0};      // probability a sample is omitted
    std::uint64_t seed{0};

    void validate() const {
        if (!(jitter_sigma >= 0) || !std::isfinite(jitter_sigma))
            throw ConfigError("jitter_sigma must be finite and >= 0");
        if (!(drop_rate >= 0 && drop_rate <= 0.5)) throw ConfigError("drop_rate must be in [0, 0.5]");
    }
};

namespace noise_presets {
// Computer-mouse strokes.
inline constexpr NoiseProfile mouse{0.01, 0.0, 0};
// Physical robot: noisier optical sensor with lost samples.
inline constexpr NoiseProfile robot{0.05, 0.1, 0};
// Condition the default model is trained at.
inline constexpr NoiseProfile training{0.02, 0.0, 42};
}  // namespace noise_presets

// Per-example variation of an outline, drawn from the generator's RNG.
struct ShapeStyle {
    double aspect{1.0};     // circle/rect/loop: minor/major proportion
    double sweep{1.0};      // circle: turns traced
    double rounding{0.0};   // rect: corner radius / short side
    double turns{2.0};      // curl: spiral turns
    double inner{0.15};     // curl: start radius / end radius
    double bow{0.0};        // line: sagitta / length
    int spikes{4};          // spike: number of teeth
    double sharpness{2.0};  // spike: tooth height / half-width
    bool mirrored{false};   // clockwise instead of counter-clockwise
};

[[nodiscard]] inline ShapeStyle default_style(ShapeClass c) {
    ShapeStyle s;
    if (c == ShapeClass::Rect) s.aspect = 0.75;
    if (c == ShapeClass::Loop) s.aspect = 1.0;
    return s;
}

inline constexpr std::size_t kOutlineResolution = 720;
// Time a generated stroke takes; fits inside one 3 s observation window.
inline constexpr double kStrokeDuration = 2.5;

namespace detail {

[[nodiscard]] inline std::vector<Vec2> polyline_outline(std::vector<Vec2> corners) {
    // Densify so every outline has comparable resolution.
    std::vector<Vec2> out;
    const double total = path_length(corners);
    for (std::size_t i = 0; i + 1 < corners.size(); ++i) {
        const double len = distance(corners[i], corners[i + 1]);
        const auto steps = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::ceil(kOutlineResolution * len / total)));
        for (std::size_t k = 0; k < steps; ++k)
            out.push_back(corners[i] + (corners[i + 1] - corners[i]) *
                                           (static_cast<double>(k) / static_cast<double>(steps)));
    }
    out.push_back(corners.back());
    return out;
}

template <class F>
[[nodiscard]] std::vector<Vec2> parametric_outline(F&& f) {
    std::vector<Vec2> out;
    out.reserve(kOutlineResolution + 1);
    for (std::size_t i = 0; i <= kOutlineResolution; ++i)
        out.push_back(f(static_cast<double>(i) / static_cast<double>(kOutlineResolution)));
    return out;
}

// Uniform scale so the larger bounding-box side is 1; first point at origin.
[[nodiscard]] inline std::vector<Vec2> unit_scaled(std::vector<Vec2> pts) {
    Vec2 lo = pts.front(), hi = pts.front();
    for (const Vec2& p : pts) {
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
    const double side = std::max(hi.x - lo.x, hi.y - lo.y);
    const Vec2 origin = pts.front();
    for (Vec2& p : pts) p = (p - origin) * (1.0 / side);
    return pts;
}

// Smooth random displacement over stroke progress u in [0,1]: Fourier
// components of 1..kTremorHarmonics cycles per stroke with 1/f^2 amplitudes
// (drift-like spectrum) and Gaussian coefficients, scaled so each axis has
// RMS sigma.
inline constexpr int kTremorHarmonics = 3;

class Tremor {
public:
    Tremor(double sigma, std::mt19937_64& rng) {
        std::normal_distribution<double> gauss(0.0, 1.0);
        double norm2 = 0;
        for (int f = 1; f <= kTremorHarmonics; ++f) norm2 += 1.0 / std::pow(f, 4);
        const double scale = sigma / std::sqrt(norm2);
        for (int f = 0; f < kTremorHarmonics; ++f) {
            const double w = scale / ((f + 1) * (f + 1));
            for (auto& c : coeff_[f]) c = sigma > 0 ? w * gauss(rng) : 0.0;
        }
    }

    [[nodiscard]] Vec2 operator()(double u) const noexcept {
        Vec2 d{};
        for (int f = 0; f < kTremorHarmonics; ++f) {
            const double a = kTwoPi * (f + 1) * u;
            const double c = std::cos(a), s = std::sin(a);
            d.x += coeff_[f][0] * c + coeff_[f][1] * s;
            d.y += coeff_[f][2] * c + coeff_[f][3] * s;
        }
        return d;
    }

private:
    std::array<std::array<double, 4>, kTremorHarmonics> coeff_{};
};

[[nodiscard]] inline Tremor tremor(double sigma, std::mt19937_64& rng) { return {sigma, rng}; }

}  // namespace detail

// Dense noiseless outline, larger bounding-box side 1, starting at the origin.
[[nodiscard]] inline std::vector<Vec2> shape_outline(ShapeClass c, const ShapeStyle& s) {
    std::vector<Vec2> pts;
    switch (c) {
        case ShapeClass::Circle:
            pts = detail::parametric_outline([&](double u) {
                const double a = -kPi / 2 + kTwoPi * s.sweep * u;
                return Vec2{std::cos(a), s.aspect * std::sin(a)};
            });
            break;
        case ShapeClass::Rect: {
            const double w = 1.0, h = s.aspect;
            const double r = s.rounding * std::min(w, h);
            std::vector<Vec2> corners{{0, 0}};
            auto arc = [&](Vec2 centre, double from) {
                constexpr int kArcSteps = 12;
                for (int k = 0; k <= kArcSteps; ++k) {
                    const double a = from + (kPi / 2) * k / kArcSteps;
                    corners.push_back(centre + Vec2{r * std::cos(a), r * std::sin(a)});
                }
            };
            arc({w / 2 - r, r}, -kPi / 2);
            arc({w / 2 - r, h - r}, 0);
            arc({-w / 2 + r, h - r}, kPi / 2);
            arc({-w / 2 + r, r}, kPi);
            corners.push_back({0, 0});
            // Zero rounding repeats each corner; drop the duplicates.
            corners.erase(std::unique(corners.begin(), corners.end()), corners.end());
            pts = detail::polyline_outline(std::move(corners));
            break;
        }
        case ShapeClass::Loop:
            // Figure-eight: two lobes joined at a crossing point.
            pts = detail::parametric_outline([&](double u) {
                const double a = kTwoPi * u;
                return Vec2{std::sin(a), 0.5 * s.aspect * std::sin(2 * a)};
            });
            break;
        case ShapeClass::Curl:
            // Archimedean spiral unwinding from an inner radius.
            pts = detail::parametric_outline([&](double u) {
                const double a = kTwoPi * s.turns * u;
                const double r = s.inner + (1.0 - s.inner) * u;
                return Vec2{r * std::cos(a), r * std::sin(a)};
            });
            break;
        case ShapeClass::Spike: {
            std::vector<Vec2> corners;
            const double half = 0.5;
            for (int j = 0; j <= 2 * s.spikes; ++j)
                corners.push_back({half * j, (j % 2) ? s.sharpness * half : 0.0});
            pts = detail::polyline_outline(std::move(corners));
            break;
        }
        case ShapeClass::Line:
            pts = detail::parametric_outline([&](double u) {
                return Vec2{u, 4.0 * s.bow * u * (1.0 - u)};
            });
            break;
    }
    if (s.mirrored)
        for (Vec2& p : pts) p.y = -p.y;
    return detail::unit_scaled(std::move(pts));
}

[[nodiscard]] inline ShapeStyle sample_style(ShapeClass c, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto between = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
    ShapeStyle s = default_style(c);
    switch (c) {
        case ShapeClass::Circle:
            s.aspect = between(0.4, 1.0);
            s.sweep = between(0.97, 1.03);
            break;
        case ShapeClass::Rect:
            s.aspect = between(0.25, 1.0);
            s.rounding = between(0.0, 0.5);
            break;
        case ShapeClass::Loop: s.aspect = between(0.2, 1.5); break;
        case ShapeClass::Curl:
            s.turns = between(1.0, 2.75);
            s.inner = between(0.05, 0.35);
            break;
        case ShapeClass::Spike:
            s.spikes = 1 + static_cast<int>(unit(rng) * 5.5);
            s.sharpness = between(0.7, 3.0);
            break;
        case ShapeClass::Line: s.bow = between(-0.02, 0.02); break;
    }
    s.mirrored = unit(rng) < 0.5;
    return s;
}

// A stroke of n_samples points spread over kStrokeDuration seconds: a styled
// outline at a random orientation, resampled at constant pen speed, with
// smooth tremor (RMS sigma relative to the unit outline). The sensor reports
// displacements, so a dropped sample also loses the motion it carried and
// every later point shifts by it. First and last samples are never dropped.
[[nodiscard]] inline Trajectory generate_shape(ShapeClass c, const NoiseProfile& noise,
                                               std::size_t n_samples) {
    noise.validate();
    if (n_samples < 16) throw ConfigError("generate_shape needs n_samples >= 16");
    std::mt19937_64 rng(noise.seed * 0x9E3779B97F4A7C15ULL + index_of(c));
    const ShapeStyle style = sample_style(c, rng);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double heading = kTwoPi * unit(rng);

    const auto outline = shape_outline(c, style);
    auto pts = resample(outline, n_samples);
    const auto wobble = detail::tremor(noise.jitter_sigma, rng);
    Vec2 lost{}, prev{};
    std::vector<TimedPoint> out;
    out.reserve(n_samples);
    const double dt = kStrokeDuration / static_cast<double>(n_samples - 1);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double u = static_cast<double>(i) / static_cast<double>(n_samples - 1);
        const Vec2 p = rotated(pts[i], heading) + wobble(u);
        const bool keep = i == 0 || i + 1 == pts.size() || unit(rng) >= noise.drop_rate;
        if (i > 0 && !keep) lost += p - prev;
        prev = p;
        if (keep) out.push_back({dt * static_cast<double>(i), p.x - lost.x, p.y - lost.y});
    }
    return Trajectory(std::move(out));
}

// Moves and scales a stroke; timestamps shifted by `t0`.
[[nodiscard]] inline Trajectory placed(const Trajectory& traj, double scale, Vec2 origin,
                                      double t0 = 0.0) {
    std::vector<TimedPoint> pts;
    pts.reserve(traj.size());
    const Vec2 first = traj.empty() ? Vec2{} : traj.front().position();
    for (const auto& p : traj) {
        const Vec2 q = origin + (p.position() - first) * scale;
        pts.push_back({p.t + t0, q.x, q.y});
    }
    return Trajectory(std::move(pts));
}

}  // namespace yolo
