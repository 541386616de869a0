// Simple and composed behaviors, the social-profile presets, and the stepper
// that turns a behavior into per-tick wheel and LED commands.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "yolo/core.hpp"
#include "yolo/hal.hpp"
#include "yolo/shapes.hpp"

namespace yolo {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

struct LightBehavior {
    std::vector<Rgb> palette;
    double brightness{0};
    Animation animation{Animation::Solid};

    friend bool operator==(const LightBehavior&, const LightBehavior&) = default;
};

struct MovementBehavior {
    ShapeClass shape{};
    double speed{0};      // m/s
    double amplitude{0};  // m, larger side of the traced outline

    friend bool operator==(const MovementBehavior&, const MovementBehavior&) = default;
};

struct SimpleBehavior {
    std::variant<LightBehavior, MovementBehavior> action;
    double duration{0};

    friend bool operator==(const SimpleBehavior&, const SimpleBehavior&) = default;
};

inline void validate(const LightBehavior& l) {
    if (l.palette.empty()) throw ConfigError("light palette must not be empty");
    if (!(l.brightness >= 0 && l.brightness <= 1)) throw ConfigError("brightness must be in [0, 1]");
}

inline void validate(const MovementBehavior& m, double max_speed = kDefaultMaxSpeed) {
    if (!(m.speed > 0 && m.speed <= max_speed))
        throw ConfigError("movement speed must be in (0, max_speed]");
    if (!(m.amplitude > 0 && m.amplitude <= 0.5))
        throw ConfigError("movement amplitude must be in (0, 0.5]");
}

inline void validate(const SimpleBehavior& s) {
    if (!(s.duration > 0)) throw ConfigError("behavior duration must be > 0");
    std::visit([](const auto& a) { validate(a); }, s.action);
}

// Parts run simultaneously; adding a part of a kind already present replaces it.
class ComposedBehavior {
public:
    ComposedBehavior& add(SimpleBehavior part) {
        validate(part);
        if (std::holds_alternative<LightBehavior>(part.action))
            light_ = std::move(part);
        else
            movement_ = std::move(part);
        return *this;
    }

    [[nodiscard]] const LightBehavior* light() const noexcept {
        return light_ ? &std::get<LightBehavior>(light_->action) : nullptr;
    }
    [[nodiscard]] const MovementBehavior* movement() const noexcept {
        return movement_ ? &std::get<MovementBehavior>(movement_->action) : nullptr;
    }

    [[nodiscard]] double duration() const noexcept {
        double d = 0;
        if (light_) d = std::max(d, light_->duration);
        if (movement_) d = std::max(d, movement_->duration);
        return d;
    }

    [[nodiscard]] std::vector<SimpleBehavior> parts() const {
        std::vector<SimpleBehavior> out;
        if (movement_) out.push_back(*movement_);
        if (light_) out.push_back(*light_);
        return out;
    }

    friend bool operator==(const ComposedBehavior&, const ComposedBehavior&) = default;

private:
    std::optional<SimpleBehavior> movement_;
    std::optional<SimpleBehavior> light_;
};

// ─── Social profiles ─────────────────────────────────────────────────────────
struct SocialProfile {
    std::string name;
    double speed{0};
    double amplitude{0};
    std::vector<Rgb> palette;
    double brightness{0};
    double proactivity{kUnbounded};  // idle seconds before self-initiated movement

    friend bool operator==(const SocialProfile&, const SocialProfile&) = default;
};

inline void validate(const SocialProfile& p, double max_speed = kDefaultMaxSpeed) {
    const auto where = "profile '" + p.name + "': ";
    if (!(p.speed > 0 && p.speed <= max_speed)) throw ConfigError(where + "speed out of range");
    if (!(p.amplitude > 0 && p.amplitude <= 0.5)) throw ConfigError(where + "amplitude out of range");
    if (p.palette.empty()) throw ConfigError(where + "palette is empty");
    if (!(p.brightness >= 0 && p.brightness <= 1)) throw ConfigError(where + "brightness out of range");
    if (!(p.proactivity > 0)) throw ConfigError(where + "proactivity must be > 0 (or inf)");
}

[[nodiscard]] inline SocialProfile profile_preset(std::string_view name) {
    if (name == "exuberant")
        return {"exuberant", 0.25, 0.20, {{128, 0, 128}, {255, 0, 0}}, 0.9, 10.0};
    if (name == "harmonious")
        return {"harmonious", 0.16, 0.12, {{255, 200, 0}, {255, 128, 0}}, 0.6, 25.0};
    if (name == "aloof")
        return {"aloof", 0.08, 0.06, {{0, 128, 0}, {0, 0, 255}}, 0.3, kUnbounded};
    throw UnknownProfile("unknown social profile '" + std::string(name) + "'");
}

inline constexpr std::array<std::string_view, 3> kPresetNames{"exuberant", "harmonious", "aloof"};

// Named profiles: the three presets plus anything a config file defines.
class ProfileTable {
public:
    ProfileTable() {
        for (auto n : kPresetNames) profiles_.emplace(std::string(n), profile_preset(n));
    }

    [[nodiscard]] const SocialProfile& get(std::string_view name) const {
        const auto it = profiles_.find(std::string(name));
        if (it == profiles_.end())
            throw UnknownProfile("unknown social profile '" + std::string(name) + "'");
        return it->second;
    }

    [[nodiscard]] bool contains(std::string_view name) const {
        return profiles_.count(std::string(name)) != 0;
    }

    [[nodiscard]] std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const auto& [n, p] : profiles_) out.push_back(n);
        return out;
    }

    // `<profile>.<field> = <value>`; an unseen profile name starts from the
    // harmonious preset. Fields: speed amplitude brightness proactivity palette.
    void set(std::string_view key, std::string_view value) {
        const auto dot = key.find('.');
        if (dot == std::string_view::npos || dot == 0 || dot + 1 == key.size())
            throw ConfigError("config key '" + std::string(key) + "' is not <profile>.<field>");
        const std::string name(key.substr(0, dot));
        const auto field = key.substr(dot + 1);
        if (!std::all_of(name.begin(), name.end(), [](char c) {
                return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
            }))
            throw ConfigError("profile names use [a-z0-9_]: '" + name + "'");
        SocialProfile p = contains(name) ? get(name) : profile_preset("harmonious");
        p.name = name;
        try {
            if (field == "speed")
                p.speed = parse_double(value);
            else if (field == "amplitude")
                p.amplitude = parse_double(value);
            else if (field == "brightness")
                p.brightness = parse_double(value);
            else if (field == "proactivity")
                p.proactivity = parse_double(value);
            else if (field == "palette")
                p.palette = parse_palette(value);
            else
                throw ConfigError("unknown config key '" + std::string(key) + "'");
        } catch (const ParseError& e) {
            throw ConfigError("config key '" + std::string(key) + "': " + e.what());
        }
        validate(p);
        profiles_.insert_or_assign(name, std::move(p));
    }

    // Palette text: `r,g,b r,g,b ...`.
    [[nodiscard]] static std::vector<Rgb> parse_palette(std::string_view text) {
        std::vector<Rgb> out;
        for (auto triple : split(text)) {
            const auto ch = split(triple, ',');
            if (ch.size() != 3) throw ParseError("palette colors are written r,g,b");
            std::array<std::uint8_t, 3> v{};
            for (std::size_t i = 0; i < 3; ++i) {
                const auto x = parse_int(ch[i]);
                if (x < 0 || x > 255) throw ParseError("color channels must be in [0, 255]");
                v[i] = static_cast<std::uint8_t>(x);
            }
            out.push_back({v[0], v[1], v[2]});
        }
        if (out.empty()) throw ParseError("palette must list at least one color");
        return out;
    }

    [[nodiscard]] static std::string format_palette(const std::vector<Rgb>& palette) {
        std::string out;
        for (const auto& c : palette) {
            if (!out.empty()) out += ' ';
            out += std::to_string(c.r) + ',' + std::to_string(c.g) + ',' + std::to_string(c.b);
        }
        return out;
    }

    // Line-oriented `key = value`; '#' starts a comment line.
    void load(std::istream& is) {
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            const auto body = trim(line);
            if (body.empty() || body.front() == '#') continue;
            const auto eq = body.find('=');
            if (eq == std::string_view::npos)
                throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
            try {
                set(trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
            } catch (const ConfigError& e) {
                throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
            }
        }
    }

private:
    std::map<std::string, SocialProfile, std::less<>> profiles_;
};

// ─── Movement paths ──────────────────────────────────────────────────────────
// Canonical outline of a shape (default style, unit size) with cumulative arc
// length, shared by every behavior that traces it.
class MovementPath {
public:
    explicit MovementPath(ShapeClass shape)
        : points_(shape_outline(shape, default_style(shape))) {
        cumulative_.reserve(points_.size());
        double s = 0;
        cumulative_.push_back(0);
        for (std::size_t i = 1; i < points_.size(); ++i) {
            s += distance(points_[i - 1], points_[i]);
            cumulative_.push_back(s);
        }
    }

    [[nodiscard]] static const MovementPath& of(ShapeClass shape) {
        static const std::array<MovementPath, kShapeCount> paths{
            MovementPath(ShapeClass::Circle), MovementPath(ShapeClass::Rect),
            MovementPath(ShapeClass::Loop),   MovementPath(ShapeClass::Curl),
            MovementPath(ShapeClass::Spike),  MovementPath(ShapeClass::Line)};
        return paths[index_of(shape)];
    }

    [[nodiscard]] double length() const noexcept { return cumulative_.back(); }

    // Point at arc length s along the unit outline, clamped to the ends.
    [[nodiscard]] Vec2 at(double s) const noexcept {
        if (s <= 0) return points_.front();
        if (s >= length()) return points_.back();
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
        const auto i = static_cast<std::size_t>(it - cumulative_.begin());
        const double seg = cumulative_[i] - cumulative_[i - 1];
        const double f = seg > 0 ? (s - cumulative_[i - 1]) / seg : 0.0;
        return points_[i - 1] + (points_[i] - points_[i - 1]) * f;
    }

private:
    std::vector<Vec2> points_;
    std::vector<double> cumulative_;
};

[[nodiscard]] inline double trace_duration(ShapeClass shape, double speed, double amplitude) {
    return MovementPath::of(shape).length() * amplitude / speed;
}

[[nodiscard]] inline ComposedBehavior make_movement(const SocialProfile& profile, ShapeClass shape) {
    const double duration = trace_duration(shape, profile.speed, profile.amplitude);
    ComposedBehavior b;
    b.add({MovementBehavior{shape, profile.speed, profile.amplitude}, duration});
    b.add({LightBehavior{profile.palette, profile.brightness, Animation::Pulse}, duration});
    return b;
}

inline constexpr double kTouchBrightness = 0.8;

[[nodiscard]] inline ComposedBehavior touch_override() {
    ComposedBehavior b;
    b.add({LightBehavior{{kWhite}, kTouchBrightness, Animation::Solid}, kUnbounded});
    return b;
}

// Profile colors shown while nothing else runs.
[[nodiscard]] inline ComposedBehavior idle_light(const SocialProfile& profile) {
    ComposedBehavior b;
    b.add({LightBehavior{profile.palette, profile.brightness, Animation::Solid}, kUnbounded});
    return b;
}

// ─── Stepping ────────────────────────────────────────────────────────────────
inline constexpr double kPulsePeriod = 1.0;
inline constexpr double kBlinkHalfPeriod = 0.5;
inline constexpr double kPaletteCycle = 1.0;  // seconds per palette color

struct StepOutput {
    WheelCommand wheel;
    LedCommand led;
    bool done{false};
};

[[nodiscard]] inline double animated_brightness(const LightBehavior& l, double elapsed) {
    const double b = l.brightness;
    switch (l.animation) {
        case Animation::Solid: return b;
        case Animation::Blink:
            return static_cast<long long>(std::floor(elapsed / kBlinkHalfPeriod)) % 2 == 0 ? b : 0.0;
        case Animation::Pulse:
            return std::clamp(b * (0.6 + 0.4 * std::sin(kTwoPi * elapsed / kPulsePeriod)), 0.2 * b, b);
    }
    return b;
}

// Wheel commands follow the outline chord by chord, so integrating them at
// the same dt lands exactly on the outline and never exceeds the set speed.
[[nodiscard]] inline StepOutput step(const ComposedBehavior& behavior, double elapsed, double dt) {
    StepOutput out;
    out.done = elapsed >= behavior.duration();
    if (const auto* m = behavior.movement(); m && !out.done) {
        const auto& path = MovementPath::of(m->shape);
        const double unit_per_m = 1.0 / m->amplitude;
        const double s0 = m->speed * elapsed * unit_per_m;
        const double s1 = std::min(m->speed * (elapsed + dt) * unit_per_m, path.length());
        const Vec2 chord = (path.at(s1) - path.at(s0)) * m->amplitude;
        const double len = norm(chord);
        if (len > 0) out.wheel = {wrap_heading(std::atan2(chord.y, chord.x)), std::min(len / dt, m->speed)};
    }
    if (const auto* l = behavior.light()) {
        const auto idx = static_cast<std::size_t>(std::max(0.0, std::floor(elapsed / kPaletteCycle))) %
                         l->palette.size();
        out.led = {l->palette[idx], animated_brightness(*l, elapsed), l->animation};
    }
    return out;
}

}  // namespace yolo
