// Hardware abstraction: the four sensor/actuator calls the engine makes.
// A physical backend would implement Backend against GPIO and motor drivers;
// the simulator provides the in-tree implementation.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

#include "yolo/core.hpp"

namespace yolo {

struct TouchState {
    bool touched{false};
    double since{0};  // seconds the current press has lasted; 0 when not touched

    friend bool operator==(const TouchState&, const TouchState&) = default;
};

struct MotionDelta {
    double dx{0};
    double dy{0};
    double dt{0};

    [[nodiscard]] bool valid() const noexcept {
        return std::isfinite(dx) && std::isfinite(dy) && std::isfinite(dt) && dt > 0;
    }
};

inline constexpr double kDefaultMaxSpeed = 0.3;

// World-frame heading; omni wheels translate without turning the body.
struct WheelCommand {
    double heading{0};  // radians in [0, 2pi)
    double speed{0};    // m/s

    [[nodiscard]] Vec2 velocity() const noexcept {
        return {speed * std::cos(heading), speed * std::sin(heading)};
    }
    friend bool operator==(const WheelCommand&, const WheelCommand&) = default;
};

[[nodiscard]] inline double wrap_heading(double a) noexcept {
    double h = std::fmod(a, kTwoPi);
    if (h < 0) h += kTwoPi;
    if (h >= kTwoPi) h = 0;
    return h;
}

inline void validate(const WheelCommand& cmd, double max_speed = kDefaultMaxSpeed) {
    if (!std::isfinite(cmd.heading) || cmd.heading < 0 || cmd.heading >= kTwoPi)
        throw InvalidCommand("wheel heading must be in [0, 2pi)");
    if (!std::isfinite(cmd.speed) || cmd.speed < 0 || cmd.speed > max_speed)
        throw SpeedOutOfRange("wheel speed " + format_sig(cmd.speed, 6) + " outside [0, " +
                              format_sig(max_speed, 6) + "]");
}

enum class Animation : std::uint8_t { Solid, Blink, Pulse };

[[nodiscard]] constexpr std::string_view to_string(Animation a) noexcept {
    switch (a) {
        case Animation::Solid: return "solid";
        case Animation::Blink: return "blink";
        case Animation::Pulse: return "pulse";
    }
    return "solid";
}

[[nodiscard]] inline std::optional<Animation> parse_animation(std::string_view s) noexcept {
    for (Animation a : {Animation::Solid, Animation::Blink, Animation::Pulse})
        if (to_string(a) == s) return a;
    return std::nullopt;
}

struct Rgb {
    std::uint8_t r{0}, g{0}, b{0};
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

inline constexpr Rgb kWhite{255, 255, 255};

struct LedCommand {
    Rgb color{};
    double brightness{0};  // [0, 1]
    Animation animation{Animation::Solid};

    friend bool operator==(const LedCommand&, const LedCommand&) = default;
};

inline void validate(const LedCommand& cmd) {
    if (!std::isfinite(cmd.brightness) || cmd.brightness < 0 || cmd.brightness > 1)
        throw InvalidCommand("LED brightness must be in [0, 1]");
}

class Backend {
public:
    virtual ~Backend() = default;

    virtual void init() = 0;
    virtual void shutdown() = 0;

    // Debounced touch state; a press must persist kTouchDebounce to register.
    virtual TouchState read_touch() = 0;
    // Displacement since the previous read. The first read reports zero
    // displacement over the time elapsed since init.
    virtual MotionDelta read_motion() = 0;
    // Holds the commanded velocity until the next command.
    virtual void drive(const WheelCommand& cmd) = 0;
    virtual void set_led(const LedCommand& cmd) = 0;
};

inline constexpr double kTouchDebounce = 0.05;

}  // namespace yolo
