// Interaction planner: storytelling-arc clock, mirror/contrast technique
// selection, and the Idle / Touched / Observing / Executing state machine
// that decides what the robot does each tick.
//
// The four states are a reconstruction:
//   Touched    preempts everything: white light, wheels stopped. Motion is
//              still observed since the child is holding the robot.
//   Observing  a movement segment is open and accumulating displacement.
//   Executing  a composed behavior runs to completion; the robot's own
//              motion is never observed.
//   Idle       profile colors; self-initiates after `proactivity` seconds.

#pragma once

#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "yolo/behavior.hpp"
#include "yolo/core.hpp"
#include "yolo/hal.hpp"
#include "yolo/knn.hpp"
#include "yolo/trajectory.hpp"

namespace yolo {

// ─── Storytelling arc ────────────────────────────────────────────────────────
enum class ArcPhase : std::uint8_t { RisingAction, Climax, FallingAction, Ended };

[[nodiscard]] constexpr std::string_view to_string(ArcPhase p) noexcept {
    switch (p) {
        case ArcPhase::RisingAction: return "rising";
        case ArcPhase::Climax: return "climax";
        case ArcPhase::FallingAction: return "falling";
        case ArcPhase::Ended: return "ended";
    }
    return "ended";
}

struct ArcSchedule {
    double rising{120};
    double climax{60};
    double falling{120};

    [[nodiscard]] double total() const noexcept { return rising + climax + falling; }

    void validate() const {
        if (!(rising > 0) || !(climax > 0) || !(falling > 0) || !std::isfinite(total()))
            throw ConfigError("arc phase durations must be finite and > 0");
    }
    friend bool operator==(const ArcSchedule&, const ArcSchedule&) = default;
};

[[nodiscard]] inline ArcPhase phase_of(double t, const ArcSchedule& s) noexcept {
    if (t < s.rising) return ArcPhase::RisingAction;
    if (t < s.rising + s.climax) return ArcPhase::Climax;
    if (t < s.total()) return ArcPhase::FallingAction;
    return ArcPhase::Ended;
}

// ─── Creativity techniques ───────────────────────────────────────────────────
enum class Technique : std::uint8_t { Mirror, Contrast };

[[nodiscard]] constexpr std::string_view to_string(Technique t) noexcept {
    return t == Technique::Mirror ? "mirror" : "contrast";
}

// Mirror stimulates convergent thinking in rising and falling action;
// contrast stimulates divergent thinking at the climax.
[[nodiscard]] constexpr std::optional<Technique> technique_for(ArcPhase p) noexcept {
    switch (p) {
        case ArcPhase::RisingAction:
        case ArcPhase::FallingAction: return Technique::Mirror;
        case ArcPhase::Climax: return Technique::Contrast;
        case ArcPhase::Ended: return std::nullopt;
    }
    return std::nullopt;
}

// Mirror repeats the child's last shape; contrast draws uniformly from the
// other five.
[[nodiscard]] inline ShapeClass respond(ShapeClass last, Technique technique,
                                        std::mt19937_64& rng) {
    if (technique == Technique::Mirror) return last;
    std::uniform_int_distribution<std::size_t> pick(0, kShapeCount - 2);
    std::size_t i = pick(rng);
    if (i >= index_of(last)) ++i;
    return kAllShapes[i];
}

// ─── Interaction state and events ────────────────────────────────────────────
enum class InteractionState : std::uint8_t { Idle, Touched, Observing, Executing };

[[nodiscard]] constexpr std::string_view to_string(InteractionState s) noexcept {
    switch (s) {
        case InteractionState::Idle: return "idle";
        case InteractionState::Touched: return "touched";
        case InteractionState::Observing: return "observing";
        case InteractionState::Executing: return "executing";
    }
    return "idle";
}

struct Event {
    double t{0};
    InteractionState state{};
    ArcPhase phase{};
    std::string name;
    std::optional<ShapeClass> shape;
    std::optional<Technique> technique;
    std::string cause;
    std::optional<ShapeClass> recognized;  // set on mirror/contrast executions

    friend bool operator==(const Event&, const Event&) = default;
};

inline constexpr int kTimeDigits = 9;

// `t=<s> state=<s> phase=<p> event=<e> [shape=<c>] [technique=<t>] [cause=<c>]`
[[nodiscard]] inline std::string format_event(const Event& e) {
    std::string out = "t=" + format_sig(e.t, kTimeDigits);
    out += " state=" + std::string(to_string(e.state));
    out += " phase=" + std::string(to_string(e.phase));
    out += " event=" + e.name;
    if (e.shape) out += " shape=" + std::string(to_string(*e.shape));
    if (e.technique) out += " technique=" + std::string(to_string(*e.technique));
    if (!e.cause.empty()) out += " cause=" + e.cause;
    return out;
}

// ─── Planner ─────────────────────────────────────────────────────────────────
struct SensorFrame {
    TouchState touch;
    MotionDelta motion;
};

struct PlannerConfig {
    SocialProfile profile = profile_preset("harmonious");
    ArcSchedule schedule{};
    SegmentationConfig segmentation{};
    std::uint64_t seed{0};
};

struct ActiveBehavior {
    ComposedBehavior behavior;
    double elapsed{0};
};

struct TickResult {
    InteractionState state{};
    ArcPhase phase{};
    ActiveBehavior active;
    std::vector<Event> events;
};

// Displacements at or below this are treated as no movement.
inline constexpr double kMotionEpsilon = 1e-9;

class Planner {
public:
    Planner(PlannerConfig cfg, std::shared_ptr<const TrainedModel> model)
        : cfg_(std::move(cfg)), model_(std::move(model)), rng_(cfg_.seed) {
        if (!model_) throw ConfigError("planner needs a trained model");
        validate(cfg_.profile);
        cfg_.schedule.validate();
        cfg_.segmentation.validate();
    }

    [[nodiscard]] InteractionState state() const noexcept { return state_; }
    [[nodiscard]] const PlannerConfig& config() const noexcept { return cfg_; }

    // Takes effect from the next tick.
    void set_profile(SocialProfile p) {
        validate(p);
        cfg_.profile = std::move(p);
    }
    void set_schedule(const ArcSchedule& s) {
        s.validate();
        cfg_.schedule = s;
    }

    TickResult tick(const SensorFrame& frame, double clock, double dt) {
        TickResult out;
        events_ = &out.events;
        clock_ = clock;
        const ArcPhase phase = phase_of(clock, cfg_.schedule);
        if (!last_phase_ || *last_phase_ != phase) {
            const auto from = last_phase_ ? std::string(to_string(*last_phase_)) : "start";
            last_phase_ = phase;
            emit("phase", std::nullopt, std::nullopt, from + "-to-" + std::string(to_string(phase)));
        }

        Vec2 delta{};
        if (frame.motion.valid()) {
            delta = {frame.motion.dx, frame.motion.dy};
        } else {
            emit("dropped_input", std::nullopt, std::nullopt, "motion");
        }
        (void)dt;
        const bool was_executing = state_ == InteractionState::Executing;

        if (frame.touch.touched) {
            if (state_ != InteractionState::Touched) {
                if (state_ == InteractionState::Executing) {
                    const auto* m = executing_->movement();
                    emit("abort", m ? std::optional(m->shape) : std::nullopt, std::nullopt, "touch");
                    executing_.reset();
                }
                touch_start_ = clock;
                state_ = InteractionState::Touched;
                emit("touch", std::nullopt, std::nullopt, "");
            }
            idle_since_ = clock;
        } else if (state_ == InteractionState::Touched) {
            state_ = segment_open_ ? InteractionState::Observing : InteractionState::Idle;
            idle_since_ = clock;
            emit("release", std::nullopt, std::nullopt, "");
            if (pending_ && !segment_open_) {
                const auto shape = *pending_;
                pending_.reset();
                react(shape, phase);
            }
        }

        if (state_ == InteractionState::Executing) {
            const double elapsed = clock - exec_start_;
            if (elapsed >= executing_->duration()) {
                const auto* m = executing_->movement();
                executing_.reset();
                state_ = InteractionState::Idle;
                idle_since_ = clock;
                emit("done", m ? std::optional(m->shape) : std::nullopt, std::nullopt, "");
            }
        }

        // The motion reported right after execution is the robot's own.
        if (state_ != InteractionState::Executing && !was_executing) observe(delta, frame, phase);

        if (state_ == InteractionState::Idle && !segment_open_ && phase != ArcPhase::Ended &&
            clock - idle_since_ >= cfg_.profile.proactivity) {
            std::uniform_int_distribution<std::size_t> pick(0, kShapeCount - 1);
            start(kAllShapes[pick(rng_)], std::nullopt, std::nullopt, "proactive");
        }

        out.state = state_;
        out.phase = phase;
        switch (state_) {
            case InteractionState::Touched:
                out.active = {touch_override(), clock - touch_start_};
                break;
            case InteractionState::Executing:
                out.active = {*executing_, clock - exec_start_};
                break;
            default:
                out.active = {idle_light(cfg_.profile), clock};
                break;
        }
        events_ = nullptr;
        return out;
    }

private:
    void emit(std::string name, std::optional<ShapeClass> shape, std::optional<Technique> technique,
              std::string cause, std::optional<ShapeClass> recognized = std::nullopt) {
        events_->push_back({clock_, state_, phase_of(clock_, cfg_.schedule), std::move(name), shape,
                            technique, std::move(cause), recognized});
    }

    void observe(Vec2 delta, const SensorFrame& frame, ArcPhase phase) {
        const bool moved = norm(delta) > kMotionEpsilon;
        if (moved) idle_since_ = clock_;
        if (segment_open_ && clock_ >= segment_start_ + cfg_.segmentation.window) {
            close_segment(phase);
            if (state_ == InteractionState::Executing) return;
        }
        if (!segment_open_) {
            if (!moved) return;
            const double start = std::max(0.0, clock_ - frame.motion.dt);
            segment_ = Trajectory{};
            cursor_ = {};
            segment_.append({start, 0.0, 0.0});
            segment_start_ = start;
            segment_open_ = true;
            if (state_ == InteractionState::Idle) state_ = InteractionState::Observing;
            emit("observe", std::nullopt, std::nullopt, "");
        }
        cursor_ += delta;
        if (clock_ > segment_.back().t) segment_.append({clock_, cursor_.x, cursor_.y});
    }

    void close_segment(ArcPhase phase) {
        segment_open_ = false;
        if (state_ == InteractionState::Observing) state_ = InteractionState::Idle;
        if (is_idle(segment_, cfg_.segmentation)) {
            emit("idle_segment", std::nullopt, std::nullopt, "");
            return;
        }
        Prediction p;
        try {
            p = classify(*model_, segment_);
        } catch (const Error&) {
            emit("unrecognized", std::nullopt, std::nullopt, "degenerate");
            return;
        }
        const auto votes = static_cast<int>(std::lround(p.confidence * static_cast<double>(model_->k())));
        emit("recognized", p.label, std::nullopt,
             "votes-" + std::to_string(votes) + "-of-" + std::to_string(model_->k()));
        if (phase == ArcPhase::Ended) return;
        if (state_ == InteractionState::Touched) {
            pending_ = p.label;
            return;
        }
        react(p.label, phase);
    }

    void react(ShapeClass recognized, ArcPhase phase) {
        const auto technique = technique_for(phase);
        if (!technique) return;
        const ShapeClass shape = respond(recognized, *technique, rng_);
        start(shape, technique, recognized,
              std::string(to_string(*technique)) + "-of-" + std::string(to_string(recognized)));
    }

    void start(ShapeClass shape, std::optional<Technique> technique,
               std::optional<ShapeClass> recognized, std::string cause) {
        executing_ = make_movement(cfg_.profile, shape);
        exec_start_ = clock_;
        state_ = InteractionState::Executing;
        emit("execute", shape, technique, std::move(cause), recognized);
    }

    PlannerConfig cfg_;
    std::shared_ptr<const TrainedModel> model_;
    std::mt19937_64 rng_;

    InteractionState state_{InteractionState::Idle};
    std::optional<ArcPhase> last_phase_;
    double clock_{0};
    double idle_since_{0};
    double touch_start_{0};

    std::optional<ComposedBehavior> executing_;
    double exec_start_{0};

    bool segment_open_{false};
    Trajectory segment_;
    double segment_start_{0};
    Vec2 cursor_{};
    std::optional<ShapeClass> pending_;

    std::vector<Event>* events_{nullptr};
};

}  // namespace yolo
