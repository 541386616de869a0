// Deterministic virtual robot: point kinematics in a walled arena, a
// simulated Backend with debounced touch, drag injection standing in for the
// child's hands, and the session loop with trace record/replay.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "yolo/behavior.hpp"
#include "yolo/core.hpp"
#include "yolo/hal.hpp"
#include "yolo/knn.hpp"
#include "yolo/planner.hpp"
#include "yolo/shapes.hpp"
#include "yolo/trajectory.hpp"

namespace yolo {

struct SimConfig {
    double tick{0.05};
    double arena_width{2.0};
    double arena_height{2.0};
    double max_speed{kDefaultMaxSpeed};
    std::uint64_t seed{0};

    void validate() const {
        if (!(tick > 0) || !std::isfinite(tick)) throw ConfigError("tick must be finite and > 0");
        if (!(arena_width > 0) || !(arena_height > 0) || !std::isfinite(arena_width) ||
            !std::isfinite(arena_height))
            throw ConfigError("arena sides must be finite and > 0");
        if (!(max_speed > 0) || !std::isfinite(max_speed)) throw ConfigError("max_speed must be > 0");
    }
    [[nodiscard]] Vec2 centre() const noexcept { return {arena_width / 2, arena_height / 2}; }
    [[nodiscard]] bool inside(Vec2 p) const noexcept {
        return p.x >= 0 && p.x <= arena_width && p.y >= 0 && p.y <= arena_height;
    }
    [[nodiscard]] Vec2 clamp(Vec2 p) const noexcept {
        return {std::clamp(p.x, 0.0, arena_width), std::clamp(p.y, 0.0, arena_height)};
    }
};

struct RobotState {
    Vec2 position{};
    Vec2 velocity{};
    LedCommand led{};
    bool touched{false};
};

struct SimInputs {
    Vec2 drag{};
    bool touched{false};
};

struct SimCommands {
    WheelCommand wheel{};
    LedCommand led{};
};

// Drag is authoritative displacement; a held robot's wheels do not move it.
[[nodiscard]] inline RobotState step_sim(const RobotState& s, const SimInputs& in,
                                         const SimCommands& cmd, double dt, const SimConfig& cfg) {
    RobotState out = s;
    out.velocity = in.touched ? Vec2{} : cmd.wheel.velocity();
    out.position = cfg.clamp(s.position + out.velocity * dt + in.drag);
    out.led = cmd.led;
    out.touched = in.touched;
    return out;
}

// ─── Simulated backend ───────────────────────────────────────────────────────
class SimBackend final : public Backend {
public:
    explicit SimBackend(SimConfig cfg) : cfg_(cfg) {
        cfg_.validate();
        state_.position = cfg_.centre();
    }

    void init() override {
        ready_ = true;
        last_read_t_ = now();
        last_read_pos_ = state_.position;
    }
    void shutdown() override { ready_ = false; }

    TouchState read_touch() override {
        require_ready();
        return debounced(now());
    }

    MotionDelta read_motion() override {
        require_ready();
        const Vec2 d = state_.position - last_read_pos_;
        MotionDelta out{d.x, d.y, now() - last_read_t_};
        last_read_pos_ = state_.position;
        last_read_t_ = now();
        return out;
    }

    void drive(const WheelCommand& cmd) override {
        require_ready();
        validate(cmd, cfg_.max_speed);
        wheel_ = cmd;
    }

    void set_led(const LedCommand& cmd) override {
        require_ready();
        validate(cmd);
        led_ = cmd;
        state_.led = cmd;
    }

    // ── simulation side ──
    // Raw contact change at time t (not earlier than the previous change).
    void set_raw_touch(double t, bool on) {
        if (!edges_.empty() && t < edges_.back().first)
            throw ConfigError("touch changes must be time-ordered");
        const bool current = edges_.empty() ? false : edges_.back().second;
        if (current != on) edges_.emplace_back(t, on);
    }

    // Integrates one tick with the held commands and the given drag.
    void advance(Vec2 drag) {
        state_ = step_sim(state_, {drag, debounced(now()).touched}, {wheel_, led_}, cfg_.tick, cfg_);
        ++ticks_;
    }

    void place(Vec2 p) {
        if (!cfg_.inside(p)) throw PathOutOfArena("start position outside arena");
        state_.position = p;
        last_read_pos_ = p;
    }

    [[nodiscard]] double now() const noexcept { return static_cast<double>(ticks_) * cfg_.tick; }
    [[nodiscard]] std::uint64_t ticks() const noexcept { return ticks_; }
    [[nodiscard]] const RobotState& state() const noexcept { return state_; }
    [[nodiscard]] const WheelCommand& wheel() const noexcept { return wheel_; }
    [[nodiscard]] const SimConfig& config() const noexcept { return cfg_; }

    // A contact level counts once it has persisted kTouchDebounce; `since`
    // runs from the start of the press that registered.
    [[nodiscard]] TouchState debounced(double t) const noexcept {
        constexpr double kSlack = 1e-9;
        bool stable = false;
        double pressed_at = 0;
        for (std::size_t i = 0; i < edges_.size() && edges_[i].first <= t; ++i) {
            const double end = i + 1 < edges_.size() ? std::min(edges_[i + 1].first, t) : t;
            if (end - edges_[i].first + kSlack >= kTouchDebounce && edges_[i].second != stable) {
                stable = edges_[i].second;
                pressed_at = edges_[i].first;
            }
        }
        return stable ? TouchState{true, t - pressed_at} : TouchState{};
    }

private:
    void require_ready() const {
        if (!ready_) throw BackendUnavailable("simulated backend not initialized");
    }

    SimConfig cfg_;
    RobotState state_{};
    WheelCommand wheel_{};
    LedCommand led_{};
    std::vector<std::pair<double, bool>> edges_;
    std::uint64_t ticks_{0};
    bool ready_{false};
    double last_read_t_{0};
    Vec2 last_read_pos_{};
};

// ─── Session ─────────────────────────────────────────────────────────────────
// Inputs that take effect at one tick: touch changes and config changes land
// at the start of the tick interval, drag is the displacement over it.
struct TickInput {
    Vec2 drag{};
    std::optional<bool> touch;
    std::vector<std::pair<std::string, std::string>> config;

    [[nodiscard]] bool empty() const noexcept {
        return drag.x == 0 && drag.y == 0 && !touch && config.empty();
    }
};

using InputTape = std::map<std::uint64_t, TickInput>;

struct SessionSetup {
    SimConfig sim{};
    SocialProfile profile = profile_preset("harmonious");
    ArcSchedule schedule{};
    std::string model{"default"};  // "default" or a model file path
};

struct TickRecord {
    std::uint64_t tick{0};
    double t{0};
    RobotState robot{};
    InteractionState state{};
    ArcPhase phase{};
    std::vector<Event> events;
};

[[nodiscard]] inline std::shared_ptr<const TrainedModel> shared_default_model() {
    static const auto model = std::make_shared<const TrainedModel>(default_model());
    return model;
}

[[nodiscard]] inline std::shared_ptr<const TrainedModel> load_model(const std::string& spec) {
    if (spec == "default") return shared_default_model();
    std::ifstream in(spec);
    if (!in) throw ConfigError("cannot open model file '" + spec + "'");
    return std::make_shared<const TrainedModel>(read_model(in));
}

// Profile and arc fields as `key=value` pairs; the same keys appear in trace
// headers and as config inputs.
[[nodiscard]] inline std::vector<std::pair<std::string, std::string>> profile_fields(
    const SocialProfile& p) {
    return {{"profile.name", p.name},
            {"profile.speed", format_exact(p.speed)},
            {"profile.amplitude", format_exact(p.amplitude)},
            {"profile.brightness", format_exact(p.brightness)},
            {"profile.proactivity", format_exact(p.proactivity)},
            {"profile.palette", ProfileTable::format_palette(p.palette)}};
}

[[nodiscard]] inline std::vector<std::pair<std::string, std::string>> schedule_fields(
    const ArcSchedule& s) {
    return {{"arc.rising", format_exact(s.rising)},
            {"arc.climax", format_exact(s.climax)},
            {"arc.falling", format_exact(s.falling)}};
}

// Returns false when the key is not a profile or arc field.
inline bool apply_field(SocialProfile& p, ArcSchedule& s, std::string_view key, std::string_view value) {
    try {
        if (key == "profile.name") p.name = std::string(value);
        else if (key == "profile.speed") p.speed = parse_double(value);
        else if (key == "profile.amplitude") p.amplitude = parse_double(value);
        else if (key == "profile.brightness") p.brightness = parse_double(value);
        else if (key == "profile.proactivity") p.proactivity = parse_double(value);
        else if (key == "profile.palette") p.palette = ProfileTable::parse_palette(value);
        else if (key == "arc.rising") s.rising = parse_double(value);
        else if (key == "arc.climax") s.climax = parse_double(value);
        else if (key == "arc.falling") s.falling = parse_double(value);
        else return false;
    } catch (const ParseError& e) {
        throw ConfigError(std::string(key) + ": " + e.what());
    }
    return true;
}

class Session {
public:
    Session(SessionSetup setup, std::shared_ptr<const TrainedModel> model)
        : setup_(std::move(setup)),
          backend_(setup_.sim),
          planner_(make_planner_config(setup_), std::move(model)) {
        validate(setup_.profile, setup_.sim.max_speed);
        backend_.init();
    }

    Session(const Session&) = delete;
    Session& operator=(const Session&) = delete;

    [[nodiscard]] const SessionSetup& setup() const noexcept { return setup_; }
    [[nodiscard]] const InputTape& tape() const noexcept { return tape_; }
    [[nodiscard]] double now() const noexcept { return backend_.now(); }
    [[nodiscard]] std::uint64_t ticks() const noexcept { return backend_.ticks(); }
    [[nodiscard]] const RobotState& robot() const noexcept { return backend_.state(); }
    [[nodiscard]] const Planner& planner() const noexcept { return planner_; }
    [[nodiscard]] const SocialProfile& profile() const noexcept { return planner_.config().profile; }
    [[nodiscard]] const ArcSchedule& schedule() const noexcept { return planner_.config().schedule; }

    // Schedules a drag along traj, re-timed to start now and placed at the
    // robot's current position. The optical sensor then sees its deltas
    // tick-aligned, linearly interpolated between samples.
    void inject_drag_path(const Trajectory& traj) {
        if (traj.empty()) return;
        const Vec2 origin = robot().position;
        const Vec2 first = traj.front().position();
        for (const auto& p : traj)
            if (!setup_.sim.inside(origin + (p.position() - first)))
                throw PathOutOfArena("drag path leaves the arena at t=" + format_exact(p.t));
        const double shift = now() - traj.front().t;
        auto at = [&](double t) {
            t -= shift;
            if (t <= traj.front().t) return traj.front().position();
            if (t >= traj.back().t) return traj.back().position();
            const auto pts = traj.points();
            const auto it = std::upper_bound(pts.begin(), pts.end(), t,
                                             [](double v, const TimedPoint& q) { return v < q.t; });
            const auto& b = *it;
            const auto& a = *(it - 1);
            const double f = (t - a.t) / (b.t - a.t);
            return a.position() + (b.position() - a.position()) * f;
        };
        const double tick = setup_.sim.tick;
        const auto end = static_cast<std::uint64_t>(std::ceil((traj.duration() + now()) / tick - 1e-9));
        Vec2 prev = at(now());
        for (std::uint64_t k = ticks() + 1; k <= std::max(end, ticks() + 1); ++k) {
            const Vec2 cur = at(static_cast<double>(k) * tick);
            pending_[k].drag += cur - prev;
            prev = cur;
        }
    }

    // Displacement during the next tick.
    void add_drag(Vec2 d) { add_drag_at(ticks() + 1, d); }
    void add_drag_at(std::uint64_t tick, Vec2 d) {
        if (!std::isfinite(d.x) || !std::isfinite(d.y)) throw ConfigError("drag must be finite");
        pending_[std::max(tick, ticks() + 1)].drag += d;
    }

    void set_touch(bool on) { set_touch_at(ticks() + 1, on); }
    void set_touch_at(std::uint64_t tick, bool on) { pending_[std::max(tick, ticks() + 1)].touch = on; }

    // Profile/arc field changes, applied at the next tick boundary.
    void configure(const std::vector<std::pair<std::string, std::string>>& fields) {
        SocialProfile p = profile();
        ArcSchedule s = schedule();
        for (const auto& [k, v] : pending_config()) apply_field(p, s, k, v);
        for (const auto& [k, v] : fields)
            if (!apply_field(p, s, k, v)) throw ConfigError("unknown config key '" + k + "'");
        validate(p, setup_.sim.max_speed);
        s.validate();
        auto& dst = pending_[ticks() + 1].config;
        dst.insert(dst.end(), fields.begin(), fields.end());
    }

    // Used by replay: queue recorded inputs verbatim.
    void load_tape(const InputTape& tape) {
        for (const auto& [k, in] : tape) {
            auto& dst = pending_[k];
            dst.drag += in.drag;
            if (in.touch) dst.touch = in.touch;
            dst.config.insert(dst.config.end(), in.config.begin(), in.config.end());
        }
    }

    TickRecord step() {
        const std::uint64_t k = ticks() + 1;
        TickInput in;
        if (auto it = pending_.find(k); it != pending_.end()) {
            in = std::move(it->second);
            pending_.erase(it);
        }
        if (!in.config.empty()) {
            SocialProfile p = profile();
            ArcSchedule s = schedule();
            for (const auto& [key, v] : in.config) apply_field(p, s, key, v);
            planner_.set_profile(p);
            planner_.set_schedule(s);
        }
        if (in.touch) backend_.set_raw_touch(now(), *in.touch);
        backend_.advance(in.drag);
        if (!in.empty()) tape_[k] = in;

        const SensorFrame frame{backend_.read_touch(), backend_.read_motion()};
        auto result = planner_.tick(frame, now(), setup_.sim.tick);
        const StepOutput out = yolo::step(result.active.behavior, result.active.elapsed, setup_.sim.tick);
        backend_.drive(out.wheel);
        backend_.set_led(out.led);

        TickRecord rec;
        rec.tick = k;
        rec.t = now();
        rec.robot = backend_.state();
        rec.robot.velocity = out.wheel.velocity();  // as commanded, not as moved
        rec.robot.touched = frame.touch.touched;
        rec.state = result.state;
        rec.phase = result.phase;
        rec.events = std::move(result.events);
        return rec;
    }

private:
    static PlannerConfig make_planner_config(const SessionSetup& s) {
        s.sim.validate();
        PlannerConfig cfg;
        cfg.profile = s.profile;
        cfg.schedule = s.schedule;
        cfg.seed = s.sim.seed;
        return cfg;
    }

    [[nodiscard]] std::vector<std::pair<std::string, std::string>> pending_config() const {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& [k, in] : pending_) out.insert(out.end(), in.config.begin(), in.config.end());
        return out;
    }

    SessionSetup setup_;
    SimBackend backend_;
    Planner planner_;
    std::map<std::uint64_t, TickInput> pending_;
    InputTape tape_;
};

// ─── Scripts ─────────────────────────────────────────────────────────────────
// One timed input per line:
//   <t> touch on|off
//   <t> drag <shape> [scale=<m>] [noise=none|mouse|robot|training] [seed=<n>] [samples=<n>]
//   <t> drag-file <path> [scale=<m>]
//   <t> profile <name>
//   <t> <profile.field|arc.phase> <value>
struct ScriptItem {
    double t{0};
    std::string verb;
    std::vector<std::string> args;
};

using Script = std::vector<ScriptItem>;

inline constexpr double kDefaultDragScale = 0.3;
inline constexpr double kScriptGrace = 10.0;

[[nodiscard]] inline Script parse_script(std::istream& is) {
    Script out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto words = split(body);
        if (words.size() < 2)
            throw ParseError("script line " + std::to_string(lineno) + ": expected '<t> <command> ...'");
        ScriptItem item;
        try {
            item.t = parse_double(words[0]);
        } catch (const ParseError&) {
            throw ParseError("script line " + std::to_string(lineno) + ": bad time '" +
                             std::string(words[0]) + "'");
        }
        if (!(item.t >= 0) || !std::isfinite(item.t))
            throw ParseError("script line " + std::to_string(lineno) + ": time must be finite and >= 0");
        item.verb = std::string(words[1]);
        for (std::size_t i = 2; i < words.size(); ++i) item.args.emplace_back(words[i]);
        out.push_back(std::move(item));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const ScriptItem& a, const ScriptItem& b) { return a.t < b.t; });
    return out;
}

[[nodiscard]] inline NoiseProfile parse_noise(std::string_view name) {
    if (name == "none") return {};
    if (name == "mouse") return noise_presets::mouse;
    if (name == "robot") return noise_presets::robot;
    if (name == "training") return noise_presets::training;
    throw ConfigError("unknown noise preset '" + std::string(name) + "'");
}

// Drag stroke for a script item, in meters, starting at the origin.
[[nodiscard]] inline Trajectory script_stroke(const ScriptItem& item) {
    double scale = kDefaultDragScale;
    NoiseProfile noise{};
    std::size_t samples = kCorpusSamples;
    std::optional<Trajectory> from_file;
    std::size_t first_opt = 1;
    if (item.verb == "drag-file") {
        if (item.args.empty()) throw ConfigError("drag-file needs a path");
        std::ifstream in(item.args[0]);
        if (!in) throw ConfigError("cannot open trajectory '" + item.args[0] + "'");
        from_file = read_trajectory(in);
        scale = 1.0;
    } else if (item.args.empty() || !parse_shape(item.args[0])) {
        throw ConfigError("drag needs a shape name");
    }
    for (std::size_t i = first_opt; i < item.args.size(); ++i) {
        const auto& a = item.args[i];
        const auto eq = a.find('=');
        if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + a + "'");
        const auto key = std::string_view(a).substr(0, eq);
        const auto val = std::string_view(a).substr(eq + 1);
        try {
            if (key == "scale") scale = parse_double(val);
            else if (key == "seed") noise.seed = static_cast<std::uint64_t>(parse_int(val));
            else if (key == "samples") samples = static_cast<std::size_t>(parse_int(val));
            else if (key == "noise") {
                const auto seed = noise.seed;
                noise = parse_noise(val);
                noise.seed = seed;
            } else throw ConfigError("unknown drag option '" + std::string(key) + "'");
        } catch (const ParseError& e) {
            throw ConfigError(std::string(key) + ": " + e.what());
        }
    }
    if (!(scale > 0) || !std::isfinite(scale)) throw ConfigError("drag scale must be > 0");
    const Trajectory base = from_file ? *from_file : generate_shape(*parse_shape(item.args[0]), noise, samples);
    return placed(base, scale, {});
}

// Applies one script input to the session now.
inline void apply_script_item(Session& s, const ScriptItem& item, const ProfileTable& table) {
    if (item.verb == "touch") {
        if (item.args.size() != 1 || (item.args[0] != "on" && item.args[0] != "off"))
            throw ConfigError("touch takes 'on' or 'off'");
        s.set_touch(item.args[0] == "on");
    } else if (item.verb == "drag" || item.verb == "drag-file") {
        s.inject_drag_path(script_stroke(item));
    } else if (item.verb == "profile") {
        if (item.args.size() != 1) throw ConfigError("profile takes a name");
        s.configure(profile_fields(table.get(item.args[0])));
    } else {
        if (item.args.empty()) throw ConfigError("unknown script command '" + item.verb + "'");
        std::string value = item.args[0];
        for (std::size_t i = 1; i < item.args.size(); ++i) value += ' ' + item.args[i];
        s.configure({{item.verb, value}});
    }
}

class ScriptRunner {
public:
    ScriptRunner(const Script& script, const ProfileTable& table, bool skip_blocked_drags = false)
        : script_(script), table_(table), skip_blocked_(skip_blocked_drags) {}

    // Applies every item due at or before the session's current time.
    void apply_due(Session& s) {
        while (next_ < script_.size() && script_[next_].t <= s.now() + 1e-9) {
            try {
                apply_script_item(s, script_[next_++], table_);
            } catch (const PathOutOfArena&) {
                if (!skip_blocked_) throw;
                ++skipped_;
            }
        }
    }

    [[nodiscard]] bool exhausted() const noexcept { return next_ >= script_.size(); }
    // Drags dropped because the robot stood too near a wall.
    [[nodiscard]] std::size_t skipped() const noexcept { return skipped_; }

    // Time the last scripted input finishes.
    [[nodiscard]] double end_time() const {
        double end = 0;
        for (const auto& item : script_) {
            double d = 0;
            if (item.verb == "drag" || item.verb == "drag-file") d = script_stroke(item).duration();
            end = std::max(end, item.t + d);
        }
        return end;
    }

private:
    const Script& script_;
    const ProfileTable& table_;
    bool skip_blocked_;
    std::size_t next_{0};
    std::size_t skipped_{0};
};

// ─── Traces ──────────────────────────────────────────────────────────────────
struct SessionTrace {
    SessionSetup setup;
    InputTape tape;
    std::vector<TickRecord> records;
};

inline constexpr int kTraceDigits = 9;

[[nodiscard]] inline std::string format_field(double v) {
    return format_sig(v == 0 ? 0.0 : v, kTraceDigits);  // no "-0"
}

[[nodiscard]] inline std::string format_event_token(const Event& e) {
    std::string out = "event=" + e.name;
    if (e.shape) out += ",shape=" + std::string(to_string(*e.shape));
    if (e.technique) out += ",technique=" + std::string(to_string(*e.technique));
    if (!e.cause.empty()) out += ",cause=" + e.cause;
    return out;
}

// `t x y vx vy touched led_r led_g led_b led_bright state phase [event...]`
[[nodiscard]] inline std::string format_record(const TickRecord& r) {
    std::string out = format_field(r.t);
    for (double v : {r.robot.position.x, r.robot.position.y, r.robot.velocity.x, r.robot.velocity.y})
        out += ' ' + format_field(v);
    out += r.robot.touched ? " 1" : " 0";
    out += ' ' + std::to_string(r.robot.led.color.r) + ' ' + std::to_string(r.robot.led.color.g) + ' ' +
           std::to_string(r.robot.led.color.b);
    out += ' ' + format_field(r.robot.led.brightness);
    out += ' ' + std::string(to_string(r.state)) + ' ' + std::string(to_string(r.phase));
    for (const auto& e : r.events) out += ' ' + format_event_token(e);
    return out;
}

inline void write_trace(std::ostream& os, const SessionTrace& trace) {
    const auto& s = trace.setup;
    auto cfg = [&](std::string_view k, const std::string& v) { os << "#cfg " << k << '=' << v << '\n'; };
    cfg("format", "yolo-trace-1");
    cfg("tick", format_exact(s.sim.tick));
    cfg("arena_width", format_exact(s.sim.arena_width));
    cfg("arena_height", format_exact(s.sim.arena_height));
    cfg("max_speed", format_exact(s.sim.max_speed));
    cfg("seed", std::to_string(s.sim.seed));
    for (const auto& [k, v] : profile_fields(s.profile)) cfg(k, v);
    for (const auto& [k, v] : schedule_fields(s.schedule)) cfg(k, v);
    cfg("model", s.model);
    cfg("ticks", std::to_string(trace.records.size()));
    for (const auto& [k, in] : trace.tape) {
        const auto at = std::to_string(k);
        if (in.touch) cfg("input", at + " touch " + (*in.touch ? "on" : "off"));
        if (in.drag.x != 0 || in.drag.y != 0)
            cfg("input", at + " drag " + format_exact(in.drag.x) + ' ' + format_exact(in.drag.y));
        for (const auto& [ck, cv] : in.config) cfg("input", at + " config " + ck + ' ' + cv);
    }
    for (const auto& r : trace.records) os << format_record(r) << '\n';
}

[[nodiscard]] inline std::string trace_text(const SessionTrace& trace) {
    std::ostringstream os;
    write_trace(os, trace);
    return os.str();
}

// Runs to the arc end, or until the script is exhausted plus a grace period.
[[nodiscard]] inline SessionTrace run_session(const SessionSetup& setup, const Script& script,
                                              const ProfileTable& table = {},
                                              std::shared_ptr<const TrainedModel> model = nullptr,
                                              double grace = kScriptGrace, bool skip_blocked_drags = false) {
    setup.sim.validate();
    setup.schedule.validate();
    Session session(setup, model ? std::move(model) : load_model(setup.model));
    ScriptRunner runner(script, table, skip_blocked_drags);
    const double end = script.empty() ? setup.schedule.total()
                                      : std::min(setup.schedule.total(), runner.end_time() + grace);
    const auto last = static_cast<std::uint64_t>(std::floor(end / setup.sim.tick + 1e-9));

    SessionTrace trace;
    trace.setup = setup;
    trace.records.reserve(last);
    while (session.ticks() < last) {
        runner.apply_due(session);
        trace.records.push_back(session.step());
    }
    trace.tape = session.tape();
    return trace;
}

// ─── Replay ──────────────────────────────────────────────────────────────────
struct ParsedTrace {
    SessionSetup setup;
    InputTape tape;
    std::vector<std::string> lines;
};

[[nodiscard]] inline ParsedTrace parse_trace(std::istream& is) {
    ParsedTrace out;
    std::optional<std::size_t> ticks;
    bool have_format = false;
    std::string line;
    auto bad = [](const std::string& why) { return MalformedTrace(why); };
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line.rfind("#cfg ", 0) != 0) {
            if (line.front() == '#') continue;
            out.lines.push_back(line);
            continue;
        }
        const std::string_view body = std::string_view(line).substr(5);
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) throw bad("header without '=': " + line);
        const auto key = body.substr(0, eq);
        const auto val = body.substr(eq + 1);
        try {
            auto& s = out.setup;
            if (key == "format") {
                if (val != "yolo-trace-1") throw bad("unsupported trace format '" + std::string(val) + "'");
                have_format = true;
            } else if (key == "tick") s.sim.tick = parse_double(val);
            else if (key == "arena_width") s.sim.arena_width = parse_double(val);
            else if (key == "arena_height") s.sim.arena_height = parse_double(val);
            else if (key == "max_speed") s.sim.max_speed = parse_double(val);
            else if (key == "seed") s.sim.seed = static_cast<std::uint64_t>(parse_int(val));
            else if (key == "model") s.model = std::string(val);
            else if (key == "ticks") ticks = static_cast<std::size_t>(parse_int(val));
            else if (key == "input") {
                const auto w = split(val);
                if (w.size() < 3) throw bad("short input header: " + line);
                auto& in = out.tape[static_cast<std::uint64_t>(parse_int(w[0]))];
                if (w[1] == "touch" && w.size() == 3) {
                    in.touch = w[2] == "on";
                } else if (w[1] == "drag" && w.size() == 4) {
                    in.drag = {parse_double(w[2]), parse_double(w[3])};
                } else if (w[1] == "config" && w.size() >= 4) {
                    // Values (palettes) may contain spaces.
                    const auto vpos = static_cast<std::size_t>(w[3].data() - val.data());
                    in.config.emplace_back(std::string(w[2]), std::string(val.substr(vpos)));
                } else {
                    throw bad("bad input header: " + line);
                }
            } else if (!apply_field(s.profile, s.schedule, key, val)) {
                throw bad("unknown header key '" + std::string(key) + "'");
            }
        } catch (const ParseError& e) {
            throw bad(std::string("bad header value: ") + e.what());
        } catch (const ConfigError& e) {
            throw bad(std::string("bad header value: ") + e.what());
        }
    }
    if (!have_format) throw bad("missing format header");
    if (!ticks) throw bad("missing tick count header");
    if (out.lines.size() != *ticks)
        throw bad("trace truncated: header says " + std::to_string(*ticks) + " ticks, found " +
                  std::to_string(out.lines.size()));
    constexpr std::size_t kFixedFields = 12;
    for (std::size_t i = 0; i < out.lines.size(); ++i)
        if (split(out.lines[i]).size() < kFixedFields)
            throw bad("tick line " + std::to_string(i + 1) + " has too few fields");
    return out;
}

struct Divergence {
    std::uint64_t tick{0};  // 1-based tick index
    std::string field;
    std::string expected;
    std::string actual;
};

struct ReplayReport {
    std::size_t ticks{0};
    std::size_t divergent_ticks{0};
    std::optional<Divergence> first;

    [[nodiscard]] bool ok() const noexcept { return divergent_ticks == 0; }
};

inline constexpr double kReplayTolerance = 1e-9;

namespace detail {
inline constexpr std::array<std::string_view, 12> kTraceFields{
    "t", "x", "y", "vx", "vy", "touched", "led_r", "led_g", "led_b", "led_bright", "state", "phase"};

[[nodiscard]] inline bool same_token(std::string_view a, std::string_view b) {
    if (a == b) return true;
    try {
        return std::abs(parse_double(a) - parse_double(b)) <= kReplayTolerance;
    } catch (const ParseError&) {
        return false;
    }
}
}  // namespace detail

[[nodiscard]] inline ReplayReport replay(const ParsedTrace& trace,
                                         std::shared_ptr<const TrainedModel> model = nullptr) {
    Session session(trace.setup, model ? std::move(model) : load_model(trace.setup.model));
    session.load_tape(trace.tape);
    ReplayReport report;
    for (const auto& expected : trace.lines) {
        const auto rec = session.step();
        const auto actual = format_record(rec);
        ++report.ticks;
        const auto e = split(expected), a = split(actual);
        std::optional<Divergence> d;
        for (std::size_t i = 0; i < std::max(e.size(), a.size()) && !d; ++i) {
            const auto ev = i < e.size() ? e[i] : std::string_view{};
            const auto av = i < a.size() ? a[i] : std::string_view{};
            if (!detail::same_token(ev, av))
                d = Divergence{rec.tick,
                               i < detail::kTraceFields.size() ? std::string(detail::kTraceFields[i]) : "events",
                               std::string(ev), std::string(av)};
        }
        if (d) {
            ++report.divergent_ticks;
            if (!report.first) report.first = std::move(d);
        }
    }
    return report;
}

[[nodiscard]] inline ReplayReport replay(std::istream& is) { return replay(parse_trace(is)); }

}  // namespace yolo
