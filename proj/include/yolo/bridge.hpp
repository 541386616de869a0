// Session bridge protocol: JSON text messages between a live simulator and a
// play client. Transport-independent; bridge_server.hpp carries it over a
// WebSocket.
//
// Client -> server (every message has "kind" and an increasing integer "seq"):
//   hello  {version}
//   drag   {t, dx, dy}      displacement in meters around session time t
//   touch  {t, on}
//   config {key, value}     profile | arc.rising|climax|falling |
//                           speed|amplitude|brightness|proactivity|palette |
//                           <name>.<field> (defines or edits a named profile)
// Server -> client (gapless "seq" per session, plus "t"):
//   hello  {version, tick, profile}
//   state  {x, y, r, g, b, bright, phase, state, dropped}
//   event  {name, shape?, technique?, cause?}
//   error  {reason}         sent last, then the connection closes

#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cmath>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "yolo/simulator.hpp"

namespace yolo {

using Json = nlohmann::json;

inline constexpr int kProtocolVersion = 1;
inline constexpr std::size_t kOutboxCapacity = 1000;

// Bounded outbound queue. When full the oldest message is discarded and
// counted; sequence numbers are assigned on entry so they stay gapless
// from the producer's side.
class Outbox {
public:
    explicit Outbox(std::size_t capacity = kOutboxCapacity) : capacity_(capacity) {}

    void push(Json msg) {
        {
            std::lock_guard lock(mu_);
            msg["seq"] = next_seq_++;
            if (queue_.size() >= capacity_) {
                queue_.pop_front();
                ++dropped_;
            }
            queue_.push_back(msg.dump());
        }
        cv_.notify_one();
    }

    [[nodiscard]] std::optional<std::string> try_pop() {
        std::lock_guard lock(mu_);
        if (queue_.empty()) return std::nullopt;
        auto out = std::move(queue_.front());
        queue_.pop_front();
        return out;
    }

    template <class Rep, class Period>
    [[nodiscard]] std::optional<std::string> wait_pop(std::chrono::duration<Rep, Period> timeout) {
        std::unique_lock lock(mu_);
        cv_.wait_for(lock, timeout, [&] { return !queue_.empty(); });
        if (queue_.empty()) return std::nullopt;
        auto out = std::move(queue_.front());
        queue_.pop_front();
        return out;
    }

    [[nodiscard]] std::uint64_t dropped() const {
        std::lock_guard lock(mu_);
        return dropped_;
    }
    [[nodiscard]] std::size_t size() const {
        std::lock_guard lock(mu_);
        return queue_.size();
    }

private:
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::deque<std::string> queue_;
    std::size_t capacity_;
    std::uint64_t next_seq_{0};
    std::uint64_t dropped_{0};
};

template <class T>
class Mailbox {
public:
    void push(T v) {
        std::lock_guard lock(mu_);
        items_.push_back(std::move(v));
    }
    [[nodiscard]] std::vector<T> drain() {
        std::lock_guard lock(mu_);
        std::vector<T> out(std::make_move_iterator(items_.begin()), std::make_move_iterator(items_.end()));
        items_.clear();
        return out;
    }

private:
    std::mutex mu_;
    std::deque<T> items_;
};

// ─── Inbound messages ────────────────────────────────────────────────────────
struct DragMsg {
    double t{0}, dx{0}, dy{0};
};
struct TouchMsg {
    double t{0};
    bool on{false};
};
struct ConfigMsg {
    std::string key, value;
};
using ClientCommand = std::variant<DragMsg, TouchMsg, ConfigMsg>;

// Validates one client message. Returns nothing for hello. Throws ProtocolError.
class ClientDecoder {
public:
    std::optional<ClientCommand> decode(const std::string& text) {
        Json j;
        try {
            j = Json::parse(text);
        } catch (const Json::parse_error&) {
            throw ProtocolError("message is not valid JSON");
        }
        if (!j.is_object()) throw ProtocolError("message must be a JSON object");
        const auto kind = str(j, "kind");
        if (!j.contains("seq") || !j["seq"].is_number_integer())
            throw ProtocolError("'" + kind + "' message needs an integer seq");
        const auto seq = j["seq"].get<std::int64_t>();
        if (last_seq_ && seq <= *last_seq_)
            throw ProtocolError("seq " + std::to_string(seq) + " does not increase");
        last_seq_ = seq;

        if (kind == "hello") {
            if (num(j, "version") != kProtocolVersion)
                throw ProtocolError("unsupported protocol version");
            greeted_ = true;
            return std::nullopt;
        }
        if (!greeted_) throw ProtocolError("first message must be hello");
        if (kind == "drag") {
            DragMsg d{num(j, "t"), num(j, "dx"), num(j, "dy")};
            if (d.t < 0) throw ProtocolError("drag t must be >= 0");
            return d;
        }
        if (kind == "touch") {
            if (!j.contains("on") || !j["on"].is_boolean()) throw ProtocolError("touch needs boolean 'on'");
            TouchMsg m{num(j, "t"), j["on"].get<bool>()};
            if (m.t < 0) throw ProtocolError("touch t must be >= 0");
            return m;
        }
        if (kind == "config") {
            ConfigMsg c{str(j, "key"), ""};
            if (!j.contains("value")) throw ProtocolError("config needs 'value'");
            const auto& v = j["value"];
            if (v.is_string()) c.value = v.get<std::string>();
            else if (v.is_number()) c.value = format_exact(v.get<double>());
            else throw ProtocolError("config value must be a string or number");
            return c;
        }
        throw ProtocolError("unknown message kind '" + kind + "'");
    }

private:
    static std::string str(const Json& j, const char* key) {
        if (!j.contains(key) || !j[key].is_string())
            throw ProtocolError(std::string("missing string field '") + key + "'");
        return j[key].get<std::string>();
    }
    static double num(const Json& j, const char* key) {
        if (!j.contains(key) || !j[key].is_number())
            throw ProtocolError(std::string("missing numeric field '") + key + "'");
        const double v = j[key].get<double>();
        if (!std::isfinite(v)) throw ProtocolError(std::string("field '") + key + "' must be finite");
        return v;
    }

    std::optional<std::int64_t> last_seq_;
    bool greeted_{false};
};

// ─── Live session ────────────────────────────────────────────────────────────
// Owned by the simulation thread; post() and the outbox are the only members
// touched from the network side.
class LiveSession {
public:
    LiveSession(SessionSetup setup, ProfileTable table, std::shared_ptr<const TrainedModel> model)
        : table_(std::move(table)), session_(std::move(setup), std::move(model)) {
        outbox_.push({{"kind", "hello"},
                      {"t", session_.now()},
                      {"version", kProtocolVersion},
                      {"tick", session_.setup().sim.tick},
                      {"profile", session_.profile().name}});
    }

    // Network side. Throws ProtocolError on a malformed message.
    void post(const std::string& text) {
        if (auto cmd = decoder_.decode(text)) inbox_.push(std::move(*cmd));
    }

    // Sends the final error message; the transport closes after delivering it.
    void fail(const std::string& reason) {
        outbox_.push({{"kind", "error"}, {"t", last_t_.load()}, {"reason", reason}});
    }

    [[nodiscard]] Outbox& outbox() noexcept { return outbox_; }
    [[nodiscard]] const Session& session() const noexcept { return session_; }
    [[nodiscard]] bool ended() const noexcept {
        return session_.now() >= session_.schedule().total();
    }

    // Simulation side: drain inputs, advance one tick, publish. Returns false
    // if an input was rejected (an error message has been queued).
    bool tick() {
        bool ok = true;
        for (auto& cmd : inbox_.drain()) {
            try {
                std::visit([&](const auto& m) { apply(m); }, cmd);
            } catch (const Error& e) {
                fail(e.what());
                ok = false;
            }
        }
        const auto rec = session_.step();
        last_t_ = rec.t;
        outbox_.push({{"kind", "state"},
                      {"t", rec.t},
                      {"x", rec.robot.position.x},
                      {"y", rec.robot.position.y},
                      {"r", rec.robot.led.color.r},
                      {"g", rec.robot.led.color.g},
                      {"b", rec.robot.led.color.b},
                      {"bright", rec.robot.led.brightness},
                      {"phase", to_string(rec.phase)},
                      {"state", to_string(rec.state)},
                      {"dropped", outbox_.dropped()}});
        for (const auto& e : rec.events) {
            Json m{{"kind", "event"}, {"t", e.t}, {"name", e.name}};
            if (e.shape) m["shape"] = to_string(*e.shape);
            if (e.technique) m["technique"] = to_string(*e.technique);
            if (!e.cause.empty()) m["cause"] = e.cause;
            outbox_.push(std::move(m));
        }
        return ok;
    }

private:
    [[nodiscard]] std::uint64_t tick_for(double t) const {
        return static_cast<std::uint64_t>(std::ceil(t / session_.setup().sim.tick - 1e-9));
    }

    void apply(const DragMsg& m) { session_.add_drag_at(tick_for(m.t), {m.dx, m.dy}); }
    // A touch change lands at the start of a tick interval.
    void apply(const TouchMsg& m) { session_.set_touch_at(tick_for(m.t) + 1, m.on); }

    void apply(const ConfigMsg& m) {
        static constexpr std::array<std::string_view, 5> kFields{"speed", "amplitude", "brightness",
                                                                 "proactivity", "palette"};
        if (m.key == "profile") {
            session_.configure(profile_fields(table_.get(m.value)));
        } else if (m.key.rfind("arc.", 0) == 0) {
            session_.configure({{m.key, m.value}});
        } else if (std::find(kFields.begin(), kFields.end(), m.key) != kFields.end()) {
            session_.configure({{"profile." + m.key, m.value}});
        } else if (m.key.find('.') != std::string::npos) {
            table_.set(m.key, m.value);
            const auto name = m.key.substr(0, m.key.find('.'));
            if (name == session_.profile().name) session_.configure(profile_fields(table_.get(name)));
        } else {
            throw ConfigError("unknown config key '" + m.key + "'");
        }
    }

    ProfileTable table_;
    Session session_;
    ClientDecoder decoder_;
    Mailbox<ClientCommand> inbox_;
    Outbox outbox_;
    std::atomic<double> last_t_{0};
};

}  // namespace yolo
