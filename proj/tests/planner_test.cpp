#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "yolo/simulator.hpp"

using namespace yolo;

namespace {

constexpr double kTick = 0.05;

// Drives a planner at a fixed tick with scripted touch and motion.
struct Harness {
    explicit Harness(PlannerConfig cfg) : planner(std::move(cfg), shared_default_model()) {}

    TickResult tick(Vec2 delta = {}, bool touched = false) {
        ++k;
        const double t = double(k) * kTick;
        const TouchState touch = touched ? TouchState{true, kTick} : TouchState{};
        auto r = planner.tick({touch, {delta.x, delta.y, kTick}}, t, kTick);
        for (auto& e : r.events) events.push_back(e);
        return r;
    }

    // Feeds a stroke's displacement tick by tick.
    void draw(const Trajectory& stroke, bool touched = false) {
        const auto pos = [&](double t) {
            if (t >= stroke.back().t) return stroke.back().position();
            std::size_t i = 1;
            while (stroke[i].t < t) ++i;
            const auto& a = stroke[i - 1];
            const auto& b = stroke[i];
            return a.position() + (b.position() - a.position()) * ((t - a.t) / (b.t - a.t));
        };
        Vec2 prev = pos(0);
        for (double t = kTick; t < stroke.back().t + kTick; t += kTick) {
            const Vec2 cur = pos(t);
            tick(cur - prev, touched);
            prev = cur;
        }
    }

    void idle(double seconds, bool touched = false) {
        for (int i = 0; i < int(std::lround(seconds / kTick)); ++i) tick({}, touched);
    }

    [[nodiscard]] std::vector<Event> named(const std::string& n) const {
        std::vector<Event> out;
        std::copy_if(events.begin(), events.end(), std::back_inserter(out),
                     [&](const Event& e) { return e.name == n; });
        return out;
    }

    Planner planner;
    std::uint64_t k{0};
    std::vector<Event> events;
};

PlannerConfig with_profile(std::string_view name) {
    PlannerConfig c;
    c.profile = profile_preset(name);
    return c;
}

Trajectory stroke(ShapeClass c, std::uint64_t seed = 0) {
    return placed(generate_shape(c, {0.0, 0.0, seed}, 64), 0.3, {});
}

}  // namespace

TEST(Arc, PhaseBoundaries) {
    const ArcSchedule s;
    EXPECT_EQ(phase_of(0, s), ArcPhase::RisingAction);
    EXPECT_EQ(phase_of(119.99, s), ArcPhase::RisingAction);
    EXPECT_EQ(phase_of(120, s), ArcPhase::Climax);
    EXPECT_EQ(phase_of(180, s), ArcPhase::FallingAction);
    EXPECT_EQ(phase_of(299.99, s), ArcPhase::FallingAction);
    EXPECT_EQ(phase_of(300, s), ArcPhase::Ended);
}

TEST(Arc, TechniquePerPhase) {
    EXPECT_EQ(technique_for(ArcPhase::RisingAction), Technique::Mirror);
    EXPECT_EQ(technique_for(ArcPhase::Climax), Technique::Contrast);
    EXPECT_EQ(technique_for(ArcPhase::FallingAction), Technique::Mirror);
    EXPECT_FALSE(technique_for(ArcPhase::Ended));
}

TEST(Arc, RejectsNonPositivePhases) {
    EXPECT_THROW((ArcSchedule{0, 60, 120}.validate()), ConfigError);
    EXPECT_THROW((ArcSchedule{120, 60, -1}.validate()), ConfigError);
}

TEST(Respond, MirrorRepeats) {
    std::mt19937_64 rng(0);
    for (ShapeClass c : kAllShapes) EXPECT_EQ(respond(c, Technique::Mirror, rng), c);
}

TEST(RespondProperty, ContrastNeverRepeats) {
    std::mt19937_64 rng(1);
    for (ShapeClass c : kAllShapes)
        for (int i = 0; i < 1000; ++i) EXPECT_NE(respond(c, Technique::Contrast, rng), c);
}

TEST(RespondProperty, ContrastIsUniform) {
    std::mt19937_64 rng(2);
    for (ShapeClass c : kAllShapes) {
        std::array<int, kShapeCount> hits{};
        for (int i = 0; i < 10000; ++i) ++hits[index_of(respond(c, Technique::Contrast, rng))];
        for (ShapeClass o : kAllShapes)
            if (o != c) {
                EXPECT_NEAR(hits[index_of(o)] / 10000.0, 0.2, 0.05);
            }
    }
}

TEST(EventFormat, AllFields) {
    const Event e{1.5, InteractionState::Idle, ArcPhase::RisingAction, "execute", ShapeClass::Circle,
                  Technique::Mirror, "mirror-of-circle", ShapeClass::Circle};
    EXPECT_EQ(format_event(e),
              "t=1.5 state=idle phase=rising event=execute shape=circle technique=mirror cause=mirror-of-circle");
    const Event bare{0.05, InteractionState::Touched, ArcPhase::Climax, "touch", {}, {}, "", {}};
    EXPECT_EQ(format_event(bare), "t=0.05 state=touched phase=climax event=touch");
}

TEST(Planner, NeedsModel) { EXPECT_THROW(Planner(PlannerConfig{}, nullptr), ConfigError); }

TEST(Planner, FirstTickAnnouncesPhase) {
    Harness h(with_profile("harmonious"));
    h.tick();
    ASSERT_FALSE(h.events.empty());
    EXPECT_EQ(h.events[0].name, "phase");
    EXPECT_EQ(h.events[0].cause, "start-to-rising");
}

TEST(Planner, MirrorsInRisingAction) {
    Harness h(with_profile("harmonious"));
    h.draw(stroke(ShapeClass::Circle));
    h.idle(4.0);
    const auto ex = h.named("execute");
    ASSERT_FALSE(ex.empty());
    EXPECT_EQ(ex[0].technique, Technique::Mirror);
    EXPECT_EQ(ex[0].shape, ShapeClass::Circle);
    EXPECT_EQ(ex[0].cause, "mirror-of-circle");
}

TEST(Planner, ContrastsAtClimax) {
    PlannerConfig cfg = with_profile("harmonious");
    cfg.schedule = {5, 60, 60};
    Harness h(cfg);
    h.idle(6.0);
    h.draw(stroke(ShapeClass::Rect));
    h.idle(4.0);
    const auto rec = h.named("recognized");
    const auto ex = h.named("execute");
    ASSERT_FALSE(rec.empty());
    ASSERT_FALSE(ex.empty());
    EXPECT_EQ(ex[0].technique, Technique::Contrast);
    EXPECT_NE(ex[0].shape, rec[0].shape);
    EXPECT_EQ(ex[0].recognized, rec[0].shape);
}

TEST(Planner, TouchAbortsExecution) {
    Harness h(with_profile("exuberant"));
    h.idle(10.5);
    ASSERT_EQ(h.planner.state(), InteractionState::Executing);
    const auto r = h.tick({}, true);
    EXPECT_EQ(r.state, InteractionState::Touched);
    EXPECT_EQ(h.named("abort").size(), 1u);
    ASSERT_NE(r.active.behavior.light(), nullptr);
    EXPECT_EQ(r.active.behavior.light()->palette.front(), kWhite);
    EXPECT_EQ(r.active.behavior.movement(), nullptr);
}

TEST(Planner, ShapeDrawnWhileHeldRunsOnRelease) {
    Harness h(with_profile("harmonious"));
    h.tick({}, true);
    h.draw(stroke(ShapeClass::Circle), true);
    h.idle(1.0, true);
    EXPECT_FALSE(h.named("recognized").empty());
    EXPECT_TRUE(h.named("execute").empty());
    h.tick();
    const auto ex = h.named("execute");
    ASSERT_EQ(ex.size(), 1u);
    EXPECT_EQ(ex[0].shape, ShapeClass::Circle);
}

TEST(Planner, AloofNeverSelfInitiates) {
    Harness h(with_profile("aloof"));
    h.idle(600.0);
    EXPECT_TRUE(h.named("execute").empty());
}

TEST(Planner, ExuberantActsAfterProactivity) {
    Harness h(with_profile("exuberant"));
    h.idle(11.0);
    const auto ex = h.named("execute");
    ASSERT_EQ(ex.size(), 1u);
    EXPECT_EQ(ex[0].cause, "proactive");
    EXPECT_FALSE(ex[0].technique);
    EXPECT_NEAR(ex[0].t, 10.0, kTick + 1e-9);
}

TEST(Planner, SilentAfterTheArc) {
    PlannerConfig cfg = with_profile("exuberant");
    cfg.schedule = {1, 1, 1};
    Harness h(cfg);
    h.idle(3.0);
    h.events.clear();
    h.draw(stroke(ShapeClass::Circle));
    h.idle(30.0);
    EXPECT_TRUE(h.named("execute").empty());
}

TEST(Planner, InvalidMotionIsDropped) {
    Harness h(with_profile("harmonious"));
    const auto r = h.planner.tick({{}, {std::nan(""), 0, kTick}}, kTick, kTick);
    EXPECT_TRUE(std::any_of(r.events.begin(), r.events.end(),
                            [](const Event& e) { return e.name == "dropped_input"; }));
    EXPECT_EQ(r.state, InteractionState::Idle);
}

TEST(Planner, StationaryWindowIsIdle) {
    Harness h(with_profile("aloof"));
    h.tick({0.001, 0});
    h.idle(3.5);
    EXPECT_EQ(h.named("idle_segment").size(), 1u);
    EXPECT_TRUE(h.named("recognized").empty());
}

TEST(Planner, IdleShowsProfileColours) {
    Harness h(with_profile("aloof"));
    const auto r = h.tick();
    ASSERT_NE(r.active.behavior.light(), nullptr);
    EXPECT_EQ(r.active.behavior.light()->palette, profile_preset("aloof").palette);
}
