#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "yolo/behavior.hpp"
#include "yolo/knn.hpp"

using namespace yolo;

TEST(Compose, MovementAndLight) {
    ComposedBehavior b;
    b.add({MovementBehavior{ShapeClass::Circle, 0.1, 0.1}, 4.0});
    b.add({LightBehavior{{kWhite}, 0.5, Animation::Blink}, 2.0});
    ASSERT_NE(b.movement(), nullptr);
    ASSERT_NE(b.light(), nullptr);
    EXPECT_EQ(b.duration(), 4.0);
    EXPECT_EQ(b.parts().size(), 2u);
}

TEST(Compose, SameKindReplaces) {
    ComposedBehavior b;
    b.add({LightBehavior{{kWhite}, 0.5, Animation::Solid}, 1.0});
    b.add({LightBehavior{{{1, 2, 3}}, 0.2, Animation::Pulse}, 3.0});
    EXPECT_EQ(b.parts().size(), 1u);
    EXPECT_EQ(b.light()->brightness, 0.2);
    EXPECT_EQ(b.duration(), 3.0);
}

TEST(Compose, RejectsInvalidParts) {
    ComposedBehavior b;
    EXPECT_THROW(b.add({LightBehavior{{}, 0.5, Animation::Solid}, 1.0}), ConfigError);
    EXPECT_THROW(b.add({LightBehavior{{kWhite}, 1.5, Animation::Solid}, 1.0}), ConfigError);
    EXPECT_THROW(b.add({MovementBehavior{ShapeClass::Line, 0.5, 0.1}, 1.0}), ConfigError);
    EXPECT_THROW(b.add({MovementBehavior{ShapeClass::Line, 0.1, 0.1}, 0.0}), ConfigError);
}

TEST(Profiles, PresetsAreOrdered) {
    const auto e = profile_preset("exuberant");
    const auto h = profile_preset("harmonious");
    const auto a = profile_preset("aloof");
    EXPECT_GT(e.speed, h.speed);
    EXPECT_GT(h.speed, a.speed);
    EXPECT_GT(e.amplitude, h.amplitude);
    EXPECT_GT(h.amplitude, a.amplitude);
    EXPECT_GT(e.brightness, h.brightness);
    EXPECT_GT(h.brightness, a.brightness);
    EXPECT_LT(e.proactivity, h.proactivity);
    EXPECT_TRUE(std::isinf(a.proactivity));
    for (const auto& p : {e, h, a}) EXPECT_NO_THROW(validate(p));
}

TEST(Profiles, UnknownName) { EXPECT_THROW((void)profile_preset("grumpy"), UnknownProfile); }

TEST(ProfileTable, SetOverridesOneField) {
    ProfileTable t;
    t.set("aloof.speed", "0.05");
    EXPECT_EQ(t.get("aloof").speed, 0.05);
    EXPECT_EQ(t.get("aloof").amplitude, profile_preset("aloof").amplitude);
}

TEST(ProfileTable, NewProfileStartsFromHarmonious) {
    ProfileTable t;
    t.set("shy.palette", "10,20,30 40,50,60");
    const auto& p = t.get("shy");
    EXPECT_EQ(p.name, "shy");
    EXPECT_EQ(p.palette, (std::vector<Rgb>{{10, 20, 30}, {40, 50, 60}}));
    EXPECT_EQ(p.speed, profile_preset("harmonious").speed);
}

TEST(ProfileTable, RejectsBadValues) {
    ProfileTable t;
    EXPECT_THROW(t.set("aloof.speed", "0.9"), ConfigError);
    EXPECT_THROW(t.set("aloof.color", "1"), ConfigError);
    EXPECT_THROW(t.set("aloof.palette", "1,2"), ConfigError);
    EXPECT_THROW(t.set("speed", "0.1"), ConfigError);
    EXPECT_THROW(t.set("Bad.speed", "0.1"), ConfigError);
    EXPECT_EQ(t.get("aloof"), profile_preset("aloof"));
}

TEST(ProfileTable, LoadReportsLine) {
    ProfileTable t;
    std::istringstream ok("# comment\n\nplayful.speed = 0.2\nplayful.proactivity = 15\n");
    t.load(ok);
    EXPECT_EQ(t.get("playful").proactivity, 15.0);
    std::istringstream bad("playful.speed = 0.2\nnonsense\n");
    try {
        t.load(bad);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
}

TEST(ProfileTable, PaletteTextRoundTrips) {
    const std::vector<Rgb> p{{0, 128, 0}, {0, 0, 255}};
    EXPECT_EQ(ProfileTable::parse_palette(ProfileTable::format_palette(p)), p);
}

TEST(Movement, DurationFromSpeedAndAmplitude) {
    const auto p = profile_preset("harmonious");
    const auto b = make_movement(p, ShapeClass::Circle);
    EXPECT_NEAR(b.duration(), MovementPath::of(ShapeClass::Circle).length() * p.amplitude / p.speed, 1e-12);
    EXPECT_EQ(b.light()->animation, Animation::Pulse);
    EXPECT_EQ(b.movement()->shape, ShapeClass::Circle);
}

TEST(StepProperty, SpeedNeverExceedsSetting) {
    for (const auto name : kPresetNames) {
        const auto p = profile_preset(name);
        for (ShapeClass c : kAllShapes) {
            const auto b = make_movement(p, c);
            for (double t = 0; t < b.duration() + 0.2; t += 0.05) {
                const auto out = yolo::step(b, t, 0.05);
                EXPECT_LE(out.wheel.speed, p.speed + 1e-12);
                EXPECT_NO_THROW(validate(out.wheel));
                EXPECT_NO_THROW(validate(out.led));
            }
            EXPECT_TRUE(yolo::step(b, b.duration(), 0.05).done);
            EXPECT_EQ(yolo::step(b, b.duration(), 0.05).wheel.speed, 0.0);
        }
    }
}

TEST(StepProperty, IntegratedPathStaysNearOutline) {
    const auto p = profile_preset("exuberant");
    for (ShapeClass c : kAllShapes) {
        const auto b = make_movement(p, c);
        const auto& path = MovementPath::of(c);
        Vec2 pos = path.at(0) * p.amplitude;
        for (double t = 0; t < b.duration(); t += 0.05) pos += yolo::step(b, t, 0.05).wheel.velocity() * 0.05;
        const Vec2 end = path.at(path.length()) * p.amplitude;
        EXPECT_LT(distance(pos, end), 1e-3) << to_string(c);
    }
}

TEST(Profiles, PalettesAreDisjoint) {
    const auto e = profile_preset("exuberant").palette, h = profile_preset("harmonious").palette,
               a = profile_preset("aloof").palette;
    for (const auto& [x, y] : {std::pair{e, h}, std::pair{h, a}, std::pair{e, a}})
        for (const Rgb& c : x) EXPECT_EQ(std::count(y.begin(), y.end(), c), 0);
}

namespace {

// Dead-reckons a movement's wheel commands at a fixed tick.
std::vector<TimedPoint> drive(const ComposedBehavior& b, double dt = 0.05) {
    Vec2 pos{};
    std::vector<TimedPoint> out{{0, 0, 0}};
    for (double t = 0; t < b.duration(); t += dt) {
        pos += yolo::step(b, t, dt).wheel.velocity() * dt;
        out.push_back({t + dt, pos.x, pos.y});
    }
    return out;
}

}  // namespace

TEST(StepProperty, ClosedShapesReturnToStart) {
    for (const auto name : kPresetNames) {
        const auto p = profile_preset(name);
        for (ShapeClass c : {ShapeClass::Circle, ShapeClass::Rect, ShapeClass::Loop}) {
            const auto path = drive(make_movement(p, c));
            EXPECT_LE(norm(path.back().position()), 0.05 * p.amplitude) << name << ' ' << to_string(c);
        }
    }
}

TEST(StepProperty, DrivenPathClassifiesAsCommanded) {
    const auto model = default_model();
    std::size_t hits = 0, total = 0;
    for (const auto name : kPresetNames)
        for (ShapeClass c : kAllShapes) {
            hits += classify(model, Trajectory(drive(make_movement(profile_preset(name), c)))).label == c;
            ++total;
        }
    EXPECT_GE(double(hits) / double(total), 0.9);
}

TEST(Step, PaletteCyclesOncePerSecond) {
    const auto b = idle_light(profile_preset("aloof"));
    EXPECT_EQ(yolo::step(b, 0.5, 0.05).led.color, (Rgb{0, 128, 0}));
    EXPECT_EQ(yolo::step(b, 1.5, 0.05).led.color, (Rgb{0, 0, 255}));
    EXPECT_EQ(yolo::step(b, 2.5, 0.05).led.color, (Rgb{0, 128, 0}));
    EXPECT_EQ(yolo::step(b, 0.5, 0.05).led.brightness, 0.3);
}

TEST(Step, TouchOverrideIsWhite) {
    const auto out = yolo::step(touch_override(), 12.0, 0.05);
    EXPECT_EQ(out.led.color, kWhite);
    EXPECT_EQ(out.led.brightness, kTouchBrightness);
    EXPECT_EQ(out.wheel.speed, 0.0);
    EXPECT_FALSE(out.done);
}

TEST(Brightness, PulseFormula) {
    const LightBehavior l{{kWhite}, 1.0, Animation::Pulse};
    EXPECT_NEAR(animated_brightness(l, 0.0), 0.6, 1e-12);
    EXPECT_NEAR(animated_brightness(l, 0.25), 1.0, 1e-12);
    EXPECT_NEAR(animated_brightness(l, 0.5), 0.6, 1e-12);
    EXPECT_NEAR(animated_brightness(l, 0.75), 0.2, 1e-12);
}

TEST(Brightness, Blink) {
    const LightBehavior l{{kWhite}, 0.7, Animation::Blink};
    EXPECT_EQ(animated_brightness(l, 0.1), 0.7);
    EXPECT_EQ(animated_brightness(l, 0.6), 0.0);
    EXPECT_EQ(animated_brightness(l, 1.1), 0.7);
}

TEST(BrightnessProperty, PulseStaysInRange) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> t(0, 1000), b(0, 1);
    for (int i = 0; i < 10000; ++i) {
        const LightBehavior l{{kWhite}, b(rng), Animation::Pulse};
        const double v = animated_brightness(l, t(rng));
        EXPECT_GE(v, 0.2 * l.brightness - 1e-15);
        EXPECT_LE(v, l.brightness + 1e-15);
    }
}
