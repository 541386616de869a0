#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "yolo/simulator.hpp"

using namespace yolo;

namespace {

Script story() {
    std::ifstream in(std::string(YOLO_DATA_DIR) + "/story.script");
    return parse_script(in);
}

Script script_of(const std::string& text) {
    std::istringstream is(text);
    return parse_script(is);
}

SessionSetup setup_for(std::string_view profile, std::uint64_t seed = 7) {
    SessionSetup s;
    s.profile = profile_preset(profile);
    s.sim.seed = seed;
    return s;
}

std::vector<Event> events_of(const SessionTrace& tr) {
    std::vector<Event> out;
    for (const auto& r : tr.records) out.insert(out.end(), r.events.begin(), r.events.end());
    return out;
}

std::vector<Event> executions(const SessionTrace& tr) {
    std::vector<Event> out;
    for (const auto& e : events_of(tr))
        if (e.name == "execute") out.push_back(e);
    return out;
}

ParsedTrace parsed(const std::string& text) {
    std::istringstream is(text);
    return parse_trace(is);
}

}  // namespace

TEST(StepSim, StraightDrive) {
    const SimConfig cfg;
    RobotState s;
    s.position = cfg.centre();
    for (int i = 0; i < 20; ++i) s = step_sim(s, {}, {{0.0, 0.1}, {}}, cfg.tick, cfg);
    EXPECT_NEAR(s.position.x, 1.1, 1e-12);
    EXPECT_NEAR(s.position.y, 1.0, 1e-12);
}

TEST(StepSim, ClampsAtWall) {
    const SimConfig cfg;
    RobotState s;
    s.position = {1.95, 1.0};
    for (int i = 0; i < 20; ++i) s = step_sim(s, {}, {{0.0, 0.3}, {}}, cfg.tick, cfg);
    EXPECT_EQ(s.position.x, 2.0);
}

TEST(StepSim, HeldRobotOnlyMovesWithHand) {
    const SimConfig cfg;
    RobotState s;
    s.position = cfg.centre();
    s = step_sim(s, {{0.01, 0.0}, true}, {{0.0, 0.3}, {}}, cfg.tick, cfg);
    EXPECT_NEAR(s.position.x, 1.01, 1e-12);
    EXPECT_EQ(s.velocity.x, 0.0);
}

TEST(SimConfig, RejectsBadValues) {
    EXPECT_THROW((SimConfig{0.0}.validate()), ConfigError);
    EXPECT_THROW((SimConfig{0.05, -1.0}.validate()), ConfigError);
}

TEST(Session, InjectedCircleIsRecognized) {
    Session s(setup_for("harmonious"), shared_default_model());
    s.inject_drag_path(placed(generate_shape(ShapeClass::Circle, {}, 64), 0.3, {}));
    std::vector<Event> ev;
    for (int i = 0; i < 100; ++i) {
        const auto r = s.step();
        ev.insert(ev.end(), r.events.begin(), r.events.end());
    }
    const auto rec = std::find_if(ev.begin(), ev.end(), [](const Event& e) { return e.name == "recognized"; });
    ASSERT_NE(rec, ev.end());
    EXPECT_EQ(rec->shape, ShapeClass::Circle);
}

TEST(Session, EmptyPathIsNoOp) {
    Session s(setup_for("harmonious"), shared_default_model());
    s.inject_drag_path(Trajectory{});
    for (int i = 0; i < 10; ++i) (void)s.step();
    EXPECT_TRUE(s.tape().empty());
    EXPECT_EQ(s.robot().position, SimConfig{}.centre());
}

TEST(Session, PathLeavingArenaRejected) {
    Session s(setup_for("harmonious"), shared_default_model());
    const auto big = placed(generate_shape(ShapeClass::Line, {}, 64), 1.5, {});
    EXPECT_THROW(s.inject_drag_path(big), PathOutOfArena);
    EXPECT_TRUE(s.tape().empty());
}

TEST(Session, ConfigAppliesNextTick) {
    Session s(setup_for("harmonious"), shared_default_model());
    s.configure(profile_fields(profile_preset("aloof")));
    EXPECT_EQ(s.profile().name, "harmonious");
    const auto r = s.step();
    EXPECT_EQ(s.profile().name, "aloof");
    EXPECT_EQ(r.robot.led.brightness, 0.3);
    EXPECT_THROW(s.configure({{"profile.speed", "0.9"}}), ConfigError);
    EXPECT_THROW(s.configure({{"volume", "3"}}), ConfigError);
}

TEST(Session, AloofStaysStill) {
    const auto tr = run_session(setup_for("aloof"), {});
    EXPECT_EQ(tr.records.size(), 6000u);
    for (const auto& r : tr.records) EXPECT_NE(r.state, InteractionState::Executing);
    EXPECT_EQ(tr.records.back().robot.position, SimConfig{}.centre());
}

TEST(Session, ExuberantStartsOnItsOwn) {
    const auto tr = run_session(setup_for("exuberant"), {});
    const auto ex = executions(tr);
    ASSERT_FALSE(ex.empty());
    EXPECT_LE(ex.front().t, profile_preset("exuberant").proactivity + 10.0);
    EXPECT_EQ(ex.front().cause, "proactive");
}

TEST(Session, StoryMirrorsThenContrasts) {
    const auto tr = run_session(setup_for("harmonious"), story());
    std::vector<Event> reactive;
    for (const auto& e : executions(tr))
        if (e.technique) reactive.push_back(e);
    ASSERT_EQ(reactive.size(), 4u);
    EXPECT_EQ(reactive[0].technique, Technique::Mirror);
    EXPECT_EQ(reactive[0].shape, ShapeClass::Curl);
    EXPECT_EQ(reactive[1].technique, Technique::Mirror);
    EXPECT_EQ(reactive[2].technique, Technique::Contrast);
    EXPECT_EQ(reactive[2].phase, ArcPhase::Climax);
    EXPECT_NE(reactive[2].shape, reactive[2].recognized);
    EXPECT_EQ(reactive[3].technique, Technique::Mirror);
    EXPECT_EQ(reactive[3].phase, ArcPhase::FallingAction);
}

TEST(Trace, DeterministicText) {
    const auto a = trace_text(run_session(setup_for("harmonious"), story()));
    const auto b = trace_text(run_session(setup_for("harmonious"), story()));
    EXPECT_EQ(a, b);
    const auto c = trace_text(run_session(setup_for("harmonious", 8), story()));
    EXPECT_NE(a, c);
}

TEST(Trace, ReplayMatches) {
    for (const auto& [profile, script] :
         {std::pair{"harmonious", story()}, std::pair{"exuberant", script_of("20 touch on\n21 touch off\n")}}) {
        const auto text = trace_text(run_session(setup_for(profile), script));
        const auto rep = replay(parsed(text));
        EXPECT_TRUE(rep.ok()) << profile;
        EXPECT_GT(rep.ticks, 0u);
    }
}

TEST(Trace, ReplayKeepsMidSessionConfig) {
    const auto text =
        trace_text(run_session(setup_for("harmonious"), script_of("2 profile exuberant\n3 arc.climax 30\n"
                                                                   "4 profile.palette 1,2,3 4,5,6\n")));
    EXPECT_NE(text.find("#cfg input=81 config profile.palette 1,2,3 4,5,6"), std::string::npos);
    EXPECT_TRUE(replay(parsed(text)).ok());
}

TEST(Trace, TamperedLedDiverges) {
    const auto text = trace_text(run_session(setup_for("harmonious"), story()));
    std::istringstream is(text);
    std::ostringstream out;
    std::string line;
    std::size_t data_line = 0;
    while (std::getline(is, line)) {
        if (line.rfind('#', 0) != 0 && ++data_line == 37) {
            auto w = split(line);
            std::string edited;
            for (std::size_t i = 0; i < w.size(); ++i) {
                if (i) edited += ' ';
                edited += i == 6 ? std::string("7") : std::string(w[i]);
            }
            line = edited;
        }
        out << line << '\n';
    }
    const auto rep = replay(parsed(out.str()));
    EXPECT_EQ(rep.divergent_ticks, 1u);
    ASSERT_TRUE(rep.first);
    EXPECT_EQ(rep.first->tick, 37u);
    EXPECT_EQ(rep.first->field, "led_r");
}

TEST(Trace, TruncatedIsMalformed) {
    const auto text = trace_text(run_session(setup_for("harmonious"), script_of("1 touch on\n2 touch off\n")));
    EXPECT_THROW((void)parsed(text.substr(0, text.size() - 200)), MalformedTrace);
    EXPECT_THROW((void)parsed("#cfg ticks=0\n"), MalformedTrace);
    EXPECT_THROW((void)parsed("#cfg format=yolo-trace-1\n#cfg ticks=1\n0.05 1 1\n"), MalformedTrace);
    EXPECT_THROW((void)parsed("#cfg format=yolo-trace-9\n#cfg ticks=0\n"), MalformedTrace);
}

TEST(Script, ParsesAndSorts) {
    const auto s = script_of("# c\n5 touch off\n1.5 drag circle scale=0.2 seed=3\n\n1.5 touch on\n");
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s[0].verb, "drag");
    EXPECT_EQ(s[1].verb, "touch");
    EXPECT_EQ(s[2].t, 5.0);
}

TEST(Script, RejectsBadLines) {
    EXPECT_THROW((void)script_of("x touch on\n"), ParseError);
    EXPECT_THROW((void)script_of("-1 touch on\n"), ParseError);
    EXPECT_THROW((void)script_of("5\n"), ParseError);
    EXPECT_THROW((void)run_session(setup_for("aloof"), script_of("1 drag blob\n")), ConfigError);
    EXPECT_THROW((void)run_session(setup_for("aloof"), script_of("1 touch maybe\n")), ConfigError);
    EXPECT_THROW((void)run_session(setup_for("aloof"), script_of("1 profile grumpy\n")), UnknownProfile);
}

TEST(Script, BlockedDragIsAnErrorUnlessSkipped) {
    const auto s = script_of("1 drag line scale=1.5\n2 drag circle scale=0.2\n");
    EXPECT_THROW((void)run_session(setup_for("harmonious"), s), PathOutOfArena);
    const auto tr = run_session(setup_for("harmonious"), s, {}, nullptr, kScriptGrace, true);
    EXPECT_FALSE(tr.records.empty());
}

TEST(Script, EndsAfterGrace) {
    const auto tr = run_session(setup_for("aloof"), script_of("3 touch on\n4 touch off\n"));
    EXPECT_EQ(tr.records.size(), 280u);
}

class SessionProperty : public ::testing::TestWithParam<std::uint64_t> {};

// Random scripts: touch windows, drags of random shapes, profile switches.
TEST_P(SessionProperty, PhysicalAndTouchInvariants) {
    std::mt19937_64 rng(GetParam());
    std::uniform_real_distribution<double> gap(1.0, 20.0), hold(0.2, 6.0);
    std::uniform_int_distribution<std::size_t> shape(0, kShapeCount - 1), prof(0, 2);
    std::ostringstream text;
    double t = 0;
    while (t < 250) {
        t += gap(rng);
        const double h = hold(rng);
        text << t << " touch on\n";
        if (h > 3.0) text << t + 0.3 << " drag " << to_string(kAllShapes[shape(rng)]) << " scale=0.2 seed=" << rng() % 100 << '\n';
        text << t + h << " touch off\n";
        t += h;
        if (rng() % 4 == 0) text << t + 0.5 << " profile " << kPresetNames[prof(rng)] << '\n';
    }
    SessionSetup setup = setup_for(kPresetNames[prof(rng)], GetParam());
    // Drags that would carry the robot through a wall are skipped.
    const auto tr = run_session(setup, script_of(text.str()), {}, nullptr, kScriptGrace, true);
    Vec2 prev = setup.sim.centre();
    for (const auto& r : tr.records) {
        EXPECT_TRUE(setup.sim.inside(r.robot.position));
        EXPECT_LE(norm(r.robot.velocity), setup.sim.max_speed + 1e-12);
        if (r.robot.touched) {
            EXPECT_EQ(r.state, InteractionState::Touched);
            EXPECT_EQ(norm(r.robot.velocity), 0.0);
            EXPECT_EQ(r.robot.led.color, kWhite);
            EXPECT_EQ(r.robot.led.brightness, kTouchBrightness);
        } else {
            EXPECT_LE(distance(prev, r.robot.position), setup.sim.max_speed * setup.sim.tick + 1e-9);
        }
        for (const auto& e : r.events)
            if (e.name == "execute" && e.technique) {
                EXPECT_EQ(e.technique, technique_for(e.phase));
            }
        prev = r.robot.position;
    }
}

INSTANTIATE_TEST_SUITE_P(Seeds, SessionProperty, ::testing::Range<std::uint64_t>(1, 9));
