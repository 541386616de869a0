// yolo: train / eval / corpus / simulate / replay / serve.
// Exit codes: 0 success, 1 threshold or replay failure, 2 input error.

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "yolo/bridge_server.hpp"
#include "yolo/yolo.hpp"

namespace {

using namespace yolo;

constexpr int kExitOk = 0;
constexpr int kExitThreshold = 1;
constexpr int kExitInput = 2;

struct NoiseFlags {
    std::string preset{"mouse"};
    std::optional<double> sigma;
    std::optional<double> drop;
    std::uint64_t seed{0};

    void add(CLI::App* cmd, std::uint64_t default_seed) {
        seed = default_seed;
        cmd->add_option("--noise", preset, "noise preset: none, mouse, robot, training")->capture_default_str();
        cmd->add_option("--sigma", sigma, "override jitter sigma");
        cmd->add_option("--drop", drop, "override drop rate");
        cmd->add_option("--seed", seed, "generator seed")->capture_default_str();
    }

    [[nodiscard]] NoiseProfile profile() const {
        NoiseProfile p = parse_noise(preset);
        if (sigma) p.jitter_sigma = *sigma;
        if (drop) p.drop_rate = *drop;
        p.seed = seed;
        p.validate();
        return p;
    }
};

ProfileTable load_profiles() {
    ProfileTable table;
    if (const char* path = std::getenv("YOLO_CONFIG"); path && *path) {
        std::ifstream in(path);
        if (!in) throw ConfigError(std::string("cannot open YOLO_CONFIG file '") + path + "'");
        table.load(in);
    }
    return table;
}

template <class F>
void write_file(const std::string& path, F&& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    body(out);
    if (!out) throw ConfigError("write to '" + path + "' failed");
}

// ─── corpus ──────────────────────────────────────────────────────────────────
struct CorpusCmd {
    std::size_t per_class{kDefaultTrainingPerClass};
    std::size_t samples{kCorpusSamples};
    NoiseFlags noise;
    std::string out;

    void add(CLI::App& app) {
        auto* cmd = app.add_subcommand("corpus", "write a generated feature corpus");
        cmd->add_option("--per-class", per_class)->capture_default_str();
        cmd->add_option("--samples", samples, "points per stroke")->capture_default_str();
        noise.preset = "training";
        noise.add(cmd, noise_presets::training.seed);
        cmd->add_option("--out", out)->required();
        cmd->callback([this] { run(); });
    }

    void run() const {
        const auto corpus = featurize(generate_corpus(per_class, noise.profile(), samples));
        write_file(out, [&](std::ostream& os) { write_feature_corpus(os, corpus); });
        std::cout << "wrote " << corpus.size() << " examples to " << out << '\n';
    }
};

// ─── train ───────────────────────────────────────────────────────────────────
struct TrainCmd {
    std::optional<std::size_t> generate;
    std::string corpus;
    std::size_t k{3};
    std::size_t samples{kCorpusSamples};
    NoiseFlags noise;
    std::string out;

    void add(CLI::App& app) {
        auto* cmd = app.add_subcommand("train", "fit a model from a corpus file or generated strokes");
        auto* g = cmd->add_option("--generate", generate, "generate N strokes per class");
        auto* c = cmd->add_option("--corpus", corpus, "feature corpus file");
        g->excludes(c);
        cmd->add_option("--k", k, "neighbours")->capture_default_str();
        cmd->add_option("--samples", samples, "points per generated stroke")->capture_default_str();
        noise.preset = "training";
        noise.add(cmd, noise_presets::training.seed);
        cmd->add_option("--out", out)->required();
        cmd->callback([this] { run(); });
    }

    void run() const {
        std::vector<LabeledFeatures> examples;
        if (generate) {
            examples = featurize(generate_corpus(*generate, noise.profile(), samples));
        } else if (!corpus.empty()) {
            std::ifstream in(corpus);
            if (!in) throw ConfigError("cannot open corpus '" + corpus + "'");
            examples = read_feature_corpus(in);
        } else {
            throw ConfigError("train needs --generate N or --corpus FILE");
        }
        const auto model = fit_features(examples, {k});
        write_file(out, [&](std::ostream& os) { write_model(os, model); });
        std::array<std::size_t, kShapeCount> counts{};
        for (const auto& e : model.exemplars()) ++counts[index_of(e.label)];
        std::cout << "model " << out << ": " << model.exemplars().size() << " exemplars, k=" << model.k() << '\n';
        for (ShapeClass c : kAllShapes) std::cout << "  " << to_string(c) << ' ' << counts[index_of(c)] << '\n';
    }
};

// ─── eval ────────────────────────────────────────────────────────────────────
struct EvalCmd {
    std::string model{"default"};
    std::size_t per_class{100};
    std::size_t samples{kCorpusSamples};
    NoiseFlags noise;
    std::optional<double> min_accuracy;
    int* exit_code{nullptr};

    void add(CLI::App& app, int& code) {
        exit_code = &code;
        auto* cmd = app.add_subcommand("eval", "classify a held-out generated set");
        cmd->add_option("--model", model, "model file, or 'default'")->capture_default_str();
        cmd->add_option("--per-class", per_class)->capture_default_str();
        cmd->add_option("--samples", samples, "points per stroke")->capture_default_str();
        noise.add(cmd, 7);
        cmd->add_option("--min-accuracy", min_accuracy, "exit 1 below this accuracy");
        cmd->callback([this] { run(); });
    }

    void run() const {
        const auto m = load_model(model);
        const auto rep = evaluate(*m, generate_corpus(per_class, noise.profile(), samples));
        print_report(std::cout, rep);
        if (min_accuracy && rep.accuracy < *min_accuracy) {
            std::cout << "below minimum accuracy " << format_exact(*min_accuracy) << '\n';
            *exit_code = kExitThreshold;
        }
    }
};

// ─── simulate ────────────────────────────────────────────────────────────────
struct SessionFlags {
    std::string profile{"harmonious"};
    ArcSchedule schedule{};
    SimConfig sim{};
    std::string model{"default"};

    void add(CLI::App* cmd) {
        cmd->add_option("--profile", profile, "social profile")->capture_default_str();
        cmd->add_option("--rising", schedule.rising, "rising-action seconds")->capture_default_str();
        cmd->add_option("--climax", schedule.climax, "climax seconds")->capture_default_str();
        cmd->add_option("--falling", schedule.falling, "falling-action seconds")->capture_default_str();
        cmd->add_option("--seed", sim.seed, "session seed")->capture_default_str();
        cmd->add_option("--tick", sim.tick, "seconds per tick")->capture_default_str();
        cmd->add_option("--model", model, "model file, or 'default'")->capture_default_str();
    }

    [[nodiscard]] SessionSetup setup(const ProfileTable& table) const {
        SessionSetup s;
        s.sim = sim;
        s.profile = table.get(profile);
        s.schedule = schedule;
        s.model = model;
        s.sim.validate();
        s.schedule.validate();
        return s;
    }
};

void print_events(std::ostream& os, const TickRecord& rec) {
    for (const auto& e : rec.events) os << format_event(e) << '\n';
}

struct SimulateCmd {
    SessionFlags session;
    std::string script;
    std::string out;
    bool interactive{false};
    double speed{1.0};
    bool quiet{false};

    void add(CLI::App& app) {
        auto* cmd = app.add_subcommand("simulate", "run a session and write its trace");
        session.add(cmd);
        auto* s = cmd->add_option("--script", script, "timed input script");
        auto* i = cmd->add_flag("--interactive", interactive, "read commands from stdin in real time");
        s->excludes(i);
        cmd->add_option("--speed", speed, "interactive pacing multiplier")->capture_default_str();
        cmd->add_option("--out", out, "trace file");
        cmd->add_flag("--quiet", quiet, "do not print the event log");
        cmd->callback([this] { interactive ? run_interactive() : run_script(); });
    }

    void run_script() const {
        const auto table = load_profiles();
        Script parsed;
        if (!script.empty()) {
            std::ifstream in(script);
            if (!in) throw ConfigError("cannot open script '" + script + "'");
            parsed = parse_script(in);
        }
        const auto trace = run_session(session.setup(table), parsed, table);
        if (!quiet)
            for (const auto& r : trace.records) print_events(std::cout, r);
        if (!out.empty()) write_file(out, [&](std::ostream& os) { write_trace(os, trace); });
    }

    // Commands as in a script but without the time column, applied when read;
    // `quit` or end of input stops the session.
    void run_interactive() const {
        if (!(speed > 0)) throw ConfigError("--speed must be > 0");
        const auto table = load_profiles();
        const auto setup = session.setup(table);
        Session s(setup, load_model(setup.model));
        Mailbox<std::string> lines;
        std::atomic<bool> eof{false};
        std::thread reader([&] {
            std::string line;
            while (std::getline(std::cin, line)) {
                if (trim(line) == "quit") break;
                lines.push(line);
            }
            eof = true;
        });
        SessionTrace trace;
        trace.setup = setup;
        using clock = std::chrono::steady_clock;
        const auto start = clock::now();
        const std::chrono::duration<double> period(setup.sim.tick / speed);
        while (!eof && s.now() < setup.schedule.total()) {
            for (const auto& line : lines.drain()) {
                std::istringstream one(format_exact(s.now()) + ' ' + line);
                try {
                    for (const auto& item : parse_script(one)) apply_script_item(s, item, table);
                } catch (const Error& e) {
                    std::cerr << "ignored: " << e.what() << '\n';
                }
            }
            trace.records.push_back(s.step());
            print_events(std::cout, trace.records.back());
            std::cout.flush();
            std::this_thread::sleep_until(
                start + std::chrono::duration_cast<clock::duration>(period * static_cast<double>(s.ticks())));
        }
        reader.detach();
        trace.tape = s.tape();
        if (!out.empty()) write_file(out, [&](std::ostream& os) { write_trace(os, trace); });
    }
};

// ─── replay ──────────────────────────────────────────────────────────────────
struct ReplayCmd {
    std::string trace;
    int* exit_code{nullptr};

    void add(CLI::App& app, int& code) {
        exit_code = &code;
        auto* cmd = app.add_subcommand("replay", "re-run a trace and compare tick by tick");
        cmd->add_option("trace", trace, "trace file")->required();
        cmd->callback([this] { run(); });
    }

    void run() const {
        std::ifstream in(trace);
        if (!in) throw ConfigError("cannot open trace '" + trace + "'");
        const auto rep = replay(in);
        std::cout << "ticks " << rep.ticks << ", divergent ticks " << rep.divergent_ticks << '\n';
        if (rep.first) {
            const auto& d = *rep.first;
            std::cout << "first divergence at tick " << d.tick << " field " << d.field << ": expected '"
                      << d.expected << "' got '" << d.actual << "'\n";
            *exit_code = kExitThreshold;
        }
    }
};

// ─── serve ───────────────────────────────────────────────────────────────────
struct ServeCmd {
    SessionFlags session;
    ServeOptions opt;

    void add(CLI::App& app) {
        auto* cmd = app.add_subcommand("serve", "run a live session for one WebSocket client");
        session.add(cmd);
        cmd->add_option("--port", opt.port)->capture_default_str();
        cmd->add_option("--address", opt.address)->capture_default_str();
        cmd->add_option("--speed", opt.speed, "simulated seconds per second")->capture_default_str();
        cmd->callback([this] { run(); });
    }

    void run() const {
        const auto table = load_profiles();
        const auto setup = session.setup(table);
        BridgeServer server(opt, setup, table, load_model(setup.model));
        std::cerr << "listening on " << opt.address << ':' << server.port() << '\n';
        server.run();
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"YOLO robot behavior engine"};
    app.require_subcommand(1);
    int code = kExitOk;

    CorpusCmd corpus;
    TrainCmd train;
    EvalCmd eval;
    SimulateCmd simulate;
    ReplayCmd replay_cmd;
    ServeCmd serve;
    corpus.add(app);
    train.add(app);
    eval.add(app, code);
    simulate.add(app);
    replay_cmd.add(app, code);
    serve.add(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    } catch (const yolo::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
    return code;
}
