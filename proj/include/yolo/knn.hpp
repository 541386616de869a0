// k-nearest-neighbour shape classifier over z-scored feature vectors, the
// corpus/evaluation harness, and the `yolo-knn v1` model file.

#pragma once

#include <algorithm>
#include <array>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "yolo/core.hpp"
#include "yolo/geometry.hpp"
#include "yolo/shapes.hpp"
#include "yolo/trajectory.hpp"

namespace yolo {

struct KnnConfig {
    std::size_t k{3};
};

struct LabeledTrajectory {
    Trajectory trajectory;
    ShapeClass label{};
};

class TrainedModel {
public:
    TrainedModel() = default;

    TrainedModel(std::size_t k, std::array<double, kFeatureCount> means,
                 std::array<double, kFeatureCount> stddevs, std::vector<LabeledFeatures> exemplars)
        : k_(k), means_(means), stddevs_(stddevs), exemplars_(std::move(exemplars)) {
        if (k_ < 1 || k_ > exemplars_.size())
            throw ConfigError("k must be in [1, number of exemplars]");
        for (double s : stddevs_)
            if (!(s > 0) || !std::isfinite(s)) throw ConfigError("stddevs must be positive");
        standardized_.reserve(exemplars_.size());
        for (const auto& e : exemplars_) standardized_.push_back(standardize(e.features));
    }

    [[nodiscard]] std::size_t k() const noexcept { return k_; }
    [[nodiscard]] const auto& means() const noexcept { return means_; }
    [[nodiscard]] const auto& stddevs() const noexcept { return stddevs_; }
    [[nodiscard]] std::span<const LabeledFeatures> exemplars() const noexcept { return exemplars_; }
    [[nodiscard]] std::span<const FeatureVector> standardized() const noexcept {
        return standardized_;
    }

    [[nodiscard]] FeatureVector standardize(const FeatureVector& f) const noexcept {
        FeatureVector z;
        for (std::size_t i = 0; i < kFeatureCount; ++i) z[i] = (f[i] - means_[i]) / stddevs_[i];
        return z;
    }

private:
    std::size_t k_{0};
    std::array<double, kFeatureCount> means_{};
    std::array<double, kFeatureCount> stddevs_{};
    std::vector<LabeledFeatures> exemplars_;
    std::vector<FeatureVector> standardized_;
};

// Features whose spread falls below this are treated as constant.
inline constexpr double kMinStddev = 1e-12;

[[nodiscard]] inline TrainedModel fit_features(std::vector<LabeledFeatures> corpus,
                                               const KnnConfig& cfg = {}) {
    std::array<std::size_t, kShapeCount> counts{};
    for (const auto& e : corpus) ++counts[index_of(e.label)];
    for (ShapeClass c : kAllShapes)
        if (counts[index_of(c)] == 0)
            throw MissingClass("training corpus has no example of class '" +
                               std::string(to_string(c)) + "'");

    const auto n = static_cast<double>(corpus.size());
    std::array<double, kFeatureCount> means{}, stddevs{};
    for (const auto& e : corpus)
        for (std::size_t i = 0; i < kFeatureCount; ++i) means[i] += e.features[i];
    for (double& m : means) m /= n;
    for (const auto& e : corpus)
        for (std::size_t i = 0; i < kFeatureCount; ++i) {
            const double d = e.features[i] - means[i];
            stddevs[i] += d * d;
        }
    for (double& s : stddevs) {
        s = std::sqrt(s / n);
        if (!(s > kMinStddev)) s = 1.0;
    }
    return TrainedModel(cfg.k, means, stddevs, std::move(corpus));
}

[[nodiscard]] inline std::vector<LabeledFeatures> featurize(
    std::span<const LabeledTrajectory> corpus) {
    std::vector<LabeledFeatures> out;
    out.reserve(corpus.size());
    for (const auto& e : corpus) out.push_back({extract_features(e.trajectory), e.label});
    return out;
}

[[nodiscard]] inline TrainedModel fit(std::span<const LabeledTrajectory> corpus,
                                      const KnnConfig& cfg = {}) {
    return fit_features(featurize(corpus), cfg);
}

struct Prediction {
    ShapeClass label{};
    double confidence{0};  // winning votes / k
};

[[nodiscard]] inline double squared_distance(const FeatureVector& a, const FeatureVector& b) {
    double d = 0;
    for (std::size_t i = 0; i < kFeatureCount; ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
    return d;
}

// Majority vote of the k nearest exemplars. Distance ties go to the lower
// exemplar index; vote ties go to the tied class ranked nearest.
[[nodiscard]] inline Prediction classify_features(const TrainedModel& model,
                                                  const FeatureVector& query) {
    const FeatureVector z = model.standardize(query);
    const auto ex = model.standardized();
    std::vector<std::pair<double, std::size_t>> ranked;
    ranked.reserve(ex.size());
    for (std::size_t i = 0; i < ex.size(); ++i) ranked.emplace_back(squared_distance(z, ex[i]), i);
    const auto k = model.k();
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k), ranked.end());

    std::array<std::size_t, kShapeCount> votes{};
    std::array<std::size_t, kShapeCount> first_rank;
    first_rank.fill(k);
    for (std::size_t r = 0; r < k; ++r) {
        const auto c = index_of(model.exemplars()[ranked[r].second].label);
        ++votes[c];
        first_rank[c] = std::min(first_rank[c], r);
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < kShapeCount; ++c)
        if (votes[c] > votes[best] || (votes[c] == votes[best] && first_rank[c] < first_rank[best]))
            best = c;
    return {kAllShapes[best], static_cast<double>(votes[best]) / static_cast<double>(k)};
}

[[nodiscard]] inline Prediction classify(const TrainedModel& model, const Trajectory& seg) {
    return classify_features(model, extract_features(seg));
}

// ─── Evaluation ──────────────────────────────────────────────────────────────
struct EvaluationReport {
    double accuracy{0};
    std::size_t total{0};
    std::array<std::array<std::size_t, kShapeCount>, kShapeCount> confusion{};  // [truth][predicted]
};

[[nodiscard]] inline EvaluationReport evaluate_features(const TrainedModel& model,
                                                        std::span<const LabeledFeatures> test) {
    if (test.empty()) throw EmptyTestSet("evaluation needs at least one test example");
    EvaluationReport rep;
    std::size_t correct = 0;
    for (const auto& e : test) {
        const auto p = classify_features(model, e.features);
        ++rep.confusion[index_of(e.label)][index_of(p.label)];
        correct += p.label == e.label;
    }
    rep.total = test.size();
    rep.accuracy = static_cast<double>(correct) / static_cast<double>(rep.total);
    return rep;
}

[[nodiscard]] inline EvaluationReport evaluate(const TrainedModel& model,
                                               std::span<const LabeledTrajectory> test) {
    return evaluate_features(model, featurize(test));
}

inline void print_report(std::ostream& os, const EvaluationReport& rep) {
    os << "accuracy " << format_sig(rep.accuracy, 4) << " (" << rep.total << " examples)\n";
    os << "truth\\pred";
    for (ShapeClass c : kAllShapes) os << ' ' << to_string(c);
    os << '\n';
    for (ShapeClass t : kAllShapes) {
        os << to_string(t);
        for (ShapeClass p : kAllShapes) os << ' ' << rep.confusion[index_of(t)][index_of(p)];
        os << '\n';
    }
}

// ─── Synthetic corpora ───────────────────────────────────────────────────────
inline constexpr std::size_t kCorpusSamples = 64;

// per_class strokes of every shape; example i of a class uses seed
// noise.seed * 1000003 + i so corpora with different seeds never share strokes.
[[nodiscard]] inline std::vector<LabeledTrajectory> generate_corpus(
    std::size_t per_class, const NoiseProfile& noise, std::size_t n_samples = kCorpusSamples) {
    std::vector<LabeledTrajectory> out;
    out.reserve(per_class * kShapeCount);
    for (ShapeClass c : kAllShapes)
        for (std::size_t i = 0; i < per_class; ++i) {
            NoiseProfile p = noise;
            p.seed = noise.seed * 1000003ULL + i;
            out.push_back({generate_shape(c, p, n_samples), c});
        }
    return out;
}

inline constexpr std::size_t kDefaultTrainingPerClass = 50;

[[nodiscard]] inline TrainedModel default_model() {
    const auto corpus = generate_corpus(kDefaultTrainingPerClass, noise_presets::training);
    return fit(corpus, {});
}

// ─── Model file ──────────────────────────────────────────────────────────────
inline void write_model(std::ostream& os, const TrainedModel& model) {
    os << "yolo-knn v1 k=" << model.k() << '\n';
    for (std::size_t i = 0; i < kFeatureCount; ++i)
        os << (i ? " " : "") << format_exact(model.means()[i]);
    os << '\n';
    for (std::size_t i = 0; i < kFeatureCount; ++i)
        os << (i ? " " : "") << format_exact(model.stddevs()[i]);
    os << '\n';
    for (const auto& e : model.exemplars()) write_feature_line(os, e.features, e.label);
}

[[nodiscard]] inline TrainedModel read_model(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ParseError("empty model file");
    const auto head = split(trim(line));
    if (head.size() != 3 || head[0] != "yolo-knn" || head[1] != "v1" ||
        head[2].substr(0, 2) != "k=")
        throw ParseError("model header must be 'yolo-knn v1 k=<k>'");
    const auto k = parse_int(head[2].substr(2));
    if (k < 1) throw ParseError("model k must be >= 1");

    auto read_row = [&](const char* what) {
        if (!std::getline(is, line)) throw ParseError(std::string("model file lacks ") + what);
        const auto fields = split(trim(line));
        if (fields.size() != kFeatureCount)
            throw ParseError(std::string("model ") + what + " row needs " +
                             std::to_string(kFeatureCount) + " values");
        std::array<double, kFeatureCount> row{};
        for (std::size_t i = 0; i < kFeatureCount; ++i) row[i] = parse_double(fields[i]);
        return row;
    };
    const auto means = read_row("means");
    const auto stddevs = read_row("stddevs");
    auto exemplars = read_feature_corpus(is);
    std::array<std::size_t, kShapeCount> counts{};
    for (const auto& e : exemplars) ++counts[index_of(e.label)];
    for (ShapeClass c : kAllShapes)
        if (counts[index_of(c)] == 0)
            throw MissingClass("model has no exemplar of class '" + std::string(to_string(c)) + "'");
    return TrainedModel(static_cast<std::size_t>(k), means, stddevs, std::move(exemplars));
}

}  // namespace yolo
