// Shared vocabulary for the yolo behavior engine: errors, 2-D vectors,
// shape classes and number formatting used by every text format.

#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace yolo {

// ─── Errors ──────────────────────────────────────────────────────────────────
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define YOLO_DEFINE_ERROR(Name)                     \
    class Name : public Error {                     \
    public:                                         \
        using Error::Error;                         \
    }

YOLO_DEFINE_ERROR(NonMonotonicTimestamp);
YOLO_DEFINE_ERROR(DegenerateTrajectory);
YOLO_DEFINE_ERROR(TooFewPoints);
YOLO_DEFINE_ERROR(MissingClass);
YOLO_DEFINE_ERROR(EmptyTestSet);
YOLO_DEFINE_ERROR(UnknownProfile);
YOLO_DEFINE_ERROR(SpeedOutOfRange);
YOLO_DEFINE_ERROR(InvalidCommand);
YOLO_DEFINE_ERROR(BackendUnavailable);
YOLO_DEFINE_ERROR(PathOutOfArena);
YOLO_DEFINE_ERROR(MalformedTrace);
YOLO_DEFINE_ERROR(ConfigError);
YOLO_DEFINE_ERROR(ParseError);
YOLO_DEFINE_ERROR(ProtocolError);
YOLO_DEFINE_ERROR(PortInUse);

#undef YOLO_DEFINE_ERROR

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// ─── Vec2 ────────────────────────────────────────────────────────────────────
struct Vec2 {
    double x{0};
    double y{0};

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator*(Vec2 a, double s) noexcept { return {a.x * s, a.y * s}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) noexcept { return {a.x * s, a.y * s}; }
    constexpr Vec2& operator+=(Vec2 o) noexcept {
        x += o.x;
        y += o.y;
        return *this;
    }
    friend constexpr bool operator==(Vec2, Vec2) = default;
    friend constexpr auto operator<=>(Vec2, Vec2) = default;
};

[[nodiscard]] constexpr double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
[[nodiscard]] constexpr double cross(Vec2 a, Vec2 b) noexcept { return a.x * b.y - a.y * b.x; }
[[nodiscard]] inline double norm(Vec2 a) noexcept { return std::hypot(a.x, a.y); }
[[nodiscard]] inline double distance(Vec2 a, Vec2 b) noexcept { return norm(b - a); }

[[nodiscard]] inline Vec2 rotated(Vec2 v, double angle) noexcept {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

// ─── ShapeClass ──────────────────────────────────────────────────────────────
// Ordinals are part of the model and trace formats; append only.
enum class ShapeClass : std::uint8_t { Circle = 0, Rect, Loop, Curl, Spike, Line };

inline constexpr std::size_t kShapeCount = 6;
inline constexpr std::array<ShapeClass, kShapeCount> kAllShapes{
    ShapeClass::Circle, ShapeClass::Rect,  ShapeClass::Loop,
    ShapeClass::Curl,   ShapeClass::Spike, ShapeClass::Line};

[[nodiscard]] constexpr std::size_t index_of(ShapeClass c) noexcept {
    return static_cast<std::size_t>(c);
}

[[nodiscard]] constexpr std::string_view to_string(ShapeClass c) noexcept {
    constexpr std::array<std::string_view, kShapeCount> names{"circle", "rect",  "loop",
                                                              "curl",   "spike", "line"};
    return names[index_of(c)];
}

[[nodiscard]] inline std::optional<ShapeClass> parse_shape(std::string_view s) noexcept {
    for (ShapeClass c : kAllShapes)
        if (to_string(c) == s) return c;
    return std::nullopt;
}

// ─── Number text ─────────────────────────────────────────────────────────────
// Shortest representation that round-trips exactly.
[[nodiscard]] inline std::string format_exact(double v) {
    std::array<char, 32> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), end);
}

[[nodiscard]] inline std::string format_sig(double v, int significant) {
    std::array<char, 48> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                   std::chars_format::general, significant);
    return std::string(buf.data(), end);
}

[[nodiscard]] inline double parse_double(std::string_view s) {
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    double v{};
    const char* first = s.data();
    if (!s.empty() && s.front() == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
        throw ParseError("not a number: '" + std::string(s) + "'");
    return v;
}

[[nodiscard]] inline long long parse_int(std::string_view s) {
    long long v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
        throw ParseError("not an integer: '" + std::string(s) + "'");
    return v;
}

// Splits on runs of the delimiter, dropping empty pieces.
[[nodiscard]] inline std::vector<std::string_view> split(std::string_view s, char delim = ' ') {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && s[i] == delim) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != delim) ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

[[nodiscard]] inline std::string_view trim(std::string_view s) noexcept {
    constexpr std::string_view ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

}  // namespace yolo
