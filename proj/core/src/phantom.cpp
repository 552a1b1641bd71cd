#include "qus/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qus/error.hpp"

namespace qus::imaging {
namespace {

constexpr std::size_t kGlyphSize = 28;

struct Point {
    double x, y;
};

double segment_distance(Point p, Point a, Point b) {
    const double vx = b.x - a.x, vy = b.y - a.y;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0.0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = p.x - (a.x + t * vx), dy = p.y - (a.y + t * vy);
    return std::sqrt(dx * dx + dy * dy);
}

// Strokes are stored as polylines; arcs are flattened into short segments.
std::vector<Point> random_polyline(Rng& rng) {
    std::vector<Point> pts;
    const std::size_t n = 2 + rng.below(3);
    for (std::size_t i = 0; i < n; ++i) pts.push_back({6.0 + 16.0 * rng.uniform(), 5.0 + 18.0 * rng.uniform()});
    return pts;
}

std::vector<Point> random_arc(Rng& rng) {
    const double cx = 10.0 + 8.0 * rng.uniform();
    const double cy = 9.0 + 10.0 * rng.uniform();
    const double rx = 3.0 + 5.0 * rng.uniform();
    const double ry = 3.0 + 6.0 * rng.uniform();
    const double start = 2.0 * std::numbers::pi * rng.uniform();
    const double sweep = std::numbers::pi * (0.8 + 1.2 * rng.uniform());
    std::vector<Point> pts;
    constexpr int kSteps = 24;
    for (int i = 0; i <= kSteps; ++i) {
        const double a = start + sweep * i / kSteps;
        pts.push_back({cx + rx * std::cos(a), cy + ry * std::sin(a)});
    }
    return pts;
}

}  // namespace

ParamMap phantom_from_gray(const Grid<double>& gray) {
    ParamMap out(gray.width(), gray.height());
    for (std::size_t i = 0; i < gray.size(); ++i) {
        const double g = gray[i];
        if (!(g >= 0.0 && g <= 1.0)) throw InvalidArgument("phantom_from_gray: gray values must lie in [0, 1]");
        out.m[i] = 0.5 + 1.5 * g;
        out.valid[i] = 1;
    }
    out.meta["kind"] = "ground_truth";
    return out;
}

Grid<double> two_region_pattern(std::size_t width, std::size_t height) {
    Grid<double> g(width, height, 0.0);
    for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = width / 2; x < width; ++x) g(x, y) = 1.0;
    }
    return g;
}

Grid<double> checkerboard_pattern(std::size_t width, std::size_t height, std::size_t cell) {
    if (cell == 0) throw InvalidArgument("checkerboard: cell must be >= 1");
    Grid<double> g(width, height, 0.0);
    for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) g(x, y) = ((x / cell + y / cell) % 2) ? 1.0 : 0.0;
    }
    return g;
}

Grid<double> gradient_pattern(std::size_t width, std::size_t height) {
    Grid<double> g(width, height, 0.0);
    for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
            g(x, y) = width > 1 ? static_cast<double>(x) / static_cast<double>(width - 1) : 0.0;
        }
    }
    return g;
}

Grid<double> glyph_pattern(Rng& rng) {
    std::vector<std::vector<Point>> strokes;
    const std::size_t n = 1 + rng.below(3);
    for (std::size_t i = 0; i < n; ++i) strokes.push_back(rng.uniform() < 0.5 ? random_polyline(rng) : random_arc(rng));
    const double half_width = 0.9 + 0.8 * rng.uniform();
    const double peak = 0.85 + 0.15 * rng.uniform();

    Grid<double> g(kGlyphSize, kGlyphSize, 0.0);
    for (std::size_t y = 0; y < kGlyphSize; ++y) {
        for (std::size_t x = 0; x < kGlyphSize; ++x) {
            const Point p{x + 0.5, y + 0.5};
            double d = 1e9;
            for (const auto& s : strokes) {
                for (std::size_t k = 0; k + 1 < s.size(); ++k) d = std::min(d, segment_distance(p, s[k], s[k + 1]));
            }
            // One-pixel linear falloff at the pen edge.
            g(x, y) = peak * std::clamp(half_width + 0.5 - d, 0.0, 1.0);
        }
    }
    return g;
}

Grid<double> resize_bilinear(const Grid<double>& src, std::size_t width, std::size_t height) {
    if (src.empty() || width == 0 || height == 0) throw InvalidArgument("resize_bilinear: empty image");
    Grid<double> out(width, height);
    const double sx = static_cast<double>(src.width()) / static_cast<double>(width);
    const double sy = static_cast<double>(src.height()) / static_cast<double>(height);
    for (std::size_t y = 0; y < height; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(src.height() - 1));
        const auto y0 = static_cast<std::size_t>(fy);
        const std::size_t y1 = std::min(y0 + 1, src.height() - 1);
        const double wy = fy - static_cast<double>(y0);
        for (std::size_t x = 0; x < width; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(src.width() - 1));
            const auto x0 = static_cast<std::size_t>(fx);
            const std::size_t x1 = std::min(x0 + 1, src.width() - 1);
            const double wx = fx - static_cast<double>(x0);
            const double top = src(x0, y0) * (1.0 - wx) + src(x1, y0) * wx;
            const double bot = src(x0, y1) * (1.0 - wx) + src(x1, y1) * wx;
            out(x, y) = std::clamp(top * (1.0 - wy) + bot * wy, 0.0, 1.0);
        }
    }
    return out;
}

std::vector<Grid<double>> glyph_suite(std::size_t n, std::size_t size, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Grid<double>> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto g = glyph_pattern(rng);
        out.push_back(size == kGlyphSize ? g : resize_bilinear(g, size, size));
    }
    return out;
}

Grid<double> builtin_pattern(const std::string& name, std::size_t width, std::size_t height, Rng& rng) {
    if (name == "two-region") return two_region_pattern(width, height);
    if (name == "checkerboard") return checkerboard_pattern(width, height, std::max<std::size_t>(1, width / 4));
    if (name == "gradient") return gradient_pattern(width, height);
    if (name == "glyph") return resize_bilinear(glyph_pattern(rng), width, height);
    throw InvalidArgument("unknown builtin pattern '" + name + "'");
}

}  // namespace qus::imaging
