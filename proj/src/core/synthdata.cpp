#include "core/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace dfl {

namespace {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

using Stroke = std::vector<Point>; // open polyline in the unit square, y down

std::vector<Point> circle(double cx, double cy, double rx, double ry, int segments = 14) {
    std::vector<Point> pts;
    pts.reserve(static_cast<std::size_t>(segments) + 1);
    for (int i = 0; i <= segments; ++i) {
        const double a = 2.0 * 3.14159265358979323846 * i / segments;
        pts.push_back({cx + rx * std::cos(a), cy + ry * std::sin(a)});
    }
    return pts;
}

// Hand-drawn skeletons; variability comes from the per-sample jitter, not
// from the templates.
std::vector<Stroke> glyph_strokes(int digit) {
    switch (digit) {
        case 0:
            return {circle(0.5, 0.5, 0.21, 0.31)};
        case 1:
            return {{{0.38, 0.3}, {0.52, 0.16}, {0.52, 0.84}}};
        case 2:
            return {{{0.3, 0.34},
                     {0.36, 0.2},
                     {0.52, 0.15},
                     {0.66, 0.22},
                     {0.68, 0.36},
                     {0.5, 0.56},
                     {0.3, 0.84},
                     {0.72, 0.84}}};
        case 3:
            return {{{0.32, 0.2},
                     {0.52, 0.14},
                     {0.66, 0.26},
                     {0.52, 0.44},
                     {0.68, 0.58},
                     {0.62, 0.78},
                     {0.4, 0.86},
                     {0.3, 0.76}}};
        case 4:
            // 4 and 9 deliberately share most of their stroke geometry
            // (upper-left mass plus a descending right tail), mirroring the
            // easily-confused MNIST pair: the 4 is angular with a small top
            // gap and a short bar overshoot, the 9 closes the top into a
            // rounded loop.
            return {{{0.58, 0.16}, {0.34, 0.48}, {0.7, 0.48}}, {{0.61, 0.2}, {0.58, 0.86}}};
        case 5:
            return {{{0.7, 0.16},
                     {0.34, 0.16},
                     {0.31, 0.46},
                     {0.52, 0.44},
                     {0.68, 0.56},
                     {0.66, 0.74},
                     {0.48, 0.86},
                     {0.3, 0.78}}};
        case 6: {
            std::vector<Stroke> strokes = {{{0.64, 0.14}, {0.46, 0.3}, {0.34, 0.52}, {0.33, 0.68}}};
            strokes.push_back(circle(0.5, 0.67, 0.17, 0.17));
            return strokes;
        }
        case 7:
            return {{{0.28, 0.18}, {0.72, 0.18}, {0.44, 0.86}}};
        case 8: {
            std::vector<Stroke> strokes = {circle(0.5, 0.33, 0.16, 0.17)};
            strokes.push_back(circle(0.5, 0.66, 0.19, 0.19));
            return strokes;
        }
        case 9: {
            std::vector<Stroke> strokes = {circle(0.47, 0.32, 0.14, 0.16, 8)};
            strokes.push_back({{0.61, 0.34}, {0.61, 0.6}, {0.57, 0.86}});
            return strokes;
        }
        default:
            raise(ErrorKind::parameter, "digit out of range");
    }
}

double point_segment_distance(const Point& p, const Point& a, const Point& b) {
    const double abx = b.x - a.x;
    const double aby = b.y - a.y;
    const double len2 = abx * abx + aby * aby;
    double t = 0.0;
    if (len2 > 0.0) t = std::clamp(((p.x - a.x) * abx + (p.y - a.y) * aby) / len2, 0.0, 1.0);
    const double dx = p.x - (a.x + t * abx);
    const double dy = p.y - (a.y + t * aby);
    return std::sqrt(dx * dx + dy * dy);
}

void render_digit(int digit, Rng& rng, double* pixels) {
    auto strokes = glyph_strokes(digit);

    // Per-sample affine jitter around the glyph center.
    const double angle = rng.uniform_real(-0.26, 0.26);
    const double scale_x = rng.uniform_real(0.8, 1.1);
    const double scale_y = rng.uniform_real(0.8, 1.1);
    const double shear = rng.uniform_real(-0.2, 0.2);
    const double shift_x = rng.uniform_real(-0.06, 0.06);
    const double shift_y = rng.uniform_real(-0.06, 0.06);
    const double cos_a = std::cos(angle);
    const double sin_a = std::sin(angle);

    for (auto& stroke : strokes)
        for (auto& pt : stroke) {
            double x = (pt.x - 0.5) * scale_x;
            double y = (pt.y - 0.5) * scale_y;
            x += shear * y;
            const double rx = cos_a * x - sin_a * y;
            const double ry = sin_a * x + cos_a * y;
            pt.x = 0.5 + rx + shift_x + rng.normal(0.0, 0.016);
            pt.y = 0.5 + ry + shift_y + rng.normal(0.0, 0.016);
        }

    const double half_width = rng.uniform_real(0.042, 0.07);
    const double ink = rng.uniform_real(0.75, 1.0);
    const double edge = 0.02;

    for (int r = 0; r < kImageRows; ++r)
        for (int c = 0; c < kImageCols; ++c) {
            const Point p{(c + 0.5) / kImageCols, (r + 0.5) / kImageRows};
            double dist = 1e9;
            for (const auto& stroke : strokes)
                for (std::size_t i = 0; i + 1 < stroke.size(); ++i)
                    dist = std::min(dist, point_segment_distance(p, stroke[i], stroke[i + 1]));
            double v = ink * std::clamp(1.0 - (dist - half_width) / edge, 0.0, 1.0);
            v += rng.normal(0.0, 0.05);
            pixels[r * kImageCols + c] = std::clamp(v, 0.0, 1.0);
        }
}

} // namespace

LabeledDataset make_synth_digits(int count, std::uint64_t seed, SourceTag tag) {
    if (count < 0) raise(ErrorKind::parameter, "sample count must be non-negative");
    LabeledDataset ds;
    ds.source = tag;
    ds.labels.resize(static_cast<std::size_t>(count));
    ds.pixels.resize(static_cast<std::size_t>(count) * kImagePixels);
    const std::uint64_t tag_mix = tag == SourceTag::train ? 0x7472 : 0x7465;
    for (int i = 0; i < count; ++i) {
        Rng rng = derive_stream(seed, {tag_mix, static_cast<std::uint64_t>(i)});
        const int digit = static_cast<int>(rng.next_below(kNumClasses));
        ds.labels[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(digit);
        render_digit(digit, rng, ds.pixels.data() + static_cast<std::size_t>(i) * kImagePixels);
    }
    return ds;
}

void write_synth_corpus(const std::string& dir, int train_count, int test_count,
                        std::uint64_t seed) {
    std::filesystem::create_directories(dir);
    const auto train = make_synth_digits(train_count, seed, SourceTag::train);
    const auto test = make_synth_digits(test_count, seed, SourceTag::test);
    const std::filesystem::path base(dir);
    write_idx(train, (base / "train-images-idx3-ubyte").string(),
              (base / "train-labels-idx1-ubyte").string());
    write_idx(test, (base / "t10k-images-idx3-ubyte").string(),
              (base / "t10k-labels-idx1-ubyte").string());
}

} // namespace dfl
