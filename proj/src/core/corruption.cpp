#include "core/corruption.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "core/error.hpp"

namespace dfl {

std::string to_string(CorruptionMode mode) {
    return mode == CorruptionMode::pixel_interpolation ? "pixel_interpolation" : "label_flip";
}

void CorruptionSpec::validate() const {
    if (target_class == collateral_class)
        raise(ErrorKind::parameter, "target and collateral class must differ");
    if (target_class < 0 || target_class >= kNumClasses || collateral_class < 0 ||
        collateral_class >= kNumClasses)
        raise(ErrorKind::parameter, "class ids must be in 0..9");
    if (alpha < 0.0 || alpha > 1.0) raise(ErrorKind::parameter, "alpha must be in [0,1]");
    if (fraction_p < 0.0 || fraction_p > 1.0) raise(ErrorKind::parameter, "p must be in [0,1]");
}

std::vector<double> interpolate_pixel(std::span<const double> x_t, std::span<const double> x_c,
                                      double alpha) {
    if (x_t.size() != x_c.size())
        raise(ErrorKind::parameter, "interpolate_pixel: shape mismatch");
    std::vector<double> out(x_t.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double v = alpha * x_c[i] + (1.0 - alpha) * x_t[i];
        out[i] = std::min(1.0, std::max(0.0, v));
    }
    return out;
}

CorruptionOverlay corrupt_assignment(const LabeledDataset& ds, const FederatedAssignment& assignment,
                                     const CorruptionSpec& spec, Rng& rng) {
    spec.validate();

    std::vector<std::int32_t> collateral_pool;
    for (int i = 0; i < ds.count(); ++i)
        if (ds.labels[static_cast<std::size_t>(i)] == spec.collateral_class) collateral_pool.push_back(i);

    CorruptionOverlay overlay;
    for (const auto& node : assignment.per_node) {
        for (std::int32_t index : node.corrupt_indices) {
            if (ds.labels[static_cast<std::size_t>(index)] != spec.target_class)
                raise(ErrorKind::consistency,
                      "corrupt flag on index " + std::to_string(index) + " whose label is not the target class");
            if (collateral_pool.empty())
                raise(ErrorKind::consistency, "no collateral-class exemplars available");
            const std::int32_t exemplar =
                collateral_pool[rng.next_below(collateral_pool.size())];
            if (spec.mode == CorruptionMode::pixel_interpolation)
                overlay.replaced.emplace(index,
                                         interpolate_pixel(ds.image(index), ds.image(exemplar), spec.alpha));
            else {
                const auto img = ds.image(exemplar);
                overlay.replaced.emplace(index, std::vector<double>(img.begin(), img.end()));
            }
        }
    }
    return overlay;
}

void write_pgm(std::span<const double> image, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorKind::io, "cannot open for write: " + path);
    out << "P5\n" << kImageCols << " " << kImageRows << "\n255\n";
    for (double v : image) {
        const double clamped = std::min(1.0, std::max(0.0, v));
        out.put(static_cast<char>(static_cast<unsigned char>(std::lround(clamped * 255.0))));
    }
    if (!out) raise(ErrorKind::io, "write failed: " + path);
}

} // namespace dfl
