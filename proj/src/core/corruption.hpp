#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "core/dataset.hpp"
#include "core/rng.hpp"

namespace dfl {

enum class CorruptionMode { pixel_interpolation, label_flip };

std::string to_string(CorruptionMode mode);

// Corruption operator parameters: flagged target-class samples are replaced
// by interpolations toward the collateral class at strength alpha, labels
// untouched.
struct CorruptionSpec {
    int target_class = 9;
    int collateral_class = 4;
    double alpha = 0.95;
    double fraction_p = 0.0;
    CorruptionMode mode = CorruptionMode::pixel_interpolation;

    void validate() const;
};

// Sparse overlay of replaced images keyed by dataset index. The pristine
// dataset stays untouched so evaluation and clean baselines share it.
struct CorruptionOverlay {
    std::unordered_map<std::int32_t, std::vector<double>> replaced;

    bool empty() const { return replaced.empty(); }
    std::size_t size() const { return replaced.size(); }
    std::span<const double> image_or(const LabeledDataset& ds, std::int32_t index) const {
        const auto it = replaced.find(index);
        if (it == replaced.end()) return ds.image(index);
        return {it->second.data(), it->second.size()};
    }
};

// result = alpha * x_c + (1 - alpha) * x_t, clamped to [0,1]. alpha=1 yields
// the collateral exemplar (the "naive label flip" end of the scale).
std::vector<double> interpolate_pixel(std::span<const double> x_t, std::span<const double> x_c,
                                      double alpha);

// Builds the overlay for every corrupt-flagged index in the assignment.
// Collateral exemplars are drawn fresh per sample from the global train set,
// seeded. Flagged samples whose label is not the target class signal a
// broken assignment and raise a consistency error.
CorruptionOverlay corrupt_assignment(const LabeledDataset& ds, const FederatedAssignment& assignment,
                                     const CorruptionSpec& spec, Rng& rng);

// Binary PGM (P5) dump of one image, for visual inspection of corrupted
// samples.
void write_pgm(std::span<const double> image, const std::string& path);

} // namespace dfl
