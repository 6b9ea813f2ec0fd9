#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/rng.hpp"
#include "core/topology.hpp"

namespace dfl {

inline constexpr int kImageRows = 28;
inline constexpr int kImageCols = 28;
inline constexpr int kImagePixels = kImageRows * kImageCols;
inline constexpr int kNumClasses = 10;

enum class SourceTag { train, test };

// Images as flat 784-pixel rows scaled to [0,1], one label per image.
struct LabeledDataset {
    std::vector<double> pixels; // size() == count() * kImagePixels
    std::vector<std::uint8_t> labels;
    SourceTag source = SourceTag::train;

    int count() const { return static_cast<int>(labels.size()); }
    std::span<const double> image(int index) const {
        return {pixels.data() + static_cast<std::size_t>(index) * kImagePixels, kImagePixels};
    }
    std::vector<int> class_counts() const;
};

// Per-node slice of the training set. Index sets refer to positions in the
// source LabeledDataset; they are pairwise disjoint across nodes and between
// train/val within a node. Corrupt flags only ever mark target-class indices.
struct NodeAssignment {
    std::vector<std::int32_t> train_indices;
    std::vector<std::int32_t> val_indices;
    std::vector<std::int32_t> corrupt_indices; // sorted subset of train+val

    bool holds_corrupt() const { return !corrupt_indices.empty(); }
    bool is_corrupt(std::int32_t index) const;
};

enum class Scheme { balanced, unbalanced, none };

std::string to_string(Scheme scheme);

struct FederatedAssignment {
    std::vector<NodeAssignment> per_node;
    int target_class = 9;
    Scheme scheme = Scheme::none;

    int node_count() const { return static_cast<int>(per_node.size()); }
};

// MNIST IDX container: big-endian, magic 0x00000803 for images (count, 28,
// 28, then raw bytes) and 0x00000801 for labels. Pixel bytes are divided by
// 255. Throws format/io/consistency errors as appropriate.
LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path,
                        SourceTag source = SourceTag::train);

void write_idx(const LabeledDataset& ds, const std::string& images_path,
               const std::string& labels_path);

// Stratified per-class subsample keeping round(count * fraction) of each
// class, seeded. fraction 1.0 returns the dataset unchanged.
LabeledDataset stratified_subset(const LabeledDataset& ds, double fraction, Rng& rng);

// IID allocation of every class except target_class: each node receives
// floor(n_c/N) or ceil(n_c/N) samples per class, remainders going to the
// lowest node ids, membership decided by a seeded shuffle.
FederatedAssignment assign_iid_nontarget(const LabeledDataset& ds, int n_nodes, int target_class,
                                         Rng& rng);

// Target-class allocation, balanced scheme: every node gets an even share
// and the ceil(p*N) highest-ranked nodes have all their target samples
// flagged corrupt.
void assign_target_balanced(const LabeledDataset& ds, FederatedAssignment& assignment,
                            const CentralityRanking& ranking, double p, Rng& rng);

// Unbalanced scheme: the top-ranked node takes ceil(p*n_t) samples, all
// flagged; the other nodes share the remainder evenly, unflagged. The hub
// receives no clean target samples.
void assign_target_unbalanced(const LabeledDataset& ds, FederatedAssignment& assignment,
                              const CentralityRanking& ranking, double p, Rng& rng);

// Moves val_fraction of each node's indices into the validation set with a
// seeded stratified-by-class split. Classes with fewer than 2 samples in a
// node stay entirely in train.
void split_validation(FederatedAssignment& assignment, const LabeledDataset& ds,
                      double val_fraction, Rng& rng);

// Audit manifest: "node_id,index,split,corrupt_flag" CSV.
std::string assignment_manifest_csv(const FederatedAssignment& assignment);

} // namespace dfl
