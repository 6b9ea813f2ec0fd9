#pragma once

#include <cstdint>
#include <vector>

#include "core/corruption.hpp"
#include "core/dataset.hpp"
#include "core/nn.hpp"

namespace dfl {

struct TrainConfig {
    int max_local_epochs = 5;
    int batch_size = 32;
    double lr = 1e-3;
    double momentum = 0.9;
    int early_stop_patience = 1;
    double val_fraction = 0.2;

    void validate() const;
};

// One node's slice of the (possibly corrupted) training data. The overlay
// may be null for pristine runs.
struct NodeDataView {
    const LabeledDataset* dataset = nullptr;
    const CorruptionOverlay* overlay = nullptr;
    const std::vector<std::int32_t>* train_indices = nullptr;
    const std::vector<std::int32_t>* val_indices = nullptr;
};

// Identifies the (seed, node, round) slot so every random draw inside the
// local loop comes from a stream independent of scheduling.
struct TrainStreamKey {
    std::uint64_t run_seed = 0;
    int node = 0;
    int round = 0;
};

struct LocalTrainResult {
    ParamSet params;
    int train_size = 0;
    int epochs_run = 0;
};

// Builds the batch matrix (one row per index) and label vector, reading
// corrupted images through the overlay when present.
void fill_batch(const NodeDataView& view, const std::vector<std::int32_t>& indices,
                Eigen::MatrixXd& batch, std::vector<std::uint8_t>& labels);

// Mean eval-mode cross-entropy over an index list, batched.
double mean_loss_over(const ArchitectureConfig& arch, const ParamSet& params,
                      const NodeDataView& view, const std::vector<std::int32_t>& indices);

// Local loop for one communication round: up to max_local_epochs epochs of
// seeded-shuffled mini-batch SGD, early-stopped on validation loss with the
// pre-training model included as the baseline, returning the parameters of
// the best validation epoch. train_size excludes validation samples.
LocalTrainResult train_local(const ParamSet& start, const NodeDataView& view,
                             const TrainConfig& cfg, const ArchitectureConfig& arch,
                             const TrainStreamKey& key);

} // namespace dfl
