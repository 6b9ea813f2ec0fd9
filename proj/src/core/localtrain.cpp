#include "core/localtrain.hpp"

#include <algorithm>

#include "core/error.hpp"

namespace dfl {

namespace {
constexpr std::uint64_t kShuffleTag = 0x5348; // shuffle stream
constexpr std::uint64_t kDropoutTag = 0x4452; // dropout stream
constexpr int kEvalBatch = 512;
} // namespace

void TrainConfig::validate() const {
    if (max_local_epochs < 0) raise(ErrorKind::parameter, "max_local_epochs must be >= 0");
    if (batch_size <= 0) raise(ErrorKind::parameter, "batch_size must be positive");
    if (lr <= 0.0) raise(ErrorKind::parameter, "lr must be positive");
    if (momentum < 0.0 || momentum >= 1.0) raise(ErrorKind::parameter, "momentum must be in [0,1)");
    if (early_stop_patience < 1) raise(ErrorKind::parameter, "early_stop_patience must be >= 1");
    if (val_fraction <= 0.0 || val_fraction >= 1.0)
        raise(ErrorKind::parameter, "val_fraction must be in (0,1)");
}

void fill_batch(const NodeDataView& view, const std::vector<std::int32_t>& indices,
                Eigen::MatrixXd& batch, std::vector<std::uint8_t>& labels) {
    const auto& ds = *view.dataset;
    batch.resize(static_cast<Eigen::Index>(indices.size()), kImagePixels);
    labels.resize(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const std::int32_t index = indices[i];
        const auto img = view.overlay ? view.overlay->image_or(ds, index) : ds.image(index);
        for (int px = 0; px < kImagePixels; ++px)
            batch(static_cast<Eigen::Index>(i), px) = img[static_cast<std::size_t>(px)];
        labels[i] = ds.labels[static_cast<std::size_t>(index)];
    }
}

double mean_loss_over(const ArchitectureConfig& arch, const ParamSet& params,
                      const NodeDataView& view, const std::vector<std::int32_t>& indices) {
    if (indices.empty()) raise(ErrorKind::parameter, "mean_loss_over: empty index list");
    double total = 0.0;
    Eigen::MatrixXd batch;
    std::vector<std::uint8_t> labels;
    for (std::size_t begin = 0; begin < indices.size(); begin += kEvalBatch) {
        const std::size_t end = std::min(indices.size(), begin + kEvalBatch);
        const std::vector<std::int32_t> chunk(indices.begin() + static_cast<std::ptrdiff_t>(begin),
                                              indices.begin() + static_cast<std::ptrdiff_t>(end));
        fill_batch(view, chunk, batch, labels);
        total += mean_loss(arch, params, batch, labels) * static_cast<double>(chunk.size());
    }
    return total / static_cast<double>(indices.size());
}

LocalTrainResult train_local(const ParamSet& start, const NodeDataView& view,
                             const TrainConfig& cfg, const ArchitectureConfig& arch,
                             const TrainStreamKey& key) {
    cfg.validate();
    LocalTrainResult result;
    result.params = start;

    const auto& train_indices = *view.train_indices;
    result.train_size = static_cast<int>(train_indices.size());
    if (train_indices.empty()) {
        result.train_size = 0;
        return result; // degenerate node: nothing to train on
    }
    if (cfg.max_local_epochs == 0) return result;

    // Validation-less nodes cannot early-stop; they run every epoch and
    // return the final parameters.
    const bool has_val = view.val_indices != nullptr && !view.val_indices->empty();

    ParamSet current = start;
    ParamSet velocity = current;
    for (auto& layer : velocity.layers) std::fill(layer.values.begin(), layer.values.end(), 0.0);

    // Epoch 0 baseline: evaluating `start` before any training prevents
    // corrupted-heavy nodes from degrading below the model they received.
    double best_loss = has_val ? mean_loss_over(arch, current, view, *view.val_indices) : 0.0;
    int epochs_without_improvement = 0;

    std::vector<std::int32_t> order = train_indices;
    Eigen::MatrixXd batch;
    std::vector<std::uint8_t> labels;

    for (int epoch = 1; epoch <= cfg.max_local_epochs; ++epoch) {
        Rng shuffle_rng =
            derive_stream(key.run_seed, {kShuffleTag, static_cast<std::uint64_t>(key.node),
                                         static_cast<std::uint64_t>(key.round),
                                         static_cast<std::uint64_t>(epoch)});
        Rng dropout_rng =
            derive_stream(key.run_seed, {kDropoutTag, static_cast<std::uint64_t>(key.node),
                                         static_cast<std::uint64_t>(key.round),
                                         static_cast<std::uint64_t>(epoch)});
        shuffle_rng.shuffle(order);

        for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
            const std::vector<std::int32_t> chunk(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                                  order.begin() + static_cast<std::ptrdiff_t>(end));
            fill_batch(view, chunk, batch, labels);
            const LossGrad lg = loss_and_grad(arch, current, batch, labels, dropout_rng);
            sgd_momentum_step(current, lg.grads, velocity, cfg.lr, cfg.momentum);
        }
        result.epochs_run = epoch;

        if (!has_val) {
            result.params = current;
            continue;
        }
        const double val_loss = mean_loss_over(arch, current, view, *view.val_indices);
        if (val_loss < best_loss) {
            best_loss = val_loss;
            result.params = current;
            epochs_without_improvement = 0;
        } else {
            epochs_without_improvement += 1;
            if (epochs_without_improvement >= cfg.early_stop_patience) break;
        }
    }
    return result;
}

} // namespace dfl
