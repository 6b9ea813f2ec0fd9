#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "core/rng.hpp"

namespace dfl {

// One named parameter tensor. Values are doubles so gradient checks and
// aggregation oracles run at full precision.
struct Tensor {
    std::string name;
    std::vector<int> shape;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    bool same_shape(const Tensor& other) const {
        return name == other.name && shape == other.shape;
    }
};

// The unit of exchange between nodes: every parameter tensor of one model.
struct ParamSet {
    std::vector<Tensor> layers;

    bool shape_compatible(const ParamSet& other) const;
    Tensor& layer(const std::string& name);
    const Tensor& layer(const std::string& name) const;
};

enum class ArchKind { cnn_default, mlp_small };

// Compact MNIST classifier: conv(k5) -> maxpool -> relu, conv(k5) ->
// channel dropout -> maxpool -> relu, fc -> relu -> dropout -> fc.
// The mlp_small preset (flatten -> fc -> relu -> fc) shares every code
// path and keeps desk-scale runs cheap.
struct ArchitectureConfig {
    ArchKind kind = ArchKind::cnn_default;
    int input_hw = 28;
    int num_classes = 10;
    int kernel = 5;
    int conv1_channels = 10;
    int conv2_channels = 20;
    int fc1_units = 50;
    double dropout_conv = 0.5;
    double dropout_fc = 0.5;
    int mlp_hidden = 64;

    static ArchitectureConfig cnn_default_config();
    static ArchitectureConfig mlp_small_config();

    int input_pixels() const { return input_hw * input_hw; }
    // Spatial sides through the conv/pool stack; validates divisibility.
    int conv1_out_hw() const;
    int pool1_out_hw() const;
    int conv2_out_hw() const;
    int pool2_out_hw() const;
    int flat_features() const;
};

ArchitectureConfig arch_from_name(const std::string& name);
std::string to_string(ArchKind kind);

// Fan-in-scaled uniform initialization (variance 2/fan_in), zero biases.
// Identical seed yields a bitwise-identical ParamSet; homogeneous network
// initialization falls out of calling this once per run.
ParamSet init_params(const ArchitectureConfig& arch, std::uint64_t seed);

// batch: one sample per row, input_pixels() columns, values in [0,1].
// Dropout fires only in train mode and draws its masks from rng in a fixed
// order, so a same-seeded rng reproduces the exact forward pass.
Eigen::MatrixXd forward(const ArchitectureConfig& arch, const ParamSet& params,
                        const Eigen::MatrixXd& batch, bool train_mode, Rng* rng);

struct LossGrad {
    double loss = 0.0;
    ParamSet grads;
};

// Mean softmax cross-entropy over the batch plus gradients for every
// parameter tensor (train-mode forward: dropout active).
LossGrad loss_and_grad(const ArchitectureConfig& arch, const ParamSet& params,
                       const Eigen::MatrixXd& batch, const std::vector<std::uint8_t>& labels,
                       Rng& rng);

// Eval-mode mean cross-entropy (no dropout, no gradients).
double mean_loss(const ArchitectureConfig& arch, const ParamSet& params,
                 const Eigen::MatrixXd& batch, const std::vector<std::uint8_t>& labels);

// Classic (heavy-ball) momentum: v <- momentum*v + grads; p <- p - lr*v.
void sgd_momentum_step(ParamSet& params, const ParamSet& grads, ParamSet& velocity, double lr,
                       double momentum);

// Layer-wise weighted mean: sum(w_j * theta_j) / sum(w_j).
struct WeightedModel {
    const ParamSet* params = nullptr;
    double weight = 0.0;
};

ParamSet average_params(const std::vector<WeightedModel>& models);

// Checkpoint: shape-metadata header (layer name, dims) followed by raw
// little-endian IEEE-754 64-bit values.
void save_params(const ParamSet& params, const std::string& path);
ParamSet load_params(const std::string& path);

} // namespace dfl
