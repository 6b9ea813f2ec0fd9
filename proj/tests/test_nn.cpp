#include <doctest.h>

#include <cmath>
#include <vector>

#include "core/error.hpp"
#include "core/nn.hpp"
#include "testutil.hpp"

using namespace dfl;

namespace {

// Small architecture so finite differences and the naive reference stay
// cheap: 16x16 input, 2 and 3 conv channels, 4 fc units.
ArchitectureConfig tiny_cnn() {
    ArchitectureConfig arch = ArchitectureConfig::cnn_default_config();
    arch.input_hw = 16;
    arch.conv1_channels = 2;
    arch.conv2_channels = 3;
    arch.fc1_units = 4;
    return arch;
}

Eigen::MatrixXd random_batch(int n, int pixels, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd batch(n, pixels);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < pixels; ++j) batch(i, j) = rng.uniform_real();
    return batch;
}

std::vector<std::uint8_t> random_labels(int n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::uint8_t> labels(static_cast<std::size_t>(n));
    for (auto& l : labels) l = static_cast<std::uint8_t>(rng.next_below(10));
    return labels;
}

// Brute-force direct-convolution reference for the eval-mode forward pass,
// fully independent of the implementation's im2col/GEMM path.
std::vector<double> naive_forward_one(const ArchitectureConfig& arch, const ParamSet& p,
                                      const Eigen::MatrixXd& batch, int sample) {
    const int k = arch.kernel;
    const int ih = arch.input_hw;
    const int o1 = ih - k + 1;
    const int p1 = o1 / 2;
    const int o2 = p1 - k + 1;
    const int p2 = o2 / 2;
    const int c1 = arch.conv1_channels;
    const int c2 = arch.conv2_channels;

    auto w = [&p](const std::string& name) -> const std::vector<double>& {
        return p.layer(name).values;
    };

    // conv1 (single input channel), direct correlation
    std::vector<double> a1(static_cast<std::size_t>(c1) * o1 * o1, 0.0);
    for (int ch = 0; ch < c1; ++ch)
        for (int r = 0; r < o1; ++r)
            for (int c = 0; c < o1; ++c) {
                double acc = w("conv1.bias")[static_cast<std::size_t>(ch)];
                for (int kr = 0; kr < k; ++kr)
                    for (int kc = 0; kc < k; ++kc)
                        acc += w("conv1.weight")[static_cast<std::size_t>((ch * k + kr) * k + kc)] *
                               batch(sample, (r + kr) * ih + (c + kc));
                a1[static_cast<std::size_t>((ch * o1 + r) * o1 + c)] = acc;
            }

    // pool 2x2 then relu
    std::vector<double> r1(static_cast<std::size_t>(c1) * p1 * p1, 0.0);
    for (int ch = 0; ch < c1; ++ch)
        for (int r = 0; r < p1; ++r)
            for (int c = 0; c < p1; ++c) {
                double best = -1e300;
                for (int dr = 0; dr < 2; ++dr)
                    for (int dc = 0; dc < 2; ++dc)
                        best = std::max(best,
                                        a1[static_cast<std::size_t>((ch * o1 + 2 * r + dr) * o1 +
                                                                    (2 * c + dc))]);
                r1[static_cast<std::size_t>((ch * p1 + r) * p1 + c)] = std::max(0.0, best);
            }

    // conv2 over c1 input channels
    std::vector<double> a2(static_cast<std::size_t>(c2) * o2 * o2, 0.0);
    for (int ch = 0; ch < c2; ++ch)
        for (int r = 0; r < o2; ++r)
            for (int c = 0; c < o2; ++c) {
                double acc = w("conv2.bias")[static_cast<std::size_t>(ch)];
                for (int ci = 0; ci < c1; ++ci)
                    for (int kr = 0; kr < k; ++kr)
                        for (int kc = 0; kc < k; ++kc)
                            acc += w("conv2.weight")[static_cast<std::size_t>(
                                       ((ch * c1 + ci) * k + kr) * k + kc)] *
                                   r1[static_cast<std::size_t>((ci * p1 + r + kr) * p1 + (c + kc))];
                a2[static_cast<std::size_t>((ch * o2 + r) * o2 + c)] = acc;
            }

    std::vector<double> r2(static_cast<std::size_t>(c2) * p2 * p2, 0.0);
    for (int ch = 0; ch < c2; ++ch)
        for (int r = 0; r < p2; ++r)
            for (int c = 0; c < p2; ++c) {
                double best = -1e300;
                for (int dr = 0; dr < 2; ++dr)
                    for (int dc = 0; dc < 2; ++dc)
                        best = std::max(best,
                                        a2[static_cast<std::size_t>((ch * o2 + 2 * r + dr) * o2 +
                                                                    (2 * c + dc))]);
                r2[static_cast<std::size_t>((ch * p2 + r) * p2 + c)] = std::max(0.0, best);
            }

    const int flat = c2 * p2 * p2;
    std::vector<double> h(static_cast<std::size_t>(arch.fc1_units), 0.0);
    for (int u = 0; u < arch.fc1_units; ++u) {
        double acc = w("fc1.bias")[static_cast<std::size_t>(u)];
        for (int f = 0; f < flat; ++f)
            acc += w("fc1.weight")[static_cast<std::size_t>(u * flat + f)] * r2[static_cast<std::size_t>(f)];
        h[static_cast<std::size_t>(u)] = std::max(0.0, acc);
    }
    std::vector<double> logits(10, 0.0);
    for (int cls = 0; cls < 10; ++cls) {
        double acc = w("fc2.bias")[static_cast<std::size_t>(cls)];
        for (int u = 0; u < arch.fc1_units; ++u)
            acc += w("fc2.weight")[static_cast<std::size_t>(cls * arch.fc1_units + u)] *
                   h[static_cast<std::size_t>(u)];
        logits[static_cast<std::size_t>(cls)] = acc;
    }
    return logits;
}

void zero_params(ParamSet& p) {
    for (auto& layer : p.layers) std::fill(layer.values.begin(), layer.values.end(), 0.0);
}

} // namespace

TEST_CASE("init is bitwise deterministic per seed") {
    const ArchitectureConfig arch = ArchitectureConfig::mlp_small_config();
    const ParamSet a = init_params(arch, 42);
    const ParamSet b = init_params(arch, 42);
    REQUIRE(a.layers.size() == b.layers.size());
    for (std::size_t i = 0; i < a.layers.size(); ++i) CHECK(a.layers[i].values == b.layers[i].values);

    const ParamSet c = init_params(arch, 43);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.layers.size(); ++i)
        if (a.layers[i].values != c.layers[i].values) any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("initializer variance tracks 2/fan_in") {
    const ArchitectureConfig arch = ArchitectureConfig::cnn_default_config();
    const double target = 2.0 / 25.0; // conv1 fan_in = 1*5*5
    double sum = 0.0, sq = 0.0;
    int n = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const ParamSet p = init_params(arch, seed);
        for (double v : p.layer("conv1.weight").values) {
            sum += v;
            sq += v * v;
            n += 1;
        }
    }
    const double mean = sum / n;
    const double variance = sq / n - mean * mean;
    CHECK(variance > 0.5 * target);
    CHECK(variance < 1.5 * target);
}

TEST_CASE("zero parameters give zero logits and ln(10) loss") {
    const ArchitectureConfig arch = tiny_cnn();
    ParamSet p = init_params(arch, 1);
    zero_params(p);
    const Eigen::MatrixXd batch = Eigen::MatrixXd::Zero(3, arch.input_pixels());
    const Eigen::MatrixXd logits = forward(arch, p, batch, false, nullptr);
    CHECK(logits.cwiseAbs().maxCoeff() == 0.0);

    const std::vector<std::uint8_t> labels = {0, 5, 9};
    CHECK(mean_loss(arch, p, batch, labels) == doctest::Approx(std::log(10.0)).epsilon(1e-12));
}

TEST_CASE("eval-mode forward is dropout-free and repeatable") {
    const ArchitectureConfig arch = tiny_cnn();
    const ParamSet p = init_params(arch, 3);
    const Eigen::MatrixXd batch = random_batch(4, arch.input_pixels(), 7);
    const Eigen::MatrixXd a = forward(arch, p, batch, false, nullptr);
    const Eigen::MatrixXd b = forward(arch, p, batch, false, nullptr);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("forward matches the brute-force direct-convolution reference") {
    const ArchitectureConfig arch = tiny_cnn();
    const ParamSet p = init_params(arch, 11);
    const Eigen::MatrixXd batch = random_batch(5, arch.input_pixels(), 13);
    const Eigen::MatrixXd logits = forward(arch, p, batch, false, nullptr);
    for (int s = 0; s < 5; ++s) {
        const auto reference = naive_forward_one(arch, p, batch, s);
        for (int cls = 0; cls < 10; ++cls)
            CHECK(logits(s, cls) == doctest::Approx(reference[static_cast<std::size_t>(cls)])
                                        .epsilon(1e-6));
    }
}

// Zero-initialized biases park pre-activations on the relu kink where
// central differences are undefined; random bias offsets keep the probes on
// differentiable ground.
void randomize_biases(ParamSet& p, std::uint64_t seed) {
    Rng rng(seed);
    for (auto& layer : p.layers)
        if (layer.name.ends_with("bias"))
            for (auto& v : layer.values) v = rng.uniform_real(-0.2, 0.2);
}

TEST_CASE("gradients match central finite differences on every layer") {
    const ArchitectureConfig arch = tiny_cnn();
    ParamSet p = init_params(arch, 17);
    randomize_biases(p, 53);
    const Eigen::MatrixXd batch = random_batch(4, arch.input_pixels(), 19);
    const std::vector<std::uint8_t> labels = random_labels(4, 23);
    const std::uint64_t mask_seed = 97; // same masks for every evaluation

    auto loss_at = [&](const ParamSet& params) {
        Rng rng(mask_seed);
        return loss_and_grad(arch, params, batch, labels, rng).loss;
    };
    Rng grad_rng(mask_seed);
    const LossGrad lg = loss_and_grad(arch, p, batch, labels, grad_rng);

    const double eps = 1e-4;
    Rng probe_rng(29);
    for (std::size_t layer = 0; layer < p.layers.size(); ++layer) {
        for (int probe = 0; probe < 20; ++probe) {
            const std::size_t j = probe_rng.next_below(p.layers[layer].values.size());
            const double saved = p.layers[layer].values[j];
            p.layers[layer].values[j] = saved + eps;
            const double up = loss_at(p);
            p.layers[layer].values[j] = saved - eps;
            const double down = loss_at(p);
            p.layers[layer].values[j] = saved;

            const double fd = (up - down) / (2.0 * eps);
            const double analytic = lg.grads.layers[layer].values[j];
            const double denom = std::max({std::abs(fd), std::abs(analytic), 1e-6});
            CHECK(std::abs(fd - analytic) / denom <= 1e-3);
        }
    }
}

TEST_CASE("gradients also match for the mlp preset") {
    ArchitectureConfig arch = ArchitectureConfig::mlp_small_config();
    arch.input_hw = 8;
    arch.mlp_hidden = 6;
    ParamSet p = init_params(arch, 31);
    randomize_biases(p, 59);
    const Eigen::MatrixXd batch = random_batch(5, arch.input_pixels(), 37);
    const std::vector<std::uint8_t> labels = random_labels(5, 41);

    Rng rng(1);
    const LossGrad lg = loss_and_grad(arch, p, batch, labels, rng);
    const double eps = 1e-4;
    Rng probe_rng(43);
    for (std::size_t layer = 0; layer < p.layers.size(); ++layer)
        for (int probe = 0; probe < 20; ++probe) {
            const std::size_t j = probe_rng.next_below(p.layers[layer].values.size());
            const double saved = p.layers[layer].values[j];
            Rng r1(1), r2(1);
            p.layers[layer].values[j] = saved + eps;
            const double up = loss_and_grad(arch, p, batch, labels, r1).loss;
            p.layers[layer].values[j] = saved - eps;
            const double down = loss_and_grad(arch, p, batch, labels, r2).loss;
            p.layers[layer].values[j] = saved;
            const double fd = (up - down) / (2.0 * eps);
            const double analytic = lg.grads.layers[layer].values[j];
            const double denom = std::max({std::abs(fd), std::abs(analytic), 1e-6});
            CHECK(std::abs(fd - analytic) / denom <= 1e-3);
        }
}

TEST_CASE("duplicated batch leaves the mean loss and gradients unchanged") {
    ArchitectureConfig arch = ArchitectureConfig::mlp_small_config();
    arch.input_hw = 8;
    arch.mlp_hidden = 5;
    const ParamSet p = init_params(arch, 3);
    const Eigen::MatrixXd batch = random_batch(3, arch.input_pixels(), 5);
    const std::vector<std::uint8_t> labels = {1, 4, 7};

    Eigen::MatrixXd doubled(6, arch.input_pixels());
    doubled << batch, batch;
    const std::vector<std::uint8_t> doubled_labels = {1, 4, 7, 1, 4, 7};

    Rng r1(1), r2(1);
    const LossGrad a = loss_and_grad(arch, p, batch, labels, r1);
    const LossGrad b = loss_and_grad(arch, p, doubled, doubled_labels, r2);
    CHECK(a.loss == doctest::Approx(b.loss).epsilon(1e-12));
    for (std::size_t i = 0; i < a.grads.layers.size(); ++i)
        for (std::size_t j = 0; j < a.grads.layers[i].values.size(); ++j)
            CHECK(a.grads.layers[i].values[j] ==
                  doctest::Approx(b.grads.layers[i].values[j]).epsilon(1e-12));
}

TEST_CASE("softmax cross-entropy stays finite for logits up to 100") {
    ArchitectureConfig arch = ArchitectureConfig::mlp_small_config();
    arch.input_hw = 4;
    arch.mlp_hidden = 3;
    ParamSet p = init_params(arch, 1);
    zero_params(p);
    auto& bias = p.layer("fc2.bias").values;
    for (int cls = 0; cls < 10; ++cls) bias[static_cast<std::size_t>(cls)] = cls == 2 ? 100.0 : -100.0;

    const Eigen::MatrixXd batch = Eigen::MatrixXd::Zero(1, arch.input_pixels());
    const double loss_right = mean_loss(arch, p, batch, {2});
    CHECK(std::isfinite(loss_right));
    CHECK(loss_right == doctest::Approx(0.0).epsilon(1e-9));
    const double loss_wrong = mean_loss(arch, p, batch, {3});
    CHECK(std::isfinite(loss_wrong));
    CHECK(loss_wrong == doctest::Approx(200.0).epsilon(1e-6));
}

TEST_CASE("sgd with zero momentum subtracts lr times the gradient") {
    ArchitectureConfig arch = ArchitectureConfig::mlp_small_config();
    arch.input_hw = 4;
    arch.mlp_hidden = 2;
    ParamSet p = init_params(arch, 5);
    ParamSet grads = p;
    ParamSet velocity = p;
    zero_params(velocity);
    for (auto& layer : grads.layers) std::fill(layer.values.begin(), layer.values.end(), 0.25);

    ParamSet before = p;
    sgd_momentum_step(p, grads, velocity, 1.0, 0.0);
    for (std::size_t i = 0; i < p.layers.size(); ++i)
        for (std::size_t j = 0; j < p.layers[i].values.size(); ++j)
            CHECK(p.layers[i].values[j] ==
                  doctest::Approx(before.layers[i].values[j] - 0.25).epsilon(1e-15));
}

TEST_CASE("zero gradient and zero velocity leave parameters unchanged") {
    ArchitectureConfig arch = ArchitectureConfig::mlp_small_config();
    arch.input_hw = 4;
    arch.mlp_hidden = 2;
    ParamSet p = init_params(arch, 6);
    ParamSet grads = p;
    ParamSet velocity = p;
    zero_params(grads);
    zero_params(velocity);
    const ParamSet before = p;
    sgd_momentum_step(p, grads, velocity, 0.5, 0.9);
    for (std::size_t i = 0; i < p.layers.size(); ++i) CHECK(p.layers[i].values == before.layers[i].values);
}

TEST_CASE("two momentum steps with constant gradient follow the closed form") {
    ArchitectureConfig arch = ArchitectureConfig::mlp_small_config();
    arch.input_hw = 4;
    arch.mlp_hidden = 2;
    ParamSet p = init_params(arch, 7);
    ParamSet grads = p;
    ParamSet velocity = p;
    zero_params(velocity);
    const double g = 0.125;
    for (auto& layer : grads.layers) std::fill(layer.values.begin(), layer.values.end(), g);

    const ParamSet start = p;
    sgd_momentum_step(p, grads, velocity, 1e-3, 0.9);
    const ParamSet after_one = p;
    sgd_momentum_step(p, grads, velocity, 1e-3, 0.9);
    // First step: lr*g. Second step: lr*(momentum*g + g) = lr*1.9*g.
    for (std::size_t i = 0; i < p.layers.size(); ++i)
        for (std::size_t j = 0; j < p.layers[i].values.size(); ++j) {
            CHECK(after_one.layers[i].values[j] ==
                  doctest::Approx(start.layers[i].values[j] - 1e-3 * g).epsilon(1e-12));
            CHECK(p.layers[i].values[j] ==
                  doctest::Approx(after_one.layers[i].values[j] - 1e-3 * 1.9 * g).epsilon(1e-12));
        }
}

TEST_CASE("averaging a single model returns it unchanged") {
    const ArchitectureConfig arch = ArchitectureConfig::mlp_small_config();
    const ParamSet p = init_params(arch, 8);
    const ParamSet avg = average_params({{&p, 3.0}});
    for (std::size_t i = 0; i < p.layers.size(); ++i)
        for (std::size_t j = 0; j < p.layers[i].values.size(); ++j)
            CHECK(avg.layers[i].values[j] == doctest::Approx(p.layers[i].values[j]).epsilon(1e-15));
}

TEST_CASE("weighted average of scalar models is the weighted mean") {
    ParamSet a, b;
    a.layers.push_back({"w", {1}, {2.0}});
    b.layers.push_back({"w", {1}, {6.0}});
    const ParamSet avg = average_params({{&a, 1.0}, {&b, 3.0}});
    CHECK(avg.layers[0].values[0] == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("equal-weight average matches an independent summation oracle") {
    const ArchitectureConfig arch = ArchitectureConfig::mlp_small_config();
    std::vector<ParamSet> models;
    for (std::uint64_t seed = 0; seed < 7; ++seed) models.push_back(init_params(arch, seed));
    std::vector<WeightedModel> weighted;
    for (const auto& m : models) weighted.push_back({&m, 1.0});
    const ParamSet avg = average_params(weighted);

    // Oracle: long-double accumulation in reverse order.
    for (std::size_t i = 0; i < avg.layers.size(); ++i)
        for (std::size_t j = 0; j < avg.layers[i].values.size(); ++j) {
            long double acc = 0.0L;
            for (std::size_t m = models.size(); m-- > 0;)
                acc += static_cast<long double>(models[m].layers[i].values[j]);
            const double expected = static_cast<double>(acc / static_cast<long double>(models.size()));
            const double got = avg.layers[i].values[j];
            const double denom = std::max(std::abs(expected), 1e-30);
            CHECK(std::abs(got - expected) / denom <= 1e-12);
        }
}

TEST_CASE("averaging is permutation invariant and convex") {
    const ArchitectureConfig arch = ArchitectureConfig::mlp_small_config();
    const ParamSet a = init_params(arch, 1);
    const ParamSet b = init_params(arch, 2);
    const ParamSet c = init_params(arch, 3);
    const ParamSet avg1 = average_params({{&a, 1.0}, {&b, 2.0}, {&c, 3.0}});
    const ParamSet avg2 = average_params({{&c, 3.0}, {&a, 1.0}, {&b, 2.0}});
    for (std::size_t i = 0; i < avg1.layers.size(); ++i)
        for (std::size_t j = 0; j < avg1.layers[i].values.size(); ++j) {
            CHECK(avg1.layers[i].values[j] ==
                  doctest::Approx(avg2.layers[i].values[j]).epsilon(1e-12));
            const double low = std::min({a.layers[i].values[j], b.layers[i].values[j], c.layers[i].values[j]});
            const double high = std::max({a.layers[i].values[j], b.layers[i].values[j], c.layers[i].values[j]});
            CHECK(avg1.layers[i].values[j] >= low - 1e-12);
            CHECK(avg1.layers[i].values[j] <= high + 1e-12);
        }
}

TEST_CASE("averaging rejects bad inputs") {
    const ArchitectureConfig mlp = ArchitectureConfig::mlp_small_config();
    const ParamSet a = init_params(mlp, 1);
    const ParamSet b = init_params(ArchitectureConfig::cnn_default_config(), 1);
    CHECK_THROWS_AS(average_params({}), Error);
    CHECK_THROWS_AS(average_params({{&a, 0.0}}), Error);
    CHECK_THROWS_AS(average_params({{&a, -1.0}}), Error);
    CHECK_THROWS_AS(average_params({{&a, 1.0}, {&b, 1.0}}), Error);
}

TEST_CASE("checkpoint round trip preserves every value and shape") {
    const auto dir = testutil::temp_dir("ckpt");
    const ArchitectureConfig arch = ArchitectureConfig::cnn_default_config();
    const ParamSet p = init_params(arch, 99);
    const std::string path = (dir / "model.params").string();
    save_params(p, path);
    const ParamSet back = load_params(path);
    REQUIRE(back.layers.size() == p.layers.size());
    for (std::size_t i = 0; i < p.layers.size(); ++i) {
        CHECK(back.layers[i].name == p.layers[i].name);
        CHECK(back.layers[i].shape == p.layers[i].shape);
        CHECK(back.layers[i].values == p.layers[i].values);
    }
    CHECK_THROWS_AS(load_params((dir / "missing.params").string()), Error);
}
