#include "core/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "core/error.hpp"

namespace dfl {

namespace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMajorMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

// Tensors with shape [out, ...] viewed as an (out x fan_in) row-major matrix.
RowMajorMap weight_view(const Tensor& t) {
    const int out = t.shape.at(0);
    const int fan_in = static_cast<int>(t.size()) / out;
    return RowMajorMap(t.values.data(), out, fan_in);
}

Eigen::Map<const Vector> bias_view(const Tensor& t) {
    return {t.values.data(), static_cast<Eigen::Index>(t.size())};
}

void ensure_finite(const std::string& layer, const Matrix& m) {
    if (!m.allFinite())
        raise(ErrorKind::numeric, "non-finite activations in layer " + layer);
}

// Activations the backward pass needs. Matrices hold one spatial position
// per row and one channel per column; sample s occupies the contiguous row
// block [s*positions, (s+1)*positions).
struct Trace {
    Matrix p1, a1, r1;
    Eigen::MatrixXi pool1_src;
    Matrix p2, a2d, r2;
    Matrix conv_drop; // per (sample, channel) mask*scale
    Eigen::MatrixXi pool2_src;
    Matrix flat;
    Matrix h1;      // post-relu fc1 output
    Matrix d1;      // fc2 input (after dropout)
    Matrix fc_drop; // per (sample, unit) mask*scale
};

Matrix im2col(const Matrix& maps, int batch, int in_hw, int channels, int k) {
    const int out_hw = in_hw - k + 1;
    Matrix patches(static_cast<Eigen::Index>(batch) * out_hw * out_hw, channels * k * k);
    for (int s = 0; s < batch; ++s) {
        const Eigen::Index in_base = static_cast<Eigen::Index>(s) * in_hw * in_hw;
        const Eigen::Index out_base = static_cast<Eigen::Index>(s) * out_hw * out_hw;
        for (int r = 0; r < out_hw; ++r)
            for (int c = 0; c < out_hw; ++c) {
                const Eigen::Index row = out_base + r * out_hw + c;
                for (int ci = 0; ci < channels; ++ci)
                    for (int kr = 0; kr < k; ++kr)
                        for (int kc = 0; kc < k; ++kc)
                            patches(row, ci * k * k + kr * k + kc) =
                                maps(in_base + (r + kr) * in_hw + (c + kc), ci);
            }
    }
    return patches;
}

void col2im_add(const Matrix& dpatches, Matrix& dmaps, int batch, int in_hw, int channels, int k) {
    const int out_hw = in_hw - k + 1;
    for (int s = 0; s < batch; ++s) {
        const Eigen::Index in_base = static_cast<Eigen::Index>(s) * in_hw * in_hw;
        const Eigen::Index out_base = static_cast<Eigen::Index>(s) * out_hw * out_hw;
        for (int r = 0; r < out_hw; ++r)
            for (int c = 0; c < out_hw; ++c) {
                const Eigen::Index row = out_base + r * out_hw + c;
                for (int ci = 0; ci < channels; ++ci)
                    for (int kr = 0; kr < k; ++kr)
                        for (int kc = 0; kc < k; ++kc)
                            dmaps(in_base + (r + kr) * in_hw + (c + kc), ci) +=
                                dpatches(row, ci * k * k + kr * k + kc);
            }
    }
}

// 2x2 max pooling with argmax row memo; ties resolve to the first candidate
// in scan order so the routing is deterministic.
Matrix maxpool2(const Matrix& maps, int batch, int in_hw, Eigen::MatrixXi& src_rows) {
    const int out_hw = in_hw / 2;
    const auto channels = maps.cols();
    Matrix pooled(static_cast<Eigen::Index>(batch) * out_hw * out_hw, channels);
    src_rows.resize(pooled.rows(), channels);
    for (int s = 0; s < batch; ++s) {
        const Eigen::Index in_base = static_cast<Eigen::Index>(s) * in_hw * in_hw;
        const Eigen::Index out_base = static_cast<Eigen::Index>(s) * out_hw * out_hw;
        for (int r = 0; r < out_hw; ++r)
            for (int c = 0; c < out_hw; ++c) {
                const Eigen::Index out_row = out_base + r * out_hw + c;
                for (Eigen::Index ch = 0; ch < channels; ++ch) {
                    Eigen::Index best_row = in_base + (2 * r) * in_hw + (2 * c);
                    double best = maps(best_row, ch);
                    for (int dr = 0; dr < 2; ++dr)
                        for (int dc = 0; dc < 2; ++dc) {
                            const Eigen::Index cand = in_base + (2 * r + dr) * in_hw + (2 * c + dc);
                            if (maps(cand, ch) > best) {
                                best = maps(cand, ch);
                                best_row = cand;
                            }
                        }
                    pooled(out_row, ch) = best;
                    src_rows(out_row, ch) = static_cast<int>(best_row);
                }
            }
    }
    return pooled;
}

Matrix unpool2(const Matrix& dpooled, const Eigen::MatrixXi& src_rows, Eigen::Index in_rows) {
    Matrix dmaps = Matrix::Zero(in_rows, dpooled.cols());
    for (Eigen::Index row = 0; row < dpooled.rows(); ++row)
        for (Eigen::Index ch = 0; ch < dpooled.cols(); ++ch)
            dmaps(src_rows(row, ch), ch) += dpooled(row, ch);
    return dmaps;
}

// Flatten (positions x channels) row blocks into channel-major feature rows,
// matching the [channel][h][w] layout of the fc1 weight tensor.
Matrix flatten_maps(const Matrix& maps, int batch, int positions) {
    const auto channels = maps.cols();
    Matrix flat(batch, channels * positions);
    for (int s = 0; s < batch; ++s)
        for (Eigen::Index ch = 0; ch < channels; ++ch)
            for (int pos = 0; pos < positions; ++pos)
                flat(s, ch * positions + pos) =
                    maps(static_cast<Eigen::Index>(s) * positions + pos, ch);
    return flat;
}

Matrix unflatten_maps(const Matrix& dflat, int batch, int positions, Eigen::Index channels) {
    Matrix dmaps(static_cast<Eigen::Index>(batch) * positions, channels);
    for (int s = 0; s < batch; ++s)
        for (Eigen::Index ch = 0; ch < channels; ++ch)
            for (int pos = 0; pos < positions; ++pos)
                dmaps(static_cast<Eigen::Index>(s) * positions + pos, ch) =
                    dflat(s, ch * positions + pos);
    return dmaps;
}

// Mask order is fixed (sample-major, then channel/unit) so a same-seeded rng
// reproduces identical masks; gradient checks rely on this.
Matrix draw_dropout_mask(Rng& rng, Eigen::Index rows, Eigen::Index cols, double rate) {
    Matrix mask(rows, cols);
    const double scale = 1.0 / (1.0 - rate);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            mask(r, c) = rng.uniform_real() < rate ? 0.0 : scale;
    return mask;
}

Matrix forward_impl(const ArchitectureConfig& arch, const ParamSet& params, const Matrix& batch,
                    bool train_mode, Rng* rng, Trace* trace) {
    if (batch.cols() != arch.input_pixels())
        raise(ErrorKind::parameter, "batch has " + std::to_string(batch.cols()) +
                                        " pixels per sample, expected " +
                                        std::to_string(arch.input_pixels()));
    if (train_mode && rng == nullptr && arch.kind == ArchKind::cnn_default)
        raise(ErrorKind::parameter, "train-mode forward needs an rng for dropout");

    const int batch_size = static_cast<int>(batch.rows());
    Trace local;
    Trace& t = trace ? *trace : local;

    Matrix flat;
    if (arch.kind == ArchKind::cnn_default) {
        const int k = arch.kernel;
        const int o1 = arch.conv1_out_hw();
        const int p1 = arch.pool1_out_hw();
        const int o2 = arch.conv2_out_hw();
        const int p2 = arch.pool2_out_hw();

        // Stage 1: conv -> maxpool -> relu. The single input channel comes
        // straight from the batch rows.
        Matrix input_maps(static_cast<Eigen::Index>(batch_size) * arch.input_pixels(), 1);
        for (int s = 0; s < batch_size; ++s)
            input_maps.col(0).segment(static_cast<Eigen::Index>(s) * arch.input_pixels(),
                                      arch.input_pixels()) = batch.row(s).transpose();
        t.p1 = im2col(input_maps, batch_size, arch.input_hw, 1, k);
        t.a1.noalias() = t.p1 * weight_view(params.layer("conv1.weight")).transpose();
        t.a1.rowwise() += bias_view(params.layer("conv1.bias")).transpose();
        ensure_finite("conv1", t.a1);
        t.r1 = maxpool2(t.a1, batch_size, o1, t.pool1_src).cwiseMax(0.0);

        // Stage 2: conv -> channel dropout -> maxpool -> relu.
        t.p2 = im2col(t.r1, batch_size, p1, arch.conv1_channels, k);
        t.a2d.noalias() = t.p2 * weight_view(params.layer("conv2.weight")).transpose();
        t.a2d.rowwise() += bias_view(params.layer("conv2.bias")).transpose();
        ensure_finite("conv2", t.a2d);
        if (train_mode && arch.dropout_conv > 0.0) {
            t.conv_drop = draw_dropout_mask(*rng, batch_size, arch.conv2_channels, arch.dropout_conv);
            for (int s = 0; s < batch_size; ++s)
                t.a2d.middleRows(static_cast<Eigen::Index>(s) * o2 * o2, o2 * o2).array().rowwise() *=
                    t.conv_drop.row(s).array();
        }
        t.r2 = maxpool2(t.a2d, batch_size, o2, t.pool2_src).cwiseMax(0.0);
        flat = flatten_maps(t.r2, batch_size, p2 * p2);
    } else {
        flat = batch;
    }
    t.flat = flat;

    Matrix h = flat * weight_view(params.layer("fc1.weight")).transpose();
    h.rowwise() += bias_view(params.layer("fc1.bias")).transpose();
    ensure_finite("fc1", h);
    t.h1 = h.cwiseMax(0.0);

    t.d1 = t.h1;
    if (train_mode && arch.dropout_fc > 0.0) {
        if (rng == nullptr) raise(ErrorKind::parameter, "train-mode forward needs an rng for dropout");
        t.fc_drop = draw_dropout_mask(*rng, t.h1.rows(), t.h1.cols(), arch.dropout_fc);
        t.d1.array() *= t.fc_drop.array();
    }

    Matrix logits = t.d1 * weight_view(params.layer("fc2.weight")).transpose();
    logits.rowwise() += bias_view(params.layer("fc2.bias")).transpose();
    ensure_finite("fc2", logits);
    return logits;
}

// Log-sum-exp softmax cross-entropy; fills dlogits with d(mean loss)/dlogits
// when requested.
double softmax_cross_entropy(const Matrix& logits, const std::vector<std::uint8_t>& labels,
                             Matrix* dlogits) {
    const auto batch = logits.rows();
    if (static_cast<Eigen::Index>(labels.size()) != batch)
        raise(ErrorKind::parameter, "label count does not match batch size");
    if (dlogits) dlogits->resize(batch, logits.cols());

    double total = 0.0;
    for (Eigen::Index s = 0; s < batch; ++s) {
        if (labels[static_cast<std::size_t>(s)] >= logits.cols())
            raise(ErrorKind::parameter, "label out of range");
        const double max_logit = logits.row(s).maxCoeff();
        const double lse =
            max_logit + std::log((logits.row(s).array() - max_logit).exp().sum());
        total += lse - logits(s, labels[static_cast<std::size_t>(s)]);
        if (dlogits) {
            dlogits->row(s) = (logits.row(s).array() - lse).exp();
            (*dlogits)(s, labels[static_cast<std::size_t>(s)]) -= 1.0;
        }
    }
    const double inv_batch = 1.0 / static_cast<double>(batch);
    if (dlogits) *dlogits *= inv_batch;
    return total * inv_batch;
}

Tensor make_tensor(const std::string& name, std::vector<int> shape) {
    Tensor t;
    t.name = name;
    t.shape = std::move(shape);
    std::size_t n = 1;
    for (int d : t.shape) n *= static_cast<std::size_t>(d);
    t.values.assign(n, 0.0);
    return t;
}

void fill_fan_in_uniform(Tensor& t, int fan_in, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (double& v : t.values) v = rng.uniform_real(-bound, bound);
}

} // namespace

bool ParamSet::shape_compatible(const ParamSet& other) const {
    if (layers.size() != other.layers.size()) return false;
    for (std::size_t i = 0; i < layers.size(); ++i)
        if (!layers[i].same_shape(other.layers[i])) return false;
    return true;
}

Tensor& ParamSet::layer(const std::string& name) {
    for (auto& t : layers)
        if (t.name == name) return t;
    raise(ErrorKind::parameter, "no layer named " + name);
}

const Tensor& ParamSet::layer(const std::string& name) const {
    for (const auto& t : layers)
        if (t.name == name) return t;
    raise(ErrorKind::parameter, "no layer named " + name);
}

ArchitectureConfig ArchitectureConfig::cnn_default_config() { return {}; }

ArchitectureConfig ArchitectureConfig::mlp_small_config() {
    ArchitectureConfig arch;
    arch.kind = ArchKind::mlp_small;
    arch.dropout_conv = 0.0;
    arch.dropout_fc = 0.0;
    return arch;
}

int ArchitectureConfig::conv1_out_hw() const {
    const int out = input_hw - kernel + 1;
    if (out <= 0) raise(ErrorKind::parameter, "input too small for conv1 kernel");
    return out;
}

int ArchitectureConfig::pool1_out_hw() const {
    const int out = conv1_out_hw();
    if (out % 2 != 0) raise(ErrorKind::parameter, "conv1 output side must be even for 2x2 pooling");
    return out / 2;
}

int ArchitectureConfig::conv2_out_hw() const {
    const int out = pool1_out_hw() - kernel + 1;
    if (out <= 0) raise(ErrorKind::parameter, "input too small for conv2 kernel");
    return out;
}

int ArchitectureConfig::pool2_out_hw() const {
    const int out = conv2_out_hw();
    if (out % 2 != 0) raise(ErrorKind::parameter, "conv2 output side must be even for 2x2 pooling");
    return out / 2;
}

int ArchitectureConfig::flat_features() const {
    if (kind == ArchKind::mlp_small) return input_pixels();
    return conv2_channels * pool2_out_hw() * pool2_out_hw();
}

ArchitectureConfig arch_from_name(const std::string& name) {
    if (name == "cnn_default") return ArchitectureConfig::cnn_default_config();
    if (name == "mlp_small") return ArchitectureConfig::mlp_small_config();
    raise(ErrorKind::parameter, "unknown architecture preset: " + name);
}

std::string to_string(ArchKind kind) {
    return kind == ArchKind::cnn_default ? "cnn_default" : "mlp_small";
}

ParamSet init_params(const ArchitectureConfig& arch, std::uint64_t seed) {
    Rng rng(seed);
    ParamSet p;
    const int k = arch.kernel;
    if (arch.kind == ArchKind::cnn_default) {
        p.layers.push_back(make_tensor("conv1.weight", {arch.conv1_channels, 1, k, k}));
        p.layers.push_back(make_tensor("conv1.bias", {arch.conv1_channels}));
        p.layers.push_back(make_tensor("conv2.weight", {arch.conv2_channels, arch.conv1_channels, k, k}));
        p.layers.push_back(make_tensor("conv2.bias", {arch.conv2_channels}));
        p.layers.push_back(make_tensor("fc1.weight", {arch.fc1_units, arch.flat_features()}));
        p.layers.push_back(make_tensor("fc1.bias", {arch.fc1_units}));
        p.layers.push_back(make_tensor("fc2.weight", {arch.num_classes, arch.fc1_units}));
        p.layers.push_back(make_tensor("fc2.bias", {arch.num_classes}));
        fill_fan_in_uniform(p.layer("conv1.weight"), k * k, rng);
        fill_fan_in_uniform(p.layer("conv2.weight"), arch.conv1_channels * k * k, rng);
        fill_fan_in_uniform(p.layer("fc1.weight"), arch.flat_features(), rng);
        fill_fan_in_uniform(p.layer("fc2.weight"), arch.fc1_units, rng);
    } else {
        p.layers.push_back(make_tensor("fc1.weight", {arch.mlp_hidden, arch.input_pixels()}));
        p.layers.push_back(make_tensor("fc1.bias", {arch.mlp_hidden}));
        p.layers.push_back(make_tensor("fc2.weight", {arch.num_classes, arch.mlp_hidden}));
        p.layers.push_back(make_tensor("fc2.bias", {arch.num_classes}));
        fill_fan_in_uniform(p.layer("fc1.weight"), arch.input_pixels(), rng);
        fill_fan_in_uniform(p.layer("fc2.weight"), arch.mlp_hidden, rng);
    }
    return p;
}

Eigen::MatrixXd forward(const ArchitectureConfig& arch, const ParamSet& params,
                        const Eigen::MatrixXd& batch, bool train_mode, Rng* rng) {
    return forward_impl(arch, params, batch, train_mode, rng, nullptr);
}

LossGrad loss_and_grad(const ArchitectureConfig& arch, const ParamSet& params,
                       const Eigen::MatrixXd& batch, const std::vector<std::uint8_t>& labels,
                       Rng& rng) {
    Trace t;
    const Matrix logits = forward_impl(arch, params, batch, /*train_mode=*/true, &rng, &t);

    LossGrad out;
    Matrix dlogits;
    out.loss = softmax_cross_entropy(logits, labels, &dlogits);

    out.grads.layers.reserve(params.layers.size());
    for (const auto& layer : params.layers) out.grads.layers.push_back(make_tensor(layer.name, layer.shape));

    auto grad_view = [&out](const std::string& name) {
        Tensor& g = out.grads.layer(name);
        const int rows = g.shape.at(0);
        const int cols = static_cast<int>(g.size()) / rows;
        return Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            g.values.data(), rows, cols);
    };

    // fc2
    grad_view("fc2.weight").noalias() = dlogits.transpose() * t.d1;
    grad_view("fc2.bias") = dlogits.colwise().sum().transpose();
    Matrix dd1 = dlogits * weight_view(params.layer("fc2.weight"));

    // fc dropout and relu
    if (t.fc_drop.size() > 0) dd1.array() *= t.fc_drop.array();
    Matrix dh = dd1.array() * (t.h1.array() > 0.0).cast<double>();

    // fc1
    grad_view("fc1.weight").noalias() = dh.transpose() * t.flat;
    grad_view("fc1.bias") = dh.colwise().sum().transpose();

    if (arch.kind == ArchKind::mlp_small) return out;

    const int batch_size = static_cast<int>(batch.rows());
    const int k = arch.kernel;
    const int p1 = arch.pool1_out_hw();
    const int o2 = arch.conv2_out_hw();
    const int p2 = arch.pool2_out_hw();

    Matrix dflat = dh * weight_view(params.layer("fc1.weight"));
    Matrix dr2 = unflatten_maps(dflat, batch_size, p2 * p2, arch.conv2_channels);
    dr2.array() *= (t.r2.array() > 0.0).cast<double>();
    Matrix da2d = unpool2(dr2, t.pool2_src, t.a2d.rows());
    if (t.conv_drop.size() > 0)
        for (int s = 0; s < batch_size; ++s)
            da2d.middleRows(static_cast<Eigen::Index>(s) * o2 * o2, o2 * o2).array().rowwise() *=
                t.conv_drop.row(s).array();

    grad_view("conv2.weight").noalias() = da2d.transpose() * t.p2;
    grad_view("conv2.bias") = da2d.colwise().sum().transpose();
    Matrix dp2 = da2d * weight_view(params.layer("conv2.weight"));
    Matrix dr1 = Matrix::Zero(t.r1.rows(), t.r1.cols());
    col2im_add(dp2, dr1, batch_size, p1, arch.conv1_channels, k);

    dr1.array() *= (t.r1.array() > 0.0).cast<double>();
    Matrix da1 = unpool2(dr1, t.pool1_src, t.a1.rows());

    grad_view("conv1.weight").noalias() = da1.transpose() * t.p1;
    grad_view("conv1.bias") = da1.colwise().sum().transpose();
    return out;
}

double mean_loss(const ArchitectureConfig& arch, const ParamSet& params,
                 const Eigen::MatrixXd& batch, const std::vector<std::uint8_t>& labels) {
    const Matrix logits = forward_impl(arch, params, batch, /*train_mode=*/false, nullptr, nullptr);
    return softmax_cross_entropy(logits, labels, nullptr);
}

void sgd_momentum_step(ParamSet& params, const ParamSet& grads, ParamSet& velocity, double lr,
                       double momentum) {
    if (lr <= 0.0) raise(ErrorKind::parameter, "learning rate must be positive");
    if (momentum < 0.0 || momentum >= 1.0) raise(ErrorKind::parameter, "momentum must be in [0,1)");
    if (!params.shape_compatible(grads) || !params.shape_compatible(velocity))
        raise(ErrorKind::parameter, "sgd step: parameter/gradient/velocity shapes differ");

    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        auto& p = params.layers[i].values;
        const auto& g = grads.layers[i].values;
        auto& v = velocity.layers[i].values;
        for (std::size_t j = 0; j < p.size(); ++j) {
            if (!std::isfinite(g[j]) || !std::isfinite(p[j]))
                raise(ErrorKind::numeric, "non-finite value in layer " + params.layers[i].name);
            v[j] = momentum * v[j] + g[j];
            p[j] -= lr * v[j];
        }
    }
}

ParamSet average_params(const std::vector<WeightedModel>& models) {
    if (models.empty()) raise(ErrorKind::aggregation, "average_params: no models given");
    double total_weight = 0.0;
    for (const auto& m : models) {
        if (m.params == nullptr) raise(ErrorKind::aggregation, "average_params: null model");
        if (m.weight <= 0.0) raise(ErrorKind::parameter, "average_params: weights must be positive");
        if (!m.params->shape_compatible(*models.front().params))
            raise(ErrorKind::aggregation, "average_params: model shapes differ");
        total_weight += m.weight;
    }
    if (total_weight <= 0.0) raise(ErrorKind::parameter, "average_params: zero total weight");

    // A one-element neighborhood returns the model unchanged, bit for bit.
    if (models.size() == 1) return *models.front().params;

    ParamSet out;
    out.layers.reserve(models.front().params->layers.size());
    for (const auto& layer : models.front().params->layers)
        out.layers.push_back(make_tensor(layer.name, layer.shape));

    for (const auto& m : models)
        for (std::size_t i = 0; i < out.layers.size(); ++i) {
            const auto& src = m.params->layers[i].values;
            auto& dst = out.layers[i].values;
            for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += m.weight * src[j];
        }
    const double inv = 1.0 / total_weight;
    for (auto& layer : out.layers)
        for (double& v : layer.values) v *= inv;
    return out;
}

namespace {
constexpr std::uint32_t kParamMagic = 0x444C4650; // "DFLP"

template <typename T>
void write_raw(std::ofstream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in, const std::string& path) {
    T value;
    if (!in.read(reinterpret_cast<char*>(&value), sizeof(T)))
        raise(ErrorKind::io, "truncated checkpoint: " + path);
    return value;
}
} // namespace

void save_params(const ParamSet& params, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorKind::io, "cannot open for write: " + path);
    write_raw(out, kParamMagic);
    write_raw(out, std::uint32_t{1});
    write_raw(out, static_cast<std::uint32_t>(params.layers.size()));
    for (const auto& layer : params.layers) {
        write_raw(out, static_cast<std::uint32_t>(layer.name.size()));
        out.write(layer.name.data(), static_cast<std::streamsize>(layer.name.size()));
        write_raw(out, static_cast<std::uint32_t>(layer.shape.size()));
        for (int d : layer.shape) write_raw(out, static_cast<std::int32_t>(d));
        out.write(reinterpret_cast<const char*>(layer.values.data()),
                  static_cast<std::streamsize>(layer.values.size() * sizeof(double)));
    }
    if (!out) raise(ErrorKind::io, "write failed: " + path);
}

ParamSet load_params(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorKind::io, "cannot open " + path);
    if (read_raw<std::uint32_t>(in, path) != kParamMagic)
        raise(ErrorKind::format, "bad checkpoint magic in " + path);
    if (read_raw<std::uint32_t>(in, path) != 1)
        raise(ErrorKind::format, "unsupported checkpoint version in " + path);
    const auto layer_count = read_raw<std::uint32_t>(in, path);
    ParamSet params;
    params.layers.reserve(layer_count);
    for (std::uint32_t i = 0; i < layer_count; ++i) {
        const auto name_len = read_raw<std::uint32_t>(in, path);
        std::string name(name_len, '\0');
        if (!in.read(name.data(), name_len)) raise(ErrorKind::io, "truncated checkpoint: " + path);
        const auto ndims = read_raw<std::uint32_t>(in, path);
        std::vector<int> shape(ndims);
        for (auto& d : shape) d = read_raw<std::int32_t>(in, path);
        Tensor t = make_tensor(name, shape);
        if (!in.read(reinterpret_cast<char*>(t.values.data()),
                     static_cast<std::streamsize>(t.values.size() * sizeof(double))))
            raise(ErrorKind::io, "truncated checkpoint: " + path);
        params.layers.push_back(std::move(t));
    }
    return params;
}

} // namespace dfl
