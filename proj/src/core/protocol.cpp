#include "core/protocol.hpp"

#include <algorithm>

#include "core/error.hpp"
#include "core/parallel.hpp"

namespace dfl {

namespace {

constexpr std::uint64_t kCentralShuffleTag = 0x4345;

// Runs the local-training phase for every node in parallel, reporting the
// failing node id when a worker throws.
void train_phase(const RoundState& state, const std::vector<NodeDataView>& node_data,
                 const TrainConfig& cfg, const RoundContext& ctx, int node_count,
                 RoundState& next) {
    parallel_for(node_count, ctx.threads, [&](int node) {
        try {
            const LocalTrainResult result =
                train_local(state.current[static_cast<std::size_t>(node)],
                            node_data[static_cast<std::size_t>(node)], cfg, ctx.arch,
                            TrainStreamKey{ctx.run_seed, node, state.round});
            next.trained[static_cast<std::size_t>(node)] = result.params;
            next.train_sizes[static_cast<std::size_t>(node)] = result.train_size;
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::numeric)
                raise(ErrorKind::numeric,
                      "round " + std::to_string(state.round) + ", node " + std::to_string(node) +
                          ": " + e.what());
            throw;
        }
    });
}

} // namespace

RoundState RoundState::homogeneous(const ParamSet& initial, int node_count) {
    RoundState state;
    state.current.assign(static_cast<std::size_t>(node_count), initial);
    state.trained.assign(static_cast<std::size_t>(node_count), initial);
    state.train_sizes.assign(static_cast<std::size_t>(node_count), 0);
    return state;
}

RoundState dfl_round(const RoundState& state, const Graph& g,
                     const std::vector<NodeDataView>& node_data, const TrainConfig& cfg,
                     const RoundContext& ctx) {
    const int n = g.node_count;
    if (static_cast<int>(state.current.size()) != n || static_cast<int>(node_data.size()) != n)
        raise(ErrorKind::parameter, "dfl_round: state/data not aligned with graph");

    RoundState next;
    next.round = state.round + 1;
    next.current.resize(static_cast<std::size_t>(n));
    next.trained.resize(static_cast<std::size_t>(n));
    next.train_sizes.assign(static_cast<std::size_t>(n), 0);

    train_phase(state, node_data, cfg, ctx, n, next);

    // Aggregation reads only this round's trained snapshot.
    parallel_for(n, ctx.threads, [&](int node) {
        std::vector<WeightedModel> gathered;
        for (int j : neighborhood(g, node)) {
            const int size = next.train_sizes[static_cast<std::size_t>(j)];
            if (size > 0)
                gathered.push_back({&next.trained[static_cast<std::size_t>(j)],
                                    static_cast<double>(size)});
        }
        if (gathered.empty())
            next.current[static_cast<std::size_t>(node)] =
                next.trained[static_cast<std::size_t>(node)];
        else
            next.current[static_cast<std::size_t>(node)] = average_params(gathered);
    });
    return next;
}

RoundState fl_round(const RoundState& state, const Graph& star,
                    const std::vector<NodeDataView>& client_data, const TrainConfig& cfg,
                    const RoundContext& ctx) {
    const int node_count = star.node_count;
    const int clients = node_count - 1; // hub is the last id and holds no data
    if (static_cast<int>(state.current.size()) != node_count ||
        static_cast<int>(client_data.size()) != clients)
        raise(ErrorKind::parameter, "fl_round: state/data not aligned with star topology");

    RoundState next;
    next.round = state.round + 1;
    next.current.resize(static_cast<std::size_t>(node_count));
    next.trained = state.trained;
    next.train_sizes.assign(static_cast<std::size_t>(node_count), 0);

    train_phase(state, client_data, cfg, ctx, clients, next);

    std::vector<WeightedModel> gathered;
    for (int client = 0; client < clients; ++client) {
        const int size = next.train_sizes[static_cast<std::size_t>(client)];
        if (size > 0)
            gathered.push_back({&next.trained[static_cast<std::size_t>(client)],
                                static_cast<double>(size)});
    }
    const ParamSet global = gathered.empty() ? state.current.front() : average_params(gathered);
    for (auto& p : next.current) p = global;
    return next;
}

void centralized_train(const NodeDataView& data, const TrainConfig& cfg, const RoundContext& ctx,
                       int epoch_budget,
                       const std::function<void(int epoch, const ParamSet&)>& on_epoch) {
    cfg.validate();
    if (data.train_indices == nullptr || data.train_indices->empty())
        raise(ErrorKind::parameter, "centralized_train: empty training set");

    ParamSet params = init_params(ctx.arch, ctx.run_seed);
    ParamSet velocity = params;
    for (auto& layer : velocity.layers) std::fill(layer.values.begin(), layer.values.end(), 0.0);

    std::vector<std::int32_t> order = *data.train_indices;
    Eigen::MatrixXd batch;
    std::vector<std::uint8_t> labels;
    for (int epoch = 1; epoch <= epoch_budget; ++epoch) {
        Rng shuffle_rng =
            derive_stream(ctx.run_seed, {kCentralShuffleTag, static_cast<std::uint64_t>(epoch)});
        shuffle_rng.shuffle(order);
        for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
            const std::vector<std::int32_t> chunk(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                                  order.begin() + static_cast<std::ptrdiff_t>(end));
            fill_batch(data, chunk, batch, labels);
            Rng dropout_rng = derive_stream(
                ctx.run_seed, {kCentralShuffleTag, static_cast<std::uint64_t>(epoch), begin});
            const LossGrad lg = loss_and_grad(ctx.arch, params, batch, labels, dropout_rng);
            sgd_momentum_step(params, lg.grads, velocity, cfg.lr, cfg.momentum);
        }
        on_epoch(epoch, params);
    }
}

} // namespace dfl
