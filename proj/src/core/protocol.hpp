#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "core/localtrain.hpp"
#include "core/nn.hpp"
#include "core/topology.hpp"

namespace dfl {

// Bulk-synchronous state: per-node current parameters w_i, the parameters
// each node produced in its last local training w~_i, and the train-split
// sizes used as aggregation weights.
struct RoundState {
    int round = 0;
    std::vector<ParamSet> current;
    std::vector<ParamSet> trained;
    std::vector<int> train_sizes;

    static RoundState homogeneous(const ParamSet& initial, int node_count);
};

struct RoundContext {
    std::uint64_t run_seed = 0;
    int threads = 1; // 0 -> hardware concurrency
    ArchitectureConfig arch;
};

// One decentralized communication round: (i) every node trains locally from
// its current model, (ii) each node gathers (w~_j, |D_j|) over its closed
// neighborhood, (iii) each node adopts the size-weighted average. All
// training completes before any aggregation reads, so a round is atomic.
// Zero-size (dataless) neighbors are skipped in the average; a node whose
// whole neighborhood is dataless keeps its own trained parameters.
RoundState dfl_round(const RoundState& state, const Graph& g,
                     const std::vector<NodeDataView>& node_data, const TrainConfig& cfg,
                     const RoundContext& ctx);

// Star-topology round: every client trains from the shared global model,
// the hub (last node id, dataless) computes the size-weighted average over
// all clients, and every node adopts it.
RoundState fl_round(const RoundState& state, const Graph& star,
                    const std::vector<NodeDataView>& client_data, const TrainConfig& cfg,
                    const RoundContext& ctx);

// Centralized benchmark: one model, plain epoch-wise mini-batch SGD over
// the full (optionally corrupted) training set with the same optimizer
// settings; on_epoch fires after every epoch for baseline curves.
void centralized_train(const NodeDataView& data, const TrainConfig& cfg, const RoundContext& ctx,
                       int epoch_budget,
                       const std::function<void(int epoch, const ParamSet&)>& on_epoch);

} // namespace dfl
