#include "core/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "core/corruption.hpp"
#include "core/error.hpp"
#include "core/parallel.hpp"
#include "core/protocol.hpp"
#include "core/svg_chart.hpp"

namespace dfl {

namespace fs = std::filesystem;

namespace {

// Stream tags; every random decision in a run derives from (run_seed, tag, ...).
constexpr std::uint64_t kTagSubsetTrain = 0x01;
constexpr std::uint64_t kTagSubsetTest = 0x02;
constexpr std::uint64_t kTagAssign = 0x03;
constexpr std::uint64_t kTagTarget = 0x04;
constexpr std::uint64_t kTagValSplit = 0x05;
constexpr std::uint64_t kTagCorrupt = 0x06;
constexpr std::uint64_t kTagInit = 0x07;
constexpr std::uint64_t kTagGraph = 0x08;

std::string format_g(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", value);
    return buf;
}

struct CellRuns {
    CellKey key;
    std::vector<std::vector<RoundRow>> per_seed_rows;
};

// Per-round node-mean of a metric for one seed's rows.
std::vector<double> node_mean_series(const std::vector<RoundRow>& rows,
                                     const std::function<double(const RoundRow&)>& metric) {
    std::map<int, std::pair<double, int>> acc;
    for (const auto& row : rows) {
        auto& slot = acc[row.round];
        slot.first += metric(row);
        slot.second += 1;
    }
    std::vector<double> series;
    series.reserve(acc.size());
    for (const auto& [round, slot] : acc) series.push_back(slot.first / slot.second);
    return series;
}

struct MetricDef {
    std::string name;
    std::function<double(const RoundRow&)> getter;
};

std::vector<MetricDef> chart_metrics(int target_class, int collateral_class) {
    return {
        {"accuracy", [](const RoundRow& r) { return r.accuracy; }},
        {"f1_" + std::to_string(collateral_class),
         [collateral_class](const RoundRow& r) {
             return r.f1[static_cast<std::size_t>(collateral_class)];
         }},
        {"f1_" + std::to_string(target_class),
         [target_class](const RoundRow& r) { return r.f1[static_cast<std::size_t>(target_class)]; }},
    };
}

// Builds the full allocation for one run: IID non-target classes, scheme-
// dependent target-class placement, then the stratified validation split.
FederatedAssignment build_assignment(const ExperimentConfig& cfg, const CellKey& key,
                                     const LabeledDataset& train, const CentralityRanking& ranking,
                                     std::uint64_t run_seed, int n_nodes) {
    Rng assign_rng = derive_stream(run_seed, {kTagAssign});
    FederatedAssignment assignment =
        assign_iid_nontarget(train, n_nodes, cfg.target_class, assign_rng);

    Rng target_rng = derive_stream(run_seed, {kTagTarget});
    switch (key.scheme) {
        case Scheme::balanced:
            assign_target_balanced(train, assignment, ranking, key.p, target_rng);
            break;
        case Scheme::unbalanced:
            assign_target_unbalanced(train, assignment, ranking, key.p, target_rng);
            break;
        case Scheme::none:
            assign_target_balanced(train, assignment, ranking, 0.0, target_rng);
            break;
    }
    assignment.scheme = key.scheme;

    Rng val_rng = derive_stream(run_seed, {kTagValSplit});
    split_validation(assignment, train, cfg.train.val_fraction, val_rng);
    return assignment;
}

std::vector<RoundRow> run_centralized_seed(const ExperimentConfig& cfg, const CellKey& key,
                                           const SeedPair& seeds, const LabeledDataset& train,
                                           const LabeledDataset& test) {
    // Global corruption: a seeded ceil(p * n_t) subset of the target class.
    FederatedAssignment assignment;
    assignment.target_class = cfg.target_class;
    assignment.scheme = key.scheme;
    assignment.per_node.resize(1);
    auto& node = assignment.per_node.front();
    node.train_indices.resize(static_cast<std::size_t>(train.count()));
    for (int i = 0; i < train.count(); ++i) node.train_indices[static_cast<std::size_t>(i)] = i;

    std::vector<std::int32_t> target_members;
    for (int i = 0; i < train.count(); ++i)
        if (train.labels[static_cast<std::size_t>(i)] == cfg.target_class) target_members.push_back(i);
    Rng target_rng = derive_stream(seeds.run_seed, {kTagTarget});
    target_rng.shuffle(target_members);
    const auto corrupt_count = static_cast<std::size_t>(
        std::ceil(key.p * static_cast<double>(target_members.size())));
    node.corrupt_indices.assign(target_members.begin(),
                                target_members.begin() + static_cast<std::ptrdiff_t>(corrupt_count));
    std::sort(node.corrupt_indices.begin(), node.corrupt_indices.end());

    CorruptionSpec spec{cfg.target_class, cfg.collateral_class, key.alpha, key.p,
                        cfg.corruption_mode};
    Rng corrupt_rng = derive_stream(seeds.run_seed, {kTagCorrupt});
    const CorruptionOverlay overlay = corrupt_assignment(train, assignment, spec, corrupt_rng);

    NodeDataView view{&train, &overlay, &node.train_indices, nullptr};
    RoundContext ctx{seeds.run_seed, cfg.threads, arch_from_name(cfg.arch_name)};

    std::vector<RoundRow> rows;
    auto emit = [&](int round, const ParamSet& params) {
        const ConfusionMatrix cm = evaluate(ctx.arch, params, test);
        RoundRow row;
        row.seed = seeds.run_seed;
        row.round = round;
        row.node = 0;
        row.paradigm = "centralized";
        row.scheme = key.scheme;
        row.alpha = key.alpha;
        row.p = key.p;
        row.accuracy = cm.accuracy();
        row.f1 = f1_per_class(cm);
        row.holds_corrupt = node.holds_corrupt();
        row.has_clean_neighbor = false;
        rows.push_back(row);
    };

    emit(0, init_params(ctx.arch, mix_seed(seeds.run_seed, {kTagInit})));
    centralized_train(view, cfg.train, ctx, cfg.rounds,
                      [&](int epoch, const ParamSet& params) { emit(epoch, params); });
    return rows;
}

} // namespace

std::string cell_name(const CellKey& key) {
    return to_string(key.paradigm) + "_" + to_string(key.scheme) + "_alpha" + format_g(key.alpha) +
           "_p" + format_g(key.p);
}

std::vector<RoundRow> run_cell_seed(const ExperimentConfig& cfg, const CellKey& key,
                                    const SeedPair& seeds, const LabeledDataset& train_full,
                                    const LabeledDataset& test_full) {
    Rng subset_train_rng = derive_stream(seeds.run_seed, {kTagSubsetTrain});
    Rng subset_test_rng = derive_stream(seeds.run_seed, {kTagSubsetTest});
    const LabeledDataset train = stratified_subset(train_full, cfg.subset_fraction, subset_train_rng);
    const LabeledDataset test = stratified_subset(test_full, cfg.subset_fraction, subset_test_rng);

    if (key.paradigm == Paradigm::centralized)
        return run_centralized_seed(cfg, key, seeds, train, test);

    const int n_nodes = cfg.n_nodes;
    Graph graph;
    CentralityRanking ranking;
    if (key.paradigm == Paradigm::dfl) {
        Rng graph_rng = derive_stream(seeds.graph_seed, {kTagGraph});
        graph = generate_ba(n_nodes, 1, graph_rng);
        ranking = centrality_ranking(graph);
    } else {
        // Clients 0..N-1 plus the dataless hub N. Leaves tie on degree, so
        // client rank order is ascending id.
        graph = generate_star(n_nodes + 1);
        ranking.ordered.resize(static_cast<std::size_t>(n_nodes));
        for (int i = 0; i < n_nodes; ++i) ranking.ordered[static_cast<std::size_t>(i)] = i;
    }

    const FederatedAssignment assignment =
        build_assignment(cfg, key, train, ranking, seeds.run_seed, n_nodes);

    CorruptionSpec spec{cfg.target_class, cfg.collateral_class, key.alpha, key.p,
                        cfg.corruption_mode};
    Rng corrupt_rng = derive_stream(seeds.run_seed, {kTagCorrupt});
    const CorruptionOverlay overlay = corrupt_assignment(train, assignment, spec, corrupt_rng);

    std::vector<NodeDataView> views(static_cast<std::size_t>(n_nodes));
    for (int node = 0; node < n_nodes; ++node) {
        const auto& na = assignment.per_node[static_cast<std::size_t>(node)];
        views[static_cast<std::size_t>(node)] =
            NodeDataView{&train, &overlay, &na.train_indices, &na.val_indices};
    }

    const auto clean_neighbor_flags = nodes_with_clean_neighbor(graph, assignment);
    RoundContext ctx{seeds.run_seed, cfg.threads, arch_from_name(cfg.arch_name)};
    const ParamSet initial = init_params(ctx.arch, mix_seed(seeds.run_seed, {kTagInit}));
    RoundState state = RoundState::homogeneous(initial, graph.node_count);

    std::vector<RoundRow> rows;
    auto emit_round = [&](int round, const std::vector<const ParamSet*>& node_params) {
        std::vector<ConfusionMatrix> cms(static_cast<std::size_t>(n_nodes));
        if (key.paradigm == Paradigm::fl || round == 0) {
            // All node models are identical here; evaluate once.
            const ConfusionMatrix cm = evaluate(ctx.arch, *node_params.front(), test);
            cms.assign(static_cast<std::size_t>(n_nodes), cm);
        } else {
            parallel_for(n_nodes, cfg.threads, [&](int node) {
                cms[static_cast<std::size_t>(node)] =
                    evaluate(ctx.arch, *node_params[static_cast<std::size_t>(node)], test);
            });
        }
        for (int node = 0; node < n_nodes; ++node) {
            const auto& cm = cms[static_cast<std::size_t>(node)];
            RoundRow row;
            row.seed = seeds.run_seed;
            row.round = round;
            row.node = node;
            row.paradigm = to_string(key.paradigm);
            row.scheme = key.scheme;
            row.alpha = key.alpha;
            row.p = key.p;
            row.accuracy = cm.accuracy();
            row.f1 = f1_per_class(cm);
            row.holds_corrupt =
                assignment.per_node[static_cast<std::size_t>(node)].holds_corrupt();
            row.has_clean_neighbor = clean_neighbor_flags[static_cast<std::size_t>(node)];
            rows.push_back(row);
        }
    };

    std::vector<const ParamSet*> node_params(static_cast<std::size_t>(n_nodes));
    for (int node = 0; node < n_nodes; ++node)
        node_params[static_cast<std::size_t>(node)] = &state.current[static_cast<std::size_t>(node)];
    emit_round(0, node_params);

    for (int round = 1; round <= cfg.rounds; ++round) {
        state = key.paradigm == Paradigm::dfl ? dfl_round(state, graph, views, cfg.train, ctx)
                                              : fl_round(state, graph, views, cfg.train, ctx);
        for (int node = 0; node < n_nodes; ++node)
            node_params[static_cast<std::size_t>(node)] =
                &state.current[static_cast<std::size_t>(node)];
        emit_round(round, node_params);

        if (cfg.checkpoint_every > 0 && round % cfg.checkpoint_every == 0) {
            const fs::path dir = fs::path(cfg.out_dir) / "checkpoints";
            fs::create_directories(dir);
            for (int node = 0; node < n_nodes; ++node)
                save_params(state.current[static_cast<std::size_t>(node)],
                            (dir / (cell_name(key) + "_seed" + std::to_string(seeds.run_seed) +
                                    "_round" + std::to_string(round) + "_node" +
                                    std::to_string(node) + ".params"))
                                .string());
        }
    }
    return rows;
}

namespace {

void write_summary_and_charts(const std::vector<CellRuns>& cells, const fs::path& out_dir,
                              int target_class, int collateral_class) {
    fs::create_directories(out_dir);

    // Summary: cross-seed mean and CI of the node-averaged metric per round.
    std::ofstream summary(out_dir / "summary.csv");
    if (!summary) raise(ErrorKind::io, "cannot open for write: " + (out_dir / "summary.csv").string());
    summary << "paradigm,scheme,alpha,p,round,metric,mean,ci_halfwidth,n_seeds\n";

    std::vector<MetricDef> metrics;
    metrics.push_back({"accuracy", [](const RoundRow& r) { return r.accuracy; }});
    for (int cls = 0; cls < kNumClasses; ++cls)
        metrics.push_back({"f1_" + std::to_string(cls), [cls](const RoundRow& r) {
                               return r.f1[static_cast<std::size_t>(cls)];
                           }});

    for (const auto& cell : cells) {
        for (const auto& metric : metrics) {
            std::vector<std::vector<double>> per_seed;
            per_seed.reserve(cell.per_seed_rows.size());
            for (const auto& rows : cell.per_seed_rows)
                per_seed.push_back(node_mean_series(rows, metric.getter));
            const auto points = aggregate_seed_series(per_seed);
            for (std::size_t round = 0; round < points.size(); ++round) {
                char mean_buf[32], ci_buf[32];
                std::snprintf(mean_buf, sizeof(mean_buf), "%.6f", points[round].mean);
                std::snprintf(ci_buf, sizeof(ci_buf), "%.6f", points[round].ci_halfwidth);
                summary << to_string(cell.key.paradigm) << "," << to_string(cell.key.scheme) << ","
                        << format_g(cell.key.alpha) << "," << format_g(cell.key.p) << "," << round
                        << "," << metric.name << "," << mean_buf << ","
                        << (points[round].ci_defined ? ci_buf : "") << ","
                        << cell.per_seed_rows.size() << "\n";
            }
        }
    }

    // One chart per metric per alpha, one line per sweep cell.
    std::vector<double> alphas;
    for (const auto& cell : cells)
        if (std::find(alphas.begin(), alphas.end(), cell.key.alpha) == alphas.end())
            alphas.push_back(cell.key.alpha);

    for (double alpha : alphas) {
        for (const auto& metric : chart_metrics(target_class, collateral_class)) {
            std::vector<ChartSeries> series;
            for (const auto& cell : cells) {
                if (cell.key.alpha != alpha) continue;
                std::vector<std::vector<double>> per_seed;
                for (const auto& rows : cell.per_seed_rows)
                    per_seed.push_back(node_mean_series(rows, metric.getter));
                const auto points = aggregate_seed_series(per_seed);
                ChartSeries s;
                s.label = to_string(cell.key.paradigm) + " " + to_string(cell.key.scheme) +
                          " p=" + format_g(cell.key.p);
                for (std::size_t round = 0; round < points.size(); ++round) {
                    s.x.push_back(static_cast<double>(round));
                    s.y.push_back(points[round].mean);
                    s.ci.push_back(points[round].ci_defined ? points[round].ci_halfwidth : 0.0);
                }
                series.push_back(std::move(s));
            }
            if (series.empty()) continue;
            ChartSpec chart_spec;
            chart_spec.title = metric.name + " vs round (alpha=" + format_g(alpha) + ")";
            chart_spec.y_label = metric.name;
            render_chart(chart_spec, series,
                         (out_dir / (metric.name + "_alpha" + format_g(alpha) + ".svg")).string());
        }
    }
}

} // namespace

void run_experiment(const ExperimentConfig& cfg) {
    // Pre-flight: nothing is written unless every input checks out.
    for (const std::string& path :
         {cfg.train_images, cfg.train_labels, cfg.test_images, cfg.test_labels})
        if (!fs::exists(path))
            raise(ErrorKind::validation, "dataset file missing: " + path);

    const LabeledDataset train = load_idx(cfg.train_images, cfg.train_labels, SourceTag::train);
    const LabeledDataset test = load_idx(cfg.test_images, cfg.test_labels, SourceTag::test);

    const fs::path out_dir(cfg.out_dir);
    fs::create_directories(out_dir);

    // Topology dumps, one edge list per graph seed.
    if (cfg.paradigm != Paradigm::centralized) {
        const fs::path graph_dir = out_dir / "graphs";
        fs::create_directories(graph_dir);
        for (const SeedPair& seeds : cfg.seeds) {
            Graph graph;
            if (cfg.paradigm == Paradigm::dfl) {
                Rng graph_rng = derive_stream(seeds.graph_seed, {kTagGraph});
                graph = generate_ba(cfg.n_nodes, 1, graph_rng);
            } else {
                graph = generate_star(cfg.n_nodes + 1);
            }
            std::ofstream out(graph_dir / (to_string(cfg.paradigm) + "_graph" +
                                           std::to_string(seeds.graph_seed) + ".edges"));
            out << serialize_edge_list(graph);
        }
    }

    std::vector<CellRuns> cells;
    for (double alpha : cfg.alphas) {
        for (double p : cfg.ps) {
            CellRuns cell;
            cell.key = CellKey{cfg.paradigm, cfg.scheme, alpha, p};
            for (const SeedPair& seeds : cfg.seeds)
                cell.per_seed_rows.push_back(run_cell_seed(cfg, cell.key, seeds, train, test));
            write_metrics_csv((out_dir / (cell_name(cell.key) + ".csv")).string(),
                              cell.per_seed_rows);

            // Clean-neighbor series per decentralized cell, one file per cell.
            if (cfg.paradigm == Paradigm::dfl) {
                std::ofstream cn(out_dir / (cell_name(cell.key) + "_clean_neighbor.csv"));
                cn << "seed,round,group_mean_f1_" << cfg.collateral_class << ",network_mean_f1_"
                   << cfg.collateral_class << ",group_size\n";
                for (std::size_t s = 0; s < cell.per_seed_rows.size(); ++s) {
                    const auto& rows = cell.per_seed_rows[s];
                    Rng graph_rng = derive_stream(cfg.seeds[s].graph_seed, {kTagGraph});
                    const Graph graph = generate_ba(cfg.n_nodes, 1, graph_rng);
                    Rng subset_rng = derive_stream(cfg.seeds[s].run_seed, {kTagSubsetTrain});
                    const LabeledDataset train_sub =
                        stratified_subset(train, cfg.subset_fraction, subset_rng);
                    const FederatedAssignment assignment =
                        build_assignment(cfg, cell.key, train_sub, centrality_ranking(graph),
                                         cfg.seeds[s].run_seed, cfg.n_nodes);
                    const CleanNeighborReport report =
                        clean_neighbor_report(rows, graph, assignment, cfg.collateral_class);
                    if (!report.applicable) continue;
                    for (std::size_t round = 0; round < report.network_mean_f1.size(); ++round) {
                        char grp[32], net[32];
                        std::snprintf(grp, sizeof(grp), "%.6f",
                                      round < report.group_mean_f1.size()
                                          ? report.group_mean_f1[round]
                                          : 0.0);
                        std::snprintf(net, sizeof(net), "%.6f", report.network_mean_f1[round]);
                        cn << cfg.seeds[s].run_seed << "," << round << "," << grp << "," << net
                           << "," << report.nodes_in_group.size() << "\n";
                    }
                }
            }
            cells.push_back(std::move(cell));
        }
    }

    write_summary_and_charts(cells, out_dir, cfg.target_class, cfg.collateral_class);
}

void write_metrics_csv(const std::string& path,
                       const std::vector<std::vector<RoundRow>>& per_seed_rows) {
    std::ofstream out(path);
    if (!out) raise(ErrorKind::io, "cannot open for write: " + path);
    out << metrics_csv_header() << "\n";
    for (const auto& rows : per_seed_rows)
        for (const auto& row : rows) write_csv_row(out, row);
    if (!out) raise(ErrorKind::io, "write failed: " + path);
}

// Minimal reader for our own cell CSV schema.
std::vector<RoundRow> read_metrics_csv(const std::string& path, bool& schema_ok) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::io, "cannot open " + path);
    std::string header;
    std::getline(in, header);
    if (!header.empty() && header.back() == '\r') header.pop_back();
    schema_ok = header == metrics_csv_header();
    std::vector<RoundRow> rows;
    if (!schema_ok) return rows;

    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream stream(line);
        std::string field;
        while (std::getline(stream, field, ',')) fields.push_back(field);
        if (fields.size() != 20)
            raise(ErrorKind::format, "malformed row in " + path);
        RoundRow row;
        row.seed = std::stoull(fields[0]);
        row.round = std::stoi(fields[1]);
        row.node = std::stoi(fields[2]);
        row.paradigm = fields[3];
        if (fields[4] == "balanced") row.scheme = Scheme::balanced;
        else if (fields[4] == "unbalanced") row.scheme = Scheme::unbalanced;
        else row.scheme = Scheme::none;
        row.alpha = std::stod(fields[5]);
        row.p = std::stod(fields[6]);
        row.accuracy = std::stod(fields[7]);
        for (int cls = 0; cls < kNumClasses; ++cls)
            row.f1[static_cast<std::size_t>(cls)] = std::stod(fields[static_cast<std::size_t>(8 + cls)]);
        row.holds_corrupt = fields[18] == "1";
        row.has_clean_neighbor = fields[19] == "1";
        rows.push_back(row);
    }
    return rows;
}

void write_report(const std::string& input_dir, const std::string& out_dir) {
    if (!fs::is_directory(input_dir))
        raise(ErrorKind::validation, "input directory missing: " + input_dir);

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(input_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".csv")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    std::map<std::string, CellRuns> by_cell;
    for (const auto& file : files) {
        bool schema_ok = false;
        const auto rows = read_metrics_csv(file.string(), schema_ok);
        if (!schema_ok || rows.empty()) continue; // summary/clean-neighbor files et al.
        CellKey key;
        if (rows.front().paradigm == "dfl") key.paradigm = Paradigm::dfl;
        else if (rows.front().paradigm == "fl") key.paradigm = Paradigm::fl;
        else key.paradigm = Paradigm::centralized;
        key.scheme = rows.front().scheme;
        key.alpha = rows.front().alpha;
        key.p = rows.front().p;

        auto& cell = by_cell[cell_name(key)];
        cell.key = key;
        // Split rows by seed, preserving first-seen order.
        std::map<std::uint64_t, std::size_t> seed_slot;
        for (const auto& row : rows) {
            const auto it = seed_slot.find(row.seed);
            std::size_t slot;
            if (it == seed_slot.end()) {
                slot = cell.per_seed_rows.size();
                seed_slot[row.seed] = slot;
                cell.per_seed_rows.emplace_back();
            } else {
                slot = it->second;
            }
            cell.per_seed_rows[slot].push_back(row);
        }
    }
    if (by_cell.empty())
        raise(ErrorKind::validation, "no metrics CSV files found in " + input_dir);

    std::vector<CellRuns> cells;
    cells.reserve(by_cell.size());
    for (auto& [name, cell] : by_cell) cells.push_back(std::move(cell));
    // Report has no config to name target/collateral classes; the paper's
    // pair (9, 4) is the default presentation.
    write_summary_and_charts(cells, out_dir, 9, 4);
}

void inspect_corruption(const ExperimentConfig& cfg, const std::string& out_dir) {
    for (const std::string& path : {cfg.train_images, cfg.train_labels})
        if (!fs::exists(path)) raise(ErrorKind::validation, "dataset file missing: " + path);

    const LabeledDataset train_full = load_idx(cfg.train_images, cfg.train_labels, SourceTag::train);
    const SeedPair seeds = cfg.seeds.front();
    const CellKey key{cfg.paradigm, cfg.scheme, cfg.alphas.front(), cfg.ps.front()};

    Rng subset_rng = derive_stream(seeds.run_seed, {kTagSubsetTrain});
    const LabeledDataset train = stratified_subset(train_full, cfg.subset_fraction, subset_rng);

    Graph graph;
    CentralityRanking ranking;
    if (cfg.paradigm == Paradigm::dfl) {
        Rng graph_rng = derive_stream(seeds.graph_seed, {kTagGraph});
        graph = generate_ba(cfg.n_nodes, 1, graph_rng);
        ranking = centrality_ranking(graph);
    } else {
        ranking.ordered.resize(static_cast<std::size_t>(cfg.n_nodes));
        for (int i = 0; i < cfg.n_nodes; ++i) ranking.ordered[static_cast<std::size_t>(i)] = i;
    }
    const FederatedAssignment assignment =
        build_assignment(cfg, key, train, ranking, seeds.run_seed, cfg.n_nodes);

    CorruptionSpec spec{cfg.target_class, cfg.collateral_class, key.alpha, key.p,
                        cfg.corruption_mode};
    Rng corrupt_rng = derive_stream(seeds.run_seed, {kTagCorrupt});
    const CorruptionOverlay overlay = corrupt_assignment(train, assignment, spec, corrupt_rng);

    fs::create_directories(out_dir);
    std::ofstream manifest(fs::path(out_dir) / "assignment_manifest.csv");
    manifest << assignment_manifest_csv(assignment);

    std::ofstream index(fs::path(out_dir) / "index.txt");
    index << "cell " << cell_name(key) << ", corrupted samples: " << overlay.size() << "\n";

    int dumped = 0;
    for (const auto& node : assignment.per_node) {
        for (std::int32_t idx : node.corrupt_indices) {
            if (dumped >= 16) break;
            const std::string stem = "sample" + std::to_string(dumped);
            write_pgm(train.image(idx), (fs::path(out_dir) / (stem + "_original.pgm")).string());
            write_pgm(overlay.image_or(train, idx),
                      (fs::path(out_dir) / (stem + "_corrupted.pgm")).string());
            index << stem << ": index " << idx << ", label "
                  << static_cast<int>(train.labels[static_cast<std::size_t>(idx)]) << "\n";
            dumped += 1;
        }
        if (dumped >= 16) break;
    }
    if (dumped == 0) index << "no corrupted samples (p == 0?)\n";
}

} // namespace dfl
