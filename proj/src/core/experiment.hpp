#pragma once

#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/metrics.hpp"

namespace dfl {

// One sweep cell: a (paradigm, scheme, alpha, p) combination run over every
// configured seed pair.
struct CellKey {
    Paradigm paradigm = Paradigm::dfl;
    Scheme scheme = Scheme::none;
    double alpha = 0.0;
    double p = 0.0;
};

std::string cell_name(const CellKey& key);

// Runs the full pipeline (subset, topology, allocation, corruption overlay,
// homogeneous init, round loop, per-round evaluation) for one cell and one
// seed replicate. Row order: rounds ascending, node ids ascending.
std::vector<RoundRow> run_cell_seed(const ExperimentConfig& cfg, const CellKey& key,
                                    const SeedPair& seeds, const LabeledDataset& train,
                                    const LabeledDataset& test);

// `run` subcommand: pre-flight validation, one CSV per sweep cell, metric
// charts with one line per p value, clean-neighbor series for decentralized
// cells, and a cross-seed summary CSV.
void run_experiment(const ExperimentConfig& cfg);

// `report` subcommand: aggregates cell CSVs found in input_dir into a
// summary CSV plus per-metric charts under out_dir.
void write_report(const std::string& input_dir, const std::string& out_dir);

// Reads a metrics CSV produced by run_experiment. schema_ok reports whether
// the header matches; a mismatching file yields no rows.
std::vector<RoundRow> read_metrics_csv(const std::string& path, bool& schema_ok);

void write_metrics_csv(const std::string& path, const std::vector<std::vector<RoundRow>>& per_seed_rows);

// `inspect-corruption` subcommand: dumps PGM pairs (pristine / corrupted)
// for the first flagged samples of the first cell and seed.
void inspect_corruption(const ExperimentConfig& cfg, const std::string& out_dir);

} // namespace dfl
