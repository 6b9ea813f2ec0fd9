#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "core/dataset.hpp"
#include "core/nn.hpp"
#include "core/topology.hpp"

namespace dfl {

// Rows are true classes, columns predicted.
struct ConfusionMatrix {
    std::array<std::array<std::int64_t, kNumClasses>, kNumClasses> counts{};

    std::int64_t total() const;
    double accuracy() const;
};

ConfusionMatrix confusion_from_predictions(const std::vector<std::uint8_t>& truth,
                                           const std::vector<std::uint8_t>& predicted);

// Eval-mode forward over the whole test set; argmax ties resolve to the
// lowest class id.
ConfusionMatrix evaluate(const ArchitectureConfig& arch, const ParamSet& params,
                         const LabeledDataset& test);

// F1(c) = 2TP / (2TP + FP + FN), defined as 0 when the denominator is 0.
std::array<double, kNumClasses> f1_per_class(const ConfusionMatrix& cm);

// One evaluated (seed, round, node) cell plus the run coordinates needed for
// the CSV output.
struct RoundRow {
    std::uint64_t seed = 0;
    int round = 0;
    int node = 0;
    std::string paradigm; // dfl | fl | centralized
    Scheme scheme = Scheme::none;
    double alpha = 0.0;
    double p = 0.0;
    double accuracy = 0.0;
    std::array<double, kNumClasses> f1{};
    bool holds_corrupt = false;
    bool has_clean_neighbor = false;
};

std::string metrics_csv_header();
void write_csv_row(std::ostream& out, const RoundRow& row);

// Cross-seed aggregation: mean of the per-seed values and a 95% Student-t
// confidence half-width (t_{0.975,k-1} * s / sqrt(k)). A single seed yields
// the mean with the interval marked absent.
struct AggregatePoint {
    double mean = 0.0;
    double ci_halfwidth = 0.0;
    bool ci_defined = false;
};

AggregatePoint aggregate_seeds(const std::vector<double>& per_seed_values);
std::vector<AggregatePoint> aggregate_seed_series(
    const std::vector<std::vector<double>>& per_seed_series);

double student_t_975(int dof);

// True where the node has at least one neighbor (itself excluded) holding
// zero corrupt-flagged samples. Graph nodes beyond the assignment (the
// dataless FL hub) count as clean.
std::vector<bool> nodes_with_clean_neighbor(const Graph& g, const FederatedAssignment& assignment);

// Splits one run's per-round mean collateral-class F1 into the group of
// nodes having a clean neighbor versus the whole network. Only meaningful
// for decentralized runs; other paradigms yield an empty report with a
// notice.
struct CleanNeighborReport {
    bool applicable = false;
    std::string notice;
    std::vector<int> nodes_in_group;
    std::vector<double> group_mean_f1;   // indexed by round
    std::vector<double> network_mean_f1; // indexed by round
};

CleanNeighborReport clean_neighbor_report(const std::vector<RoundRow>& rows, const Graph& g,
                                          const FederatedAssignment& assignment,
                                          int collateral_class);

} // namespace dfl
