#include "core/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "core/error.hpp"

namespace dfl {

namespace {

constexpr int kEvalBatch = 512;

std::string format_metric(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    return buf;
}

std::string format_param(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", value);
    return buf;
}

} // namespace

std::int64_t ConfusionMatrix::total() const {
    std::int64_t sum = 0;
    for (const auto& row : counts)
        for (std::int64_t v : row) sum += v;
    return sum;
}

double ConfusionMatrix::accuracy() const {
    const std::int64_t all = total();
    if (all == 0) return 0.0;
    std::int64_t correct = 0;
    for (int c = 0; c < kNumClasses; ++c) correct += counts[c][c];
    return static_cast<double>(correct) / static_cast<double>(all);
}

ConfusionMatrix confusion_from_predictions(const std::vector<std::uint8_t>& truth,
                                           const std::vector<std::uint8_t>& predicted) {
    if (truth.size() != predicted.size())
        raise(ErrorKind::parameter, "confusion: truth/prediction size mismatch");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] >= kNumClasses || predicted[i] >= kNumClasses)
            raise(ErrorKind::parameter, "confusion: class id out of range");
        cm.counts[truth[i]][predicted[i]] += 1;
    }
    return cm;
}

ConfusionMatrix evaluate(const ArchitectureConfig& arch, const ParamSet& params,
                         const LabeledDataset& test) {
    if (test.count() == 0) raise(ErrorKind::parameter, "evaluate: empty test set");
    ConfusionMatrix cm;
    Eigen::MatrixXd batch;
    for (int begin = 0; begin < test.count(); begin += kEvalBatch) {
        const int end = std::min(test.count(), begin + kEvalBatch);
        const int n = end - begin;
        batch.resize(n, kImagePixels);
        for (int i = 0; i < n; ++i) {
            const auto img = test.image(begin + i);
            for (int px = 0; px < kImagePixels; ++px) batch(i, px) = img[static_cast<std::size_t>(px)];
        }
        const Eigen::MatrixXd logits = forward(arch, params, batch, /*train_mode=*/false, nullptr);
        for (int i = 0; i < n; ++i) {
            int best = 0;
            for (int c = 1; c < kNumClasses; ++c)
                if (logits(i, c) > logits(i, best)) best = c;
            cm.counts[test.labels[static_cast<std::size_t>(begin + i)]][best] += 1;
        }
    }
    return cm;
}

std::array<double, kNumClasses> f1_per_class(const ConfusionMatrix& cm) {
    std::array<double, kNumClasses> f1{};
    for (int c = 0; c < kNumClasses; ++c) {
        const std::int64_t tp = cm.counts[c][c];
        std::int64_t fp = 0;
        std::int64_t fn = 0;
        for (int other = 0; other < kNumClasses; ++other) {
            if (other == c) continue;
            fp += cm.counts[other][c];
            fn += cm.counts[c][other];
        }
        const std::int64_t denom = 2 * tp + fp + fn;
        f1[c] = denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
    }
    return f1;
}

std::string metrics_csv_header() {
    return "seed,round,node,paradigm,scheme,alpha,p,accuracy,"
           "f1_0,f1_1,f1_2,f1_3,f1_4,f1_5,f1_6,f1_7,f1_8,f1_9,"
           "holds_corrupt,has_clean_neighbor";
}

void write_csv_row(std::ostream& out, const RoundRow& row) {
    out << row.seed << "," << row.round << "," << row.node << "," << row.paradigm << ","
        << to_string(row.scheme) << "," << format_param(row.alpha) << "," << format_param(row.p)
        << "," << format_metric(row.accuracy);
    for (double f1 : row.f1) out << "," << format_metric(f1);
    out << "," << (row.holds_corrupt ? 1 : 0) << "," << (row.has_clean_neighbor ? 1 : 0) << "\n";
}

double student_t_975(int dof) {
    static constexpr double table[] = {12.7062, 4.3027, 3.1824, 2.7764, 2.5706, 2.4469,
                                       2.3646,  2.3060, 2.2622, 2.2281, 2.2010, 2.1788,
                                       2.1604,  2.1448, 2.1314, 2.1199, 2.1098, 2.1009,
                                       2.0930,  2.0860, 2.0796, 2.0739, 2.0687, 2.0639,
                                       2.0595,  2.0555, 2.0518, 2.0484, 2.0452, 2.0423};
    if (dof < 1) raise(ErrorKind::parameter, "t quantile needs dof >= 1");
    if (dof <= 30) return table[dof - 1];
    if (dof <= 40) return 2.0211;
    if (dof <= 60) return 2.0003;
    if (dof <= 120) return 1.9799;
    return 1.9600;
}

AggregatePoint aggregate_seeds(const std::vector<double>& per_seed_values) {
    if (per_seed_values.empty()) raise(ErrorKind::parameter, "aggregate_seeds: no values");
    AggregatePoint point;
    const auto k = static_cast<double>(per_seed_values.size());
    double sum = 0.0;
    for (double v : per_seed_values) sum += v;
    point.mean = sum / k;
    if (per_seed_values.size() < 2) return point; // mean only, CI absent

    double sq = 0.0;
    for (double v : per_seed_values) sq += (v - point.mean) * (v - point.mean);
    const double sample_std = std::sqrt(sq / (k - 1.0));
    point.ci_halfwidth =
        student_t_975(static_cast<int>(per_seed_values.size()) - 1) * sample_std / std::sqrt(k);
    point.ci_defined = true;
    return point;
}

std::vector<AggregatePoint> aggregate_seed_series(
    const std::vector<std::vector<double>>& per_seed_series) {
    if (per_seed_series.empty()) raise(ErrorKind::parameter, "aggregate_seed_series: no series");
    const std::size_t rounds = per_seed_series.front().size();
    for (const auto& series : per_seed_series)
        if (series.size() != rounds)
            raise(ErrorKind::parameter, "aggregate_seed_series: series lengths differ");
    std::vector<AggregatePoint> out(rounds);
    std::vector<double> column(per_seed_series.size());
    for (std::size_t r = 0; r < rounds; ++r) {
        for (std::size_t s = 0; s < per_seed_series.size(); ++s) column[s] = per_seed_series[s][r];
        out[r] = aggregate_seeds(column);
    }
    return out;
}

std::vector<bool> nodes_with_clean_neighbor(const Graph& g, const FederatedAssignment& assignment) {
    auto is_clean = [&assignment](int node) {
        if (node >= assignment.node_count()) return true; // dataless hub
        return !assignment.per_node[static_cast<std::size_t>(node)].holds_corrupt();
    };
    std::vector<bool> result(static_cast<std::size_t>(g.node_count), false);
    for (int i = 0; i < g.node_count; ++i)
        for (int j : g.adjacency[static_cast<std::size_t>(i)])
            if (is_clean(j)) {
                result[static_cast<std::size_t>(i)] = true;
                break;
            }
    return result;
}

CleanNeighborReport clean_neighbor_report(const std::vector<RoundRow>& rows, const Graph& g,
                                          const FederatedAssignment& assignment,
                                          int collateral_class) {
    CleanNeighborReport report;
    if (rows.empty()) {
        report.notice = "no records";
        return report;
    }
    if (rows.front().paradigm != "dfl") {
        report.notice = "clean-neighbor analysis applies to decentralized runs only";
        return report;
    }
    report.applicable = true;

    const auto flags = nodes_with_clean_neighbor(g, assignment);
    for (int node = 0; node < assignment.node_count(); ++node)
        if (flags[static_cast<std::size_t>(node)]) report.nodes_in_group.push_back(node);

    std::map<int, std::pair<double, int>> group_acc;   // round -> (sum, count)
    std::map<int, std::pair<double, int>> network_acc;
    for (const auto& row : rows) {
        const double f1 = row.f1.at(static_cast<std::size_t>(collateral_class));
        auto& net = network_acc[row.round];
        net.first += f1;
        net.second += 1;
        if (row.node < static_cast<int>(flags.size()) && flags[static_cast<std::size_t>(row.node)]) {
            auto& grp = group_acc[row.round];
            grp.first += f1;
            grp.second += 1;
        }
    }
    for (const auto& [round, acc] : network_acc)
        report.network_mean_f1.push_back(acc.first / acc.second);
    for (const auto& [round, acc] : group_acc)
        report.group_mean_f1.push_back(acc.first / acc.second);
    return report;
}

} // namespace dfl
