#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "core/corruption.hpp"
#include "core/localtrain.hpp"

namespace dfl {

enum class Paradigm { dfl, fl, centralized };

std::string to_string(Paradigm paradigm);

// One replicate varies both the seed governing graph generation and the
// seed controlling every other source of randomness.
struct SeedPair {
    std::uint64_t graph_seed = 1;
    std::uint64_t run_seed = 1;
};

struct ExperimentConfig {
    Paradigm paradigm = Paradigm::dfl;
    Scheme scheme = Scheme::none;
    int n_nodes = 50;
    std::vector<double> alphas = {0.95};
    std::vector<double> ps = {0.0};
    std::vector<SeedPair> seeds = {{1, 1}};
    int rounds = 1000;
    int target_class = 9;
    int collateral_class = 4;
    CorruptionMode corruption_mode = CorruptionMode::pixel_interpolation;
    double subset_fraction = 1.0;
    std::string centrality = "degree";
    int threads = 0;
    int checkpoint_every = 0;
    std::string train_images, train_labels, test_images, test_labels;
    TrainConfig train;
    std::string arch_name = "cnn_default";
    std::string out_dir = "out";
};

// Flat key-value text with [section] headers; full-line comments start with
// '#'. Keys are addressed as "section.key" (the same form CLI overrides
// use). Load keeps raw entries so overrides can be applied before the
// semantic pass; finalize validates everything at once and reports every
// problem, not just the first.
class ConfigDoc {
public:
    static ConfigDoc from_file(const std::string& path);
    static ConfigDoc from_text(const std::string& text);

    // Override or add one entry ("experiment.p=0.9" form handled by caller
    // splitting at '=').
    void set(const std::string& key, const std::string& value);

    // Validates and produces the config; on any problem raises a validation
    // Error whose message lists every issue on its own line.
    ExperimentConfig finalize() const;

private:
    struct Entry {
        std::string value;
        int line = 0; // 0 for programmatic overrides
    };
    std::map<std::string, Entry> entries_;
};

ExperimentConfig parse_config(const std::string& path);

} // namespace dfl
