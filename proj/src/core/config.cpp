#include "core/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "core/error.hpp"
#include "core/nn.hpp"

namespace dfl {

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "experiment.paradigm",       "experiment.scheme",
        "experiment.nodes",          "experiment.alpha",
        "experiment.p",              "experiment.seeds",
        "experiment.rounds",         "experiment.target_class",
        "experiment.collateral_class", "experiment.corruption_mode",
        "experiment.subset_fraction", "experiment.centrality",
        "experiment.threads",        "experiment.checkpoint_every",
        "data.train_images",         "data.train_labels",
        "data.test_images",          "data.test_labels",
        "train.max_local_epochs",    "train.batch_size",
        "train.lr",                  "train.momentum",
        "train.early_stop_patience", "train.val_fraction",
        "model.arch",                "output.dir",
    };
    return keys;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> items;
    std::stringstream stream(value);
    std::string item;
    while (std::getline(stream, item, ',')) {
        item = trim(item);
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

// Collects every problem before failing, so a config with three bad keys
// reports all three.
class Issues {
public:
    void add(const std::string& key, const std::string& message) {
        lines_.push_back(key.empty() ? message : key + ": " + message);
    }
    void raise_if_any() const {
        if (lines_.empty()) return;
        std::string joined = "config validation failed:";
        for (const auto& line : lines_) joined += "\n  " + line;
        raise(ErrorKind::validation, joined);
    }

private:
    std::vector<std::string> lines_;
};

} // namespace

std::string to_string(Paradigm paradigm) {
    switch (paradigm) {
        case Paradigm::dfl: return "dfl";
        case Paradigm::fl: return "fl";
        case Paradigm::centralized: return "centralized";
    }
    return "dfl";
}

ConfigDoc ConfigDoc::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::validation, "cannot open config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_text(buffer.str());
}

ConfigDoc ConfigDoc::from_text(const std::string& text) {
    ConfigDoc doc;
    Issues issues;
    std::istringstream stream(text);
    std::string raw_line;
    std::string section;
    int line_no = 0;
    while (std::getline(stream, raw_line)) {
        line_no += 1;
        const std::string line = trim(raw_line);
        if (line.empty() || line.front() == '#' || line.front() == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                issues.add("", "line " + std::to_string(line_no) + ": malformed section header");
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            issues.add("", "line " + std::to_string(line_no) + ": expected key = value");
            continue;
        }
        const std::string key_part = trim(line.substr(0, eq));
        if (key_part.empty()) {
            issues.add("", "line " + std::to_string(line_no) + ": empty key");
            continue;
        }
        const std::string key = section.empty() ? key_part : section + "." + key_part;
        const auto existing = doc.entries_.find(key);
        if (existing != doc.entries_.end()) {
            issues.add("", "line " + std::to_string(line_no) + ": duplicate key '" + key +
                               "' (first set on line " + std::to_string(existing->second.line) + ")");
            continue;
        }
        doc.entries_[key] = Entry{trim(line.substr(eq + 1)), line_no};
    }
    issues.raise_if_any();
    return doc;
}

void ConfigDoc::set(const std::string& key, const std::string& value) {
    entries_[trim(key)] = Entry{trim(value), 0};
}

ExperimentConfig ConfigDoc::finalize() const {
    ExperimentConfig cfg;
    Issues issues;

    for (const auto& [key, entry] : entries_)
        if (known_keys().count(key) == 0)
            issues.add(key, entry.line > 0 ? "unknown key (line " + std::to_string(entry.line) + ")"
                                           : "unknown key");

    auto get = [this](const std::string& key) -> const std::string* {
        const auto it = entries_.find(key);
        return it == entries_.end() ? nullptr : &it->second.value;
    };
    auto parse_int = [&issues, &get](const std::string& key, int& out) {
        if (const std::string* v = get(key)) {
            try {
                std::size_t used = 0;
                const int parsed = std::stoi(*v, &used);
                if (used != v->size()) throw std::invalid_argument("trailing characters");
                out = parsed;
            } catch (const std::exception&) {
                issues.add(key, "not an integer: '" + *v + "'");
            }
        }
    };
    auto parse_double = [&issues, &get](const std::string& key, double& out) {
        if (const std::string* v = get(key)) {
            try {
                std::size_t used = 0;
                const double parsed = std::stod(*v, &used);
                if (used != v->size()) throw std::invalid_argument("trailing characters");
                out = parsed;
            } catch (const std::exception&) {
                issues.add(key, "not a number: '" + *v + "'");
            }
        }
    };
    auto parse_string = [&get](const std::string& key, std::string& out) {
        if (const std::string* v = get(key)) out = *v;
    };

    if (const std::string* v = get("experiment.paradigm")) {
        if (*v == "dfl") cfg.paradigm = Paradigm::dfl;
        else if (*v == "fl") cfg.paradigm = Paradigm::fl;
        else if (*v == "centralized") cfg.paradigm = Paradigm::centralized;
        else issues.add("experiment.paradigm", "must be dfl, fl or centralized; got '" + *v + "'");
    }
    if (const std::string* v = get("experiment.scheme")) {
        if (*v == "balanced") cfg.scheme = Scheme::balanced;
        else if (*v == "unbalanced") cfg.scheme = Scheme::unbalanced;
        else if (*v == "none") cfg.scheme = Scheme::none;
        else issues.add("experiment.scheme", "must be balanced, unbalanced or none; got '" + *v + "'");
    }
    if (const std::string* v = get("experiment.corruption_mode")) {
        if (*v == "pixel_interpolation") cfg.corruption_mode = CorruptionMode::pixel_interpolation;
        else if (*v == "label_flip") cfg.corruption_mode = CorruptionMode::label_flip;
        else issues.add("experiment.corruption_mode", "must be pixel_interpolation or label_flip");
    }

    parse_int("experiment.nodes", cfg.n_nodes);
    parse_int("experiment.rounds", cfg.rounds);
    parse_int("experiment.target_class", cfg.target_class);
    parse_int("experiment.collateral_class", cfg.collateral_class);
    parse_int("experiment.threads", cfg.threads);
    parse_int("experiment.checkpoint_every", cfg.checkpoint_every);
    parse_double("experiment.subset_fraction", cfg.subset_fraction);
    parse_string("experiment.centrality", cfg.centrality);
    parse_string("data.train_images", cfg.train_images);
    parse_string("data.train_labels", cfg.train_labels);
    parse_string("data.test_images", cfg.test_images);
    parse_string("data.test_labels", cfg.test_labels);
    parse_int("train.max_local_epochs", cfg.train.max_local_epochs);
    parse_int("train.batch_size", cfg.train.batch_size);
    parse_double("train.lr", cfg.train.lr);
    parse_double("train.momentum", cfg.train.momentum);
    parse_int("train.early_stop_patience", cfg.train.early_stop_patience);
    parse_double("train.val_fraction", cfg.train.val_fraction);
    parse_string("model.arch", cfg.arch_name);
    parse_string("output.dir", cfg.out_dir);

    if (const std::string* v = get("experiment.alpha")) {
        cfg.alphas.clear();
        for (const auto& item : split_list(*v)) {
            try {
                cfg.alphas.push_back(std::stod(item));
            } catch (const std::exception&) {
                issues.add("experiment.alpha", "not a number: '" + item + "'");
            }
        }
        if (cfg.alphas.empty()) issues.add("experiment.alpha", "empty list");
    }
    if (const std::string* v = get("experiment.p")) {
        cfg.ps.clear();
        for (const auto& item : split_list(*v)) {
            try {
                cfg.ps.push_back(std::stod(item));
            } catch (const std::exception&) {
                issues.add("experiment.p", "not a number: '" + item + "'");
            }
        }
        if (cfg.ps.empty()) issues.add("experiment.p", "empty list");
    }
    if (const std::string* v = get("experiment.seeds")) {
        cfg.seeds.clear();
        for (const auto& item : split_list(*v)) {
            SeedPair pair;
            const auto colon = item.find(':');
            try {
                if (colon == std::string::npos) {
                    pair.graph_seed = pair.run_seed = std::stoull(item);
                } else {
                    pair.graph_seed = std::stoull(item.substr(0, colon));
                    pair.run_seed = std::stoull(item.substr(colon + 1));
                }
                cfg.seeds.push_back(pair);
            } catch (const std::exception&) {
                issues.add("experiment.seeds", "expected seed or graph:run pair, got '" + item + "'");
            }
        }
        if (cfg.seeds.empty()) issues.add("experiment.seeds", "empty list");
    }

    // Range checks, reported together with everything above.
    if (cfg.n_nodes < 2) issues.add("experiment.nodes", "need at least 2 nodes");
    if (cfg.rounds < 0) issues.add("experiment.rounds", "must be >= 0");
    for (double a : cfg.alphas)
        if (a < 0.0 || a > 1.0) issues.add("experiment.alpha", "alpha out of range [0,1]");
    for (double p : cfg.ps)
        if (p < 0.0 || p > 1.0) issues.add("experiment.p", "p out of range [0,1]");
    if (cfg.scheme == Scheme::none)
        for (double p : cfg.ps)
            if (p != 0.0) issues.add("experiment.p", "p must be 0 when scheme is none");
    if (cfg.target_class < 0 || cfg.target_class >= kNumClasses)
        issues.add("experiment.target_class", "class id out of range 0..9");
    if (cfg.collateral_class < 0 || cfg.collateral_class >= kNumClasses)
        issues.add("experiment.collateral_class", "class id out of range 0..9");
    if (cfg.target_class == cfg.collateral_class)
        issues.add("experiment.collateral_class", "must differ from target_class");
    if (cfg.subset_fraction <= 0.0 || cfg.subset_fraction > 1.0)
        issues.add("experiment.subset_fraction", "must be in (0,1]");
    if (cfg.centrality != "degree")
        issues.add("experiment.centrality", "only 'degree' is supported");
    if (cfg.threads < 0) issues.add("experiment.threads", "must be >= 0");
    if (cfg.checkpoint_every < 0) issues.add("experiment.checkpoint_every", "must be >= 0");
    if (cfg.train.max_local_epochs < 0) issues.add("train.max_local_epochs", "must be >= 0");
    if (cfg.train.batch_size <= 0) issues.add("train.batch_size", "must be positive");
    if (cfg.train.lr <= 0.0) issues.add("train.lr", "must be positive");
    if (cfg.train.momentum < 0.0 || cfg.train.momentum >= 1.0)
        issues.add("train.momentum", "must be in [0,1)");
    if (cfg.train.early_stop_patience < 1) issues.add("train.early_stop_patience", "must be >= 1");
    if (cfg.train.val_fraction <= 0.0 || cfg.train.val_fraction >= 1.0)
        issues.add("train.val_fraction", "must be in (0,1)");
    if (cfg.arch_name != "cnn_default" && cfg.arch_name != "mlp_small")
        issues.add("model.arch", "must be cnn_default or mlp_small");
    if (cfg.train_images.empty()) issues.add("data.train_images", "required");
    if (cfg.train_labels.empty()) issues.add("data.train_labels", "required");
    if (cfg.test_images.empty()) issues.add("data.test_images", "required");
    if (cfg.test_labels.empty()) issues.add("data.test_labels", "required");
    if (cfg.out_dir.empty()) issues.add("output.dir", "required");

    issues.raise_if_any();
    return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
    return ConfigDoc::from_file(path).finalize();
}

} // namespace dfl
