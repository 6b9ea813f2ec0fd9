// dflsim command-line front end. Links the C API only.

#include <CLI11.hpp>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "dflsim.h"

namespace {

struct ConfigHandle {
    dfl_config* ptr = nullptr;
    ~ConfigHandle() { dfl_config_free(ptr); }
};

int fail(dfl_status status) {
    std::fprintf(stderr, "error: %s\n", dfl_last_error());
    return static_cast<int>(status);
}

int load_with_overrides(const std::string& config_path, const std::vector<std::string>& overrides,
                        ConfigHandle& handle) {
    dfl_status status = dfl_config_load(config_path.c_str(), &handle.ptr);
    if (status != DFL_OK) return fail(status);
    for (const std::string& item : overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            std::fprintf(stderr, "error: override '%s' is not key=value\n", item.c_str());
            return static_cast<int>(DFL_ERR_VALIDATION);
        }
        status = dfl_config_set(handle.ptr, item.substr(0, eq).c_str(), item.substr(eq + 1).c_str());
        if (status != DFL_OK) return fail(status);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string("dflsim ") + dfl_version() +
                 " - decentralized federated averaging simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string input_dir;
    std::string out_dir;
    int train_count = 60000;
    int test_count = 10000;
    unsigned long long seed = 1;

    auto* run = app.add_subcommand("run", "run the configured experiment sweep");
    run->add_option("--config", config_path, "config file path")->required();
    run->add_option("--override", overrides, "override config entries (section.key=value)");

    auto* report = app.add_subcommand("report", "aggregate metrics CSVs into summary + charts");
    report->add_option("--input", input_dir, "directory holding cell CSV files")->required();
    report->add_option("--out", out_dir, "output directory")->required();

    auto* inspect = app.add_subcommand("inspect-corruption", "dump corrupted sample images");
    inspect->add_option("--config", config_path, "config file path")->required();
    inspect->add_option("--out", out_dir, "output directory")->required();
    inspect->add_option("--override", overrides, "override config entries (section.key=value)");

    auto* synth = app.add_subcommand("synth-data",
                                     "write a deterministic synthetic digit corpus in IDX layout");
    synth->add_option("--out", out_dir, "output directory")->required();
    synth->add_option("--train", train_count, "training sample count");
    synth->add_option("--test", test_count, "test sample count");
    synth->add_option("--seed", seed, "generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(DFL_ERR_VALIDATION);
    }

    if (run->parsed()) {
        ConfigHandle handle;
        if (const int code = load_with_overrides(config_path, overrides, handle); code != 0)
            return code;
        const dfl_status status = dfl_run(handle.ptr);
        return status == DFL_OK ? 0 : fail(status);
    }
    if (report->parsed()) {
        const dfl_status status = dfl_report(input_dir.c_str(), out_dir.c_str());
        return status == DFL_OK ? 0 : fail(status);
    }
    if (inspect->parsed()) {
        ConfigHandle handle;
        if (const int code = load_with_overrides(config_path, overrides, handle); code != 0)
            return code;
        const dfl_status status = dfl_inspect_corruption(handle.ptr, out_dir.c_str());
        return status == DFL_OK ? 0 : fail(status);
    }
    if (synth->parsed()) {
        const dfl_status status =
            dfl_make_synth_dataset(out_dir.c_str(), train_count, test_count, seed);
        return status == DFL_OK ? 0 : fail(status);
    }
    return 0;
}
