#include "dflsim.h"

#include <string>

#include "core/config.hpp"
#include "core/error.hpp"
#include "core/experiment.hpp"
#include "core/synthdata.hpp"

struct dfl_config {
    dfl::ConfigDoc doc;
};

namespace {

thread_local std::string g_last_error;

dfl_status status_for(const dfl::Error& e) {
    switch (e.kind()) {
        case dfl::ErrorKind::parameter:
        case dfl::ErrorKind::validation:
        case dfl::ErrorKind::format:
        case dfl::ErrorKind::consistency:
            return DFL_ERR_VALIDATION;
        case dfl::ErrorKind::io:
        case dfl::ErrorKind::numeric:
        case dfl::ErrorKind::aggregation:
            return DFL_ERR_RUNTIME;
    }
    return DFL_ERR_RUNTIME;
}

template <typename Fn>
dfl_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return DFL_OK;
    } catch (const dfl::Error& e) {
        g_last_error = e.what();
        return status_for(e);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return DFL_ERR_RUNTIME;
    }
}

} // namespace

extern "C" {

const char* dfl_version(void) { return "1.0.0"; }

const char* dfl_last_error(void) { return g_last_error.c_str(); }

dfl_status dfl_config_load(const char* path, dfl_config** out_config) {
    if (path == nullptr || out_config == nullptr) {
        g_last_error = "null argument";
        return DFL_ERR_VALIDATION;
    }
    *out_config = nullptr;
    return guarded([&] { *out_config = new dfl_config{dfl::ConfigDoc::from_file(path)}; });
}

dfl_status dfl_config_set(dfl_config* config, const char* key, const char* value) {
    if (config == nullptr || key == nullptr || value == nullptr) {
        g_last_error = "null argument";
        return DFL_ERR_VALIDATION;
    }
    return guarded([&] { config->doc.set(key, value); });
}

void dfl_config_free(dfl_config* config) { delete config; }

dfl_status dfl_run(dfl_config* config) {
    if (config == nullptr) {
        g_last_error = "null config";
        return DFL_ERR_VALIDATION;
    }
    return guarded([&] { dfl::run_experiment(config->doc.finalize()); });
}

dfl_status dfl_report(const char* input_dir, const char* out_dir) {
    if (input_dir == nullptr || out_dir == nullptr) {
        g_last_error = "null argument";
        return DFL_ERR_VALIDATION;
    }
    return guarded([&] { dfl::write_report(input_dir, out_dir); });
}

dfl_status dfl_inspect_corruption(dfl_config* config, const char* out_dir) {
    if (config == nullptr || out_dir == nullptr) {
        g_last_error = "null argument";
        return DFL_ERR_VALIDATION;
    }
    return guarded([&] { dfl::inspect_corruption(config->doc.finalize(), out_dir); });
}

dfl_status dfl_make_synth_dataset(const char* out_dir, int train_count, int test_count,
                                  unsigned long long seed) {
    if (out_dir == nullptr) {
        g_last_error = "null argument";
        return DFL_ERR_VALIDATION;
    }
    return guarded([&] { dfl::write_synth_corpus(out_dir, train_count, test_count, seed); });
}

} // extern "C"
