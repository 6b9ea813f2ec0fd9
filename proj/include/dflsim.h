/* dflsim public C API.
 *
 * A decentralized federated-averaging simulator with a controlled
 * data-corruption pipeline. Configs are opaque handles loaded from flat
 * key-value files and adjustable with dotted-key overrides; every entry
 * point returns a status code and leaves a human-readable message in
 * dfl_last_error() on failure.
 */
#ifndef DFLSIM_H
#define DFLSIM_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define DFL_API __declspec(dllexport)
#else
#define DFL_API __attribute__((visibility("default")))
#endif

typedef enum dfl_status {
    DFL_OK = 0,
    DFL_ERR_VALIDATION = 1, /* bad config, bad arguments, missing inputs */
    DFL_ERR_RUNTIME = 2     /* I/O or numeric failure during execution */
} dfl_status;

/* Opaque experiment configuration. */
typedef struct dfl_config dfl_config;

DFL_API const char* dfl_version(void);

/* Message for the most recent failure on this thread; empty string if none. */
DFL_API const char* dfl_last_error(void);

/* Parses a config file. Syntax problems (duplicate keys, malformed lines)
 * fail here with every issue listed; semantic validation happens when the
 * config is used. On success *out_config owns the handle. */
DFL_API dfl_status dfl_config_load(const char* path, dfl_config** out_config);

/* Sets "section.key" to value, overriding the file. */
DFL_API dfl_status dfl_config_set(dfl_config* config, const char* key, const char* value);

DFL_API void dfl_config_free(dfl_config* config);

/* Validates the config and runs the full experiment sweep: one metrics CSV
 * per (paradigm, scheme, alpha, p) cell, per-metric charts, clean-neighbor
 * series for decentralized cells, and a cross-seed summary CSV, all under
 * the configured output directory. */
DFL_API dfl_status dfl_run(dfl_config* config);

/* Aggregates cell CSVs from input_dir into summary.csv plus charts under
 * out_dir. */
DFL_API dfl_status dfl_report(const char* input_dir, const char* out_dir);

/* Dumps pristine/corrupted PGM image pairs for the configured corruption
 * cell, for visual inspection. */
DFL_API dfl_status dfl_inspect_corruption(dfl_config* config, const char* out_dir);

/* Writes a deterministic synthetic digit corpus in MNIST IDX layout
 * (train-images-idx3-ubyte etc.) under out_dir, for environments without
 * the real dataset files. */
DFL_API dfl_status dfl_make_synth_dataset(const char* out_dir, int train_count, int test_count,
                                          unsigned long long seed);

#ifdef __cplusplus
}
#endif

#endif /* DFLSIM_H */
