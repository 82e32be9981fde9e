/*
 * stylefuse C API.
 *
 * Opaque-handle interface over the stylefuse core: configuration, single
 * image generation, and the benchmark/ablation harness. All functions return
 * a status code; sf_last_error() holds a human-readable message for the most
 * recent failure on the calling thread.
 *
 * Handles are created and destroyed by this library; never free them with
 * free(). Returned strings and buffers stay valid until the owning handle is
 * destroyed.
 */

#ifndef STYLEFUSE_H
#define STYLEFUSE_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as CLI exit codes. */
#define SF_OK 0
#define SF_ERROR_RUNTIME 1
#define SF_ERROR_CONFIG 2
#define SF_ERROR_PARTIAL 3

typedef int sf_status;

typedef struct sf_config sf_config;
typedef struct sf_generation sf_generation;
typedef struct sf_report sf_report;

const char* sf_version(void);

/* Message for the last failing call on this thread; empty string if none. */
const char* sf_last_error(void);

/* ---- configuration ----------------------------------------------------- */

sf_config* sf_config_new(void);
void sf_config_free(sf_config* cfg);

/* Set one flat config key (same schema as the config file). Later writes
 * win, so load the file first and apply flag overrides afterwards. */
sf_status sf_config_set(sf_config* cfg, const char* key, const char* value);

/* Load a JSON config file, or a generation sidecar (its "config" object is
 * used, which replays the recorded run). */
sf_status sf_config_load_file(sf_config* cfg, const char* path);

/* Validate and return the resolved flat config as a JSON string. The string
 * is owned by the handle and invalidated by the next call on it. */
sf_status sf_config_resolve_json(sf_config* cfg, const char** out_json);

/* Validate and return newline-separated validation warnings ("" if none).
 * Same ownership rules as sf_config_resolve_json. */
sf_status sf_config_warnings(sf_config* cfg, const char** out_warnings);

/* ---- generation ---------------------------------------------------------- */

sf_status sf_generate(const sf_config* cfg, sf_generation** out);
void sf_generation_free(sf_generation* gen);

const unsigned char* sf_generation_png(const sf_generation* gen, size_t* size);
const char* sf_generation_sidecar_json(const sf_generation* gen);
const char* sf_generation_timing_json(const sf_generation* gen);

/* ---- benchmark / ablation ------------------------------------------------ */

/* Runs the grid at `grid_path` with the mock alignment embedder. `base` may
 * be NULL; its keys override the grid's config section. `ablation` != 0 runs
 * the four-row mechanism toggle table. Returns SF_ERROR_PARTIAL when some
 * cells failed; the report is still produced. */
sf_status sf_benchmark(const sf_config* base, const char* grid_path, int ablation, int jobs,
                       sf_report** out);
void sf_report_free(sf_report* report);

const char* sf_report_cells_jsonl(const sf_report* report);
const char* sf_report_summary_json(const sf_report* report);
const char* sf_report_csv(const sf_report* report);
const char* sf_report_timing_json(const sf_report* report);

/* JSON array describing the failed cells; "[]" when every cell succeeded. */
const char* sf_report_errors_json(const sf_report* report);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* STYLEFUSE_H */
