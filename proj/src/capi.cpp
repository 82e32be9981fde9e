#include "stylefuse/stylefuse.h"

#include <string>

#include "stylefuse/config.hpp"
#include "stylefuse/errors.hpp"
#include "stylefuse/evaluation.hpp"
#include "stylefuse/pipeline.hpp"

using namespace stylefuse;

struct sf_config {
    ConfigMap map;
    std::string resolved_json;
    std::string warnings_text;
};

struct sf_generation {
    std::vector<unsigned char> png;
    std::string sidecar;
    std::string timing;
};

struct sf_report {
    std::string cells_jsonl;
    std::string summary;
    std::string csv;
    std::string timing;
    std::string errors;
};

namespace {

thread_local std::string t_last_error;

sf_status set_error(const std::exception& e) {
    t_last_error = e.what();
    if (dynamic_cast<const ConfigError*>(&e) != nullptr) return SF_ERROR_CONFIG;
    return SF_ERROR_RUNTIME;
}

sf_status invalid_argument(const char* what) {
    t_last_error = what;
    return SF_ERROR_RUNTIME;
}

}  // namespace

extern "C" {

const char* sf_version(void) { return "0.1.0"; }

const char* sf_last_error(void) { return t_last_error.c_str(); }

sf_config* sf_config_new(void) { return new sf_config(); }

void sf_config_free(sf_config* cfg) { delete cfg; }

sf_status sf_config_set(sf_config* cfg, const char* key, const char* value) {
    if (cfg == nullptr || key == nullptr || value == nullptr) {
        return invalid_argument("sf_config_set: null argument");
    }
    try {
        cfg->map.set(key, value);
        return SF_OK;
    } catch (const std::exception& e) {
        return set_error(e);
    }
}

sf_status sf_config_load_file(sf_config* cfg, const char* path) {
    if (cfg == nullptr || path == nullptr) {
        return invalid_argument("sf_config_load_file: null argument");
    }
    try {
        cfg->map.load_file(path);
        return SF_OK;
    } catch (const std::exception& e) {
        return set_error(e);
    }
}

sf_status sf_config_resolve_json(sf_config* cfg, const char** out_json) {
    if (cfg == nullptr || out_json == nullptr) {
        return invalid_argument("sf_config_resolve_json: null argument");
    }
    try {
        cfg->resolved_json = cfg->map.resolve().to_json().dump(2);
        *out_json = cfg->resolved_json.c_str();
        return SF_OK;
    } catch (const std::exception& e) {
        return set_error(e);
    }
}

sf_status sf_config_warnings(sf_config* cfg, const char** out_warnings) {
    if (cfg == nullptr || out_warnings == nullptr) {
        return invalid_argument("sf_config_warnings: null argument");
    }
    try {
        GenerationConfig resolved = cfg->map.resolve();
        cfg->warnings_text.clear();
        for (const auto& w : resolved.warnings) {
            cfg->warnings_text += w;
            cfg->warnings_text.push_back('\n');
        }
        if (!cfg->warnings_text.empty()) cfg->warnings_text.pop_back();
        *out_warnings = cfg->warnings_text.c_str();
        return SF_OK;
    } catch (const std::exception& e) {
        return set_error(e);
    }
}

sf_status sf_generate(const sf_config* cfg, sf_generation** out) {
    if (cfg == nullptr || out == nullptr) {
        return invalid_argument("sf_generate: null argument");
    }
    *out = nullptr;
    try {
        GenerationConfig resolved = cfg->map.resolve();
        GenerationResult result = generate(resolved);
        auto* gen = new sf_generation();
        gen->png = std::move(result.png);
        gen->sidecar = result.sidecar.dump(2);
        gen->sidecar.push_back('\n');
        gen->timing = result.timing.dump(2);
        gen->timing.push_back('\n');
        *out = gen;
        return SF_OK;
    } catch (const std::exception& e) {
        return set_error(e);
    }
}

void sf_generation_free(sf_generation* gen) { delete gen; }

const unsigned char* sf_generation_png(const sf_generation* gen, size_t* size) {
    if (gen == nullptr) return nullptr;
    if (size != nullptr) *size = gen->png.size();
    return gen->png.data();
}

const char* sf_generation_sidecar_json(const sf_generation* gen) {
    return gen == nullptr ? nullptr : gen->sidecar.c_str();
}

const char* sf_generation_timing_json(const sf_generation* gen) {
    return gen == nullptr ? nullptr : gen->timing.c_str();
}

sf_status sf_benchmark(const sf_config* base, const char* grid_path, int ablation, int jobs,
                       sf_report** out) {
    if (grid_path == nullptr || out == nullptr) {
        return invalid_argument("sf_benchmark: null argument");
    }
    *out = nullptr;
    try {
        BenchmarkGrid grid = BenchmarkGrid::load_file(grid_path);
        if (base != nullptr) {
            // CLI flag overrides sit on top of the grid's config section.
            for (const auto& key : ConfigMap::known_keys()) {
                if (const std::string* v = base->map.get_raw(key)) {
                    grid.base.set(key, *v);
                }
            }
        }
        MockEmbedder embedder;
        ResultTable table = ablation != 0 ? run_ablation(grid, embedder, jobs)
                                          : run_benchmark(grid, embedder, jobs);
        auto* report = new sf_report();
        report->cells_jsonl = table.cells_jsonl();
        report->summary = table.summary_json().dump(2);
        report->summary.push_back('\n');
        report->csv = table.csv(ablation != 0);
        report->timing = table.timing_json().dump(2);
        report->timing.push_back('\n');
        nlohmann::ordered_json errors = nlohmann::ordered_json::array();
        for (const auto& row : table.rows) {
            for (const auto& cell : row.cells) {
                if (!cell.ok) {
                    errors.push_back({{"row", row.label},
                                      {"prompt_index", cell.prompt_index},
                                      {"style_index", cell.style_index},
                                      {"error", cell.error}});
                }
            }
        }
        report->errors = errors.dump(2);
        report->errors.push_back('\n');
        *out = report;
        return table.any_failures() ? SF_ERROR_PARTIAL : SF_OK;
    } catch (const std::exception& e) {
        return set_error(e);
    }
}

void sf_report_free(sf_report* report) { delete report; }

const char* sf_report_cells_jsonl(const sf_report* report) {
    return report == nullptr ? nullptr : report->cells_jsonl.c_str();
}

const char* sf_report_summary_json(const sf_report* report) {
    return report == nullptr ? nullptr : report->summary.c_str();
}

const char* sf_report_csv(const sf_report* report) {
    return report == nullptr ? nullptr : report->csv.c_str();
}

const char* sf_report_timing_json(const sf_report* report) {
    return report == nullptr ? nullptr : report->timing.c_str();
}

const char* sf_report_errors_json(const sf_report* report) {
    return report == nullptr ? nullptr : report->errors.c_str();
}

}  // extern "C"
