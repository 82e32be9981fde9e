// stylefuse command line: generate / benchmark / ablate / dump-attn.
// Talks to the core exclusively through the C API.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "stylefuse/stylefuse.h"

namespace {

struct ConfigHandle {
    sf_config* ptr = nullptr;
    ConfigHandle() : ptr(sf_config_new()) {}
    ~ConfigHandle() { sf_config_free(ptr); }
    ConfigHandle(const ConfigHandle&) = delete;
    ConfigHandle& operator=(const ConfigHandle&) = delete;
};

int fail(sf_status rc) {
    std::cerr << (rc == SF_ERROR_CONFIG ? "config error: " : "error: ") << sf_last_error()
              << "\n";
    return rc;
}

bool write_text(const std::string& path, const std::string& text) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    return static_cast<bool>(out);
}

bool write_bytes(const std::string& path, const unsigned char* data, size_t size) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(size));
    return static_cast<bool>(out);
}

// Shared generation/config flags. Values apply on top of --config, so flag >
// file > default precedence falls out of the write order.
struct GenFlags {
    std::string config_path;
    std::string prompt, negative_prompt, style_image, negative_style_image;
    std::string fusion_mode, scfg_mode, teacher, backend, dump_attn;
    long long seed = 0;
    int steps = 0, teacher_cutoff = 0;
    double guidance_scale = 0.0, lambda = 0.0, scfg_weight = 0.0;

    CLI::Option *o_prompt = nullptr, *o_negative_prompt = nullptr, *o_style = nullptr,
                *o_negative_style = nullptr, *o_seed = nullptr, *o_steps = nullptr,
                *o_guidance = nullptr, *o_fusion = nullptr, *o_lambda = nullptr,
                *o_teacher = nullptr, *o_cutoff = nullptr, *o_scfg_mode = nullptr,
                *o_scfg_weight = nullptr, *o_backend = nullptr, *o_config = nullptr,
                *o_dump = nullptr;

    void attach(CLI::App* cmd) {
        o_config = cmd->add_option("--config", config_path,
                                   "JSON config file (a generate sidecar also works)");
        o_prompt = cmd->add_option("--prompt", prompt, "Text prompt");
        o_negative_prompt =
            cmd->add_option("--negative-prompt", negative_prompt, "Negative text prompt");
        o_style = cmd->add_option("--style-image", style_image, "Style reference image path");
        o_negative_style = cmd->add_option("--negative-style-image", negative_style_image,
                                           "Negative style image path (style_cfg mode)");
        o_seed = cmd->add_option("--seed", seed, "Random seed");
        o_steps = cmd->add_option("--steps", steps, "Denoising steps");
        o_guidance = cmd->add_option("--guidance-scale", guidance_scale,
                                     "Guidance scale s (combination weight w = s - 1)");
        o_fusion = cmd->add_option("--fusion-mode", fusion_mode,
                                   "weighted_sum | cross_modal_adain");
        o_lambda = cmd->add_option("--lambda", lambda, "Style weight for weighted_sum fusion");
        o_teacher = cmd->add_option("--teacher", teacher, "on | off");
        o_cutoff = cmd->add_option("--teacher-cutoff", teacher_cutoff,
                                   "Steps with teacher attention replacement");
        o_scfg_mode = cmd->add_option("--scfg-mode", scfg_mode, "text_cfg | style_cfg");
        o_scfg_weight = cmd->add_option("--scfg-weight", scfg_weight,
                                        "Combination weight w for style_cfg mode");
        o_backend = cmd->add_option("--backend", backend, "Backend name (default toy)");
        o_dump = cmd->add_option("--dump-attn", dump_attn,
                                 "Directory for per-step self-attention map dumps");
    }

    sf_status apply(sf_config* cfg) const {
        if (*o_config) {
            sf_status rc = sf_config_load_file(cfg, config_path.c_str());
            if (rc != SF_OK) return rc;
        }
        auto set = [&](CLI::Option* opt, const char* key, const std::string& value) -> sf_status {
            if (opt != nullptr && *opt) return sf_config_set(cfg, key, value.c_str());
            return SF_OK;
        };
        sf_status rc = SF_OK;
        if ((rc = set(o_prompt, "prompt", prompt)) != SF_OK) return rc;
        if ((rc = set(o_negative_prompt, "negative_prompt", negative_prompt)) != SF_OK) return rc;
        if ((rc = set(o_style, "style_image_path", style_image)) != SF_OK) return rc;
        if ((rc = set(o_negative_style, "negative_style_image_path", negative_style_image)) !=
            SF_OK)
            return rc;
        if ((rc = set(o_seed, "seed", std::to_string(seed))) != SF_OK) return rc;
        if ((rc = set(o_steps, "steps", std::to_string(steps))) != SF_OK) return rc;
        if ((rc = set(o_guidance, "guidance_scale", format_number(guidance_scale))) != SF_OK)
            return rc;
        if ((rc = set(o_fusion, "fusion_mode", fusion_mode)) != SF_OK) return rc;
        if ((rc = set(o_lambda, "lambda", format_number(lambda))) != SF_OK) return rc;
        if ((rc = set(o_teacher, "teacher_enabled", teacher)) != SF_OK) return rc;
        if ((rc = set(o_cutoff, "teacher_cutoff", std::to_string(teacher_cutoff))) != SF_OK)
            return rc;
        if ((rc = set(o_scfg_mode, "scfg_mode", scfg_mode)) != SF_OK) return rc;
        if ((rc = set(o_scfg_weight, "scfg_weight", format_number(scfg_weight))) != SF_OK)
            return rc;
        if ((rc = set(o_backend, "backend", backend)) != SF_OK) return rc;
        if ((rc = set(o_dump, "dump_attn_dir", dump_attn)) != SF_OK) return rc;
        return SF_OK;
    }

    static std::string format_number(double v) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return buf;
    }
};

int print_warnings(sf_config* cfg, bool verbose) {
    const char* warnings = nullptr;
    sf_status rc = sf_config_warnings(cfg, &warnings);
    if (rc != SF_OK) return fail(rc);
    if (warnings != nullptr && warnings[0] != '\0') {
        std::string text(warnings);
        size_t start = 0;
        while (start < text.size()) {
            size_t end = text.find('\n', start);
            if (end == std::string::npos) end = text.size();
            std::cerr << "warning: " << text.substr(start, end - start) << "\n";
            start = end + 1;
        }
    }
    if (verbose) {
        const char* resolved = nullptr;
        if (sf_config_resolve_json(cfg, &resolved) == SF_OK) {
            std::cerr << resolved << "\n";
        }
    }
    return SF_OK;
}

std::string sidecar_path(const std::string& out_path) {
    std::filesystem::path p(out_path);
    p.replace_extension(".json");
    return p.string();
}

std::string timing_path(const std::string& out_path) {
    std::filesystem::path p(out_path);
    p.replace_extension(".timing.json");
    return p.string();
}

int run_generate(const GenFlags& flags, const std::string& out_path, bool write_image,
                 bool verbose) {
    ConfigHandle cfg;
    sf_status rc = flags.apply(cfg.ptr);
    if (rc != SF_OK) return fail(rc);
    if ((rc = static_cast<sf_status>(print_warnings(cfg.ptr, verbose))) != SF_OK) return rc;

    sf_generation* gen = nullptr;
    rc = sf_generate(cfg.ptr, &gen);
    if (rc != SF_OK) return fail(rc);

    int status = 0;
    if (write_image) {
        size_t png_size = 0;
        const unsigned char* png = sf_generation_png(gen, &png_size);
        if (!write_bytes(out_path, png, png_size) ||
            !write_text(sidecar_path(out_path), sf_generation_sidecar_json(gen)) ||
            !write_text(timing_path(out_path), sf_generation_timing_json(gen))) {
            std::cerr << "error: cannot write outputs under " << out_path << "\n";
            status = SF_ERROR_RUNTIME;
        } else {
            std::cout << "wrote " << out_path << " and " << sidecar_path(out_path) << "\n";
        }
    }
    sf_generation_free(gen);
    return status;
}

int run_benchmark_cmd(const GenFlags& flags, const std::string& grid_path,
                      const std::string& out_dir, bool ablation, bool csv, int jobs,
                      bool verbose) {
    ConfigHandle base;
    sf_status rc = flags.apply(base.ptr);
    if (rc != SF_OK) return fail(rc);
    if (verbose) std::cerr << "grid: " << grid_path << "\n";

    sf_report* report = nullptr;
    rc = sf_benchmark(base.ptr, grid_path.c_str(), ablation ? 1 : 0, jobs, &report);
    if (rc != SF_OK && rc != SF_ERROR_PARTIAL) return fail(rc);

    std::filesystem::path dir(out_dir);
    bool ok = write_text((dir / "cells.jsonl").string(), sf_report_cells_jsonl(report)) &&
              write_text((dir / "summary.json").string(), sf_report_summary_json(report)) &&
              write_text((dir / "timing.json").string(), sf_report_timing_json(report));
    if (ok && csv) {
        ok = write_text((dir / "summary.csv").string(), sf_report_csv(report));
    }
    if (ok && rc == SF_ERROR_PARTIAL) {
        ok = write_text((dir / "errors.json").string(), sf_report_errors_json(report));
        std::cerr << "warning: some cells failed; see " << (dir / "errors.json").string() << "\n";
    }
    sf_report_free(report);
    if (!ok) {
        std::cerr << "error: cannot write reports under " << out_dir << "\n";
        return SF_ERROR_RUNTIME;
    }
    std::cout << "wrote " << (dir / "summary.json").string() << "\n";
    return rc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stylefuse: training-free style transfer toolkit"};
    app.require_subcommand(1);
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "Print resolved configuration to stderr");

    // generate
    auto* gen_cmd = app.add_subcommand("generate", "Generate one image");
    GenFlags gen_flags;
    gen_flags.attach(gen_cmd);
    std::string gen_out = "out.png";
    gen_cmd->add_option("--out", gen_out, "Output PNG path (sidecar written alongside)");

    // dump-attn: a generation whose purpose is the attention dump
    auto* dump_cmd = app.add_subcommand("dump-attn", "Run a generation and dump attention maps");
    GenFlags dump_flags;
    dump_flags.attach(dump_cmd);
    std::string dump_out;
    dump_cmd->add_option("--out", dump_out, "Optional output PNG path");
    dump_flags.o_dump->required();

    // benchmark / ablate
    auto* bench_cmd = app.add_subcommand("benchmark", "Score a prompt x style grid");
    GenFlags bench_flags;
    bench_flags.attach(bench_cmd);
    std::string bench_grid, bench_out_dir = "bench_out";
    bool bench_csv = false;
    int bench_jobs = 1;
    bench_cmd->add_option("--grid", bench_grid, "Grid spec JSON file")->required();
    bench_cmd->add_option("--out-dir", bench_out_dir, "Report directory");
    bench_cmd->add_flag("--csv", bench_csv, "Also write summary.csv");
    bench_cmd->add_option("--jobs", bench_jobs, "Parallel cells (stateless backends only)");

    auto* ablate_cmd = app.add_subcommand("ablate", "Run the four-row mechanism toggle table");
    GenFlags ablate_flags;
    ablate_flags.attach(ablate_cmd);
    std::string ablate_grid, ablate_out_dir = "ablate_out";
    bool ablate_csv = false;
    int ablate_jobs = 1;
    ablate_cmd->add_option("--grid", ablate_grid, "Grid spec JSON file")->required();
    ablate_cmd->add_option("--out-dir", ablate_out_dir, "Report directory");
    ablate_cmd->add_flag("--csv", ablate_csv, "Also write summary.csv");
    ablate_cmd->add_option("--jobs", ablate_jobs, "Parallel cells (stateless backends only)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        // CLI11 returns 0 for --help; map parse failures to config errors.
        return rc == 0 ? 0 : SF_ERROR_CONFIG;
    }

    if (gen_cmd->parsed()) {
        return run_generate(gen_flags, gen_out, true, verbose);
    }
    if (dump_cmd->parsed()) {
        bool write_image = !dump_out.empty();
        return run_generate(dump_flags, write_image ? dump_out : std::string("out.png"),
                            write_image, verbose);
    }
    if (bench_cmd->parsed()) {
        return run_benchmark_cmd(bench_flags, bench_grid, bench_out_dir, false, bench_csv,
                                 bench_jobs, verbose);
    }
    if (ablate_cmd->parsed()) {
        return run_benchmark_cmd(ablate_flags, ablate_grid, ablate_out_dir, true, ablate_csv,
                                 ablate_jobs, verbose);
    }
    return SF_ERROR_CONFIG;
}
