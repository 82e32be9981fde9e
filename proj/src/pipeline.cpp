#include "stylefuse/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <numeric>

#include "stylefuse/errors.hpp"
#include "stylefuse/teacher.hpp"

namespace stylefuse {

namespace {

std::string crc_hex(uint32_t crc) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%08x", crc);
    return buf;
}

}  // namespace

LatentState denoise_step(const Denoiser& model, const DdimScheduler& sched,
                         const LatentState& state, int t_prev, const ConditioningBundle& conds,
                         const GuidanceConfig& guidance, const FusionConfig& fusion,
                         const AttentionHooks* hooks) {
    Tensor eps = scfg_predict(model, state.z, state.timestep, conds, guidance, fusion, hooks);
    LatentState next;
    next.z = sched.step(state.z, state.timestep, t_prev, eps);
    next.timestep = t_prev;
    next.step_index = state.step_index + 1;
    return next;
}

ConditioningBundle prepare_conditioning(const GenerationConfig& cfg, const Backend& backend) {
    if (cfg.prompt.empty()) throw ConfigError("prompt", "required");
    ConditioningBundle bundle;
    bundle.text_pos = backend.encode_text(cfg.prompt);
    bundle.text_neg = backend.encode_text(cfg.negative_prompt);
    if (!cfg.style_image_path.empty()) {
        bundle.style_pos = backend.encode_style(read_file_bytes(cfg.style_image_path));
    }
    if (!cfg.negative_style_image_path.empty()) {
        bundle.style_neg = backend.encode_style(read_file_bytes(cfg.negative_style_image_path));
    }
    return bundle;
}

GenerationResult generate(const GenerationConfig& cfg, const Backend* backend, RunTrace* trace) {
    std::shared_ptr<Backend> owned;
    if (backend == nullptr) {
        owned = make_backend(cfg.backend);
        backend = owned.get();
    }

    ConditioningBundle bundle = prepare_conditioning(cfg, *backend);

    DdimScheduler sched(backend->train_timesteps());
    TimestepSchedule schedule = sched.make_schedule(cfg.steps);
    if (cfg.teacher_enabled && cfg.teacher_cutoff > cfg.steps) {
        throw ConfigError("teacher_cutoff", "exceeds steps");
    }

    const LatentShape ls = backend->latent_shape();
    Rng noise_rng(cfg.seed);
    Tensor init_noise = Tensor::gaussian({1, ls.channels, ls.height, ls.width}, noise_rng);

    GuidedRun run;
    run.teacher = &backend->denoiser();
    run.student = &backend->denoiser();
    run.teacher_cond = ConditioningBundle{bundle.text_pos, bundle.text_neg, {}, {}};
    run.student_cond = bundle;
    run.teacher_guidance = {GuidanceMode::text_cfg, cfg.guidance_w()};
    run.student_guidance = cfg.student_guidance();
    run.student_fusion = cfg.fusion();
    run.teacher_cfg = {cfg.teacher_enabled, cfg.teacher_enabled ? cfg.teacher_cutoff : 0};

    RunTrace local_trace;
    local_trace.record_latents = false;
    local_trace.record_maps = !cfg.dump_attn_dir.empty();
    RunTrace* effective = trace != nullptr ? trace : &local_trace;
    if (!cfg.dump_attn_dir.empty()) {
        effective->record_maps = true;
    }

    LatentState final_state = run_guided(run, init_noise, sched, schedule, effective);

    GenerationResult result;
    result.image = backend->decode_latent(final_state.z);
    result.png = encode_png(result.image);

    nlohmann::ordered_json sidecar;
    sidecar["tool"] = "stylefuse";
    sidecar["version"] = "0.1.0";
    sidecar["config"] = cfg.to_json();
    sidecar["warnings"] = cfg.warnings;
    sidecar["schedule"] = {
        {"train_timesteps", backend->train_timesteps()},
        {"timesteps", schedule.timesteps},
    };
    sidecar["output"] = {
        {"backend", backend->name()},
        {"width", result.image.width},
        {"height", result.image.height},
        {"vae_scale", backend->vae_scale()},
        {"png_crc32", crc_hex(crc32_of(result.png))},
    };
    result.sidecar = std::move(sidecar);

    double total = std::accumulate(effective->step_seconds.begin(), effective->step_seconds.end(), 0.0);
    result.timing = nlohmann::ordered_json{
        {"total_seconds", total},
        {"step_seconds", effective->step_seconds},
    };

    if (!cfg.dump_attn_dir.empty()) {
        write_attention_dump(cfg.dump_attn_dir, *effective);
    }
    return result;
}

void write_attention_dump(const std::string& dir, const RunTrace& trace) {
    std::filesystem::create_directories(dir);
    nlohmann::ordered_json entries = nlohmann::ordered_json::array();

    auto dump_side = [&](const std::vector<StepMaps>& steps, const char* role) {
        for (const auto& step : steps) {
            for (const auto& [layer_id, weights] : step.self_maps) {
                char name[64];
                std::snprintf(name, sizeof(name), "step%03d_%s_layer%d.f32", step.step_index, role,
                              layer_id);
                std::vector<float> f32(static_cast<size_t>(weights.numel()));
                for (int64_t i = 0; i < weights.numel(); ++i) {
                    f32[static_cast<size_t>(i)] = static_cast<float>(weights[i]);
                }
                write_file_bytes((std::filesystem::path(dir) / name).string(), f32.data(),
                                 f32.size() * sizeof(float));
                nlohmann::ordered_json entry;
                entry["file"] = name;
                entry["role"] = role;
                entry["step"] = step.step_index;
                entry["timestep"] = step.timestep;
                entry["layer"] = layer_id;
                entry["shape"] = weights.shape();
                entry["dtype"] = "float32";
                entry["byte_order"] = "little";
                entries.push_back(std::move(entry));
            }
        }
    };
    dump_side(trace.teacher_self_maps, "teacher");
    dump_side(trace.student_self_maps, "student");

    nlohmann::ordered_json manifest;
    manifest["entries"] = std::move(entries);
    std::string text = manifest.dump(2);
    text.push_back('\n');
    write_file_bytes((std::filesystem::path(dir) / "manifest.json").string(), text.data(),
                     text.size());
}

}  // namespace stylefuse
