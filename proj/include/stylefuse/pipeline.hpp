#ifndef STYLEFUSE_PIPELINE_HPP
#define STYLEFUSE_PIPELINE_HPP

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stylefuse/backend.hpp"
#include "stylefuse/config.hpp"
#include "stylefuse/guidance.hpp"
#include "stylefuse/scheduler.hpp"

namespace stylefuse {

struct LatentState {
    Tensor z;
    int timestep = 0;    // current diffusion timestep
    int step_index = 0;  // position in the schedule
};

// Effective self-attention maps of one step (after any injection).
struct StepMaps {
    int step_index = 0;
    int timestep = 0;
    std::map<int, Tensor> self_maps;
};

// Optional run instrumentation. Latents are appended after every student
// step; map records hold the maps each side actually used.
struct RunTrace {
    bool record_latents = true;
    bool record_maps = true;

    std::vector<Tensor> student_latents;
    std::vector<StepMaps> student_self_maps;
    std::vector<StepMaps> teacher_self_maps;  // only steps where the teacher ran
    std::vector<double> step_seconds;
};

// One reverse-diffusion update with the guided noise prediction.
LatentState denoise_step(const Denoiser& model, const DdimScheduler& sched,
                         const LatentState& state, int t_prev, const ConditioningBundle& conds,
                         const GuidanceConfig& guidance, const FusionConfig& fusion,
                         const AttentionHooks* hooks);

// Encodes prompt, negative prompt (empty-string default), and the style
// images named by the config. Unreadable files raise IoError.
ConditioningBundle prepare_conditioning(const GenerationConfig& cfg, const Backend& backend);

struct GenerationResult {
    Image image;
    std::vector<unsigned char> png;
    nlohmann::ordered_json sidecar;  // resolved config + schedule + output facts
    nlohmann::ordered_json timing;   // wall-clock per step; quarantined from the sidecar
};

// Full deterministic generation: conditioning, noise from the seed, guided
// denoising loop (teacher lockstep when enabled), VAE decode, PNG encode.
// `backend` may be null (resolved from cfg.backend); `trace` may be null.
GenerationResult generate(const GenerationConfig& cfg, const Backend* backend = nullptr,
                          RunTrace* trace = nullptr);

// --dump-attn output: raw little-endian float32 arrays plus a JSON manifest
// describing file, role, step, layer, and shape.
void write_attention_dump(const std::string& dir, const RunTrace& trace);

}  // namespace stylefuse

#endif
