#include "stylefuse/teacher.hpp"

#include <chrono>

#include "stylefuse/errors.hpp"

namespace stylefuse {

namespace {

std::vector<int> self_layer_ids(const Denoiser& model) {
    std::vector<int> ids;
    for (const auto& layer : model.attention_layers()) {
        if (layer.kind == LayerKind::self_attention) ids.push_back(layer.id);
    }
    return ids;
}

// Records the effective self maps of one step into `dst`, enforcing that
// repeated observations of a layer within the step agree bit-for-bit.
void record_self_map(StepMaps& dst, const LayerInfo& layer, const Tensor& weights) {
    auto it = dst.self_maps.find(layer.id);
    if (it == dst.self_maps.end()) {
        dst.self_maps.emplace(layer.id, weights);
    } else if (!it->second.bit_equal(weights)) {
        throw IntegrityError("self-attention map diverged across guidance branches on layer " +
                             std::to_string(layer.id));
    }
}

}  // namespace

void AttentionMapStore::begin_step(int step_index) {
    step_index_ = step_index;
    maps_.clear();
}

void AttentionMapStore::put(const LayerInfo& layer, const Tensor& weights) {
    auto it = maps_.find(layer.id);
    if (it == maps_.end()) {
        maps_.emplace(layer.id, weights);
        return;
    }
    if (!it->second.bit_equal(weights)) {
        throw IntegrityError("conflicting capture for self-attention layer " +
                             std::to_string(layer.id));
    }
}

const Tensor& AttentionMapStore::get(int layer_id) const {
    auto it = maps_.find(layer_id);
    if (it == maps_.end()) {
        throw IntegrityError("attention store has no map for layer " + std::to_string(layer_id));
    }
    return it->second;
}

bool AttentionMapStore::complete(const std::vector<int>& layer_ids) const {
    for (int id : layer_ids) {
        if (!has(id)) return false;
    }
    return true;
}

LatentState capture_step(const Denoiser& teacher, const DdimScheduler& sched,
                         const LatentState& state, int t_prev, const ConditioningBundle& cond,
                         const GuidanceConfig& guidance, AttentionMapStore& store) {
    AttentionHooks hooks;
    hooks.observe_map = [&store](const LayerInfo& layer, const Tensor& weights) {
        if (layer.kind == LayerKind::self_attention) {
            store.put(layer, weights);
        }
    };
    LatentState next =
        denoise_step(teacher, sched, state, t_prev, cond, guidance, FusionConfig{}, &hooks);
    if (!store.complete(self_layer_ids(teacher))) {
        throw IntegrityError("attention store incomplete after teacher step " +
                             std::to_string(state.step_index));
    }
    return next;
}

LatentState inject_step(const Denoiser& student, const DdimScheduler& sched,
                        const LatentState& state, int t_prev, const ConditioningBundle& cond,
                        const GuidanceConfig& guidance, const FusionConfig& fusion,
                        const AttentionMapStore& store, RunTrace* trace) {
    StepMaps step_maps{state.step_index, state.timestep, {}};
    const bool record = trace != nullptr && trace->record_maps;

    AttentionHooks hooks;
    hooks.replace_map = [&store](const LayerInfo& layer) -> std::optional<Tensor> {
        if (layer.kind != LayerKind::self_attention) return std::nullopt;
        return store.get(layer.id);
    };
    if (record) {
        hooks.observe_map = [&step_maps](const LayerInfo& layer, const Tensor& weights) {
            if (layer.kind == LayerKind::self_attention) {
                record_self_map(step_maps, layer, weights);
            }
        };
    }
    LatentState next = denoise_step(student, sched, state, t_prev, cond, guidance, fusion, &hooks);
    if (record) {
        trace->student_self_maps.push_back(std::move(step_maps));
    }
    return next;
}

LatentState run_guided(const GuidedRun& run, const Tensor& init_noise, const DdimScheduler& sched,
                       const TimestepSchedule& schedule, RunTrace* trace) {
    const int steps = schedule.steps();
    const int cutoff = run.teacher_cfg.enabled ? run.teacher_cfg.cutoff : 0;
    if (cutoff < 0 || cutoff > steps) {
        throw ConfigError("teacher_cutoff", "must be within [0, steps]");
    }
    if (run.student == nullptr || (cutoff > 0 && run.teacher == nullptr)) {
        throw IntegrityError("run_guided: missing denoiser");
    }

    LatentState teacher_state{init_noise, schedule.timesteps[0], 0};
    LatentState student_state{init_noise, schedule.timesteps[0], 0};
    AttentionMapStore store;

    for (int i = 0; i < steps; ++i) {
        const auto started = std::chrono::steady_clock::now();
        const int t_prev = i + 1 < steps ? schedule.timesteps[static_cast<size_t>(i + 1)] : -1;

        if (i < cutoff) {
            store.begin_step(i);
            teacher_state = capture_step(*run.teacher, sched, teacher_state, t_prev,
                                         run.teacher_cond, run.teacher_guidance, store);
            if (trace != nullptr && trace->record_maps) {
                StepMaps maps{i, student_state.timestep, store.maps()};
                trace->teacher_self_maps.push_back(std::move(maps));
            }
            student_state = inject_step(*run.student, sched, student_state, t_prev,
                                        run.student_cond, run.student_guidance,
                                        run.student_fusion, store, trace);
        } else {
            StepMaps step_maps{i, student_state.timestep, {}};
            AttentionHooks hooks;
            const bool record = trace != nullptr && trace->record_maps;
            if (record) {
                hooks.observe_map = [&step_maps](const LayerInfo& layer, const Tensor& weights) {
                    if (layer.kind == LayerKind::self_attention) {
                        record_self_map(step_maps, layer, weights);
                    }
                };
            }
            student_state = denoise_step(*run.student, sched, student_state, t_prev,
                                         run.student_cond, run.student_guidance,
                                         run.student_fusion, record ? &hooks : nullptr);
            if (record) {
                trace->student_self_maps.push_back(std::move(step_maps));
            }
        }

        if (trace != nullptr) {
            if (trace->record_latents) {
                trace->student_latents.push_back(student_state.z);
            }
            trace->step_seconds.push_back(
                std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());
        }
    }
    return student_state;
}

}  // namespace stylefuse
