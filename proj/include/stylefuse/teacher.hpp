#ifndef STYLEFUSE_TEACHER_HPP
#define STYLEFUSE_TEACHER_HPP

#include <map>
#include <vector>

#include "stylefuse/pipeline.hpp"

namespace stylefuse {

// Self-attention maps of one denoising step, keyed by layer id. Holds at
// most one step's worth of maps; begin_step clears the previous step.
class AttentionMapStore {
public:
    void begin_step(int step_index);
    int step_index() const { return step_index_; }

    // Duplicate puts for a layer must carry bit-identical maps (the same
    // step's guidance branches see the same trunk); a conflict means the
    // backend broke that contract.
    void put(const LayerInfo& layer, const Tensor& weights);

    bool has(int layer_id) const { return maps_.count(layer_id) != 0; }
    const Tensor& get(int layer_id) const;  // IntegrityError when missing
    bool complete(const std::vector<int>& layer_ids) const;
    size_t size() const { return maps_.size(); }
    const std::map<int, Tensor>& maps() const { return maps_; }

private:
    int step_index_ = -1;
    std::map<int, Tensor> maps_;
};

struct TeacherConfig {
    bool enabled = false;
    int cutoff = 0;  // number of initial steps with map replacement
};

// One guided teacher step: denoise with the teacher's own conditioning while
// capturing the self-attention map of every self-attention layer into
// `store`. Throws IntegrityError if any layer failed to report.
LatentState capture_step(const Denoiser& teacher, const DdimScheduler& sched,
                         const LatentState& state, int t_prev, const ConditioningBundle& cond,
                         const GuidanceConfig& guidance, AttentionMapStore& store);

// One student step with every self-attention layer forced to use the stored
// teacher map (the student keeps its own V). Cross-attention and fusion are
// untouched. Missing layer -> IntegrityError; wrong shape -> ShapeError.
LatentState inject_step(const Denoiser& student, const DdimScheduler& sched,
                        const LatentState& state, int t_prev, const ConditioningBundle& cond,
                        const GuidanceConfig& guidance, const FusionConfig& fusion,
                        const AttentionMapStore& store, RunTrace* trace);

struct GuidedRun {
    const Denoiser* teacher = nullptr;
    const Denoiser* student = nullptr;
    ConditioningBundle teacher_cond;
    ConditioningBundle student_cond;
    GuidanceConfig teacher_guidance;
    GuidanceConfig student_guidance;
    FusionConfig student_fusion;
    TeacherConfig teacher_cfg;
};

// Lockstep denoising loop. Teacher and student start from the same initial
// noise; for the first `cutoff` steps the teacher steps first and its maps
// are injected into the student's step. After the cutoff the teacher is not
// evaluated at all. Returns the student's final latent.
LatentState run_guided(const GuidedRun& run, const Tensor& init_noise, const DdimScheduler& sched,
                       const TimestepSchedule& schedule, RunTrace* trace);

}  // namespace stylefuse

#endif
