#ifndef STYLEFUSE_GUIDANCE_HPP
#define STYLEFUSE_GUIDANCE_HPP

#include <optional>

#include "stylefuse/backend.hpp"
#include "stylefuse/tensor.hpp"

namespace stylefuse {

enum class GuidanceMode {
    text_cfg,   // negative branch: negative text, style branch off
    style_cfg,  // negative branch: negative text + negative style image
};

struct GuidanceConfig {
    GuidanceMode mode = GuidanceMode::text_cfg;
    double w = 4.0;  // (1+w)*cond - w*neg; scale s = 1 + w
};

// Positive and negative conditions for both modalities. text_neg defaults to
// the empty-prompt encoding when the user supplies no negative prompt.
struct ConditioningBundle {
    Tensor text_pos;
    Tensor text_neg;
    std::optional<Tensor> style_pos;
    std::optional<Tensor> style_neg;
};

// (1 + w) * eps_cond - w * eps_neg
Tensor cfg_combine(const Tensor& eps_cond, const Tensor& eps_neg, double w);

// Guided noise prediction: two denoiser branches combined with cfg_combine.
// The branches share z and t; the positive branch conditions on
// (text_pos, style_pos), the negative branch on (text_neg, style_neg) in
// style_cfg mode and on text_neg alone in text_cfg mode. Inputs are never
// mutated; `hooks` (may be null) is passed to both branch evaluations.
Tensor scfg_predict(const Denoiser& model, const Tensor& z, int timestep,
                    const ConditioningBundle& bundle, const GuidanceConfig& cfg,
                    const FusionConfig& fusion, const AttentionHooks* hooks);

}  // namespace stylefuse

#endif
