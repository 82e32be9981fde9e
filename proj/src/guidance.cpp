#include "stylefuse/guidance.hpp"

#include "stylefuse/errors.hpp"

namespace stylefuse {

Tensor cfg_combine(const Tensor& eps_cond, const Tensor& eps_neg, double w) {
    if (!eps_cond.same_shape(eps_neg)) {
        throw ShapeError("cfg_combine: prediction shape mismatch");
    }
    Tensor out = (1.0 + w) * eps_cond;
    out.add_scaled(eps_neg, -w);
    return out;
}

Tensor scfg_predict(const Denoiser& model, const Tensor& z, int timestep,
                    const ConditioningBundle& bundle, const GuidanceConfig& cfg,
                    const FusionConfig& fusion, const AttentionHooks* hooks) {
    Conditioning pos{bundle.text_pos, bundle.style_pos};
    Conditioning neg;
    neg.text = bundle.text_neg;
    if (cfg.mode == GuidanceMode::style_cfg) {
        if (!bundle.style_neg.has_value()) {
            throw ConfigError("negative_style_image_path", "required in style_cfg mode");
        }
        if (!bundle.style_pos.has_value()) {
            throw ConfigError("style_image_path", "required in style_cfg mode");
        }
        neg.style = bundle.style_neg;
    }

    Tensor eps_cond = model.predict(z, timestep, pos, fusion, hooks);
    Tensor eps_neg = model.predict(z, timestep, neg, fusion, hooks);
    return cfg_combine(eps_cond, eps_neg, cfg.w);
}

}  // namespace stylefuse
