#ifndef STYLEFUSE_BACKEND_HPP
#define STYLEFUSE_BACKEND_HPP

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stylefuse/image.hpp"
#include "stylefuse/tensor.hpp"

namespace stylefuse {

enum class LayerKind {
    self_attention,
    cross_attention_text,
    cross_attention_style,
};

const char* layer_kind_name(LayerKind kind);

struct LayerInfo {
    int id = 0;
    LayerKind kind = LayerKind::self_attention;
    int level = 0;         // resolution level inside the denoiser
    int heads = 1;
    int query_tokens = 0;  // key token count for self-attention equals this
};

// How the dual cross-attention branches are merged.
enum class FusionMode {
    weighted_sum,       // f_text + lambda * f_style
    cross_modal_adain,  // adain(f_text, f_style); lambda unused
};

struct FusionConfig {
    FusionMode mode = FusionMode::weighted_sum;
    double lambda = 1.0;
};

// One guidance branch worth of conditioning. `style` absent means the style
// cross-attention branch is skipped and the block reduces to text-only.
struct Conditioning {
    Tensor text;                  // (1, tokens, text_dim)
    std::optional<Tensor> style;  // (1, tokens, style_dim)
};

// Instrumentation points every attention layer of a denoiser must route
// through. `replace_map` may substitute the row-stochastic weights before
// they are applied to V; `observe_map` then sees the map that was actually
// used. `observe_qkv` and `observe_output` expose the projected inputs and
// the pre-projection attention product so maps can be recomputed and audited
// out of band. `replace_style_features` can substitute the style branch
// output of a cross block before fusion (test instrumentation; receives the
// sibling text features for reference).
struct AttentionHooks {
    std::function<std::optional<Tensor>(const LayerInfo&)> replace_map;
    std::function<void(const LayerInfo&, const Tensor& q, const Tensor& k, const Tensor& v)>
        observe_qkv;
    std::function<void(const LayerInfo&, const Tensor& weights)> observe_map;
    std::function<void(const LayerInfo&, const Tensor& output)> observe_output;
    std::function<Tensor(const LayerInfo&, const Tensor& f_text, const Tensor& f_style)>
        replace_style_features;
};

class Denoiser {
public:
    virtual ~Denoiser() = default;

    // Noise prediction for one branch at one timestep. `hooks` may be null.
    virtual Tensor predict(const Tensor& z, int timestep, const Conditioning& cond,
                           const FusionConfig& fusion, const AttentionHooks* hooks) const = 0;

    // Deterministic enumeration of every attention layer, in evaluation
    // order. Fixed for the lifetime of the denoiser regardless of which
    // branches a given call activates.
    virtual std::vector<LayerInfo> attention_layers() const = 0;

    virtual bool stateless() const = 0;
};

struct LatentShape {
    int64_t channels = 0;
    int64_t height = 0;
    int64_t width = 0;
};

class Backend {
public:
    virtual ~Backend() = default;

    virtual const Denoiser& denoiser() const = 0;
    virtual Tensor encode_text(const std::string& text) const = 0;
    virtual Tensor encode_style(const std::vector<unsigned char>& image_bytes) const = 0;
    virtual Image decode_latent(const Tensor& z) const = 0;

    virtual LatentShape latent_shape() const = 0;
    virtual int vae_scale() const = 0;  // image pixels per latent cell
    virtual int train_timesteps() const = 0;
    virtual std::string name() const = 0;
    virtual bool stateless() const { return denoiser().stateless(); }
};

using BackendFactory = std::function<std::shared_ptr<Backend>()>;

// Backends are looked up by the `backend` config key. "toy" is registered at
// startup; integrations register their own adapters before calling into the
// pipeline.
void register_backend(const std::string& name, BackendFactory factory);
std::shared_ptr<Backend> make_backend(const std::string& name);

}  // namespace stylefuse

#endif
