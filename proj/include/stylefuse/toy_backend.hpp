#ifndef STYLEFUSE_TOY_BACKEND_HPP
#define STYLEFUSE_TOY_BACKEND_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "stylefuse/backend.hpp"
#include "stylefuse/tensor.hpp"

namespace stylefuse {

// Desk-scale diffusion backend: a two-level attention denoiser, hash-based
// encoders, and a fixed linear VAE. Weights are a pure function of the build
// seed; every evaluation is bit-deterministic. It exists so each mechanism
// can be verified exactly, not to produce good-looking images.

struct LinearMap {
    int64_t in = 0;
    int64_t out = 0;
    std::vector<double> w;  // out x in, row-major
    std::vector<double> b;  // out

    static LinearMap init(int64_t in, int64_t out, Rng& rng);

    // (batch, tokens, in) -> (batch, tokens, out)
    Tensor apply(const Tensor& x) const;
};

struct ToySelfAttention {
    LayerInfo info;
    LinearMap wq, wk, wv, wo;

    // Residual not included; map routed through the hook set.
    Tensor forward(const Tensor& x, const AttentionHooks* hooks) const;
};

// Dual cross-attention: a shared query projection feeding a text branch and a
// style branch, merged per FusionConfig. When the conditioning carries no
// style, the block reduces to the text branch output.
struct ToyCrossBlock {
    LayerInfo text_info;
    LayerInfo style_info;
    LinearMap wq;
    LinearMap wk_text, wv_text, wo_text;
    LinearMap wk_style, wv_style, wo_style;

    Tensor forward(const Tensor& u, const Conditioning& cond, const FusionConfig& fusion,
                   const AttentionHooks* hooks) const;
};

struct ToyMixer {
    LinearMap hidden, out;

    Tensor forward(const Tensor& h) const;  // h + out(tanh(hidden(h)))
};

class ToyDenoiser final : public Denoiser {
public:
    explicit ToyDenoiser(Rng& rng);

    Tensor predict(const Tensor& z, int timestep, const Conditioning& cond,
                   const FusionConfig& fusion, const AttentionHooks* hooks) const override;
    std::vector<LayerInfo> attention_layers() const override;
    bool stateless() const override { return true; }

    static constexpr int64_t kLatentChannels = 4;
    static constexpr int64_t kLatentSize = 8;  // 8x8 grid, 64 tokens at level 0
    static constexpr int64_t kModelDim0 = 8;
    static constexpr int64_t kModelDim1 = 16;
    static constexpr double kEpsScale = 0.05;

private:
    LinearMap in_proj_, down_proj_, up_proj_, out_proj_;
    ToySelfAttention self0_, self1_;
    ToyCrossBlock cross0_, cross1_;
    ToyMixer mix0_, mix1_;
};

class ToyTextEncoder {
public:
    explicit ToyTextEncoder(Rng& rng);

    // Sequence of per-token embeddings: a leading null token followed by up
    // to kMaxWords whitespace-separated words, each hashed with its position.
    // The empty prompt encodes to the null token alone.
    Tensor encode(const std::string& text) const;

    static constexpr int64_t kDim = 12;
    static constexpr int64_t kMaxWords = 7;

private:
    uint64_t salt_;
};

class ToyStyleEncoder {
public:
    explicit ToyStyleEncoder(Rng& rng);

    // Fixed-length embedding sequence derived from the image file bytes.
    Tensor encode(const std::vector<unsigned char>& bytes) const;

    static constexpr int64_t kDim = 12;
    static constexpr int64_t kTokens = 4;

private:
    uint64_t salt_;
};

class ToyVae {
public:
    explicit ToyVae(Rng& rng);

    // (1, 4, 8, 8) latent -> 16x16 RGB via a fixed linear map per 2x2 block,
    // squashed to [0, 1] and quantized to 8 bits.
    Image decode(const Tensor& z) const;

    static constexpr int kScale = 2;

private:
    std::vector<double> w_;  // (kScale*kScale*3) x latent channels
    std::vector<double> b_;
};

class ToyBackend final : public Backend {
public:
    explicit ToyBackend(uint64_t build_seed);

    const Denoiser& denoiser() const override { return *denoiser_; }
    Tensor encode_text(const std::string& text) const override { return text_encoder_->encode(text); }
    Tensor encode_style(const std::vector<unsigned char>& bytes) const override {
        return style_encoder_->encode(bytes);
    }
    Image decode_latent(const Tensor& z) const override { return vae_->decode(z); }

    LatentShape latent_shape() const override {
        return {ToyDenoiser::kLatentChannels, ToyDenoiser::kLatentSize, ToyDenoiser::kLatentSize};
    }
    int vae_scale() const override { return ToyVae::kScale; }
    int train_timesteps() const override { return 1000; }
    std::string name() const override { return "toy"; }

    // Digest over every weight byte in construction order; seed checks.
    uint64_t weight_checksum() const { return weight_checksum_; }

    static constexpr uint64_t kDefaultBuildSeed = 0;

private:
    std::unique_ptr<ToyDenoiser> denoiser_;
    std::unique_ptr<ToyTextEncoder> text_encoder_;
    std::unique_ptr<ToyStyleEncoder> style_encoder_;
    std::unique_ptr<ToyVae> vae_;
    uint64_t weight_checksum_ = 0;
};

std::shared_ptr<ToyBackend> build_toy(uint64_t build_seed);

}  // namespace stylefuse

#endif
