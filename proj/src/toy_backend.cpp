#include "stylefuse/toy_backend.hpp"

#include <cctype>
#include <cmath>
#include <cstring>

#include "stylefuse/attention.hpp"
#include "stylefuse/errors.hpp"

namespace stylefuse {

namespace {

constexpr uint64_t kGolden = 0x9e3779b97f4a7c15ull;

uint64_t fold_bytes(uint64_t h, const void* data, size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

// Sinusoidal timestep embedding of width `dim`.
std::vector<double> time_embedding(int timestep, int64_t dim) {
    std::vector<double> e(static_cast<size_t>(dim), 0.0);
    const int64_t half = dim / 2;
    for (int64_t k = 0; k < half; ++k) {
        double freq = std::exp(-std::log(10000.0) * static_cast<double>(k) /
                               static_cast<double>(half));
        e[static_cast<size_t>(2 * k)] = std::sin(timestep * freq);
        e[static_cast<size_t>(2 * k + 1)] = std::cos(timestep * freq);
    }
    return e;
}

void add_time_embedding(Tensor& x, int timestep) {
    const auto e = time_embedding(timestep, x.dim(2));
    for (int64_t b = 0; b < x.dim(0); ++b) {
        for (int64_t t = 0; t < x.dim(1); ++t) {
            for (int64_t c = 0; c < x.dim(2); ++c) {
                x.at3(b, t, c) += e[static_cast<size_t>(c)];
            }
        }
    }
}

// Attention with the project-wide hook protocol: compute the map, let the
// hook set substitute it, report the map actually used, then apply it.
Tensor run_attention(const LayerInfo& info, const Tensor& q, const Tensor& k, const Tensor& v,
                     const AttentionHooks* hooks) {
    if (hooks != nullptr && hooks->observe_qkv) {
        hooks->observe_qkv(info, q, k, v);
    }
    Tensor weights = attention_weights(q, k, info.heads);
    if (hooks != nullptr && hooks->replace_map) {
        if (auto replacement = hooks->replace_map(info)) {
            if (!replacement->same_shape(weights)) {
                throw ShapeError("injected attention map shape mismatch on layer " +
                                 std::to_string(info.id));
            }
            weights = std::move(*replacement);
        }
    }
    if (hooks != nullptr && hooks->observe_map) {
        hooks->observe_map(info, weights);
    }
    Tensor out = apply_attention_weights(weights, v, info.heads);
    if (hooks != nullptr && hooks->observe_output) {
        hooks->observe_output(info, out);
    }
    return out;
}

}  // namespace

const char* layer_kind_name(LayerKind kind) {
    switch (kind) {
        case LayerKind::self_attention: return "self";
        case LayerKind::cross_attention_text: return "cross_text";
        case LayerKind::cross_attention_style: return "cross_style";
    }
    return "unknown";
}

LinearMap LinearMap::init(int64_t in, int64_t out, Rng& rng) {
    LinearMap m;
    m.in = in;
    m.out = out;
    m.w.resize(static_cast<size_t>(in * out));
    m.b.resize(static_cast<size_t>(out));
    const double scale = 1.0 / std::sqrt(static_cast<double>(in));
    for (auto& v : m.w) v = rng.gaussian() * scale;
    for (auto& v : m.b) v = rng.gaussian() * 0.1;
    return m;
}

Tensor LinearMap::apply(const Tensor& x) const {
    if (x.rank() != 3 || x.dim(2) != in) {
        throw ShapeError("linear map: input channel mismatch");
    }
    Tensor y({x.dim(0), x.dim(1), out});
    for (int64_t bi = 0; bi < x.dim(0); ++bi) {
        for (int64_t t = 0; t < x.dim(1); ++t) {
            for (int64_t o = 0; o < out; ++o) {
                double acc = b[static_cast<size_t>(o)];
                const double* wr = &w[static_cast<size_t>(o * in)];
                for (int64_t c = 0; c < in; ++c) {
                    acc += wr[c] * x.at3(bi, t, c);
                }
                y.at3(bi, t, o) = acc;
            }
        }
    }
    return y;
}

Tensor ToySelfAttention::forward(const Tensor& x, const AttentionHooks* hooks) const {
    Tensor q = wq.apply(x);
    Tensor k = wk.apply(x);
    Tensor v = wv.apply(x);
    return wo.apply(run_attention(info, q, k, v, hooks));
}

Tensor ToyCrossBlock::forward(const Tensor& u, const Conditioning& cond,
                              const FusionConfig& fusion, const AttentionHooks* hooks) const {
    Tensor q = wq.apply(u);
    Tensor f_text = wo_text.apply(
        run_attention(text_info, q, wk_text.apply(cond.text), wv_text.apply(cond.text), hooks));
    if (!cond.style.has_value()) {
        return f_text;
    }
    Tensor f_style = wo_style.apply(run_attention(style_info, q, wk_style.apply(*cond.style),
                                                  wv_style.apply(*cond.style), hooks));
    if (hooks != nullptr && hooks->replace_style_features) {
        f_style = hooks->replace_style_features(style_info, f_text, f_style);
    }
    if (fusion.mode == FusionMode::weighted_sum) {
        return weighted_sum_fusion(f_text, f_style, fusion.lambda);
    }
    return cross_modal_adain_fusion(f_text, f_style);
}

Tensor ToyMixer::forward(const Tensor& h) const {
    Tensor a = hidden.apply(h);
    for (int64_t i = 0; i < a.numel(); ++i) a[i] = std::tanh(a[i]);
    return h + out.apply(a);
}

ToyDenoiser::ToyDenoiser(Rng& rng) {
    const int64_t d0 = kModelDim0;
    const int64_t d1 = kModelDim1;
    const int64_t td = ToyTextEncoder::kDim;
    const int64_t sd = ToyStyleEncoder::kDim;
    const int tokens0 = static_cast<int>(kLatentSize * kLatentSize);
    const int tokens1 = tokens0 / 4;

    // Construction order is the weight layout; do not reorder.
    in_proj_ = LinearMap::init(kLatentChannels, d0, rng);

    self0_.info = {0, LayerKind::self_attention, 0, 1, tokens0};
    self0_.wq = LinearMap::init(d0, d0, rng);
    self0_.wk = LinearMap::init(d0, d0, rng);
    self0_.wv = LinearMap::init(d0, d0, rng);
    self0_.wo = LinearMap::init(d0, d0, rng);

    cross0_.text_info = {1, LayerKind::cross_attention_text, 0, 1, tokens0};
    cross0_.style_info = {2, LayerKind::cross_attention_style, 0, 1, tokens0};
    cross0_.wq = LinearMap::init(d0, d0, rng);
    cross0_.wk_text = LinearMap::init(td, d0, rng);
    cross0_.wv_text = LinearMap::init(td, d0, rng);
    cross0_.wo_text = LinearMap::init(d0, d0, rng);
    cross0_.wk_style = LinearMap::init(sd, d0, rng);
    cross0_.wv_style = LinearMap::init(sd, d0, rng);
    cross0_.wo_style = LinearMap::init(d0, d0, rng);

    mix0_.hidden = LinearMap::init(d0, d0, rng);
    mix0_.out = LinearMap::init(d0, d0, rng);

    down_proj_ = LinearMap::init(d0, d1, rng);

    self1_.info = {3, LayerKind::self_attention, 1, 2, tokens1};
    self1_.wq = LinearMap::init(d1, d1, rng);
    self1_.wk = LinearMap::init(d1, d1, rng);
    self1_.wv = LinearMap::init(d1, d1, rng);
    self1_.wo = LinearMap::init(d1, d1, rng);

    cross1_.text_info = {4, LayerKind::cross_attention_text, 1, 2, tokens1};
    cross1_.style_info = {5, LayerKind::cross_attention_style, 1, 2, tokens1};
    cross1_.wq = LinearMap::init(d1, d1, rng);
    cross1_.wk_text = LinearMap::init(td, d1, rng);
    cross1_.wv_text = LinearMap::init(td, d1, rng);
    cross1_.wo_text = LinearMap::init(d1, d1, rng);
    cross1_.wk_style = LinearMap::init(sd, d1, rng);
    cross1_.wv_style = LinearMap::init(sd, d1, rng);
    cross1_.wo_style = LinearMap::init(d1, d1, rng);

    mix1_.hidden = LinearMap::init(d1, d1, rng);
    mix1_.out = LinearMap::init(d1, d1, rng);

    up_proj_ = LinearMap::init(d1, d0, rng);
    out_proj_ = LinearMap::init(d0, kLatentChannels, rng);
}

std::vector<LayerInfo> ToyDenoiser::attention_layers() const {
    return {self0_.info,  cross0_.text_info, cross0_.style_info,
            self1_.info,  cross1_.text_info, cross1_.style_info};
}

Tensor ToyDenoiser::predict(const Tensor& z, int timestep, const Conditioning& cond,
                            const FusionConfig& fusion, const AttentionHooks* hooks) const {
    const int64_t n = kLatentSize;
    if (z.rank() != 4 || z.dim(0) != 1 || z.dim(1) != kLatentChannels || z.dim(2) != n ||
        z.dim(3) != n) {
        throw ShapeError("toy denoiser: latent must be (1, 4, 8, 8)");
    }
    if (!z.all_finite()) throw NumericError("toy denoiser: non-finite latent");

    // latent -> level-0 tokens
    Tensor tokens0({1, n * n, kLatentChannels});
    for (int64_t y = 0; y < n; ++y) {
        for (int64_t x = 0; x < n; ++x) {
            for (int64_t c = 0; c < kLatentChannels; ++c) {
                tokens0.at3(0, y * n + x, c) = z.at4(0, c, y, x);
            }
        }
    }

    // Trunk: input/time projection and self-attention at both levels. The
    // trunk sees only (z, t), so self-attention maps are identical across
    // guidance branches at the same latent; the teacher protocol relies on
    // this when it injects one captured map into every branch.
    Tensor x1 = in_proj_.apply(tokens0);
    add_time_embedding(x1, timestep);
    Tensor u1 = x1 + self0_.forward(x1, hooks);

    const int64_t m = n / 2;
    Tensor pooled({1, m * m, kModelDim0});
    for (int64_t y = 0; y < m; ++y) {
        for (int64_t x = 0; x < m; ++x) {
            for (int64_t c = 0; c < kModelDim0; ++c) {
                double s = u1.at3(0, (2 * y) * n + 2 * x, c) +
                           u1.at3(0, (2 * y) * n + 2 * x + 1, c) +
                           u1.at3(0, (2 * y + 1) * n + 2 * x, c) +
                           u1.at3(0, (2 * y + 1) * n + 2 * x + 1, c);
                pooled.at3(0, y * m + x, c) = 0.25 * s;
            }
        }
    }
    Tensor x2 = down_proj_.apply(pooled);
    add_time_embedding(x2, timestep);
    Tensor u2 = x2 + self1_.forward(x2, hooks);

    // Conditioning readouts, merged residually per level.
    Tensor h1 = mix0_.forward(u1 + cross0_.forward(u1, cond, fusion, hooks));
    Tensor h2 = mix1_.forward(u2 + cross1_.forward(u2, cond, fusion, hooks));

    Tensor h2_up = up_proj_.apply(h2);
    Tensor g = h1;
    for (int64_t y = 0; y < n; ++y) {
        for (int64_t x = 0; x < n; ++x) {
            for (int64_t c = 0; c < kModelDim0; ++c) {
                g.at3(0, y * n + x, c) += h2_up.at3(0, (y / 2) * m + x / 2, c);
            }
        }
    }
    Tensor net = out_proj_.apply(g);

    Tensor eps = z;
    for (int64_t y = 0; y < n; ++y) {
        for (int64_t x = 0; x < n; ++x) {
            for (int64_t c = 0; c < kLatentChannels; ++c) {
                eps.at4(0, c, y, x) += kEpsScale * net.at3(0, y * n + x, c);
            }
        }
    }
    return eps;
}

ToyTextEncoder::ToyTextEncoder(Rng& rng) : salt_(rng.next_u64()) {}

Tensor ToyTextEncoder::encode(const std::string& text) const {
    std::vector<uint64_t> token_hashes;
    token_hashes.push_back(fnv1a64(""));  // null / begin token
    size_t i = 0;
    while (i < text.size() && static_cast<int64_t>(token_hashes.size()) <= kMaxWords) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) {
            token_hashes.push_back(fnv1a64(std::string_view(text).substr(start, i - start)));
        }
    }

    const auto count = static_cast<int64_t>(token_hashes.size());
    Tensor emb({1, count, kDim});
    for (int64_t t = 0; t < count; ++t) {
        Rng r(salt_ ^ token_hashes[static_cast<size_t>(t)] ^ (kGolden * static_cast<uint64_t>(t + 1)));
        for (int64_t c = 0; c < kDim; ++c) {
            emb.at3(0, t, c) = r.gaussian();
        }
    }
    return emb;
}

ToyStyleEncoder::ToyStyleEncoder(Rng& rng) : salt_(rng.next_u64()) {}

Tensor ToyStyleEncoder::encode(const std::vector<unsigned char>& bytes) const {
    const uint64_t h = fnv1a64(bytes.data(), bytes.size());
    Tensor emb({1, kTokens, kDim});
    for (int64_t t = 0; t < kTokens; ++t) {
        Rng r(salt_ ^ h ^ (kGolden * static_cast<uint64_t>(t + 1)));
        for (int64_t c = 0; c < kDim; ++c) {
            emb.at3(0, t, c) = r.gaussian();
        }
    }
    return emb;
}

ToyVae::ToyVae(Rng& rng) {
    const int64_t outs = static_cast<int64_t>(kScale) * kScale * 3;
    w_.resize(static_cast<size_t>(outs * ToyDenoiser::kLatentChannels));
    b_.resize(static_cast<size_t>(outs));
    const double scale = 1.0 / std::sqrt(static_cast<double>(ToyDenoiser::kLatentChannels));
    for (auto& v : w_) v = rng.gaussian() * scale;
    for (auto& v : b_) v = rng.gaussian() * 0.1;
}

Image ToyVae::decode(const Tensor& z) const {
    const int64_t n = ToyDenoiser::kLatentSize;
    const int64_t ch = ToyDenoiser::kLatentChannels;
    if (z.rank() != 4 || z.dim(0) != 1 || z.dim(1) != ch || z.dim(2) != n || z.dim(3) != n) {
        throw ShapeError("toy vae: latent must be (1, 4, 8, 8)");
    }
    Image img;
    img.width = static_cast<int>(n) * kScale;
    img.height = static_cast<int>(n) * kScale;
    img.rgb.assign(static_cast<size_t>(img.width) * img.height * 3, 0);
    for (int64_t y = 0; y < n; ++y) {
        for (int64_t x = 0; x < n; ++x) {
            for (int dy = 0; dy < kScale; ++dy) {
                for (int dx = 0; dx < kScale; ++dx) {
                    for (int c = 0; c < 3; ++c) {
                        const int64_t o = (dy * kScale + dx) * 3 + c;
                        double acc = b_[static_cast<size_t>(o)];
                        for (int64_t lc = 0; lc < ch; ++lc) {
                            acc += w_[static_cast<size_t>(o * ch + lc)] * z.at4(0, lc, y, x);
                        }
                        double px = 0.5 + 0.5 * std::tanh(acc);
                        const int64_t row = y * kScale + dy;
                        const int64_t col = x * kScale + dx;
                        img.rgb[static_cast<size_t>((row * img.width + col) * 3 + c)] =
                            static_cast<uint8_t>(std::lround(px * 255.0));
                    }
                }
            }
        }
    }
    return img;
}

ToyBackend::ToyBackend(uint64_t build_seed) {
    Rng rng(build_seed);
    denoiser_ = std::make_unique<ToyDenoiser>(rng);
    text_encoder_ = std::make_unique<ToyTextEncoder>(rng);
    style_encoder_ = std::make_unique<ToyStyleEncoder>(rng);
    vae_ = std::make_unique<ToyVae>(rng);

    // Functional digest: hash a probe evaluation instead of walking every
    // weight array. Distinct weights give distinct probes.
    Tensor probe_z({1, ToyDenoiser::kLatentChannels, ToyDenoiser::kLatentSize,
                    ToyDenoiser::kLatentSize});
    Rng probe_rng(7);
    probe_z = Tensor::gaussian(probe_z.shape(), probe_rng);
    Conditioning cond{text_encoder_->encode("checksum probe"),
                      style_encoder_->encode({0x73, 0x66})};
    Tensor out = denoiser_->predict(probe_z, 500, cond, FusionConfig{}, nullptr);
    uint64_t h = fold_bytes(0xcbf29ce484222325ull, out.data(),
                            static_cast<size_t>(out.numel()) * sizeof(double));
    Image img = vae_->decode(probe_z);
    h = fold_bytes(h, img.rgb.data(), img.rgb.size());
    weight_checksum_ = h;
}

std::shared_ptr<ToyBackend> build_toy(uint64_t build_seed) {
    return std::make_shared<ToyBackend>(build_seed);
}

}  // namespace stylefuse
