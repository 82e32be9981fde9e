#ifndef STYLEFUSE_ATTENTION_HPP
#define STYLEFUSE_ATTENTION_HPP

#include "stylefuse/tensor.hpp"

namespace stylefuse {

// Per-channel mean and population standard deviation of a feature map,
// taken over the token axis independently for each batch instance.
// Both tensors are shaped (batch, channels).
struct ChannelStats {
    Tensor mean;
    Tensor stddev;
};

struct AttentionResult {
    Tensor output;   // (batch, query_tokens, value_channels)
    Tensor weights;  // (batch, heads, query_tokens, key_tokens), row-stochastic
};

// Sigma below this is treated as degenerate: the normalized term becomes 0
// and AdaIN maps constant content onto the style mean.
inline constexpr double kSigmaEps = 1e-5;

// Row-stochastic attention weights softmax(Q Kᵀ / sqrt(d)) per head.
// Q, K are head-packed feature maps (batch, tokens, heads * head_dim).
Tensor attention_weights(const Tensor& q, const Tensor& k, int64_t heads);

// weights · V per head, heads re-concatenated on the channel axis.
Tensor apply_attention_weights(const Tensor& weights, const Tensor& v, int64_t heads);

// Scaled dot-product attention. The returned weights are the map the model
// "looked" through; hooks capture or replace exactly this tensor.
AttentionResult attention(const Tensor& q, const Tensor& k, const Tensor& v, int64_t heads);

ChannelStats channel_statistics(const Tensor& f);

// Re-statistics x to y's per-channel mean/std:
//   stddev(y) * (x - mean(x)) / stddev(x) + mean(y)
// Channels with stddev(x) < kSigmaEps contribute a zero normalized term.
Tensor adain(const Tensor& x, const Tensor& y);

// Adapter-style baseline: f_text + lambda * f_style.
Tensor weighted_sum_fusion(const Tensor& f_text, const Tensor& f_style, double lambda);

// Fuses the text-queried features with the style-queried features by
// normalizing the text map to the style map's channel statistics. Shares the
// adain code path, so the two are bit-identical by construction.
Tensor cross_modal_adain_fusion(const Tensor& f_text, const Tensor& f_style);

}  // namespace stylefuse

#endif
