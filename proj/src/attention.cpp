#include "stylefuse/attention.hpp"

#include <cmath>
#include <string>

#include "stylefuse/errors.hpp"

namespace stylefuse {

namespace {

void require_feature_map(const Tensor& f, const char* name) {
    if (f.rank() != 3) {
        throw ShapeError(std::string(name) + ": expected (batch, tokens, channels)");
    }
    if (f.dim(1) < 1 || f.dim(2) < 1) {
        throw ShapeError(std::string(name) + ": tokens and channels must be >= 1");
    }
    if (!f.all_finite()) {
        throw NumericError(std::string(name) + ": non-finite values");
    }
}

}  // namespace

Tensor attention_weights(const Tensor& q, const Tensor& k, int64_t heads) {
    require_feature_map(q, "Q");
    require_feature_map(k, "K");
    if (heads < 1) throw ShapeError("attention: heads must be >= 1");
    if (q.dim(0) != k.dim(0)) throw ShapeError("attention: Q/K batch mismatch");
    if (q.dim(2) != k.dim(2)) throw ShapeError("attention: Q/K channel mismatch");
    if (q.dim(2) % heads != 0) throw ShapeError("attention: channels not divisible by heads");

    const int64_t batch = q.dim(0);
    const int64_t nq = q.dim(1);
    const int64_t nk = k.dim(1);
    const int64_t head_dim = q.dim(2) / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

    Tensor weights({batch, heads, nq, nk});
    std::vector<double> logits(static_cast<size_t>(nk));
    for (int64_t b = 0; b < batch; ++b) {
        for (int64_t h = 0; h < heads; ++h) {
            const int64_t c0 = h * head_dim;
            for (int64_t i = 0; i < nq; ++i) {
                double row_max = -1e300;
                for (int64_t j = 0; j < nk; ++j) {
                    double dot = 0.0;
                    for (int64_t c = 0; c < head_dim; ++c) {
                        dot += q.at3(b, i, c0 + c) * k.at3(b, j, c0 + c);
                    }
                    logits[static_cast<size_t>(j)] = dot * scale;
                    if (logits[static_cast<size_t>(j)] > row_max) row_max = logits[static_cast<size_t>(j)];
                }
                double denom = 0.0;
                for (int64_t j = 0; j < nk; ++j) {
                    double e = std::exp(logits[static_cast<size_t>(j)] - row_max);
                    weights.at4(b, h, i, j) = e;
                    denom += e;
                }
                for (int64_t j = 0; j < nk; ++j) {
                    weights.at4(b, h, i, j) /= denom;
                }
            }
        }
    }
    return weights;
}

Tensor apply_attention_weights(const Tensor& weights, const Tensor& v, int64_t heads) {
    require_feature_map(v, "V");
    if (weights.rank() != 4) {
        throw ShapeError("attention weights: expected (batch, heads, query_tokens, key_tokens)");
    }
    if (!weights.all_finite()) throw NumericError("attention weights: non-finite values");
    if (weights.dim(0) != v.dim(0)) throw ShapeError("attention: weights/V batch mismatch");
    if (weights.dim(1) != heads) throw ShapeError("attention: weights/head count mismatch");
    if (weights.dim(3) != v.dim(1)) throw ShapeError("attention: key tokens do not match V tokens");
    if (v.dim(2) % heads != 0) throw ShapeError("attention: V channels not divisible by heads");

    const int64_t batch = v.dim(0);
    const int64_t nq = weights.dim(2);
    const int64_t nk = weights.dim(3);
    const int64_t head_dim = v.dim(2) / heads;

    Tensor out({batch, nq, v.dim(2)});
    for (int64_t b = 0; b < batch; ++b) {
        for (int64_t h = 0; h < heads; ++h) {
            const int64_t c0 = h * head_dim;
            for (int64_t i = 0; i < nq; ++i) {
                for (int64_t c = 0; c < head_dim; ++c) {
                    double acc = 0.0;
                    for (int64_t j = 0; j < nk; ++j) {
                        acc += weights.at4(b, h, i, j) * v.at3(b, j, c0 + c);
                    }
                    out.at3(b, i, c0 + c) = acc;
                }
            }
        }
    }
    return out;
}

AttentionResult attention(const Tensor& q, const Tensor& k, const Tensor& v, int64_t heads) {
    if (k.rank() == 3 && v.rank() == 3 && k.dim(1) != v.dim(1)) {
        throw ShapeError("attention: K/V token mismatch");
    }
    AttentionResult r;
    r.weights = attention_weights(q, k, heads);
    r.output = apply_attention_weights(r.weights, v, heads);
    return r;
}

ChannelStats channel_statistics(const Tensor& f) {
    require_feature_map(f, "feature map");
    const int64_t batch = f.dim(0);
    const int64_t tokens = f.dim(1);
    const int64_t channels = f.dim(2);

    ChannelStats s{Tensor({batch, channels}), Tensor({batch, channels})};
    for (int64_t b = 0; b < batch; ++b) {
        for (int64_t c = 0; c < channels; ++c) {
            double mean = 0.0;
            for (int64_t t = 0; t < tokens; ++t) mean += f.at3(b, t, c);
            mean /= static_cast<double>(tokens);
            double var = 0.0;
            for (int64_t t = 0; t < tokens; ++t) {
                double d = f.at3(b, t, c) - mean;
                var += d * d;
            }
            // population variance: instance-norm convention
            var /= static_cast<double>(tokens);
            s.mean[b * channels + c] = mean;
            s.stddev[b * channels + c] = std::sqrt(var);
        }
    }
    return s;
}

Tensor adain(const Tensor& x, const Tensor& y) {
    require_feature_map(x, "adain content");
    require_feature_map(y, "adain style");
    if (x.dim(0) != y.dim(0)) throw ShapeError("adain: batch mismatch");
    if (x.dim(2) != y.dim(2)) throw ShapeError("adain: channel mismatch");

    const ChannelStats sx = channel_statistics(x);
    const ChannelStats sy = channel_statistics(y);

    const int64_t batch = x.dim(0);
    const int64_t tokens = x.dim(1);
    const int64_t channels = x.dim(2);

    Tensor out({batch, tokens, channels});
    for (int64_t b = 0; b < batch; ++b) {
        for (int64_t c = 0; c < channels; ++c) {
            const double mx = sx.mean[b * channels + c];
            const double dx = sx.stddev[b * channels + c];
            const double my = sy.mean[b * channels + c];
            const double dy = sy.stddev[b * channels + c];
            for (int64_t t = 0; t < tokens; ++t) {
                double norm = dx < kSigmaEps ? 0.0 : (x.at3(b, t, c) - mx) / dx;
                out.at3(b, t, c) = dy * norm + my;
            }
        }
    }
    return out;
}

Tensor weighted_sum_fusion(const Tensor& f_text, const Tensor& f_style, double lambda) {
    require_feature_map(f_text, "f_text");
    require_feature_map(f_style, "f_style");
    if (!f_text.same_shape(f_style)) throw ShapeError("weighted_sum_fusion: shape mismatch");
    Tensor out = f_text;
    out.add_scaled(f_style, lambda);
    return out;
}

Tensor cross_modal_adain_fusion(const Tensor& f_text, const Tensor& f_style) {
    return adain(f_text, f_style);
}

}  // namespace stylefuse
