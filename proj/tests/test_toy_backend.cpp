#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <map>
#include <set>

#include "stylefuse/attention.hpp"
#include "stylefuse/errors.hpp"
#include "stylefuse/toy_backend.hpp"
#include "testutil.hpp"

using namespace stylefuse;

namespace {

Conditioning styled_cond(const ToyBackend& backend) {
    return {backend.encode_text("A red apple"),
            backend.encode_style({0xde, 0xad, 0xbe, 0xef})};
}

}  // namespace

TEST_CASE("toy predictions are bit-deterministic") {
    auto backend = build_toy(0);
    Rng rng(31);
    Tensor z = testutil::random_map({1, 4, 8, 8}, rng);
    Conditioning cond = styled_cond(*backend);
    FusionConfig fusion{FusionMode::cross_modal_adain, 1.0};
    Tensor a = backend->denoiser().predict(z, 500, cond, fusion, nullptr);
    Tensor b = backend->denoiser().predict(z, 500, cond, fusion, nullptr);
    CHECK(a.bit_equal(b));
}

TEST_CASE("zero latent and zero embeddings give the recorded bias response") {
    auto backend = build_toy(0);
    Tensor z({1, 4, 8, 8});
    Conditioning cond{Tensor({1, 1, ToyTextEncoder::kDim}), Tensor({1, 1, ToyStyleEncoder::kDim})};
    Tensor out = backend->denoiser().predict(z, 500, cond, FusionConfig{}, nullptr);

    std::ifstream in(testutil::fixture("toy_bias_response.f64"), std::ios::binary);
    REQUIRE(static_cast<bool>(in));
    std::vector<double> golden(static_cast<size_t>(out.numel()));
    in.read(reinterpret_cast<char*>(golden.data()),
            static_cast<std::streamsize>(golden.size() * sizeof(double)));
    REQUIRE(static_cast<bool>(in));
    for (int64_t i = 0; i < out.numel(); ++i) {
        CHECK(out[i] == golden[static_cast<size_t>(i)]);
    }
}

TEST_CASE("absent style branch equals weighted_sum fusion with lambda 0") {
    auto backend = build_toy(0);
    Rng rng(32);
    Tensor z = testutil::random_map({1, 4, 8, 8}, rng);
    Conditioning with_style = styled_cond(*backend);
    Conditioning no_style{with_style.text, {}};
    Tensor a = backend->denoiser().predict(z, 321, with_style,
                                           {FusionMode::weighted_sum, 0.0}, nullptr);
    Tensor b = backend->denoiser().predict(z, 321, no_style, {FusionMode::weighted_sum, 1.0},
                                           nullptr);
    CHECK(a.bit_equal(b));
}

TEST_CASE("build seeds") {
    SUBCASE("same seed, same checksum") {
        CHECK(build_toy(0)->weight_checksum() == build_toy(0)->weight_checksum());
    }
    SUBCASE("different seed, different checksum") {
        CHECK(build_toy(0)->weight_checksum() != build_toy(1)->weight_checksum());
    }
}

TEST_CASE("layer topology") {
    auto backend = build_toy(0);
    auto layers = backend->denoiser().attention_layers();
    REQUIRE(layers.size() == 6);

    int self_count = 0, text_count = 0, style_count = 0;
    std::set<int> ids;
    for (const auto& l : layers) {
        ids.insert(l.id);
        if (l.kind == LayerKind::self_attention) ++self_count;
        if (l.kind == LayerKind::cross_attention_text) ++text_count;
        if (l.kind == LayerKind::cross_attention_style) ++style_count;
    }
    CHECK(self_count == 2);
    CHECK(text_count == 2);   // one dual cross-attention block per level
    CHECK(style_count == 2);
    CHECK(ids.size() == 6);

    // stable enumeration
    auto again = backend->denoiser().attention_layers();
    for (size_t i = 0; i < layers.size(); ++i) {
        CHECK(layers[i].id == again[i].id);
        CHECK(layers[i].heads == again[i].heads);
        CHECK(layers[i].query_tokens == again[i].query_tokens);
    }
}

TEST_CASE("observed self-attention maps match an out-of-band recomputation") {
    auto backend = build_toy(0);
    Rng rng(33);
    Tensor z = testutil::random_map({1, 4, 8, 8}, rng);
    Conditioning cond = styled_cond(*backend);

    std::map<int, Tensor> qs, ks, maps;
    AttentionHooks hooks;
    hooks.observe_qkv = [&](const LayerInfo& l, const Tensor& q, const Tensor& k, const Tensor&) {
        qs.emplace(l.id, q);
        ks.emplace(l.id, k);
    };
    hooks.observe_map = [&](const LayerInfo& l, const Tensor& m) { maps.emplace(l.id, m); };
    (void)backend->denoiser().predict(z, 500, cond, FusionConfig{}, &hooks);

    REQUIRE(maps.size() == 6);  // style branch active: all layers fire
    for (const auto& layer : backend->denoiser().attention_layers()) {
        const Tensor& k = ks.at(layer.id);
        auto naive = testutil::naive_attention(qs.at(layer.id), k, k, layer.heads);
        CHECK(naive.weights.max_abs_diff(maps.at(layer.id)) < 1e-6);
    }
}

TEST_CASE("hooks fire only for active branches") {
    auto backend = build_toy(0);
    Rng rng(34);
    Tensor z = testutil::random_map({1, 4, 8, 8}, rng);

    std::set<int> seen;
    AttentionHooks hooks;
    hooks.observe_map = [&](const LayerInfo& l, const Tensor&) { seen.insert(l.id); };

    Conditioning no_style{backend->encode_text("plain"), {}};
    (void)backend->denoiser().predict(z, 500, no_style, FusionConfig{}, &hooks);
    CHECK(seen == std::set<int>{0, 1, 3, 4});  // style layers inactive

    seen.clear();
    (void)backend->denoiser().predict(z, 500, styled_cond(*backend), FusionConfig{}, &hooks);
    CHECK(seen == std::set<int>{0, 1, 2, 3, 4, 5});
}

TEST_CASE("text encoder") {
    auto backend = build_toy(0);
    SUBCASE("deterministic and word-sensitive") {
        CHECK(backend->encode_text("A red apple").bit_equal(backend->encode_text("A red apple")));
        CHECK_FALSE(
            backend->encode_text("A red apple").bit_equal(backend->encode_text("A blue apple")));
    }
    SUBCASE("position-sensitive") {
        Tensor fwd = backend->encode_text("red apple");
        Tensor rev = backend->encode_text("apple red");
        REQUIRE(fwd.same_shape(rev));
        CHECK_FALSE(fwd.bit_equal(rev));
    }
    SUBCASE("empty prompt is the single null token") {
        Tensor e = backend->encode_text("");
        CHECK(e.dim(1) == 1);
        Tensor spaces = backend->encode_text("   ");
        CHECK(e.bit_equal(spaces));
    }
    SUBCASE("token count capped") {
        Tensor e = backend->encode_text("a b c d e f g h i j k");
        CHECK(e.dim(1) == 1 + ToyTextEncoder::kMaxWords);
    }
}

TEST_CASE("style encoder") {
    auto backend = build_toy(0);
    Tensor a = backend->encode_style({1, 2, 3});
    Tensor b = backend->encode_style({1, 2, 3});
    Tensor c = backend->encode_style({1, 2, 4});
    CHECK(a.bit_equal(b));
    CHECK_FALSE(a.bit_equal(c));
    CHECK(a.dim(1) == ToyStyleEncoder::kTokens);
    CHECK(a.dim(2) == ToyStyleEncoder::kDim);
}

TEST_CASE("vae decode") {
    auto backend = build_toy(0);
    Rng rng(35);
    Tensor z = testutil::random_map({1, 4, 8, 8}, rng);
    Image img1 = backend->decode_latent(z);
    Image img2 = backend->decode_latent(z);
    CHECK(img1 == img2);
    CHECK(img1.width == 16);
    CHECK(img1.height == 16);
    CHECK(img1.rgb.size() == 16u * 16u * 3u);

    Tensor bad({1, 4, 4, 4});
    CHECK_THROWS_AS(backend->decode_latent(bad), ShapeError);
}

TEST_CASE("injected map shape is validated") {
    auto backend = build_toy(0);
    Rng rng(36);
    Tensor z = testutil::random_map({1, 4, 8, 8}, rng);
    AttentionHooks hooks;
    hooks.replace_map = [&](const LayerInfo& l) -> std::optional<Tensor> {
        if (l.kind != LayerKind::self_attention) return std::nullopt;
        return Tensor({1, 1, 2, 2});  // wrong everywhere
    };
    CHECK_THROWS_AS(backend->denoiser().predict(z, 500, styled_cond(*backend), FusionConfig{},
                                                &hooks),
                    ShapeError);
}
