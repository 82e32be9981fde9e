#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "stylefuse/attention.hpp"
#include "stylefuse/errors.hpp"
#include "testutil.hpp"

using namespace stylefuse;
using testutil::naive_attention;
using testutil::random_map;

TEST_CASE("single query and key: output equals V") {
    Rng rng(1);
    Tensor q = random_map({1, 1, 4}, rng);
    Tensor k = random_map({1, 1, 4}, rng);
    Tensor v = random_map({1, 1, 4}, rng);
    auto r = attention(q, k, v, 1);
    CHECK(r.weights.at4(0, 0, 0, 0) == doctest::Approx(1.0));
    CHECK(r.output.bit_equal(v));
}

TEST_CASE("identical key rows give uniform weights and V row means") {
    Rng rng(2);
    Tensor q = random_map({1, 3, 4}, rng);
    Tensor k({1, 5, 4});
    for (int64_t j = 0; j < 5; ++j) {
        for (int64_t c = 0; c < 4; ++c) k.at3(0, j, c) = 0.37 * static_cast<double>(c + 1);
    }
    Tensor v = random_map({1, 5, 4}, rng);
    auto r = attention(q, k, v, 1);
    for (int64_t i = 0; i < 3; ++i) {
        for (int64_t j = 0; j < 5; ++j) {
            CHECK(r.weights.at4(0, 0, i, j) == doctest::Approx(0.2).epsilon(1e-12));
        }
        for (int64_t c = 0; c < 4; ++c) {
            double mean = 0.0;
            for (int64_t j = 0; j < 5; ++j) mean += v.at3(0, j, c);
            mean /= 5.0;
            CHECK(r.output.at3(0, i, c) == doctest::Approx(mean).epsilon(1e-12));
        }
    }
}

TEST_CASE("3-token 4-channel case matches the naive oracle") {
    Rng rng(3);
    Tensor q = random_map({1, 3, 4}, rng);
    Tensor k = random_map({1, 3, 4}, rng);
    Tensor v = random_map({1, 3, 4}, rng);
    auto got = attention(q, k, v, 1);
    auto want = naive_attention(q, k, v, 1);
    CHECK(got.output.max_abs_diff(want.output) < 1e-6);
    CHECK(got.weights.max_abs_diff(want.weights) < 1e-6);
}

TEST_CASE("attention matches oracle over random shapes") {
    Rng rng(4);
    for (int it = 0; it < 60; ++it) {
        int64_t heads = 1 + static_cast<int64_t>(rng.next_u64() % 2);
        int64_t nq = 1 + static_cast<int64_t>(rng.next_u64() % 8);
        int64_t nk = 1 + static_cast<int64_t>(rng.next_u64() % 8);
        int64_t head_dim = 1 + static_cast<int64_t>(rng.next_u64() % 4);
        int64_t ch = heads * head_dim;
        int64_t batch = 1 + static_cast<int64_t>(rng.next_u64() % 2);
        Tensor q = random_map({batch, nq, ch}, rng);
        Tensor k = random_map({batch, nk, ch}, rng);
        Tensor v = random_map({batch, nk, ch}, rng);
        auto got = attention(q, k, v, heads);
        auto want = naive_attention(q, k, v, heads);
        CHECK(got.output.max_abs_diff(want.output) < 1e-6);

        // row-stochastic, entrywise within [0, 1]
        for (int64_t b = 0; b < batch; ++b) {
            for (int64_t h = 0; h < heads; ++h) {
                for (int64_t i = 0; i < nq; ++i) {
                    double sum = 0.0;
                    for (int64_t j = 0; j < nk; ++j) {
                        double w = got.weights.at4(b, h, i, j);
                        CHECK(w >= 0.0);
                        CHECK(w <= 1.0);
                        sum += w;
                    }
                    CHECK(std::fabs(sum - 1.0) < 1e-5);
                }
            }
        }
    }
}

TEST_CASE("attention error paths") {
    Rng rng(5);
    Tensor q = random_map({1, 2, 4}, rng);
    Tensor k = random_map({1, 2, 6}, rng);
    Tensor v = random_map({1, 2, 4}, rng);
    CHECK_THROWS_AS(attention(q, k, v, 1), ShapeError);

    Tensor k2 = random_map({1, 3, 4}, rng);
    CHECK_THROWS_AS(attention(q, k2, v, 1), ShapeError);  // K/V token mismatch

    Tensor bad = random_map({1, 2, 4}, rng);
    bad[3] = std::nan("");
    CHECK_THROWS_AS(attention(bad, q, v, 1), NumericError);

    CHECK_THROWS_AS(attention(q, q, v, 3), ShapeError);  // heads do not divide channels
}

TEST_CASE("channel statistics") {
    SUBCASE("constant map") {
        Tensor f = Tensor::full({1, 6, 3}, 5.0);
        auto s = channel_statistics(f);
        for (int64_t c = 0; c < 3; ++c) {
            CHECK(s.mean[c] == doctest::Approx(5.0));
            CHECK(s.stddev[c] == doctest::Approx(0.0));
        }
    }
    SUBCASE("two tokens 1 and 3") {
        Tensor f({1, 2, 1});
        f.at3(0, 0, 0) = 1.0;
        f.at3(0, 1, 0) = 3.0;
        auto s = channel_statistics(f);
        CHECK(s.mean[0] == doctest::Approx(2.0));
        CHECK(s.stddev[0] == doctest::Approx(1.0));  // population std
    }
    SUBCASE("single token") {
        Tensor f({1, 1, 2});
        f.at3(0, 0, 0) = -7.5;
        f.at3(0, 0, 1) = 2.25;
        auto s = channel_statistics(f);
        CHECK(s.mean[0] == doctest::Approx(-7.5));
        CHECK(s.mean[1] == doctest::Approx(2.25));
        CHECK(s.stddev[0] == doctest::Approx(0.0));
        CHECK(s.stddev[1] == doctest::Approx(0.0));
    }
    SUBCASE("per batch instance") {
        Tensor f({2, 2, 1});
        f.at3(0, 0, 0) = 1.0;
        f.at3(0, 1, 0) = 3.0;
        f.at3(1, 0, 0) = 10.0;
        f.at3(1, 1, 0) = 10.0;
        auto s = channel_statistics(f);
        CHECK(s.mean[0] == doctest::Approx(2.0));
        CHECK(s.mean[1] == doctest::Approx(10.0));
        CHECK(s.stddev[0] == doctest::Approx(1.0));
        CHECK(s.stddev[1] == doctest::Approx(0.0));
    }
}

TEST_CASE("adain") {
    Rng rng(6);
    SUBCASE("identity on itself") {
        Tensor x = random_map({1, 8, 4}, rng);
        Tensor out = adain(x, x);
        CHECK(out.max_abs_diff(x) < 1e-6);
    }
    SUBCASE("1,3 onto 0,4") {
        Tensor x({1, 2, 1}), y({1, 2, 1});
        x.at3(0, 0, 0) = 1.0;
        x.at3(0, 1, 0) = 3.0;
        y.at3(0, 0, 0) = 0.0;
        y.at3(0, 1, 0) = 4.0;
        Tensor out = adain(x, y);
        CHECK(out.at3(0, 0, 0) == doctest::Approx(0.0));
        CHECK(out.at3(0, 1, 0) == doctest::Approx(4.0));
    }
    SUBCASE("constant content maps to style mean") {
        Tensor x = Tensor::full({1, 5, 2}, 9.0);
        Tensor y = random_map({1, 7, 2}, rng);
        Tensor out = adain(x, y);
        auto sy = channel_statistics(y);
        for (int64_t t = 0; t < 5; ++t) {
            CHECK(out.at3(0, t, 0) == doctest::Approx(sy.mean[0]));
            CHECK(out.at3(0, t, 1) == doctest::Approx(sy.mean[1]));
        }
    }
    SUBCASE("statistics transfer on random inputs") {
        for (int it = 0; it < 50; ++it) {
            Tensor x = random_map({1, 6, 3}, rng);
            Tensor y = random_map({1, 9, 3}, rng);
            auto sx = channel_statistics(x);
            bool degenerate = false;
            for (int64_t c = 0; c < 3; ++c) {
                if (sx.stddev[c] <= 1e-3) degenerate = true;
            }
            if (degenerate) continue;
            Tensor out = adain(x, y);
            auto so = channel_statistics(out);
            auto sy = channel_statistics(y);
            for (int64_t c = 0; c < 3; ++c) {
                CHECK(std::fabs(so.mean[c] - sy.mean[c]) <=
                      1e-4 * (std::fabs(sy.mean[c]) + 1e-9));
                CHECK(std::fabs(so.stddev[c] - sy.stddev[c]) <=
                      1e-4 * (std::fabs(sy.stddev[c]) + 1e-9));
            }
        }
    }
    SUBCASE("token counts may differ, channels may not") {
        Tensor x = random_map({1, 4, 3}, rng);
        Tensor y = random_map({1, 9, 3}, rng);
        CHECK_NOTHROW(adain(x, y));
        Tensor y_bad = random_map({1, 4, 2}, rng);
        CHECK_THROWS_AS(adain(x, y_bad), ShapeError);
    }
}

TEST_CASE("weighted sum fusion") {
    Rng rng(7);
    Tensor a = random_map({1, 5, 3}, rng);
    Tensor b = random_map({1, 5, 3}, rng);

    SUBCASE("lambda 0 returns f_text exactly") {
        CHECK(weighted_sum_fusion(a, b, 0.0).bit_equal(a));
    }
    SUBCASE("cancellation") {
        Tensor neg = -1.0 * a;
        Tensor out = weighted_sum_fusion(a, neg, 1.0);
        for (int64_t i = 0; i < out.numel(); ++i) CHECK(out[i] == doctest::Approx(0.0));
    }
    SUBCASE("elementwise oracle at lambda 0.5") {
        Tensor out = weighted_sum_fusion(a, b, 0.5);
        for (int64_t i = 0; i < out.numel(); ++i) {
            CHECK(out[i] == doctest::Approx(a[i] + 0.5 * b[i]).epsilon(1e-12));
        }
    }
    SUBCASE("linear in lambda") {
        const double l1 = 0.3, l2 = 1.7, alpha = 0.25;
        Tensor left = weighted_sum_fusion(a, b, alpha * l1 + (1 - alpha) * l2);
        Tensor right = alpha * weighted_sum_fusion(a, b, l1);
        right.add_scaled(weighted_sum_fusion(a, b, l2), 1 - alpha);
        CHECK(left.max_abs_diff(right) < 1e-12);
    }
    SUBCASE("shape mismatch") {
        Tensor c = random_map({1, 4, 3}, rng);
        CHECK_THROWS_AS(weighted_sum_fusion(a, c, 1.0), ShapeError);
    }
}

TEST_CASE("cross-modal adain fusion") {
    Rng rng(8);
    SUBCASE("style with matched statistics reduces to identity") {
        Tensor f_text = random_map({1, 6, 4}, rng);
        // permuting tokens preserves per-channel statistics
        Tensor f_style({1, 6, 4});
        for (int64_t t = 0; t < 6; ++t) {
            for (int64_t c = 0; c < 4; ++c) {
                f_style.at3(0, t, c) = f_text.at3(0, (t + 3) % 6, c);
            }
        }
        Tensor out = cross_modal_adain_fusion(f_text, f_style);
        CHECK(out.max_abs_diff(f_text) < 1e-9);
    }
    SUBCASE("matches the hand-computed 1,3 / 0,4 case") {
        Tensor ft({1, 2, 1}), fs({1, 2, 1});
        ft.at3(0, 0, 0) = 1.0;
        ft.at3(0, 1, 0) = 3.0;
        fs.at3(0, 0, 0) = 0.0;
        fs.at3(0, 1, 0) = 4.0;
        Tensor out = cross_modal_adain_fusion(ft, fs);
        CHECK(out.at3(0, 0, 0) == doctest::Approx(0.0));
        CHECK(out.at3(0, 1, 0) == doctest::Approx(4.0));
    }
    SUBCASE("output statistics equal the style statistics") {
        for (int it = 0; it < 30; ++it) {
            Tensor ft = random_map({1, 8, 3}, rng);
            Tensor fs = random_map({1, 8, 3}, rng);
            Tensor out = cross_modal_adain_fusion(ft, fs);
            auto so = channel_statistics(out);
            auto ss = channel_statistics(fs);
            CHECK(so.mean.max_abs_diff(ss.mean) < 1e-5);
            CHECK(so.stddev.max_abs_diff(ss.stddev) < 1e-5);
        }
    }
    SUBCASE("bit-identical to adain") {
        Tensor ft = random_map({1, 7, 5}, rng);
        Tensor fs = random_map({1, 4, 5}, rng);
        CHECK(cross_modal_adain_fusion(ft, fs).bit_equal(adain(ft, fs)));
    }
}
