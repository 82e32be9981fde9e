#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stylefuse/errors.hpp"
#include "stylefuse/scheduler.hpp"
#include "testutil.hpp"

using namespace stylefuse;

TEST_CASE("schedule construction") {
    DdimScheduler sched(1000);

    SUBCASE("strictly decreasing, full range, requested length") {
        for (int steps : {1, 2, 10, 50, 1000}) {
            auto s = sched.make_schedule(steps);
            CHECK(s.steps() == steps);
            CHECK(s.timesteps.front() == 999);
            if (steps > 1) CHECK(s.timesteps.back() == 0);
            for (size_t i = 1; i < s.timesteps.size(); ++i) {
                CHECK(s.timesteps[i] < s.timesteps[i - 1]);
            }
        }
    }
    SUBCASE("invalid step counts") {
        CHECK_THROWS_AS(sched.make_schedule(0), ConfigError);
        CHECK_THROWS_AS(sched.make_schedule(1001), ConfigError);
    }
}

TEST_CASE("alpha_bar is decreasing with boundary one") {
    DdimScheduler sched(1000);
    CHECK(sched.alpha_bar(-1) == doctest::Approx(1.0));
    double prev = 1.0;
    for (int t = 0; t < 1000; t += 37) {
        double ab = sched.alpha_bar(t);
        CHECK(ab > 0.0);
        CHECK(ab < prev);
        prev = ab;
    }
    CHECK(sched.alpha_bar(999) < 1e-4);
    CHECK_THROWS_AS(sched.alpha_bar(1000), ConfigError);
}

TEST_CASE("round trip: true-noise prediction reconstructs the clean latent") {
    DdimScheduler sched(1000);
    Rng rng(21);
    Tensor x0 = testutil::random_map({1, 4, 8, 8}, rng);
    Tensor noise = testutil::random_map({1, 4, 8, 8}, rng);

    for (int steps : {1, 10, 50}) {
        auto schedule = sched.make_schedule(steps);
        Tensor z = sched.add_noise(x0, noise, schedule.timesteps.front());
        for (int i = 0; i < steps; ++i) {
            int t = schedule.timesteps[static_cast<size_t>(i)];
            int t_prev = i + 1 < steps ? schedule.timesteps[static_cast<size_t>(i + 1)] : -1;
            z = sched.step(z, t, t_prev, noise);
        }
        CHECK(z.max_abs_diff(x0) < 1e-4);
    }
}

TEST_CASE("step rejects mismatched shapes") {
    DdimScheduler sched(1000);
    Rng rng(22);
    Tensor z = testutil::random_map({1, 4, 8, 8}, rng);
    Tensor eps = testutil::random_map({1, 4, 4, 4}, rng);
    CHECK_THROWS_AS(sched.step(z, 999, 900, eps), ShapeError);
}
