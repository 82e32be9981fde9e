#include "stylefuse/scheduler.hpp"

#include <cmath>

#include "stylefuse/errors.hpp"

namespace stylefuse {

DdimScheduler::DdimScheduler(int train_timesteps, double beta_start, double beta_end) {
    if (train_timesteps < 1) throw ConfigError("steps", "train timesteps must be >= 1");
    alpha_bar_.resize(static_cast<size_t>(train_timesteps));
    double prod = 1.0;
    for (int t = 0; t < train_timesteps; ++t) {
        double beta = beta_start;
        if (train_timesteps > 1) {
            beta += (beta_end - beta_start) * static_cast<double>(t) /
                    static_cast<double>(train_timesteps - 1);
        }
        prod *= 1.0 - beta;
        alpha_bar_[static_cast<size_t>(t)] = prod;
    }
}

double DdimScheduler::alpha_bar(int t) const {
    if (t < 0) return 1.0;
    if (t >= train_timesteps()) throw ConfigError("steps", "timestep out of range");
    return alpha_bar_[static_cast<size_t>(t)];
}

TimestepSchedule DdimScheduler::make_schedule(int steps) const {
    if (steps < 1) throw ConfigError("steps", "must be >= 1");
    if (steps > train_timesteps()) throw ConfigError("steps", "exceeds train timesteps");
    TimestepSchedule sched;
    sched.timesteps.reserve(static_cast<size_t>(steps));
    const int t_max = train_timesteps() - 1;
    if (steps == 1) {
        sched.timesteps.push_back(t_max);
        return sched;
    }
    for (int i = 0; i < steps; ++i) {
        double frac = static_cast<double>(steps - 1 - i) / static_cast<double>(steps - 1);
        sched.timesteps.push_back(static_cast<int>(std::lround(frac * t_max)));
    }
    return sched;
}

Tensor DdimScheduler::step(const Tensor& z, int t, int t_prev, const Tensor& eps) const {
    if (!z.same_shape(eps)) throw ShapeError("scheduler step: latent/eps shape mismatch");
    const double ab_t = alpha_bar(t);
    const double ab_prev = alpha_bar(t_prev);
    const double sqrt_ab_t = std::sqrt(ab_t);
    const double sqrt_one_minus_t = std::sqrt(1.0 - ab_t);
    const double sqrt_ab_prev = std::sqrt(ab_prev);
    const double sqrt_one_minus_prev = std::sqrt(1.0 - ab_prev);

    Tensor out = z;
    for (int64_t i = 0; i < z.numel(); ++i) {
        double x0 = (z[i] - sqrt_one_minus_t * eps[i]) / sqrt_ab_t;
        out[i] = sqrt_ab_prev * x0 + sqrt_one_minus_prev * eps[i];
    }
    return out;
}

Tensor DdimScheduler::add_noise(const Tensor& x0, const Tensor& noise, int t) const {
    if (!x0.same_shape(noise)) throw ShapeError("add_noise: shape mismatch");
    const double a = std::sqrt(alpha_bar(t));
    const double b = std::sqrt(1.0 - alpha_bar(t));
    Tensor out = x0;
    for (int64_t i = 0; i < out.numel(); ++i) {
        out[i] = a * x0[i] + b * noise[i];
    }
    return out;
}

}  // namespace stylefuse
