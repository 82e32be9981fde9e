#ifndef STYLEFUSE_SCHEDULER_HPP
#define STYLEFUSE_SCHEDULER_HPP

#include <vector>

#include "stylefuse/tensor.hpp"

namespace stylefuse {

// Strictly decreasing timesteps, length = configured step count.
struct TimestepSchedule {
    std::vector<int> timesteps;

    int steps() const { return static_cast<int>(timesteps.size()); }
};

// Deterministic DDIM update (eta = 0) over a linear-beta diffusion.
// alpha_bar(-1) is defined as 1 so the last step returns the predicted clean
// latent.
class DdimScheduler {
public:
    explicit DdimScheduler(int train_timesteps = 1000, double beta_start = 1e-4,
                           double beta_end = 2e-2);

    int train_timesteps() const { return static_cast<int>(alpha_bar_.size()); }
    double alpha_bar(int t) const;

    // Evenly spaced, strictly decreasing, from train_timesteps-1 down to 0.
    TimestepSchedule make_schedule(int steps) const;

    // One reverse step z_t -> z_{t_prev} given the guided noise prediction.
    // t_prev = -1 denotes the end of the schedule.
    Tensor step(const Tensor& z, int t, int t_prev, const Tensor& eps) const;

    // Forward noising q(z_t | x0) with a fixed noise tensor; used by the
    // round-trip sanity checks.
    Tensor add_noise(const Tensor& x0, const Tensor& noise, int t) const;

private:
    std::vector<double> alpha_bar_;
};

}  // namespace stylefuse

#endif
