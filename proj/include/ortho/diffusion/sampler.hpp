#pragma once

#include <cmath>
#include <vector>

#include "ortho/diffusion/train.hpp"

namespace ortho::diffusion {

/// Evenly strided timestep subsequence 1..T of at most `steps` entries,
/// ascending, always containing T.
inline std::vector<int> strided_timesteps(int T, int steps) {
    if (steps <= 0 || steps >= T) {
        std::vector<int> all(size_t(T));
        for (int t = 1; t <= T; ++t) all[size_t(t - 1)] = t;
        return all;
    }
    std::vector<int> ts;
    ts.reserve(size_t(steps));
    for (int i = 0; i < steps; ++i) {
        const int t = 1 + (i * (T - 1)) / (steps - 1 > 0 ? steps - 1 : 1);
        if (ts.empty() || t != ts.back()) ts.push_back(t);
    }
    if (ts.back() != T) ts.push_back(T);
    return ts;
}

/// Ancestral DDPM sampling with epsilon prediction and variance beta_t,
/// optionally on a strided timestep subsequence (the per-step constants are
/// then rebuilt from the alpha_bar ratios of the retained steps).
/// Deterministic per seed.
inline Tensor sample(const DenoiserFn& denoiser, const Tensor* cond, int target_ch,
                     const NoiseSchedule& sched, std::uint64_t seed, int h, int w,
                     int steps = 0) {
    const int cond_ch = cond ? cond->c : 0;
    const std::vector<int> ts = strided_timesteps(sched.T, steps);

    Rng rng(substream_seed(seed, "diffusion/sample"));
    Tensor x(1, target_ch, h, w);
    x.fill_normal(rng);

    Tensor input(1, target_ch + cond_ch, h, w);
    Tensor eps;
    Tensor z(1, target_ch, h, w);

    for (int i = int(ts.size()) - 1; i >= 0; --i) {
        const int t = ts[size_t(i)];
        const double abar = sched.alpha_bar_t(t);
        const double abar_prev = i > 0 ? sched.alpha_bar_t(ts[size_t(i) - 1]) : 1.0;
        const double alpha = abar / abar_prev;
        const double beta = 1.0 - alpha;

        std::copy(x.v.begin(), x.v.end(), input.chan(0, 0));
        if (cond) std::copy(cond->v.begin(), cond->v.end(), input.chan(0, target_ch));
        denoiser(input, {t}, eps);

        const float c1 = float(1.0 / std::sqrt(alpha));
        const float c2 = float(beta / std::sqrt(1.0 - abar));
        const float sigma = float(std::sqrt(beta));
        const bool last = i == 0;
        if (!last) z.fill_normal(rng);
        for (size_t k = 0; k < x.v.size(); ++k) {
            float mu = c1 * (x.v[k] - c2 * eps.v[k]);
            x.v[k] = last ? mu : mu + sigma * z.v[k];
        }
    }
    return x;
}

}  // namespace ortho::diffusion
