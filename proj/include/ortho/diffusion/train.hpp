#pragma once

#include <functional>
#include <vector>

#include "ortho/core/rng.hpp"
#include "ortho/diffusion/schedule.hpp"
#include "ortho/nn/unet.hpp"

namespace ortho::diffusion {

/// Epsilon predictor: given x_t concatenated with the condition channels and
/// the (per-item) timesteps, produce the noise estimate. Implemented by the
/// U-Net wrapper and, in tests, by analytic oracles.
using DenoiserFn =
    std::function<void(const Tensor& x_and_cond, const std::vector<int>& t, Tensor& eps_out)>;

/// One prepared training example: timestep, target noise and the noised input.
struct TrainExample {
    int t = 0;
    Tensor eps;
    Tensor x_t;
};

/// Draw (t, eps, x_t) for a single target image from its own seed, so batch
/// composition never changes an example's loss contribution.
inline TrainExample make_training_example(const Tensor& x0, const NoiseSchedule& sched,
                                          std::uint64_t seed) {
    if (x0.n != 1) throw DomainError("make_training_example: expects a single item");
    Rng rng(substream_seed(seed, "diffusion/example"));
    TrainExample ex;
    ex.t = 1 + int(rng.below(std::uint64_t(sched.T)));
    ex.eps = Tensor(1, x0.c, x0.h, x0.w);
    ex.eps.fill_normal(rng);
    ex.x_t = forward_sample(x0, ex.t, ex.eps, sched);
    return ex;
}

/// Mean squared error between predicted and true noise, averaged per item
/// then across the batch (double accumulation, batch-order stable).
inline double eps_mse(const Tensor& pred, const std::vector<TrainExample>& batch) {
    double total = 0.0;
    for (int ni = 0; ni < pred.n; ++ni) {
        const auto& ex = batch[size_t(ni)];
        double item = 0.0;
        const size_t count = ex.eps.v.size();
        const float* p = pred.chan(ni, 0);
        for (size_t i = 0; i < count; ++i) {
            const double d = double(p[i]) - double(ex.eps.v[i]);
            item += d * d;
        }
        total += item / double(count);
    }
    return total / double(pred.n);
}

struct StepResult {
    double loss = 0.0;
};

/// Assemble the batch input (x_t ++ cond per item), run the denoiser, and
/// return the epsilon-prediction loss. When `net` is given, also backprop
/// (gradients are accumulated into the registry; caller applies the
/// optimizer).
inline StepResult train_step(nn::UNet& net, const std::vector<Tensor>& x0s,
                             const std::vector<Tensor>& conds, const NoiseSchedule& sched,
                             const std::vector<std::uint64_t>& seeds, bool backprop = true) {
    const int n = int(x0s.size());
    if (n == 0) throw DomainError("train_step: empty batch");
    const int target_ch = x0s[0].c;
    const int cond_ch = conds.empty() ? 0 : conds[0].c;
    if (target_ch + cond_ch != net.cfg.in_ch)
        throw DomainError("train_step: condition channel count does not match the denoiser");

    std::vector<TrainExample> batch;
    batch.reserve(size_t(n));
    std::vector<int> ts(size_t(n));
    Tensor input(n, net.cfg.in_ch, x0s[0].h, x0s[0].w);
    for (int ni = 0; ni < n; ++ni) {
        batch.push_back(make_training_example(x0s[size_t(ni)], sched, seeds[size_t(ni)]));
        ts[size_t(ni)] = batch.back().t;
        const Tensor& xt = batch.back().x_t;
        std::copy(xt.v.begin(), xt.v.end(), input.chan(ni, 0));
        if (cond_ch > 0) {
            const Tensor& cd = conds[size_t(ni)];
            if (cd.h != xt.h || cd.w != xt.w)
                throw DomainError("train_step: condition spatial shape mismatch");
            std::copy(cd.v.begin(), cd.v.end(), input.chan(ni, target_ch));
        }
    }

    Tensor pred;
    net.forward(input, ts, pred, backprop);
    StepResult res;
    res.loss = eps_mse(pred, batch);

    if (backprop) {
        Tensor dpred(pred.n, pred.c, pred.h, pred.w);
        const double scale = 2.0 / (double(pred.n) * double(pred.plane()) * double(pred.c));
        for (int ni = 0; ni < n; ++ni) {
            const auto& ex = batch[size_t(ni)];
            float* dp = dpred.chan(ni, 0);
            const float* pp = pred.chan(ni, 0);
            for (size_t i = 0; i < ex.eps.v.size(); ++i)
                dp[i] = float(scale * (double(pp[i]) - double(ex.eps.v[i])));
        }
        net.backward(dpred);
    }
    return res;
}

/// Loss of an arbitrary denoiser on prepared examples (no gradients); used by
/// oracle tests and validation loops.
inline double eval_loss(const DenoiserFn& denoiser, const std::vector<TrainExample>& batch,
                        const std::vector<Tensor>& conds, int in_ch) {
    const int n = int(batch.size());
    const int target_ch = batch[0].x_t.c;
    Tensor input(n, in_ch, batch[0].x_t.h, batch[0].x_t.w);
    std::vector<int> ts(size_t(n));
    for (int ni = 0; ni < n; ++ni) {
        ts[size_t(ni)] = batch[size_t(ni)].t;
        const Tensor& xt = batch[size_t(ni)].x_t;
        std::copy(xt.v.begin(), xt.v.end(), input.chan(ni, 0));
        if (!conds.empty())
            std::copy(conds[size_t(ni)].v.begin(), conds[size_t(ni)].v.end(),
                      input.chan(ni, target_ch));
    }
    Tensor pred;
    denoiser(input, ts, pred);
    return eps_mse(pred, batch);
}

}  // namespace ortho::diffusion
