#pragma once

#include <cmath>
#include <vector>

#include "ortho/core/error.hpp"
#include "ortho/core/tensor.hpp"

namespace ortho::diffusion {

/// Linear beta schedule with cumulative products; index t runs 1..T,
/// stored 0-based (beta[t-1] etc.).
struct NoiseSchedule {
    int T = 0;
    double beta_start = 0.0, beta_end = 0.0;
    std::vector<double> beta, alpha, alpha_bar;

    double beta_t(int t) const { return beta[size_t(t - 1)]; }
    double alpha_t(int t) const { return alpha[size_t(t - 1)]; }
    double alpha_bar_t(int t) const { return alpha_bar[size_t(t - 1)]; }
};

inline NoiseSchedule build_schedule(int T, double beta_start, double beta_end) {
    if (T < 1) throw DomainError("build_schedule: T must be >= 1");
    if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0))
        throw DomainError("build_schedule: need 0 < beta_start <= beta_end < 1");
    NoiseSchedule s;
    s.T = T;
    s.beta_start = beta_start;
    s.beta_end = beta_end;
    s.beta.resize(size_t(T));
    s.alpha.resize(size_t(T));
    s.alpha_bar.resize(size_t(T));
    double prod = 1.0;
    for (int t = 0; t < T; ++t) {
        const double b = T == 1 ? beta_start
                                : beta_start + (beta_end - beta_start) * double(t) / double(T - 1);
        s.beta[size_t(t)] = b;
        s.alpha[size_t(t)] = 1.0 - b;
        prod *= 1.0 - b;
        s.alpha_bar[size_t(t)] = prod;
    }
    return s;
}

/// Closed-form forward marginal: x_t = sqrt(abar_t) x0 + sqrt(1-abar_t) eps.
inline Tensor forward_sample(const Tensor& x0, int t, const Tensor& eps,
                             const NoiseSchedule& sched) {
    if (t < 1 || t > sched.T) throw DomainError("forward_sample: t out of range");
    if (!x0.same_shape(eps)) throw DomainError("forward_sample: eps shape mismatch");
    const float a = float(std::sqrt(sched.alpha_bar_t(t)));
    const float b = float(std::sqrt(1.0 - sched.alpha_bar_t(t)));
    Tensor xt(x0.n, x0.c, x0.h, x0.w);
    for (size_t i = 0; i < x0.v.size(); ++i) xt.v[i] = a * x0.v[i] + b * eps.v[i];
    return xt;
}

}  // namespace ortho::diffusion
