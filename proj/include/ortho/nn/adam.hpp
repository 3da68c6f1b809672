#pragma once

#include <cmath>
#include <vector>

#include "ortho/nn/layers.hpp"

namespace ortho::nn {

/// Adam with bias correction; the concrete optimizer behind the pipeline's
/// gradient-based training contract.
struct Adam {
    double lr = 5e-5;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    long step_count = 0;
    std::vector<std::vector<float>> m, v;

    void attach(const ParamRegistry& reg) {
        m.clear();
        v.clear();
        for (const auto& r : reg.refs) {
            m.emplace_back(r.w->size(), 0.0f);
            v.emplace_back(r.w->size(), 0.0f);
        }
        step_count = 0;
    }

    void step(const ParamRegistry& reg) {
        ++step_count;
        const double bc1 = 1.0 - std::pow(beta1, double(step_count));
        const double bc2 = 1.0 - std::pow(beta2, double(step_count));
        for (size_t pi = 0; pi < reg.refs.size(); ++pi) {
            auto& w = *reg.refs[pi].w;
            auto& g = *reg.refs[pi].g;
            auto& mm = m[pi];
            auto& vv = v[pi];
            for (size_t i = 0; i < w.size(); ++i) {
                mm[i] = float(beta1 * mm[i] + (1.0 - beta1) * g[i]);
                vv[i] = float(beta2 * vv[i] + (1.0 - beta2) * double(g[i]) * g[i]);
                const double mh = mm[i] / bc1;
                const double vh = vv[i] / bc2;
                w[i] -= float(lr * mh / (std::sqrt(vh) + eps));
            }
        }
    }
};

}  // namespace ortho::nn
