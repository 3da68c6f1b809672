#pragma once

#include <vector>

#include "ortho/core/error.hpp"
#include "ortho/nn/layers.hpp"

namespace ortho::diffusion {

/// Exponential moving average of model weights. The shadow is kept in double
/// precision so the geometric convergence to constant parameters holds to
/// ~1e-13 over long runs.
struct EmaState {
    double decay = 0.9999;
    long step_count = 0;
    std::vector<std::vector<double>> shadow;

    void attach(const nn::ParamRegistry& reg, double decay_ = 0.9999) {
        decay = decay_;
        step_count = 0;
        shadow.clear();
        for (const auto& r : reg.refs)
            shadow.emplace_back(r.w->begin(), r.w->end());
    }

    void update(const nn::ParamRegistry& reg) {
        if (shadow.size() != reg.refs.size()) throw DomainError("EmaState: registry mismatch");
        ++step_count;
        for (size_t pi = 0; pi < shadow.size(); ++pi) {
            const auto& w = *reg.refs[pi].w;
            auto& s = shadow[pi];
            if (s.size() != w.size()) throw DomainError("EmaState: shape mismatch");
            for (size_t i = 0; i < w.size(); ++i)
                s[i] = decay * s[i] + (1.0 - decay) * double(w[i]);
        }
    }

    /// Copy the shadow into the live parameters (used for inference).
    void load_into(const nn::ParamRegistry& reg) const {
        if (shadow.size() != reg.refs.size()) throw DomainError("EmaState: registry mismatch");
        for (size_t pi = 0; pi < shadow.size(); ++pi) {
            auto& w = *reg.refs[pi].w;
            for (size_t i = 0; i < w.size(); ++i) w[i] = float(shadow[pi][i]);
        }
    }
};

}  // namespace ortho::diffusion
