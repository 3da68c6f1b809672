#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ortho/nn/layers.hpp"

namespace ortho::nn {

struct UNetConfig {
    int in_ch = 3;
    int out_ch = 1;
    int base = 12;      // channel widths: base * {1, 2, 4, 6}
    int emb_dim = 128;  // 0 = no timestep conditioning
    int groups = 4;
};

inline void add_inplace(Tensor& a, const Tensor& b) {
    for (std::size_t i = 0; i < a.v.size(); ++i) a.v[i] += b.v[i];
}

/// Sinusoidal timestep features, one row per batch item.
inline Tensor timestep_features(const std::vector<int>& t, int dim) {
    Tensor out(int(t.size()), dim, 1, 1);
    const int half = dim / 2;
    for (int ni = 0; ni < out.n; ++ni) {
        float* p = out.chan(ni, 0);
        for (int i = 0; i < half; ++i) {
            const double freq = std::exp(-std::log(10000.0) * double(i) / double(half));
            p[i] = float(std::sin(double(t[size_t(ni)]) * freq));
            p[half + i] = float(std::cos(double(t[size_t(ni)]) * freq));
        }
    }
    return out;
}

/// Pre-activation residual block with optional per-channel timestep bias.
struct ResBlock {
    int cin = 0, cout = 0;
    bool has_emb = false;
    GroupNorm gn1, gn2;
    SiLU s1, s2;
    Conv2d conv1, conv2, skip;
    bool has_skip = false;
    Linear proj;

    void init(int cin_, int cout_, int emb_dim, int groups, Rng& rng) {
        cin = cin_;
        cout = cout_;
        has_emb = emb_dim > 0;
        gn1.init(cin, groups);
        gn2.init(cout, groups);
        conv1.init(cin, cout, 3, rng);
        conv2.init(cout, cout, 3, rng);
        has_skip = cin != cout;
        if (has_skip) skip.init(cin, cout, 1, rng, 1.0f);
        if (has_emb) proj.init(emb_dim, cout, rng);
    }

    void reg(ParamRegistry& r, const std::string& p) {
        gn1.reg(r, p + ".gn1");
        gn2.reg(r, p + ".gn2");
        conv1.reg(r, p + ".conv1");
        conv2.reg(r, p + ".conv2");
        if (has_skip) skip.reg(r, p + ".skip");
        if (has_emb) proj.reg(r, p + ".proj");
    }

    void forward(const Tensor& x, const Tensor* emb, Tensor& y, bool train,
                 std::vector<float>& sa, std::vector<float>& sb) {
        Tensor a, b, h1, pe, g, u, h2;
        gn1.forward(x, a, train);
        s1.forward(a, b, train);
        conv1.forward(b, h1, train, sa);
        if (has_emb && emb) {
            proj.forward(*emb, pe, train);
            for (int ni = 0; ni < h1.n; ++ni)
                for (int c = 0; c < cout; ++c) {
                    const float bias = pe.at(ni, c, 0, 0);
                    float* hp = h1.chan(ni, c);
                    for (std::size_t i = 0; i < h1.plane(); ++i) hp[i] += bias;
                }
        }
        gn2.forward(h1, g, train);
        s2.forward(g, u, train);
        conv2.forward(u, h2, train, sa);
        if (has_skip) {
            Tensor sk;
            skip.forward(x, sk, train, sb);
            y = std::move(h2);
            add_inplace(y, sk);
        } else {
            y = std::move(h2);
            add_inplace(y, x);
        }
    }

    void backward(const Tensor& dy, Tensor& dx, Tensor* demb, std::vector<float>& sa,
                  std::vector<float>& sb) {
        Tensor du, dg, dh1, db, da, dmain, dskip;
        conv2.backward(dy, du, sa, sb);
        s2.backward(du, dg);
        gn2.backward(dg, dh1);
        if (has_emb && demb) {
            Tensor dpe(dh1.n, cout, 1, 1);
            for (int ni = 0; ni < dh1.n; ++ni)
                for (int c = 0; c < cout; ++c) {
                    const float* hp = dh1.chan(ni, c);
                    double s = 0.0;
                    for (std::size_t i = 0; i < dh1.plane(); ++i) s += hp[i];
                    dpe.at(ni, c, 0, 0) = float(s);
                }
            Tensor de;
            proj.backward(dpe, de);
            add_inplace(*demb, de);
        }
        conv1.backward(dh1, db, sa, sb);
        s1.backward(db, da);
        gn1.backward(da, dmain);
        if (has_skip) {
            skip.backward(dy, dskip, sa, sb);
            dx = std::move(dmain);
            add_inplace(dx, dskip);
        } else {
            dx = std::move(dmain);
            add_inplace(dx, dy);
        }
    }
};

/// Small encoder-decoder with skip connections; three downsamplings, channel
/// widths base*{1,2,4,6}. The final conv is zero-initialized.
struct UNet {
    UNetConfig cfg;
    Conv2d stem;
    ResBlock rb1, rb2, rb3, rb4, rb5, rb6, rb7;
    Conv2d red2, red1, red0;  // 1x1 reducers after skip concatenation
    GroupNorm gn_out;
    SiLU silu_out, silu_t1, silu_t2;
    Linear t_lin1, t_lin2;
    Conv2d head;
    ParamRegistry registry;

    // retained activations (train mode)
    Tensor s0_, r1_, r2_, temb_act_;
    int in_h = 0, in_w = 0;
    std::vector<float> sa_, sb_;

    void init(const UNetConfig& c, std::uint64_t seed) {
        cfg = c;
        Rng rng(substream_seed(seed, "nn/init"));
        const int w0 = c.base, w1 = 2 * c.base, w2 = 4 * c.base, w3 = 6 * c.base;
        stem.init(c.in_ch, w0, 3, rng);
        rb1.init(w0, w1, c.emb_dim, c.groups, rng);
        rb2.init(w1, w2, c.emb_dim, c.groups, rng);
        rb3.init(w2, w3, c.emb_dim, c.groups, rng);
        rb4.init(w3, w3, c.emb_dim, c.groups, rng);
        red2.init(w3 + w2, w2, 1, rng);
        rb5.init(w2, w2, c.emb_dim, c.groups, rng);
        red1.init(w2 + w1, w1, 1, rng);
        rb6.init(w1, w1, c.emb_dim, c.groups, rng);
        red0.init(w1 + w0, w0, 1, rng);
        rb7.init(w0, w0, c.emb_dim, c.groups, rng);
        gn_out.init(w0, c.groups);
        head.init_zero(w0, c.out_ch, 3);
        if (c.emb_dim > 0) {
            t_lin1.init(64, c.emb_dim, rng);
            t_lin2.init(c.emb_dim, c.emb_dim, rng);
        }
        registry.refs.clear();
        stem.reg(registry, "stem");
        rb1.reg(registry, "rb1");
        rb2.reg(registry, "rb2");
        rb3.reg(registry, "rb3");
        rb4.reg(registry, "rb4");
        red2.reg(registry, "red2");
        rb5.reg(registry, "rb5");
        red1.reg(registry, "red1");
        rb6.reg(registry, "rb6");
        red0.reg(registry, "red0");
        rb7.reg(registry, "rb7");
        gn_out.reg(registry, "gn_out");
        head.reg(registry, "head");
        if (c.emb_dim > 0) {
            t_lin1.reg(registry, "t_lin1");
            t_lin2.reg(registry, "t_lin2");
        }
    }

    void zero_grad() {
        for (auto& r : registry.refs) std::fill(r.g->begin(), r.g->end(), 0.0f);
    }

    void forward(const Tensor& x, const std::vector<int>& t, Tensor& y, bool train) {
        if (x.c != cfg.in_ch) throw DomainError("UNet: input channel mismatch");
        in_h = x.h;
        in_w = x.w;
        Tensor* embp = nullptr;
        if (cfg.emb_dim > 0) {
            Tensor sf = timestep_features(t, 64);
            Tensor e1, e1a, e2;
            t_lin1.forward(sf, e1, train);
            silu_t1.forward(e1, e1a, train);
            t_lin2.forward(e1a, e2, train);
            silu_t2.forward(e2, temb_act_, train);
            embp = &temb_act_;
        }
        Tensor d1, d2, d3, r3, r4, u2, c2, q2, p2, u1, c1, q1, p1, u0, c0, q0, p0, ho, hs;
        stem.forward(x, s0_, train, sa_);
        avgpool2(s0_, d1);
        rb1.forward(d1, embp, r1_, train, sa_, sb_);
        avgpool2(r1_, d2);
        rb2.forward(d2, embp, r2_, train, sa_, sb_);
        avgpool2(r2_, d3);
        rb3.forward(d3, embp, r3, train, sa_, sb_);
        rb4.forward(r3, embp, r4, train, sa_, sb_);
        upsample2(r4, u2);
        concat_channels(u2, r2_, c2);
        red2.forward(c2, q2, train, sa_);
        rb5.forward(q2, embp, p2, train, sa_, sb_);
        upsample2(p2, u1);
        concat_channels(u1, r1_, c1);
        red1.forward(c1, q1, train, sa_);
        rb6.forward(q1, embp, p1, train, sa_, sb_);
        upsample2(p1, u0);
        concat_channels(u0, s0_, c0);
        red0.forward(c0, q0, train, sa_);
        rb7.forward(q0, embp, p0, train, sa_, sb_);
        gn_out.forward(p0, ho, train);
        silu_out.forward(ho, hs, train);
        head.forward(hs, y, train, sa_);
    }

    /// Backward from dL/dy; parameter gradients accumulate into the registry.
    void backward(const Tensor& dy) {
        Tensor demb;
        Tensor* dembp = nullptr;
        if (cfg.emb_dim > 0) {
            demb = Tensor(dy.n, cfg.emb_dim, 1, 1);
            dembp = &demb;
        }
        Tensor dhs, dho, dp0, dq0, dc0, du0, ds0a, dp1, dq1, dc1, du1, dr1a, dp2, dq2, dc2,
            du2, dr2a, dr4, dr3, dd3, dr2b, dd2, dr1b, dd1, ds0b, dxin;
        head.backward(dy, dhs, sa_, sb_);
        silu_out.backward(dhs, dho);
        gn_out.backward(dho, dp0);
        rb7.backward(dp0, dq0, dembp, sa_, sb_);
        red0.backward(dq0, dc0, sa_, sb_);
        split_channels(dc0, 2 * cfg.base, du0, ds0a);
        upsample2_backward(du0, dp1);
        rb6.backward(dp1, dq1, dembp, sa_, sb_);
        red1.backward(dq1, dc1, sa_, sb_);
        split_channels(dc1, 4 * cfg.base, du1, dr1a);
        upsample2_backward(du1, dp2);
        rb5.backward(dp2, dq2, dembp, sa_, sb_);
        red2.backward(dq2, dc2, sa_, sb_);
        split_channels(dc2, 6 * cfg.base, du2, dr2a);
        upsample2_backward(du2, dr4);
        rb4.backward(dr4, dr3, dembp, sa_, sb_);
        rb3.backward(dr3, dd3, dembp, sa_, sb_);
        avgpool2_backward(dd3, r2_.h, r2_.w, dr2b);
        add_inplace(dr2a, dr2b);
        rb2.backward(dr2a, dd2, dembp, sa_, sb_);
        avgpool2_backward(dd2, r1_.h, r1_.w, dr1b);
        add_inplace(dr1a, dr1b);
        rb1.backward(dr1a, dd1, dembp, sa_, sb_);
        avgpool2_backward(dd1, s0_.h, s0_.w, ds0b);
        add_inplace(ds0a, ds0b);
        stem.backward(ds0a, dxin, sa_, sb_);
        if (cfg.emb_dim > 0) {
            Tensor de2, de1a, de1, dsf;
            silu_t2.backward(demb, de2);
            t_lin2.backward(de2, de1a);
            silu_t1.backward(de1a, de1);
            t_lin1.backward(de1, dsf);
        }
    }
};

}  // namespace ortho::nn
