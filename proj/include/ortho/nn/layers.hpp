#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ortho/core/error.hpp"
#include "ortho/core/rng.hpp"
#include "ortho/core/tensor.hpp"
#include "ortho/nn/gemm.hpp"

namespace ortho::nn {

/// Named view of one parameter blob and its gradient.
struct ParamRef {
    std::string name;
    std::vector<float>* w = nullptr;
    std::vector<float>* g = nullptr;
};

struct ParamRegistry {
    std::vector<ParamRef> refs;
    void add(const std::string& name, std::vector<float>& w, std::vector<float>& g) {
        refs.push_back({name, &w, &g});
    }
    size_t total() const {
        size_t s = 0;
        for (const auto& r : refs) s += r.w->size();
        return s;
    }
};

// ---------------------------------------------------------------------------
// im2col / col2im for 3x3 pad-1 convolutions (stride 1)

inline void im2col3(const float* x, int C, int H, int W, float* col) {
    const std::size_t plane = std::size_t(H) * W;
#pragma omp parallel for schedule(static)
    for (int kc = 0; kc < C * 9; ++kc) {
        const int ci = kc / 9;
        const int ky = (kc % 9) / 3 - 1;
        const int kx = (kc % 9) % 3 - 1;
        const float* src = x + std::size_t(ci) * plane;
        float* dst = col + std::size_t(kc) * plane;
        for (int y = 0; y < H; ++y) {
            const int sy = y + ky;
            if (sy < 0 || sy >= H) {
                for (int xx = 0; xx < W; ++xx) dst[std::size_t(y) * W + xx] = 0.0f;
                continue;
            }
            const float* srow = src + std::size_t(sy) * W;
            float* drow = dst + std::size_t(y) * W;
            for (int xx = 0; xx < W; ++xx) {
                const int sx = xx + kx;
                drow[xx] = (sx >= 0 && sx < W) ? srow[sx] : 0.0f;
            }
        }
    }
}

inline void col2im3_add(const float* col, int C, int H, int W, float* x) {
    const std::size_t plane = std::size_t(H) * W;
#pragma omp parallel for schedule(static)
    for (int ci = 0; ci < C; ++ci) {
        float* dst = x + std::size_t(ci) * plane;
        for (int k = 0; k < 9; ++k) {
            const int ky = k / 3 - 1;
            const int kx = k % 3 - 1;
            const float* src = col + (std::size_t(ci) * 9 + k) * plane;
            for (int y = 0; y < H; ++y) {
                const int sy = y + ky;
                if (sy < 0 || sy >= H) continue;
                float* drow = dst + std::size_t(sy) * W;
                const float* srow = src + std::size_t(y) * W;
                const int x0 = kx < 0 ? -kx : 0;
                const int x1 = kx > 0 ? W - kx : W;
                for (int xx = x0; xx < x1; ++xx) drow[xx + kx] += srow[xx];
            }
        }
    }
}

// ---------------------------------------------------------------------------

/// 2D convolution, kernel 1x1 or 3x3 (pad 1), stride 1.
struct Conv2d {
    int cin = 0, cout = 0, ksize = 3;
    std::vector<float> w, b;    // w: [cout][cin*k*k]
    std::vector<float> gw, gb;
    Tensor x_saved;

    void init(int cin_, int cout_, int k, Rng& rng, float gain = 1.0f) {
        cin = cin_;
        cout = cout_;
        ksize = k;
        const int fan_in = cin * k * k;
        w.resize(std::size_t(cout) * fan_in);
        b.assign(std::size_t(cout), 0.0f);
        gw.assign(w.size(), 0.0f);
        gb.assign(b.size(), 0.0f);
        const float std_dev = gain * std::sqrt(2.0f / float(fan_in));
        for (auto& v : w) v = float(rng.normal()) * std_dev;
    }

    void init_zero(int cin_, int cout_, int k) {
        cin = cin_;
        cout = cout_;
        ksize = k;
        w.assign(std::size_t(cout) * cin * k * k, 0.0f);
        b.assign(std::size_t(cout), 0.0f);
        gw.assign(w.size(), 0.0f);
        gb.assign(b.size(), 0.0f);
    }

    void reg(ParamRegistry& r, const std::string& prefix) {
        r.add(prefix + ".w", w, gw);
        r.add(prefix + ".b", b, gb);
    }

    void forward(const Tensor& x, Tensor& y, bool train, std::vector<float>& scratch) {
        y = Tensor(x.n, cout, x.h, x.w);
        const std::size_t plane = x.plane();
        const int K = cin * ksize * ksize;
        if (train) x_saved = x;
        for (int ni = 0; ni < x.n; ++ni) {
            const float* xin = x.chan(ni, 0);
            const float* colp = xin;
            if (ksize == 3) {
                scratch.resize(std::size_t(K) * plane);
                im2col3(xin, cin, x.h, x.w, scratch.data());
                colp = scratch.data();
            }
            gemm(cout, int(plane), K, w.data(), colp, y.chan(ni, 0), false);
            for (int co = 0; co < cout; ++co) {
                float* yc = y.chan(ni, co);
                const float bias = b[std::size_t(co)];
#pragma omp simd
                for (std::size_t i = 0; i < plane; ++i) yc[i] += bias;
            }
        }
    }

    void backward(const Tensor& dy, Tensor& dx, std::vector<float>& scratch,
                  std::vector<float>& scratch2) {
        const Tensor& x = x_saved;
        dx = Tensor(x.n, cin, x.h, x.w);
        const std::size_t plane = x.plane();
        const int K = cin * ksize * ksize;
        std::vector<float> wt(std::size_t(K) * cout);  // W^T (K x cout)
        for (int co = 0; co < cout; ++co)
            for (int k = 0; k < K; ++k)
                wt[std::size_t(k) * cout + co] = w[std::size_t(co) * K + k];
        for (int ni = 0; ni < x.n; ++ni) {
            const float* xin = x.chan(ni, 0);
            const float* colp = xin;
            if (ksize == 3) {
                scratch.resize(std::size_t(K) * plane);
                im2col3(xin, cin, x.h, x.w, scratch.data());
                colp = scratch.data();
            }
            // dW += dY * col^T ; db += row sums of dY
            gemm_nt(cout, K, int(plane), dy.chan(ni, 0), colp, gw.data(), true);
            for (int co = 0; co < cout; ++co) {
                const float* dyc = dy.chan(ni, co);
                double s = 0.0;
                for (std::size_t i = 0; i < plane; ++i) s += dyc[i];
                gb[std::size_t(co)] += float(s);
            }
            // dX = col2im(W^T * dY)
            scratch2.resize(std::size_t(K) * plane);
            gemm(K, int(plane), cout, wt.data(), dy.chan(ni, 0), scratch2.data(), false);
            float* dxp = dx.chan(ni, 0);
            if (ksize == 3) {
                col2im3_add(scratch2.data(), cin, x.h, x.w, dxp);
            } else {
                std::copy(scratch2.begin(), scratch2.begin() + std::ptrdiff_t(K * plane), dxp);
            }
        }
    }
};

/// Group normalization with affine parameters.
struct GroupNorm {
    int c = 0, groups = 4;
    float eps = 1e-5f;
    std::vector<float> gamma, beta, ggamma, gbeta;
    Tensor xhat_saved;
    std::vector<float> rstd_saved;  // per (n, group)

    void init(int c_, int groups_) {
        c = c_;
        groups = groups_;
        if (c % groups != 0) throw DomainError("GroupNorm: channels not divisible by groups");
        gamma.assign(std::size_t(c), 1.0f);
        beta.assign(std::size_t(c), 0.0f);
        ggamma.assign(std::size_t(c), 0.0f);
        gbeta.assign(std::size_t(c), 0.0f);
    }

    void reg(ParamRegistry& r, const std::string& prefix) {
        r.add(prefix + ".gamma", gamma, ggamma);
        r.add(prefix + ".beta", beta, gbeta);
    }

    void forward(const Tensor& x, Tensor& y, bool train) {
        y = Tensor(x.n, x.c, x.h, x.w);
        const int cg = c / groups;
        const std::size_t plane = x.plane();
        const std::size_t gsize = std::size_t(cg) * plane;
        if (train) {
            xhat_saved = Tensor(x.n, x.c, x.h, x.w);
            rstd_saved.assign(std::size_t(x.n) * groups, 0.0f);
        }
        for (int ni = 0; ni < x.n; ++ni) {
            for (int g = 0; g < groups; ++g) {
                const float* xp = x.chan(ni, g * cg);
                double sum = 0.0, sq = 0.0;
                for (std::size_t i = 0; i < gsize; ++i) {
                    sum += xp[i];
                    sq += double(xp[i]) * xp[i];
                }
                const double mean = sum / double(gsize);
                const double var = sq / double(gsize) - mean * mean;
                const float rstd = float(1.0 / std::sqrt(var + eps));
                const float fmean = float(mean);
                if (train) rstd_saved[std::size_t(ni) * groups + g] = rstd;
                for (int cc = 0; cc < cg; ++cc) {
                    const int ch = g * cg + cc;
                    const float* xc = x.chan(ni, ch);
                    float* yc = y.chan(ni, ch);
                    float* xh = train ? xhat_saved.chan(ni, ch) : nullptr;
                    const float ga = gamma[std::size_t(ch)], be = beta[std::size_t(ch)];
#pragma omp simd
                    for (std::size_t i = 0; i < plane; ++i) {
                        const float xn = (xc[i] - fmean) * rstd;
                        if (xh) xh[i] = xn;
                        yc[i] = ga * xn + be;
                    }
                }
            }
        }
    }

    void backward(const Tensor& dy, Tensor& dx) {
        const Tensor& xh = xhat_saved;
        dx = Tensor(dy.n, dy.c, dy.h, dy.w);
        const int cg = c / groups;
        const std::size_t plane = dy.plane();
        const double m = double(cg) * double(plane);
        for (int ni = 0; ni < dy.n; ++ni) {
            for (int g = 0; g < groups; ++g) {
                const float rstd = rstd_saved[std::size_t(ni) * groups + g];
                double sum_dxh = 0.0, sum_dxh_xh = 0.0;
                for (int cc = 0; cc < cg; ++cc) {
                    const int ch = g * cg + cc;
                    const float* dyc = dy.chan(ni, ch);
                    const float* xhc = xh.chan(ni, ch);
                    const float ga = gamma[std::size_t(ch)];
                    double sdy = 0.0, sdyx = 0.0;
                    for (std::size_t i = 0; i < plane; ++i) {
                        const double dxh = double(dyc[i]) * ga;
                        sdy += dxh;
                        sdyx += dxh * xhc[i];
                        ggamma[std::size_t(ch)] += float(double(dyc[i]) * xhc[i]);
                        gbeta[std::size_t(ch)] += dyc[i];
                    }
                    sum_dxh += sdy;
                    sum_dxh_xh += sdyx;
                }
                const float mean_dxh = float(sum_dxh / m);
                const float mean_dxh_xh = float(sum_dxh_xh / m);
                for (int cc = 0; cc < cg; ++cc) {
                    const int ch = g * cg + cc;
                    const float* dyc = dy.chan(ni, ch);
                    const float* xhc = xh.chan(ni, ch);
                    float* dxc = dx.chan(ni, ch);
                    const float ga = gamma[std::size_t(ch)];
#pragma omp simd
                    for (std::size_t i = 0; i < plane; ++i) {
                        const float dxh = dyc[i] * ga;
                        dxc[i] = rstd * (dxh - mean_dxh - xhc[i] * mean_dxh_xh);
                    }
                }
            }
        }
    }
};

/// x * sigmoid(x).
struct SiLU {
    Tensor x_saved;
    void forward(const Tensor& x, Tensor& y, bool train) {
        y = Tensor(x.n, x.c, x.h, x.w);
        if (train) x_saved = x;
#pragma omp parallel for schedule(static)
        for (long i = 0; i < long(x.size()); ++i) {
            const float v = x.v[std::size_t(i)];
            y.v[std::size_t(i)] = v / (1.0f + std::exp(-v));
        }
    }
    void backward(const Tensor& dy, Tensor& dx) {
        const Tensor& x = x_saved;
        dx = Tensor(x.n, x.c, x.h, x.w);
#pragma omp parallel for schedule(static)
        for (long i = 0; i < long(x.size()); ++i) {
            const float v = x.v[std::size_t(i)];
            const float s = 1.0f / (1.0f + std::exp(-v));
            dx.v[std::size_t(i)] = dy.v[std::size_t(i)] * (s + v * s * (1.0f - s));
        }
    }
};

struct Linear {
    int in = 0, out = 0;
    std::vector<float> w, b, gw, gb;  // w: [out][in]
    Tensor x_saved;                   // x as (n, in, 1, 1)

    void init(int in_, int out_, Rng& rng) {
        in = in_;
        out = out_;
        w.resize(std::size_t(out) * in);
        b.assign(std::size_t(out), 0.0f);
        gw.assign(w.size(), 0.0f);
        gb.assign(b.size(), 0.0f);
        const float std_dev = std::sqrt(2.0f / float(in));
        for (auto& v : w) v = float(rng.normal()) * std_dev;
    }

    void reg(ParamRegistry& r, const std::string& prefix) {
        r.add(prefix + ".w", w, gw);
        r.add(prefix + ".b", b, gb);
    }

    void forward(const Tensor& x, Tensor& y, bool train) {
        y = Tensor(x.n, out, 1, 1);
        if (train) x_saved = x;
        for (int ni = 0; ni < x.n; ++ni) {
            const float* xp = x.chan(ni, 0);
            float* yp = y.chan(ni, 0);
            for (int o = 0; o < out; ++o) {
                const float* wr = w.data() + std::size_t(o) * in;
                float s = b[std::size_t(o)];
                for (int i = 0; i < in; ++i) s += wr[i] * xp[i];
                yp[o] = s;
            }
        }
    }

    void backward(const Tensor& dy, Tensor& dx) {
        const Tensor& x = x_saved;
        dx = Tensor(x.n, in, 1, 1);
        dx.zero();
        for (int ni = 0; ni < x.n; ++ni) {
            const float* xp = x.chan(ni, 0);
            const float* dyp = dy.chan(ni, 0);
            float* dxp = dx.chan(ni, 0);
            for (int o = 0; o < out; ++o) {
                const float d = dyp[o];
                gb[std::size_t(o)] += d;
                float* gwr = gw.data() + std::size_t(o) * in;
                const float* wr = w.data() + std::size_t(o) * in;
                for (int i = 0; i < in; ++i) {
                    gwr[i] += d * xp[i];
                    dxp[i] += d * wr[i];
                }
            }
        }
    }
};

inline void avgpool2(const Tensor& x, Tensor& y) {
    y = Tensor(x.n, x.c, x.h / 2, x.w / 2);
#pragma omp parallel for schedule(static)
    for (long nc = 0; nc < long(x.n) * x.c; ++nc) {
        const float* xp = x.v.data() + std::size_t(nc) * x.plane();
        float* yp = y.v.data() + std::size_t(nc) * y.plane();
        for (int yy = 0; yy < y.h; ++yy)
            for (int xx = 0; xx < y.w; ++xx) {
                const std::size_t s = std::size_t(2 * yy) * x.w + 2 * xx;
                yp[std::size_t(yy) * y.w + xx] =
                    0.25f * (xp[s] + xp[s + 1] + xp[s + x.w] + xp[s + x.w + 1]);
            }
    }
}

inline void avgpool2_backward(const Tensor& dy, int in_h, int in_w, Tensor& dx) {
    dx = Tensor(dy.n, dy.c, in_h, in_w);
#pragma omp parallel for schedule(static)
    for (long nc = 0; nc < long(dy.n) * dy.c; ++nc) {
        const float* dyp = dy.v.data() + std::size_t(nc) * dy.plane();
        float* dxp = dx.v.data() + std::size_t(nc) * dx.plane();
        for (int yy = 0; yy < dy.h; ++yy)
            for (int xx = 0; xx < dy.w; ++xx) {
                const float d = 0.25f * dyp[std::size_t(yy) * dy.w + xx];
                const std::size_t s = std::size_t(2 * yy) * in_w + 2 * xx;
                dxp[s] = d;
                dxp[s + 1] = d;
                dxp[s + in_w] = d;
                dxp[s + in_w + 1] = d;
            }
    }
}

inline void upsample2(const Tensor& x, Tensor& y) {
    y = Tensor(x.n, x.c, x.h * 2, x.w * 2);
#pragma omp parallel for schedule(static)
    for (long nc = 0; nc < long(x.n) * x.c; ++nc) {
        const float* xp = x.v.data() + std::size_t(nc) * x.plane();
        float* yp = y.v.data() + std::size_t(nc) * y.plane();
        for (int yy = 0; yy < y.h; ++yy) {
            const float* xrow = xp + std::size_t(yy / 2) * x.w;
            float* yrow = yp + std::size_t(yy) * y.w;
            for (int xx = 0; xx < y.w; ++xx) yrow[xx] = xrow[xx / 2];
        }
    }
}

inline void upsample2_backward(const Tensor& dy, Tensor& dx) {
    dx = Tensor(dy.n, dy.c, dy.h / 2, dy.w / 2);
#pragma omp parallel for schedule(static)
    for (long nc = 0; nc < long(dy.n) * dy.c; ++nc) {
        const float* dyp = dy.v.data() + std::size_t(nc) * dy.plane();
        float* dxp = dx.v.data() + std::size_t(nc) * dx.plane();
        for (int yy = 0; yy < dx.h; ++yy)
            for (int xx = 0; xx < dx.w; ++xx) {
                const std::size_t s = std::size_t(2 * yy) * dy.w + 2 * xx;
                dxp[std::size_t(yy) * dx.w + xx] =
                    dyp[s] + dyp[s + 1] + dyp[s + dy.w] + dyp[s + dy.w + 1];
            }
    }
}

inline void concat_channels(const Tensor& a, const Tensor& b, Tensor& y) {
    y = Tensor(a.n, a.c + b.c, a.h, a.w);
    for (int ni = 0; ni < a.n; ++ni) {
        std::copy(a.chan(ni, 0), a.chan(ni, 0) + std::size_t(a.c) * a.plane(), y.chan(ni, 0));
        std::copy(b.chan(ni, 0), b.chan(ni, 0) + std::size_t(b.c) * b.plane(), y.chan(ni, a.c));
    }
}

inline void split_channels(const Tensor& dy, int ca, Tensor& da, Tensor& db) {
    da = Tensor(dy.n, ca, dy.h, dy.w);
    db = Tensor(dy.n, dy.c - ca, dy.h, dy.w);
    for (int ni = 0; ni < dy.n; ++ni) {
        std::copy(dy.chan(ni, 0), dy.chan(ni, 0) + std::size_t(ca) * dy.plane(), da.chan(ni, 0));
        std::copy(dy.chan(ni, ca), dy.chan(ni, ca) + std::size_t(dy.c - ca) * dy.plane(),
                  db.chan(ni, 0));
    }
}

}  // namespace ortho::nn
