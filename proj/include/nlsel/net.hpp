#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "nlsel/errors.hpp"
#include "nlsel/io.hpp"
#include "nlsel/prng.hpp"
#include "nlsel/tensor.hpp"

namespace nlsel {

static_assert(std::endian::native == std::endian::little,
              "weight and dataset formats are little-endian");

enum class Activation : uint8_t { sigmoid = 0, clamp = 1 };

inline Activation activation_from_string(const std::string& s) {
    if (s == "sigmoid") return Activation::sigmoid;
    if (s == "clamp") return Activation::clamp;
    throw DataError("unknown activation '" + s + "' (expected sigmoid or clamp)");
}
inline std::string to_string(Activation a) {
    return a == Activation::sigmoid ? "sigmoid" : "clamp";
}

/// Topology of a selective-removal network. The encoder halves rows x width
/// per level, so both must be divisible by 2^levels.
struct NetConfig {
    int levels = 3;
    int base_channels = 16;
    int rows = 32;
    int width = 1024;
    Activation output_activation = Activation::clamp;
    int order = 2; // which nonlinearity order this net removes; tagged in weight files

    void validate() const {
        if (levels < 1 || levels > 6) throw DataError("net: levels must be in [1, 6]");
        if (base_channels < 1) throw DataError("net: base_channels must be positive");
        if (order != 2 && order != 3) throw DataError("net: order must be 2 or 3");
        const int div = 1 << levels;
        if (rows <= 0 || rows % div != 0 || width <= 0 || width % div != 0)
            throw DataError("net: rows and width must be divisible by 2^levels");
    }

    static NetConfig full(int order) { return NetConfig{3, 16, 32, 1024, Activation::clamp, order}; }
    static NetConfig toy(int order) { return NetConfig{3, 16, 16, 256, Activation::clamp, order}; }
};

/// One convolution's parameters (or an identically-shaped gradient/moment).
template <typename T>
struct ConvParam {
    int co = 0, ci = 0, kh = 0, kw = 0;
    std::vector<T> w;
    std::vector<T> bias;

    ConvParam() = default;
    ConvParam(int co_, int ci_, int kh_, int kw_)
        : co(co_), ci(ci_), kh(kh_), kw(kw_),
          w(static_cast<std::size_t>(co_) * ci_ * kh_ * kw_, T(0)), bias(co_, T(0)) {}

    std::size_t param_count() const { return w.size() + bias.size(); }
    void zero() {
        std::fill(w.begin(), w.end(), T(0));
        std::fill(bias.begin(), bias.end(), T(0));
    }
    bool same_shape(const ConvParam& o) const {
        return co == o.co && ci == o.ci && kh == o.kh && kw == o.kw;
    }
};

// ---------------------------------------------------------------------------
// Layer primitives. Free functions so each one can be gradient-checked in
// isolation. All loops keep the innermost index contiguous (width axis) so
// the compiler can vectorize them.
// ---------------------------------------------------------------------------
namespace ops {

/// Same-padding 2D convolution, stride 1, zero padding of kh/2 x kw/2.
template <typename T>
void conv_forward(const Tensor4<T>& in, const ConvParam<T>& p, Tensor4<T>& out) {
    if (in.c != p.ci) throw DataError("conv: channel mismatch " + in.shape_str());
    const int ph = p.kh / 2, pw = p.kw / 2;
    out = Tensor4<T>(in.b, p.co, in.h, in.w);
    for (int bi = 0; bi < in.b; ++bi) {
        for (int co = 0; co < p.co; ++co) {
            T* op = out.plane(bi, co);
            const T bv = p.bias[co];
            for (int i = 0; i < in.h * in.w; ++i) op[i] = bv;
            for (int ci = 0; ci < p.ci; ++ci) {
                const T* ip = in.plane(bi, ci);
                const T* wk = p.w.data() + (static_cast<std::size_t>(co) * p.ci + ci) * p.kh * p.kw;
                for (int ky = 0; ky < p.kh; ++ky) {
                    const int dy = ky - ph;
                    const int y0 = std::max(0, -dy), y1 = std::min(in.h, in.h - dy);
                    for (int kx = 0; kx < p.kw; ++kx) {
                        const int dx = kx - pw;
                        const T wv = wk[ky * p.kw + kx];
                        const int x0 = std::max(0, -dx), x1 = std::min(in.w, in.w - dx);
                        for (int y = y0; y < y1; ++y) {
                            T* orow = op + static_cast<std::size_t>(y) * in.w;
                            const T* irow = ip + static_cast<std::size_t>(y + dy) * in.w + dx;
                            for (int x = x0; x < x1; ++x) orow[x] += wv * irow[x];
                        }
                    }
                }
            }
        }
    }
}

/// Gradients of conv_forward. d_in may be null when the input gradient is not
/// needed (first layer). d_p accumulates, callers zero it first.
template <typename T>
void conv_backward(const Tensor4<T>& in, const ConvParam<T>& p, const Tensor4<T>& d_out,
                   Tensor4<T>* d_in, ConvParam<T>& d_p) {
    const int ph = p.kh / 2, pw = p.kw / 2;
    if (d_in) *d_in = Tensor4<T>(in.b, in.c, in.h, in.w);
    for (int bi = 0; bi < in.b; ++bi) {
        for (int co = 0; co < p.co; ++co) {
            const T* dop = d_out.plane(bi, co);
            T acc = T(0);
            for (int i = 0; i < in.h * in.w; ++i) acc += dop[i];
            d_p.bias[co] += acc;
            for (int ci = 0; ci < p.ci; ++ci) {
                const T* ip = in.plane(bi, ci);
                T* dip = d_in ? d_in->plane(bi, ci) : nullptr;
                T* dwk = d_p.w.data() + (static_cast<std::size_t>(co) * p.ci + ci) * p.kh * p.kw;
                const T* wk = p.w.data() + (static_cast<std::size_t>(co) * p.ci + ci) * p.kh * p.kw;
                for (int ky = 0; ky < p.kh; ++ky) {
                    const int dy = ky - ph;
                    const int y0 = std::max(0, -dy), y1 = std::min(in.h, in.h - dy);
                    for (int kx = 0; kx < p.kw; ++kx) {
                        const int dx = kx - pw;
                        const int x0 = std::max(0, -dx), x1 = std::min(in.w, in.w - dx);
                        T wacc = T(0);
                        const T wv = wk[ky * p.kw + kx];
                        for (int y = y0; y < y1; ++y) {
                            const T* dorow = dop + static_cast<std::size_t>(y) * in.w;
                            const T* irow = ip + static_cast<std::size_t>(y + dy) * in.w + dx;
                            for (int x = x0; x < x1; ++x) wacc += dorow[x] * irow[x];
                            if (dip) {
                                T* dirow = dip + static_cast<std::size_t>(y + dy) * in.w + dx;
                                for (int x = x0; x < x1; ++x) dirow[x] += wv * dorow[x];
                            }
                        }
                        dwk[ky * p.kw + kx] += wacc;
                    }
                }
            }
        }
    }
}

template <typename T>
void relu_inplace(Tensor4<T>& t) {
    for (auto& x : t.data) x = x > T(0) ? x : T(0);
}

/// Masks d by the forward output: gradient flows only where out > 0.
template <typename T>
void relu_backward_inplace(Tensor4<T>& d, const Tensor4<T>& out) {
    for (std::size_t i = 0; i < d.data.size(); ++i)
        if (!(out.data[i] > T(0))) d.data[i] = T(0);
}

/// Non-overlapping max pooling with kernel (kh, kw) == stride. `argmax`
/// records the flat data index of the chosen element; ties resolve to the
/// first maximal element in row-major scan order.
template <typename T>
void maxpool_forward(const Tensor4<T>& in, int kh, int kw, Tensor4<T>& out,
                     std::vector<int>& argmax) {
    if (in.h % kh != 0 || in.w % kw != 0) throw DataError("maxpool: shape not divisible by kernel");
    out = Tensor4<T>(in.b, in.c, in.h / kh, in.w / kw);
    argmax.assign(out.size(), 0);
    std::size_t oi = 0;
    for (int bi = 0; bi < in.b; ++bi)
        for (int ci = 0; ci < in.c; ++ci) {
            const T* ip = in.plane(bi, ci);
            const std::size_t base =
                (static_cast<std::size_t>(bi) * in.c + ci) * in.h * in.w;
            for (int oy = 0; oy < out.h; ++oy)
                for (int ox = 0; ox < out.w; ++ox) {
                    T best = ip[static_cast<std::size_t>(oy) * kh * in.w + ox * kw];
                    int best_idx = oy * kh * in.w + ox * kw;
                    for (int dy = 0; dy < kh; ++dy)
                        for (int dx = 0; dx < kw; ++dx) {
                            const int idx = (oy * kh + dy) * in.w + ox * kw + dx;
                            if (ip[idx] > best) {
                                best = ip[idx];
                                best_idx = idx;
                            }
                        }
                    out.data[oi] = best;
                    argmax[oi] = static_cast<int>(base) + best_idx;
                    ++oi;
                }
        }
}

template <typename T>
void maxpool_backward(const Tensor4<T>& d_out, const std::vector<int>& argmax, Tensor4<T>& d_in) {
    for (std::size_t i = 0; i < d_out.data.size(); ++i)
        d_in.data[static_cast<std::size_t>(argmax[i])] += d_out.data[i];
}

/// Nearest-neighbor x2 upsampling.
template <typename T>
void upsample2_forward(const Tensor4<T>& in, Tensor4<T>& out) {
    out = Tensor4<T>(in.b, in.c, in.h * 2, in.w * 2);
    for (int bi = 0; bi < in.b; ++bi)
        for (int ci = 0; ci < in.c; ++ci) {
            const T* ip = in.plane(bi, ci);
            T* op = out.plane(bi, ci);
            for (int y = 0; y < out.h; ++y) {
                const T* irow = ip + static_cast<std::size_t>(y / 2) * in.w;
                T* orow = op + static_cast<std::size_t>(y) * out.w;
                for (int x = 0; x < out.w; ++x) orow[x] = irow[x / 2];
            }
        }
}

template <typename T>
void upsample2_backward(const Tensor4<T>& d_out, Tensor4<T>& d_in) {
    d_in = Tensor4<T>(d_out.b, d_out.c, d_out.h / 2, d_out.w / 2);
    for (int bi = 0; bi < d_out.b; ++bi)
        for (int ci = 0; ci < d_out.c; ++ci) {
            const T* dop = d_out.plane(bi, ci);
            T* dip = d_in.plane(bi, ci);
            for (int y = 0; y < d_out.h; ++y) {
                const T* dorow = dop + static_cast<std::size_t>(y) * d_out.w;
                T* dirow = dip + static_cast<std::size_t>(y / 2) * d_in.w;
                for (int x = 0; x < d_out.w; ++x) dirow[x / 2] += dorow[x];
            }
        }
}

/// Channel concatenation [a; b].
template <typename T>
void concat_forward(const Tensor4<T>& a, const Tensor4<T>& b, Tensor4<T>& out) {
    if (a.b != b.b || a.h != b.h || a.w != b.w) throw DataError("concat: shape mismatch");
    out = Tensor4<T>(a.b, a.c + b.c, a.h, a.w);
    for (int bi = 0; bi < a.b; ++bi) {
        std::copy(a.plane(bi, 0), a.plane(bi, 0) + static_cast<std::size_t>(a.c) * a.h * a.w,
                  out.plane(bi, 0));
        std::copy(b.plane(bi, 0), b.plane(bi, 0) + static_cast<std::size_t>(b.c) * b.h * b.w,
                  out.plane(bi, a.c));
    }
}

template <typename T>
void concat_backward(const Tensor4<T>& d_out, Tensor4<T>& d_a, Tensor4<T>& d_b) {
    for (int bi = 0; bi < d_out.b; ++bi) {
        std::copy(d_out.plane(bi, 0),
                  d_out.plane(bi, 0) + static_cast<std::size_t>(d_a.c) * d_a.h * d_a.w,
                  d_a.plane(bi, 0));
        std::copy(d_out.plane(bi, d_a.c),
                  d_out.plane(bi, d_a.c) + static_cast<std::size_t>(d_b.c) * d_b.h * d_b.w,
                  d_b.plane(bi, 0));
    }
}

template <typename T>
void sigmoid_inplace(Tensor4<T>& t) {
    for (auto& x : t.data) x = T(1) / (T(1) + std::exp(-x));
}

/// d/dx sigmoid from the forward output.
template <typename T>
void sigmoid_backward_inplace(Tensor4<T>& d, const Tensor4<T>& out) {
    for (std::size_t i = 0; i < d.data.size(); ++i)
        d.data[i] *= out.data[i] * (T(1) - out.data[i]);
}

template <typename T>
void clamp01_inplace(Tensor4<T>& t) {
    for (auto& x : t.data) x = std::min(T(1), std::max(T(0), x));
}

/// Gradient passes only strictly inside (0, 1) of the pre-activation.
template <typename T>
void clamp01_backward_inplace(Tensor4<T>& d, const Tensor4<T>& pre) {
    for (std::size_t i = 0; i < d.data.size(); ++i)
        if (!(pre.data[i] > T(0) && pre.data[i] < T(1))) d.data[i] = T(0);
}

} // namespace ops

// ---------------------------------------------------------------------------
// Network
// ---------------------------------------------------------------------------

/// Activation cache of one forward pass, reused across calls to avoid
/// reallocating; consumed by backward().
template <typename T>
struct Workspace {
    Tensor4<T> input;
    std::vector<Tensor4<T>> enc_a, enc_b, pooled;
    std::vector<std::vector<int>> pool_idx;
    Tensor4<T> bott_a, bott_b;
    std::vector<Tensor4<T>> upsampled, upconv_out, cat, dec_a, dec_b;
    Tensor4<T> rowpooled;
    std::vector<int> rowpool_idx;
    Tensor4<T> head_pre;
    Tensor4<T> output;
};

/// Parameter gradients, shaped like Network::params.
template <typename T>
using Gradients = std::vector<ConvParam<T>>;

/// U-Net-style regressor mapping a (B, 1, rows, width) stack to a (B, width)
/// amplitude in [0, 1].
///
/// Encoder: `levels` double-conv(3x3, ReLU) blocks with 2x2 max-pool between.
/// Bottleneck: double-conv. Decoder per level: x2 nearest upsample, 3x3 conv,
/// skip concatenation, double-conv. Head: max-pool over the full row axis,
/// 1x1 conv to one channel, output activation into [0, 1].
template <typename T>
class Network {
  public:
    NetConfig cfg;
    std::vector<ConvParam<T>> params;
    std::vector<ConvParam<T>> adam_m, adam_v;
    uint64_t adam_step_count = 0;

    Network() = default;

    explicit Network(const NetConfig& config, uint64_t init_seed = 0) : cfg(config) {
        cfg.validate();
        const int L = cfg.levels, base = cfg.base_channels;
        auto ch = [&](int lvl) { return base << lvl; };
        for (int lvl = 0; lvl < L; ++lvl) {
            params.emplace_back(ch(lvl), lvl == 0 ? 1 : ch(lvl - 1), 3, 3);
            params.emplace_back(ch(lvl), ch(lvl), 3, 3);
        }
        params.emplace_back(ch(L), ch(L - 1), 3, 3);
        params.emplace_back(ch(L), ch(L), 3, 3);
        for (int lvl = L - 1; lvl >= 0; --lvl) {
            params.emplace_back(ch(lvl), ch(lvl + 1), 3, 3); // upconv
            params.emplace_back(ch(lvl), 2 * ch(lvl), 3, 3);
            params.emplace_back(ch(lvl), ch(lvl), 3, 3);
        }
        params.emplace_back(1, base, 1, 1); // head
        init_parameters(init_seed);
        reset_optimizer();
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& p : params) n += p.param_count();
        return n;
    }

    /// He-uniform conv weights, zero biases. The head starts at a flat 0.1
    /// output: a zero head with He weights saturates the output activation on
    /// sparse targets and MAE training never recovers (observed on desk-scale
    /// runs), so its weights start at zero and its bias at 0.1.
    void init_parameters(uint64_t seed) {
        Xoshiro256 rng(seed);
        for (std::size_t i = 0; i < params.size(); ++i) {
            auto& p = params[i];
            const bool head = (i + 1 == params.size());
            if (head) {
                p.zero();
                std::fill(p.bias.begin(), p.bias.end(), T(0.1));
                continue;
            }
            const double fan_in = static_cast<double>(p.ci) * p.kh * p.kw;
            const double limit = std::sqrt(6.0 / fan_in);
            for (auto& w : p.w) w = static_cast<T>(rng.uniform(-limit, limit));
            std::fill(p.bias.begin(), p.bias.end(), T(0));
        }
    }

    void reset_optimizer() {
        adam_m.clear();
        adam_v.clear();
        for (const auto& p : params) {
            adam_m.emplace_back(p.co, p.ci, p.kh, p.kw);
            adam_v.emplace_back(p.co, p.ci, p.kh, p.kw);
        }
        adam_step_count = 0;
    }

    Gradients<T> make_gradients() const {
        Gradients<T> g;
        for (const auto& p : params) g.emplace_back(p.co, p.ci, p.kh, p.kw);
        return g;
    }

    /// Forward pass; activations land in `ws`. Returns ws.output, shaped
    /// (B, 1, 1, width).
    const Tensor4<T>& forward(const Tensor4<T>& input, Workspace<T>& ws) const {
        if (input.c != 1 || input.h != cfg.rows || input.w != cfg.width)
            throw DataError("net forward: input " + input.shape_str() + " does not match config (1," +
                            std::to_string(cfg.rows) + "," + std::to_string(cfg.width) + ")");
        check_finite_params();
        const int L = cfg.levels;
        ws.enc_a.resize(L);
        ws.enc_b.resize(L);
        ws.pooled.resize(L);
        ws.pool_idx.resize(L);
        ws.upsampled.resize(L);
        ws.upconv_out.resize(L);
        ws.cat.resize(L);
        ws.dec_a.resize(L);
        ws.dec_b.resize(L);
        ws.input = input;

        const Tensor4<T>* cur = &ws.input;
        for (int lvl = 0; lvl < L; ++lvl) {
            ops::conv_forward(*cur, params[2 * lvl], ws.enc_a[lvl]);
            ops::relu_inplace(ws.enc_a[lvl]);
            ops::conv_forward(ws.enc_a[lvl], params[2 * lvl + 1], ws.enc_b[lvl]);
            ops::relu_inplace(ws.enc_b[lvl]);
            ops::maxpool_forward(ws.enc_b[lvl], 2, 2, ws.pooled[lvl], ws.pool_idx[lvl]);
            cur = &ws.pooled[lvl];
        }
        ops::conv_forward(*cur, params[2 * L], ws.bott_a);
        ops::relu_inplace(ws.bott_a);
        ops::conv_forward(ws.bott_a, params[2 * L + 1], ws.bott_b);
        ops::relu_inplace(ws.bott_b);

        cur = &ws.bott_b;
        for (int lvl = L - 1; lvl >= 0; --lvl) {
            ops::upsample2_forward(*cur, ws.upsampled[lvl]);
            ops::conv_forward(ws.upsampled[lvl], params[upconv_index(lvl)], ws.upconv_out[lvl]);
            ops::concat_forward(ws.enc_b[lvl], ws.upconv_out[lvl], ws.cat[lvl]);
            ops::conv_forward(ws.cat[lvl], params[upconv_index(lvl) + 1], ws.dec_a[lvl]);
            ops::relu_inplace(ws.dec_a[lvl]);
            ops::conv_forward(ws.dec_a[lvl], params[upconv_index(lvl) + 2], ws.dec_b[lvl]);
            ops::relu_inplace(ws.dec_b[lvl]);
            cur = &ws.dec_b[lvl];
        }
        ops::maxpool_forward(*cur, cfg.rows, 1, ws.rowpooled, ws.rowpool_idx);
        ops::conv_forward(ws.rowpooled, params.back(), ws.head_pre);
        ws.output = ws.head_pre;
        if (cfg.output_activation == Activation::sigmoid)
            ops::sigmoid_inplace(ws.output);
        else
            ops::clamp01_inplace(ws.output);
        return ws.output;
    }

    /// Reverse pass over the tape in `ws`; `d_output` is dLoss/dOutput.
    /// Gradients accumulate into `grads` (zeroed by the caller).
    void backward(const Workspace<T>& ws, Tensor4<T> d_output, Gradients<T>& grads) const {
        const int L = cfg.levels;
        if (cfg.output_activation == Activation::sigmoid)
            ops::sigmoid_backward_inplace(d_output, ws.output);
        else
            ops::clamp01_backward_inplace(d_output, ws.head_pre);

        Tensor4<T> d_rowpooled;
        ops::conv_backward(ws.rowpooled, params.back(), d_output, &d_rowpooled, grads.back());

        Tensor4<T> d_cur(ws.dec_b[0].b, ws.dec_b[0].c, ws.dec_b[0].h, ws.dec_b[0].w);
        ops::maxpool_backward(d_rowpooled, ws.rowpool_idx, d_cur);

        // decoder, level 0 (full resolution) down to the bottleneck; the skip
        // gradients are held back for the encoder sweep
        std::vector<Tensor4<T>> d_skip(L);
        for (int lvl = 0; lvl < L; ++lvl) {
            const int ui = upconv_index(lvl);
            ops::relu_backward_inplace(d_cur, ws.dec_b[lvl]);
            Tensor4<T> d_dec_a;
            ops::conv_backward(ws.dec_a[lvl], params[ui + 2], d_cur, &d_dec_a, grads[ui + 2]);
            ops::relu_backward_inplace(d_dec_a, ws.dec_a[lvl]);
            Tensor4<T> d_cat;
            ops::conv_backward(ws.cat[lvl], params[ui + 1], d_dec_a, &d_cat, grads[ui + 1]);
            d_skip[lvl] = Tensor4<T>(ws.enc_b[lvl].b, ws.enc_b[lvl].c, ws.enc_b[lvl].h,
                                     ws.enc_b[lvl].w);
            Tensor4<T> d_upconv(ws.upconv_out[lvl].b, ws.upconv_out[lvl].c, ws.upconv_out[lvl].h,
                                ws.upconv_out[lvl].w);
            ops::concat_backward(d_cat, d_skip[lvl], d_upconv);
            Tensor4<T> d_upsampled;
            ops::conv_backward(ws.upsampled[lvl], params[ui], d_upconv, &d_upsampled, grads[ui]);
            ops::upsample2_backward(d_upsampled, d_cur); // gradient of dec_b[lvl+1] or bott_b
        }

        // bottleneck
        ops::relu_backward_inplace(d_cur, ws.bott_b);
        Tensor4<T> d_bott_a;
        ops::conv_backward(ws.bott_a, params[2 * L + 1], d_cur, &d_bott_a, grads[2 * L + 1]);
        ops::relu_backward_inplace(d_bott_a, ws.bott_a);
        Tensor4<T> d_pooled;
        ops::conv_backward(ws.pooled[L - 1], params[2 * L], d_bott_a, &d_pooled, grads[2 * L]);

        // encoder, deepest level back to the input; each enc_b receives the
        // pooled-path gradient plus its stored skip gradient
        for (int lvl = L - 1; lvl >= 0; --lvl) {
            Tensor4<T> d_enc_b = std::move(d_skip[lvl]);
            ops::maxpool_backward(d_pooled, ws.pool_idx[lvl], d_enc_b);
            ops::relu_backward_inplace(d_enc_b, ws.enc_b[lvl]);
            Tensor4<T> d_enc_a;
            ops::conv_backward(ws.enc_a[lvl], params[2 * lvl + 1], d_enc_b, &d_enc_a,
                               grads[2 * lvl + 1]);
            ops::relu_backward_inplace(d_enc_a, ws.enc_a[lvl]);
            if (lvl == 0) {
                ops::conv_backward(ws.input, params[0], d_enc_a, nullptr, grads[0]);
                break;
            }
            ops::conv_backward(ws.pooled[lvl - 1], params[2 * lvl], d_enc_a, &d_pooled,
                               grads[2 * lvl]);
        }
    }

    void check_finite_params() const {
        for (const auto& p : params) {
            for (T x : p.w)
                if (!std::isfinite(static_cast<double>(x)))
                    throw NumericError("net: non-finite parameter");
            for (T x : p.bias)
                if (!std::isfinite(static_cast<double>(x)))
                    throw NumericError("net: non-finite parameter");
        }
    }

  private:
    int upconv_index(int lvl) const { return 2 * cfg.levels + 2 + 3 * (cfg.levels - 1 - lvl); }
};

// ---------------------------------------------------------------------------
// Weight file ("NLNW", version 1, little-endian)
//
//   magic "NLNW" | u16 version | u8 order | u16 levels | u16 base_channels |
//   u16 rows | u16 width | u8 activation | u16 layer_count |
//   per layer: u8 kind (1 = conv2d) | u16 co | u16 ci | u16 kh | u16 kw |
//   per layer: f32 weights, f32 bias | Adam m (same layout) | Adam v |
//   u64 step counter
// ---------------------------------------------------------------------------

constexpr uint16_t weight_format_version = 1;

namespace detail {

inline void write_f32_span(std::ostream& out, const std::vector<float>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(float)));
}

inline void read_f32_span(std::istream& in, std::vector<float>& v, const std::string& what) {
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(float)));
    if (in.gcount() != static_cast<std::streamsize>(v.size() * sizeof(float)))
        throw DataError("weight file: truncated " + what);
}

} // namespace detail

inline void save_weights(const Network<float>& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);
    out.write("NLNW", 4);
    write_pod<uint16_t>(out, weight_format_version);
    write_pod<uint8_t>(out, static_cast<uint8_t>(net.cfg.order));
    write_pod<uint16_t>(out, static_cast<uint16_t>(net.cfg.levels));
    write_pod<uint16_t>(out, static_cast<uint16_t>(net.cfg.base_channels));
    write_pod<uint16_t>(out, static_cast<uint16_t>(net.cfg.rows));
    write_pod<uint16_t>(out, static_cast<uint16_t>(net.cfg.width));
    write_pod<uint8_t>(out, static_cast<uint8_t>(net.cfg.output_activation));
    write_pod<uint16_t>(out, static_cast<uint16_t>(net.params.size()));
    for (const auto& p : net.params) {
        write_pod<uint8_t>(out, 1);
        write_pod<uint16_t>(out, static_cast<uint16_t>(p.co));
        write_pod<uint16_t>(out, static_cast<uint16_t>(p.ci));
        write_pod<uint16_t>(out, static_cast<uint16_t>(p.kh));
        write_pod<uint16_t>(out, static_cast<uint16_t>(p.kw));
    }
    for (const auto& p : net.params) {
        detail::write_f32_span(out, p.w);
        detail::write_f32_span(out, p.bias);
    }
    for (const auto& m : net.adam_m) {
        detail::write_f32_span(out, m.w);
        detail::write_f32_span(out, m.bias);
    }
    for (const auto& v : net.adam_v) {
        detail::write_f32_span(out, v.w);
        detail::write_f32_span(out, v.bias);
    }
    write_pod<uint64_t>(out, net.adam_step_count);
    if (!out) throw DataError("write failed: " + path);
}

inline Network<float> load_weights(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open: " + path);
    char magic[4];
    in.read(magic, 4);
    if (in.gcount() != 4 || std::string(magic, 4) != "NLNW")
        throw DataError("weight file: bad magic in " + path);
    uint16_t version = 0;
    read_pod(in, version);
    if (version != weight_format_version)
        throw DataError("weight file: unsupported version " + std::to_string(version));
    uint8_t order = 0, activation = 0;
    uint16_t levels = 0, base = 0, rows = 0, width = 0, layer_count = 0;
    if (!read_pod(in, order) || !read_pod(in, levels) || !read_pod(in, base) ||
        !read_pod(in, rows) || !read_pod(in, width) || !read_pod(in, activation) ||
        !read_pod(in, layer_count))
        throw DataError("weight file: truncated header in " + path);
    if (activation > 1) throw DataError("weight file: unknown activation id");

    NetConfig cfg;
    cfg.levels = levels;
    cfg.base_channels = base;
    cfg.rows = rows;
    cfg.width = width;
    cfg.output_activation = static_cast<Activation>(activation);
    cfg.order = order;
    Network<float> net(cfg);
    if (net.params.size() != layer_count)
        throw DataError("weight file: layer count " + std::to_string(layer_count) +
                        " does not match config-derived topology (" +
                        std::to_string(net.params.size()) + ")");
    for (std::size_t i = 0; i < net.params.size(); ++i) {
        uint8_t kind = 0;
        uint16_t co = 0, ci = 0, kh = 0, kw = 0;
        if (!read_pod(in, kind) || !read_pod(in, co) || !read_pod(in, ci) || !read_pod(in, kh) ||
            !read_pod(in, kw))
            throw DataError("weight file: truncated layer table at layer " + std::to_string(i));
        const auto& p = net.params[i];
        if (kind != 1 || co != p.co || ci != p.ci || kh != p.kh || kw != p.kw)
            throw DataError("weight file: layer " + std::to_string(i) +
                            " shape table inconsistent with topology");
    }
    for (auto& p : net.params) {
        detail::read_f32_span(in, p.w, "weights");
        detail::read_f32_span(in, p.bias, "bias");
    }
    for (auto& m : net.adam_m) {
        detail::read_f32_span(in, m.w, "adam m");
        detail::read_f32_span(in, m.bias, "adam m bias");
    }
    for (auto& v : net.adam_v) {
        detail::read_f32_span(in, v.w, "adam v");
        detail::read_f32_span(in, v.bias, "adam v bias");
    }
    if (!read_pod(in, net.adam_step_count))
        throw DataError("weight file: truncated step counter");
    return net;
}

} // namespace nlsel
