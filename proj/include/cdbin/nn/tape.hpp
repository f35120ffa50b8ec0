#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>

#include "cdbin/nn/tensor.hpp"

namespace cdbin::nn {

namespace detail {

// All matrix kernels accumulate into C and keep a fixed per-element summation
// order, so results are identical for any thread count.

/// C[M,N] += A[M,K] * B[K,N]
template <typename Real>
void gemmAcc(const Real* A, const Real* B, Real* C, int M, int K, int N) {
#pragma omp parallel for schedule(static)
    for (int m = 0; m < M; ++m) {
        Real* c = C + static_cast<std::size_t>(m) * N;
        const Real* a = A + static_cast<std::size_t>(m) * K;
        for (int k = 0; k < K; ++k) {
            const Real av = a[k];
            const Real* b = B + static_cast<std::size_t>(k) * N;
            for (int n = 0; n < N; ++n) c[n] += av * b[n];
        }
    }
}

/// C[M,N] += A[M,P] * B[N,P]^T
template <typename Real>
void gemmABtAcc(const Real* A, const Real* B, Real* C, int M, int P, int N) {
#pragma omp parallel for schedule(static)
    for (int m = 0; m < M; ++m) {
        const Real* a = A + static_cast<std::size_t>(m) * P;
        Real* c = C + static_cast<std::size_t>(m) * N;
        for (int n = 0; n < N; ++n) {
            const Real* b = B + static_cast<std::size_t>(n) * P;
            Real s = 0;
            for (int p = 0; p < P; ++p) s += a[p] * b[p];
            c[n] += s;
        }
    }
}

/// C[K,N] += A[M,K]^T * B[M,N]
template <typename Real>
void gemmAtBAcc(const Real* A, const Real* B, Real* C, int M, int K, int N) {
#pragma omp parallel for schedule(static)
    for (int k = 0; k < K; ++k) {
        Real* c = C + static_cast<std::size_t>(k) * N;
        for (int m = 0; m < M; ++m) {
            const Real av = A[static_cast<std::size_t>(m) * K + k];
            const Real* b = B + static_cast<std::size_t>(m) * N;
            for (int n = 0; n < N; ++n) c[n] += av * b[n];
        }
    }
}

/// Unfolds one (C,H,W) plane into (C*kh*kw, outH*outW) patch columns.
template <typename Real>
void im2col(const Real* x, int C, int H, int W, int kh, int kw, int stride, int pad, int outH,
            int outW, Real* col) {
    const int P = outH * outW;
    int row = 0;
    for (int c = 0; c < C; ++c)
        for (int i = 0; i < kh; ++i)
            for (int j = 0; j < kw; ++j, ++row) {
                Real* dst = col + static_cast<std::size_t>(row) * P;
                for (int oy = 0; oy < outH; ++oy) {
                    const int iy = oy * stride - pad + i;
                    if (iy < 0 || iy >= H) {
                        for (int ox = 0; ox < outW; ++ox) dst[oy * outW + ox] = 0;
                        continue;
                    }
                    const Real* src = x + (static_cast<std::size_t>(c) * H + iy) * W;
                    for (int ox = 0; ox < outW; ++ox) {
                        const int ix = ox * stride - pad + j;
                        dst[oy * outW + ox] = (ix >= 0 && ix < W) ? src[ix] : Real(0);
                    }
                }
            }
}

/// Adjoint of im2col: scatter-adds patch columns back onto the (C,H,W) plane.
template <typename Real>
void col2imAcc(const Real* col, int C, int H, int W, int kh, int kw, int stride, int pad, int outH,
               int outW, Real* x) {
    const int P = outH * outW;
    int row = 0;
    for (int c = 0; c < C; ++c)
        for (int i = 0; i < kh; ++i)
            for (int j = 0; j < kw; ++j, ++row) {
                const Real* src = col + static_cast<std::size_t>(row) * P;
                for (int oy = 0; oy < outH; ++oy) {
                    const int iy = oy * stride - pad + i;
                    if (iy < 0 || iy >= H) continue;
                    Real* dst = x + (static_cast<std::size_t>(c) * H + iy) * W;
                    for (int ox = 0; ox < outW; ++ox) {
                        const int ix = ox * stride - pad + j;
                        if (ix >= 0 && ix < W) dst[ix] += src[oy * outW + ox];
                    }
                }
            }
}

} // namespace detail

/// Per-channel running statistics owned by a batch-norm layer.
template <typename Real>
struct BnStats {
    Tensor<Real> mean;
    Tensor<Real> var;

    explicit BnStats(int channels)
        : mean(Tensor<Real>({channels}, Real(0))), var(Tensor<Real>({channels}, Real(1))) {}
};

/// Reverse-mode autodiff tape. Operations append nodes in topological order;
/// backward() walks them once in reverse and accumulates parameter gradients.
template <typename Real>
class Tape {
public:
    struct Var {
        int id = -1;
    };

    static constexpr Real kBnEps = Real(1e-5);
    static constexpr Real kBnMomentum = Real(0.9);
    static constexpr Real kProbEps = Real(1e-7);

    Var constant(Tensor<Real> v) {
        return push(std::move(v), nullptr);
    }

    Var param(Param<Real>& p) {
        if (p.value.empty()) throw Error("Tape: parameter has no value");
        return push(Tensor<Real>(), &p);
    }

    const Tensor<Real>& value(Var v) const { return val(v.id); }

    /// Gradient of a node after backward(); empty tensor if it never received one.
    const Tensor<Real>& gradient(Var v) const { return nodes_[check(v.id)].grad; }

    std::size_t nodeCount() const { return nodes_.size(); }

    // ---- elementwise ----

    Var add(Var a, Var b) {
        const auto& x = val(a.id);
        const auto& y = val(b.id);
        if (!x.sameShape(y)) throw Error("add: shape mismatch " + x.shapeString() + " vs " + y.shapeString());
        Tensor<Real> out(x.shape());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
        Var o = push(std::move(out), nullptr);
        setBackward(o, [ai = a.id, bi = b.id, oi = o.id](Tape& t) {
            const auto& g = t.nodes_[oi].grad;
            auto& ga = t.gradBuf(ai);
            auto& gb = t.gradBuf(bi);
            for (std::size_t i = 0; i < g.size(); ++i) {
                ga[i] += g[i];
                gb[i] += g[i];
            }
        });
        return o;
    }

    Var scale(Var a, Real s) {
        const auto& x = val(a.id);
        Tensor<Real> out(x.shape());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * s;
        Var o = push(std::move(out), nullptr);
        setBackward(o, [ai = a.id, oi = o.id, s](Tape& t) {
            const auto& g = t.nodes_[oi].grad;
            auto& ga = t.gradBuf(ai);
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * s;
        });
        return o;
    }

    Var mul(Var a, Var b) {
        const auto& x = val(a.id);
        const auto& y = val(b.id);
        if (!x.sameShape(y)) throw Error("mul: shape mismatch");
        Tensor<Real> out(x.shape());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
        Var o = push(std::move(out), nullptr);
        setBackward(o, [ai = a.id, bi = b.id, oi = o.id](Tape& t) {
            const auto& g = t.nodes_[oi].grad;
            const auto& x = t.val(ai);
            const auto& y = t.val(bi);
            auto& ga = t.gradBuf(ai);
            auto& gb = t.gradBuf(bi);
            for (std::size_t i = 0; i < g.size(); ++i) {
                ga[i] += g[i] * y[i];
                gb[i] += g[i] * x[i];
            }
        });
        return o;
    }

    Var sum(Var a) {
        const auto& x = val(a.id);
        Real s = 0;
        for (std::size_t i = 0; i < x.size(); ++i) s += x[i];
        Var o = push(Tensor<Real>::scalar(s), nullptr);
        setBackward(o, [ai = a.id, oi = o.id](Tape& t) {
            const Real g = t.nodes_[oi].grad[0];
            auto& ga = t.gradBuf(ai);
            for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
        });
        return o;
    }

    Var mean(Var a) { return scale(sum(a), Real(1) / Real(val(a.id).size())); }

    // ---- activations ----

    Var leakyRelu(Var a, Real slope = Real(0.2)) {
        const auto& x = val(a.id);
        Tensor<Real> out(x.shape());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] >= 0 ? x[i] : slope * x[i];
        Var o = push(std::move(out), nullptr);
        setBackward(o, [ai = a.id, oi = o.id, slope](Tape& t) {
            const auto& g = t.nodes_[oi].grad;
            const auto& x = t.val(ai);
            auto& ga = t.gradBuf(ai);
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += x[i] >= 0 ? g[i] : slope * g[i];
        });
        return o;
    }

    Var sigmoid(Var a) {
        const auto& x = val(a.id);
        Tensor<Real> out(x.shape());
        for (std::size_t i = 0; i < out.size(); ++i) {
            const Real v = x[i];
            if (v >= 0) {
                out[i] = Real(1) / (Real(1) + std::exp(-v));
            } else {
                const Real e = std::exp(v);
                out[i] = e / (Real(1) + e);
            }
        }
        Var o = push(std::move(out), nullptr);
        setBackward(o, [ai = a.id, oi = o.id](Tape& t) {
            const auto& g = t.nodes_[oi].grad;
            const auto& y = t.val(oi);
            auto& ga = t.gradBuf(ai);
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i] * (Real(1) - y[i]);
        });
        return o;
    }

    // ---- shape ----

    Var reshape(Var a, std::vector<int> shape) {
        const auto& x = val(a.id);
        Tensor<Real> out = Tensor<Real>::fromData(std::move(shape),
                                                  std::vector<Real>(x.data(), x.data() + x.size()));
        Var o = push(std::move(out), nullptr);
        setBackward(o, [ai = a.id, oi = o.id](Tape& t) {
            const auto& g = t.nodes_[oi].grad;
            auto& ga = t.gradBuf(ai);
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        });
        return o;
    }

    Var flatten2(Var a) {
        const auto& x = val(a.id);
        if (x.rank() != 4) throw Error("flatten2: rank-4 input required");
        return reshape(a, {x.dim(0), x.dim(1) * x.dim(2) * x.dim(3)});
    }

    Var concatChannels(Var a, Var b) {
        const auto& x = val(a.id);
        const auto& y = val(b.id);
        if (x.rank() != 4 || y.rank() != 4) throw Error("concatChannels: rank-4 inputs required");
        if (x.dim(0) != y.dim(0) || x.dim(2) != y.dim(2) || x.dim(3) != y.dim(3))
            throw Error("concatChannels: batch/spatial mismatch " + x.shapeString() + " vs " +
                        y.shapeString());
        const int N = x.dim(0), Ca = x.dim(1), Cb = y.dim(1), H = x.dim(2), W = x.dim(3);
        Tensor<Real> out({N, Ca + Cb, H, W});
        const std::size_t plane = static_cast<std::size_t>(H) * W;
        for (int n = 0; n < N; ++n) {
            std::copy_n(x.data() + n * Ca * plane, Ca * plane, out.data() + n * (Ca + Cb) * plane);
            std::copy_n(y.data() + n * Cb * plane, Cb * plane,
                        out.data() + (n * (Ca + Cb) + Ca) * plane);
        }
        Var o = push(std::move(out), nullptr);
        setBackward(o, [ai = a.id, bi = b.id, oi = o.id, N, Ca, Cb, plane](Tape& t) {
            const auto& g = t.nodes_[oi].grad;
            auto& ga = t.gradBuf(ai);
            auto& gb = t.gradBuf(bi);
            for (int n = 0; n < N; ++n) {
                const Real* src = g.data() + n * (Ca + Cb) * plane;
                Real* da = ga.data() + n * Ca * plane;
                Real* db = gb.data() + n * Cb * plane;
                for (std::size_t i = 0; i < Ca * plane; ++i) da[i] += src[i];
                for (std::size_t i = 0; i < Cb * plane; ++i) db[i] += src[Ca * plane + i];
            }
        });
        return o;
    }

    /// (N,C,H,W) -> (N*(H/p)*(W/p), C, p, p), row-major tile order.
    Var extractPatches(Var a, int p) {
        const auto& x = val(a.id);
        if (x.rank() != 4) throw Error("extractPatches: rank-4 input required");
        const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
        if (p <= 0 || H % p != 0 || W % p != 0)
            throw Error("extractPatches: dimensions not divisible by patch size");
        const int ty = H / p, tx = W / p;
        Tensor<Real> out({N * ty * tx, C, p, p});
        for (int n = 0; n < N; ++n)
            for (int i = 0; i < ty; ++i)
                for (int j = 0; j < tx; ++j)
                    for (int c = 0; c < C; ++c)
                        for (int y = 0; y < p; ++y)
                            for (int xx = 0; xx < p; ++xx)
                                out.at4((n * ty + i) * tx + j, c, y, xx) =
                                    x.at4(n, c, i * p + y, j * p + xx);
        Var o = push(std::move(out), nullptr);
        setBackward(o, [ai = a.id, oi = o.id, N, C, H, W, p, ty, tx](Tape& t) {
            const auto& g = t.nodes_[oi].grad;
            auto& ga = t.gradBuf(ai);
            for (int n = 0; n < N; ++n)
                for (int i = 0; i < ty; ++i)
                    for (int j = 0; j < tx; ++j)
                        for (int c = 0; c < C; ++c)
                            for (int y = 0; y < p; ++y)
                                for (int xx = 0; xx < p; ++xx)
                                    ga.at4(n, c, i * p + y, j * p + xx) +=
                                        g.at4((n * ty + i) * tx + j, c, y, xx);
        });
        return o;
    }

    // ---- convolution ----

    /// x (N,Ci,H,W), k (Co,Ci,kh,kw), bias (Co); zero padding, cross-correlation.
    Var conv2d(Var xv, Var kv, Var bv, int stride, int padding) {
        const auto& x = val(xv.id);
        const auto& k = val(kv.id);
        const auto& b = val(bv.id);
        if (x.rank() != 4 || k.rank() != 4) throw Error("conv2d: rank-4 input/kernel required");
        if (stride < 1 || padding < 0) throw Error("conv2d: bad stride/padding");
        const int N = x.dim(0), Ci = x.dim(1), H = x.dim(2), W = x.dim(3);
        const int Co = k.dim(0), kh = k.dim(2), kw = k.dim(3);
        if (k.dim(1) != Ci)
            throw Error("conv2d: channel mismatch, input " + x.shapeString() + " kernel " +
                        k.shapeString());
        if (b.rank() != 1 || b.dim(0) != Co) throw Error("conv2d: bias shape mismatch");
        const int outH = (H + 2 * padding - kh) / stride + 1;
        const int outW = (W + 2 * padding - kw) / stride + 1;
        if (H + 2 * padding < kh || W + 2 * padding < kw)
            throw Error("conv2d: kernel larger than padded input");

        const int K = Ci * kh * kw, P = outH * outW;
        Tensor<Real> out({N, Co, outH, outW});
        std::vector<Real> col(static_cast<std::size_t>(K) * P);
        for (int n = 0; n < N; ++n) {
            detail::im2col(x.data() + static_cast<std::size_t>(n) * Ci * H * W, Ci, H, W, kh, kw,
                           stride, padding, outH, outW, col.data());
            Real* y = out.data() + static_cast<std::size_t>(n) * Co * P;
            for (int o = 0; o < Co; ++o)
                for (int pIdx = 0; pIdx < P; ++pIdx) y[o * P + pIdx] = b[o];
            detail::gemmAcc(k.data(), col.data(), y, Co, K, P);
        }
        Var o = push(std::move(out), nullptr);
        setBackward(o, [xi = xv.id, ki = kv.id, bi = bv.id, oi = o.id, N, Ci, H, W, Co, kh, kw,
                        stride, padding, outH, outW, K, P](Tape& t) {
            const auto& g = t.nodes_[oi].grad;
            const auto& x = t.val(xi);
            const auto& k = t.val(ki);
            auto& gx = t.gradBuf(xi);
            auto& gk = t.gradBuf(ki);
            auto& gb = t.gradBuf(bi);
            std::vector<Real> col(static_cast<std::size_t>(K) * P);
            std::vector<Real> dcol(static_cast<std::size_t>(K) * P);
            for (int n = 0; n < N; ++n) {
                const Real* dy = g.data() + static_cast<std::size_t>(n) * Co * P;
                detail::im2col(x.data() + static_cast<std::size_t>(n) * Ci * H * W, Ci, H, W, kh,
                               kw, stride, padding, outH, outW, col.data());
                detail::gemmABtAcc(dy, col.data(), gk.data(), Co, P, K);
                for (int o2 = 0; o2 < Co; ++o2) {
                    Real s = 0;
                    for (int pIdx = 0; pIdx < P; ++pIdx) s += dy[o2 * P + pIdx];
                    gb[o2] += s;
                }
                std::fill(dcol.begin(), dcol.end(), Real(0));
                detail::gemmAtBAcc(k.data(), dy, dcol.data(), Co, K, P);
                detail::col2imAcc(dcol.data(), Ci, H, W, kh, kw, stride, padding, outH, outW,
                                  gx.data() + static_cast<std::size_t>(n) * Ci * H * W);
            }
        });
        return o;
    }

    /// x (N,Ci,H,W), k (Ci,Co,kh,kw); output (N,Co,(H-1)s+kh,(W-1)s+kw).
    /// Forward equals the backward-data pass of conv2d with the same kernel.
    Var transposedConv2d(Var xv, Var kv, Var bv, int stride) {
        const auto& x = val(xv.id);
        const auto& k = val(kv.id);
        const auto& b = val(bv.id);
        if (x.rank() != 4 || k.rank() != 4)
            throw Error("transposedConv2d: rank-4 input/kernel required");
        if (stride < 1) throw Error("transposedConv2d: stride must be >= 1");
        const int N = x.dim(0), Ci = x.dim(1), H = x.dim(2), W = x.dim(3);
        const int Co = k.dim(1), kh = k.dim(2), kw = k.dim(3);
        if (k.dim(0) != Ci)
            throw Error("transposedConv2d: channel mismatch, input " + x.shapeString() +
                        " kernel " + k.shapeString());
        if (b.rank() != 1 || b.dim(0) != Co) throw Error("transposedConv2d: bias shape mismatch");
        const int outH = (H - 1) * stride + kh;
        const int outW = (W - 1) * stride + kw;

        // khat[(o*kh+i)*kw+j][ci] = k[ci][o][i][j]
        const int R = Co * kh * kw;
        std::vector<Real> khat(static_cast<std::size_t>(R) * Ci);
        for (int ci = 0; ci < Ci; ++ci)
            for (int o2 = 0; o2 < Co; ++o2)
                for (int i = 0; i < kh; ++i)
                    for (int j = 0; j < kw; ++j)
                        khat[static_cast<std::size_t>((o2 * kh + i) * kw + j) * Ci + ci] =
                            k.at4(ci, o2, i, j);

        const int P = H * W;
        Tensor<Real> out({N, Co, outH, outW});
        std::vector<Real> colbuf(static_cast<std::size_t>(R) * P);
        for (int n = 0; n < N; ++n) {
            std::fill(colbuf.begin(), colbuf.end(), Real(0));
            detail::gemmAcc(khat.data(), x.data() + static_cast<std::size_t>(n) * Ci * P,
                            colbuf.data(), R, Ci, P);
            Real* y = out.data() + static_cast<std::size_t>(n) * Co * outH * outW;
            for (int o2 = 0; o2 < Co; ++o2)
                for (int i = 0; i < outH * outW; ++i) y[o2 * outH * outW + i] = b[o2];
            detail::col2imAcc(colbuf.data(), Co, outH, outW, kh, kw, stride, 0, H, W, y);
        }
        Var o = push(std::move(out), nullptr);
        setBackward(o, [xi = xv.id, ki = kv.id, bi = bv.id, oi = o.id, N, Ci, H, W, Co, kh, kw,
                        stride, outH, outW, R, P](Tape& t) {
            const auto& g = t.nodes_[oi].grad;
            const auto& x = t.val(xi);
            const auto& k = t.val(ki);
            auto& gx = t.gradBuf(xi);
            auto& gk = t.gradBuf(ki);
            auto& gb = t.gradBuf(bi);

            std::vector<Real> khat(static_cast<std::size_t>(R) * Ci);
            for (int ci = 0; ci < Ci; ++ci)
                for (int o2 = 0; o2 < Co; ++o2)
                    for (int i = 0; i < kh; ++i)
                        for (int j = 0; j < kw; ++j)
                            khat[static_cast<std::size_t>((o2 * kh + i) * kw + j) * Ci + ci] =
                                k.at4(ci, o2, i, j);

            std::vector<Real> dcol(static_cast<std::size_t>(R) * P);
            std::vector<Real> dkhat(static_cast<std::size_t>(R) * Ci, Real(0));
            for (int n = 0; n < N; ++n) {
                const Real* dy = g.data() + static_cast<std::size_t>(n) * Co * outH * outW;
                detail::im2col(dy, Co, outH, outW, kh, kw, stride, 0, H, W, dcol.data());
                detail::gemmABtAcc(dcol.data(), x.data() + static_cast<std::size_t>(n) * Ci * P,
                                   dkhat.data(), R, P, Ci);
                detail::gemmAtBAcc(khat.data(), dcol.data(),
                                   gx.data() + static_cast<std::size_t>(n) * Ci * P, R, Ci, P);
                for (int o2 = 0; o2 < Co; ++o2) {
                    Real s = 0;
                    for (int i = 0; i < outH * outW; ++i) s += dy[o2 * outH * outW + i];
                    gb[o2] += s;
                }
            }
            for (int ci = 0; ci < Ci; ++ci)
                for (int o2 = 0; o2 < Co; ++o2)
                    for (int i = 0; i < kh; ++i)
                        for (int j = 0; j < kw; ++j)
                            gk.at4(ci, o2, i, j) +=
                                dkhat[static_cast<std::size_t>((o2 * kh + i) * kw + j) * Ci + ci];
        });
        return o;
    }

    // ---- pooling ----

    Var maxPool2(Var a) {
        const auto& x = val(a.id);
        if (x.rank() != 4) throw Error("maxPool2: rank-4 input required");
        const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
        if (H % 2 != 0 || W % 2 != 0) throw Error("maxPool2: odd spatial dimensions");
        Tensor<Real> out({N, C, H / 2, W / 2});
        std::vector<std::int64_t> argmax(out.size());
        std::size_t oidx = 0;
        for (int n = 0; n < N; ++n)
            for (int c = 0; c < C; ++c)
                for (int y = 0; y < H / 2; ++y)
                    for (int xx = 0; xx < W / 2; ++xx, ++oidx) {
                        Real best{};
                        std::int64_t bestIdx = -1;
                        for (int dy = 0; dy < 2; ++dy)
                            for (int dx = 0; dx < 2; ++dx) {
                                const std::int64_t idx =
                                    ((static_cast<std::int64_t>(n) * C + c) * H + 2 * y + dy) * W +
                                    2 * xx + dx;
                                const Real v = x[static_cast<std::size_t>(idx)];
                                if (bestIdx < 0 || v > best) { // first-in-window tie break
                                    best = v;
                                    bestIdx = idx;
                                }
                            }
                        out[oidx] = best;
                        argmax[oidx] = bestIdx;
                    }
        Var o = push(std::move(out), nullptr);
        setBackward(o, [ai = a.id, oi = o.id, argmax = std::move(argmax)](Tape& t) {
            const auto& g = t.nodes_[oi].grad;
            auto& ga = t.gradBuf(ai);
            for (std::size_t i = 0; i < g.size(); ++i)
                ga[static_cast<std::size_t>(argmax[i])] += g[i];
        });
        return o;
    }

    Var avgPool2(Var a) {
        const auto& x = val(a.id);
        if (x.rank() != 4) throw Error("avgPool2: rank-4 input required");
        const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
        if (H % 2 != 0 || W % 2 != 0) throw Error("avgPool2: odd spatial dimensions");
        Tensor<Real> out({N, C, H / 2, W / 2});
        for (int n = 0; n < N; ++n)
            for (int c = 0; c < C; ++c)
                for (int y = 0; y < H / 2; ++y)
                    for (int xx = 0; xx < W / 2; ++xx)
                        out.at4(n, c, y, xx) =
                            (x.at4(n, c, 2 * y, 2 * xx) + x.at4(n, c, 2 * y, 2 * xx + 1) +
                             x.at4(n, c, 2 * y + 1, 2 * xx) + x.at4(n, c, 2 * y + 1, 2 * xx + 1)) /
                            Real(4);
        Var o = push(std::move(out), nullptr);
        setBackward(o, [ai = a.id, oi = o.id, N, C, H, W](Tape& t) {
            const auto& g = t.nodes_[oi].grad;
            auto& ga = t.gradBuf(ai);
            for (int n = 0; n < N; ++n)
                for (int c = 0; c < C; ++c)
                    for (int y = 0; y < H / 2; ++y)
                        for (int xx = 0; xx < W / 2; ++xx) {
                            const Real q = g.at4(n, c, y, xx) / Real(4);
                            ga.at4(n, c, 2 * y, 2 * xx) += q;
                            ga.at4(n, c, 2 * y, 2 * xx + 1) += q;
                            ga.at4(n, c, 2 * y + 1, 2 * xx) += q;
                            ga.at4(n, c, 2 * y + 1, 2 * xx + 1) += q;
                        }
        });
        return o;
    }

    // ---- batch normalization ----

    /// Per-channel normalization with affine scale/shift. In training mode the
    /// batch statistics are used and, when `running` is given, folded into it
    /// with momentum 0.9; in inference mode `running` supplies the statistics.
    Var batchNorm2d(Var xv, Var gammaV, Var betaV, BnStats<Real>* running, bool training) {
        const auto& x = val(xv.id);
        const auto& gamma = val(gammaV.id);
        const auto& beta = val(betaV.id);
        if (x.rank() != 4) throw Error("batchNorm2d: rank-4 input required");
        const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
        if (gamma.rank() != 1 || gamma.dim(0) != C || beta.rank() != 1 || beta.dim(0) != C)
            throw Error("batchNorm2d: gamma/beta must have one entry per channel");
        const std::size_t m = static_cast<std::size_t>(N) * H * W;
        if (training && m <= 1)
            throw Error("batchNorm2d: training mode needs more than one element per channel");
        if (!training && running == nullptr)
            throw Error("batchNorm2d: inference mode requires running statistics");

        Tensor<Real> meanC({C});
        Tensor<Real> invStdC({C});
        if (training) {
            for (int c = 0; c < C; ++c) {
                Real s = 0;
                for (int n = 0; n < N; ++n)
                    for (int y = 0; y < H; ++y)
                        for (int xx = 0; xx < W; ++xx) s += x.at4(n, c, y, xx);
                const Real mu = s / Real(m);
                Real v = 0;
                for (int n = 0; n < N; ++n)
                    for (int y = 0; y < H; ++y)
                        for (int xx = 0; xx < W; ++xx) {
                            const Real d = x.at4(n, c, y, xx) - mu;
                            v += d * d;
                        }
                v /= Real(m);
                meanC[c] = mu;
                invStdC[c] = Real(1) / std::sqrt(v + kBnEps);
                if (running) {
                    running->mean[c] = kBnMomentum * running->mean[c] + (Real(1) - kBnMomentum) * mu;
                    running->var[c] = kBnMomentum * running->var[c] + (Real(1) - kBnMomentum) * v;
                }
            }
        } else {
            for (int c = 0; c < C; ++c) {
                meanC[c] = running->mean[c];
                invStdC[c] = Real(1) / std::sqrt(running->var[c] + kBnEps);
            }
        }

        Tensor<Real> xhat(x.shape());
        Tensor<Real> out(x.shape());
        for (int n = 0; n < N; ++n)
            for (int c = 0; c < C; ++c)
                for (int y = 0; y < H; ++y)
                    for (int xx = 0; xx < W; ++xx) {
                        const Real h = (x.at4(n, c, y, xx) - meanC[c]) * invStdC[c];
                        xhat.at4(n, c, y, xx) = h;
                        out.at4(n, c, y, xx) = gamma[c] * h + beta[c];
                    }
        Var o = push(std::move(out), nullptr);
        setBackward(o, [xi = xv.id, gi = gammaV.id, bi = betaV.id, oi = o.id, N, C, H, W, m,
                        training, xhat = std::move(xhat), invStdC = std::move(invStdC)](Tape& t) {
            const auto& g = t.nodes_[oi].grad;
            const auto& gamma = t.val(gi);
            auto& gx = t.gradBuf(xi);
            auto& gGamma = t.gradBuf(gi);
            auto& gBeta = t.gradBuf(bi);
            for (int c = 0; c < C; ++c) {
                Real sumDy = 0, sumDyXhat = 0;
                for (int n = 0; n < N; ++n)
                    for (int y = 0; y < H; ++y)
                        for (int xx = 0; xx < W; ++xx) {
                            const Real dy = g.at4(n, c, y, xx);
                            sumDy += dy;
                            sumDyXhat += dy * xhat.at4(n, c, y, xx);
                        }
                gGamma[c] += sumDyXhat;
                gBeta[c] += sumDy;
                if (training) {
                    // dx = invStd * gamma * (dy - mean(dy) - xhat * mean(dy*xhat))
                    const Real meanDy = sumDy / Real(m);
                    const Real meanDyXhat = sumDyXhat / Real(m);
                    for (int n = 0; n < N; ++n)
                        for (int y = 0; y < H; ++y)
                            for (int xx = 0; xx < W; ++xx)
                                gx.at4(n, c, y, xx) +=
                                    invStdC[c] * gamma[c] *
                                    (g.at4(n, c, y, xx) - meanDy -
                                     xhat.at4(n, c, y, xx) * meanDyXhat);
                } else {
                    for (int n = 0; n < N; ++n)
                        for (int y = 0; y < H; ++y)
                            for (int xx = 0; xx < W; ++xx)
                                gx.at4(n, c, y, xx) += invStdC[c] * gamma[c] * g.at4(n, c, y, xx);
                }
            }
        });
        return o;
    }

    // ---- dense ----

    /// x (N,D), w (D,M), b (M) -> (N,M)
    Var dense(Var xv, Var wv, Var bv) {
        const auto& x = val(xv.id);
        const auto& w = val(wv.id);
        const auto& b = val(bv.id);
        if (x.rank() != 2 || w.rank() != 2) throw Error("dense: rank-2 input/weight required");
        const int N = x.dim(0), D = x.dim(1), M = w.dim(1);
        if (w.dim(0) != D)
            throw Error("dense: inner dimensions disagree, input " + x.shapeString() + " weight " +
                        w.shapeString());
        if (b.rank() != 1 || b.dim(0) != M) throw Error("dense: bias shape mismatch");
        Tensor<Real> out({N, M});
        for (int n = 0; n < N; ++n)
            for (int j = 0; j < M; ++j) out.at2(n, j) = b[j];
        detail::gemmAcc(x.data(), w.data(), out.data(), N, D, M);
        Var o = push(std::move(out), nullptr);
        setBackward(o, [xi = xv.id, wi = wv.id, bi = bv.id, oi = o.id, N, D, M](Tape& t) {
            const auto& g = t.nodes_[oi].grad;
            const auto& x = t.val(xi);
            const auto& w = t.val(wi);
            detail::gemmABtAcc(g.data(), w.data(), t.gradBuf(xi).data(), N, M, D);
            detail::gemmAtBAcc(x.data(), g.data(), t.gradBuf(wi).data(), N, D, M);
            auto& gb = t.gradBuf(bi);
            for (int n = 0; n < N; ++n)
                for (int j = 0; j < M; ++j) gb[j] += g.at2(n, j);
        });
        return o;
    }

    // ---- fixed block synthesis ----

    /// x (N,64,Hb,Wb) -> (N,1,8Hb,8Wb). basis[k][p]: spatial pattern (row-major
    /// 8x8 position p) of channel k. The map is fixed; no parameters involved.
    Var blockSynthesis8x8(Var xv, const std::array<std::array<double, 64>, 64>& basis) {
        const auto& x = val(xv.id);
        if (x.rank() != 4 || x.dim(1) != 64)
            throw Error("blockSynthesis8x8: input must be (N,64,Hb,Wb), got " + x.shapeString());
        const int N = x.dim(0), Hb = x.dim(2), Wb = x.dim(3);
        auto basisFlat = std::make_shared<std::vector<Real>>(64 * 64);
        for (int k = 0; k < 64; ++k)
            for (int p = 0; p < 64; ++p) (*basisFlat)[k * 64 + p] = static_cast<Real>(basis[k][p]);

        const int cells = Hb * Wb;
        Tensor<Real> out({N, 1, 8 * Hb, 8 * Wb});
        std::vector<Real> out64(static_cast<std::size_t>(64) * cells);
        for (int n = 0; n < N; ++n) {
            std::fill(out64.begin(), out64.end(), Real(0));
            // out64[p][cell] = sum_k basis[k][p] * x[k][cell]
            detail::gemmAtBAcc(basisFlat->data(), x.data() + static_cast<std::size_t>(n) * 64 * cells,
                               out64.data(), 64, 64, cells);
            for (int by = 0; by < Hb; ++by)
                for (int bx = 0; bx < Wb; ++bx)
                    for (int i = 0; i < 8; ++i)
                        for (int j = 0; j < 8; ++j)
                            out.at4(n, 0, by * 8 + i, bx * 8 + j) =
                                out64[static_cast<std::size_t>(i * 8 + j) * cells + by * Wb + bx];
        }
        Var o = push(std::move(out), nullptr);
        setBackward(o, [xi = xv.id, oi = o.id, N, Hb, Wb, cells, basisFlat](Tape& t) {
            const auto& g = t.nodes_[oi].grad;
            auto& gx = t.gradBuf(xi);
            std::vector<Real> dout64(static_cast<std::size_t>(64) * cells);
            for (int n = 0; n < N; ++n) {
                for (int by = 0; by < Hb; ++by)
                    for (int bx = 0; bx < Wb; ++bx)
                        for (int i = 0; i < 8; ++i)
                            for (int j = 0; j < 8; ++j)
                                dout64[static_cast<std::size_t>(i * 8 + j) * cells + by * Wb + bx] =
                                    g.at4(n, 0, by * 8 + i, bx * 8 + j);
                // dx[k][cell] += sum_p basis[k][p] * dout64[p][cell]
                detail::gemmAcc(basisFlat->data(), dout64.data(),
                                gx.data() + static_cast<std::size_t>(n) * 64 * cells, 64, 64,
                                cells);
            }
        });
        return o;
    }

    // ---- losses ----

    /// Mean over elements of -alpha*(1-pt)^gamma*log(pt), pt = p if target==1
    /// else 1-p. Predictions are clamped to [eps, 1-eps], eps = 1e-7.
    Var focalLoss(Var predV, const Tensor<Real>& target, Real alpha, Real gamma) {
        const auto& p = val(predV.id);
        if (!p.sameShape(target)) throw Error("focalLoss: prediction/target shape mismatch");
        auto tgt = std::make_shared<Tensor<Real>>(target);
        for (std::size_t i = 0; i < tgt->size(); ++i)
            if ((*tgt)[i] != Real(0) && (*tgt)[i] != Real(1))
                throw Error("focalLoss: target values must be 0 or 1");

        const std::size_t count = p.size();
        double acc = 0;
        for (std::size_t i = 0; i < count; ++i) {
            const Real pc = std::clamp(p[i], kProbEps, Real(1) - kProbEps);
            const Real pt = (*tgt)[i] == Real(1) ? pc : Real(1) - pc;
            acc += -double(alpha) * std::pow(double(1) - double(pt), double(gamma)) *
                   std::log(double(pt));
        }
        Var o = push(Tensor<Real>::scalar(static_cast<Real>(acc / double(count))), nullptr);
        setBackward(o, [pi = predV.id, oi = o.id, tgt, alpha, gamma, count](Tape& t) {
            const Real g = t.nodes_[oi].grad[0];
            const auto& p = t.val(pi);
            auto& gp = t.gradBuf(pi);
            for (std::size_t i = 0; i < count; ++i) {
                const Real pc = std::clamp(p[i], kProbEps, Real(1) - kProbEps);
                const Real sign = (*tgt)[i] == Real(1) ? Real(1) : Real(-1);
                const Real pt = (*tgt)[i] == Real(1) ? pc : Real(1) - pc;
                // d/dpt of -alpha*(1-pt)^gamma*log(pt)
                Real dpt = -alpha * std::pow(Real(1) - pt, gamma) / pt;
                if (gamma != Real(0))
                    dpt += alpha * gamma * std::pow(Real(1) - pt, gamma - Real(1)) * std::log(pt);
                gp[i] += g * dpt * sign / Real(count);
            }
        });
        return o;
    }

    /// Mean of -[y*log(p) + (1-y)*log(1-p)] with clamped logs.
    Var bceLoss(Var scoreV, const Tensor<Real>& labels) {
        const auto& p = val(scoreV.id);
        if (!p.sameShape(labels)) throw Error("bceLoss: score/label shape mismatch");
        auto lab = std::make_shared<Tensor<Real>>(labels);
        for (std::size_t i = 0; i < lab->size(); ++i)
            if ((*lab)[i] != Real(0) && (*lab)[i] != Real(1))
                throw Error("bceLoss: labels must be 0 or 1");

        const std::size_t count = p.size();
        double acc = 0;
        for (std::size_t i = 0; i < count; ++i) {
            const Real pc = std::clamp(p[i], kProbEps, Real(1) - kProbEps);
            acc += (*lab)[i] == Real(1) ? -std::log(double(pc)) : -std::log(double(1) - double(pc));
        }
        Var o = push(Tensor<Real>::scalar(static_cast<Real>(acc / double(count))), nullptr);
        setBackward(o, [si = scoreV.id, oi = o.id, lab, count](Tape& t) {
            const Real g = t.nodes_[oi].grad[0];
            const auto& p = t.val(si);
            auto& gp = t.gradBuf(si);
            for (std::size_t i = 0; i < count; ++i) {
                const Real pc = std::clamp(p[i], kProbEps, Real(1) - kProbEps);
                const Real d = (*lab)[i] == Real(1) ? -Real(1) / pc : Real(1) / (Real(1) - pc);
                gp[i] += g * d / Real(count);
            }
        });
        return o;
    }

    // ---- backward ----

    /// Reverse traversal from a scalar loss; every tracked parameter that
    /// participated receives its gradient (accumulated additively).
    void backward(Var loss) {
        if (val(loss.id).size() != 1) throw Error("backward: loss must be a scalar");
        if (ranBackward_) throw Error("backward: tape already traversed");
        ranBackward_ = true;
        gradBuf(loss.id)[0] = Real(1);
        for (int id = loss.id; id >= 0; --id) {
            Node& node = nodes_[id];
            if (node.grad.empty() || !node.backwardFn) continue;
            node.backwardFn(*this);
        }
        for (Node& node : nodes_) {
            if (node.boundParam && !node.grad.empty()) {
                auto& g = node.boundParam->grad;
                for (std::size_t i = 0; i < g.size(); ++i) g[i] += node.grad[i];
            }
        }
    }

private:
    struct Node {
        Tensor<Real> owned; // empty for parameter leaves
        Tensor<Real> grad;
        Param<Real>* boundParam = nullptr;
        std::function<void(Tape&)> backwardFn;
    };

    int check(int id) const {
        if (id < 0 || id >= static_cast<int>(nodes_.size())) throw Error("Tape: bad node id");
        return id;
    }

    const Tensor<Real>& val(int id) const {
        const Node& n = nodes_[check(id)];
        return n.boundParam ? n.boundParam->value : n.owned;
    }

    Tensor<Real>& gradBuf(int id) {
        Node& n = nodes_[check(id)];
        if (n.grad.empty()) n.grad = Tensor<Real>(val(id).shape());
        return n.grad;
    }

    Var push(Tensor<Real> value, Param<Real>* boundParam) {
        Node n;
        if (boundParam) {
            n.boundParam = boundParam;
        } else {
            n.owned = std::move(value);
        }
        nodes_.push_back(std::move(n));
        return Var{static_cast<int>(nodes_.size()) - 1};
    }

    template <typename Fn>
    void setBackward(Var v, Fn&& fn) {
        nodes_[check(v.id)].backwardFn = std::forward<Fn>(fn);
    }

    std::vector<Node> nodes_;
    bool ranBackward_ = false;
};

} // namespace cdbin::nn
