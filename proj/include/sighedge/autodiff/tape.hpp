#pragma once

#include <cmath>
#include <functional>
#include <deque>
#include <memory>
#include <unordered_map>
#include <string>
#include <vector>

#include "sighedge/core/mat.hpp"
#include "sighedge/kernels/kernels.hpp"

namespace sighedge::ad {

struct Var {
    int id = -1;
    int rows = 0;
    int cols = 0;
    bool valid() const { return id >= 0; }
};

// Attention matrices captured during a forward pass (sample 0 of the batch),
// one entry per head in head order.
struct AttnCapture {
    std::vector<Mat<double>> heads;
};

// Reverse-mode tape over dense matrices. A tape is built per forward pass;
// backward() runs the recorded closures in reverse. Reductions accumulate in
// double regardless of T.
template <typename T>
class Tape {
public:
    const Mat<T>& val(Var v) const { return vals_[v.id]; }
    Mat<T>& grad(Var v) { return grads_[v.id]; }

    size_t n_nodes() const { return nodes_.size(); }

    Var constant(Mat<T> m) {
        Var v = alloc(m.rows, m.cols);
        vals_[v.id] = std::move(m);
        return v;
    }

    // Leaf parameter: copies from theta, backward accumulates into grad_sink.
    Var param(int rows, int cols, const T* theta, T* grad_sink) {
        Var v = alloc(rows, cols);
        Mat<T>& dst = vals_[v.id];
        for (size_t i = 0; i < dst.size(); ++i) dst.a[i] = theta[i];
        if (grad_sink) {
            push([this, v, grad_sink] {
                const Mat<T>& g = grads_[v.id];
                for (size_t i = 0; i < g.size(); ++i) grad_sink[i] += g.a[i];
            });
        }
        return v;
    }

    // y = x W^T (+ bias broadcast per row); W is (out x in), bias (1 x out).
    Var linear(Var x, Var w, Var bias = Var{}) {
        const Mat<T>& xv = vals_[x.id];
        const Mat<T>& wv = vals_[w.id];
        require(xv.cols == wv.cols, "linear: in-dim mismatch");
        Var y = alloc(xv.rows, wv.rows);
        Mat<T>& yv = vals_[y.id];
        kern::gemm_nt(xv.data(), wv.data(), yv.data(), xv.rows, xv.cols, wv.rows, false);
        if (bias.valid()) {
            const Mat<T>& bv = vals_[bias.id];
            require(bv.rows == 1 && bv.cols == wv.rows, "linear: bias shape");
            for (int i = 0; i < yv.rows; ++i) {
                T* r = yv.row(i);
                for (int j = 0; j < yv.cols; ++j) r[j] += bv.a[j];
            }
        }
        push([this, x, w, bias, y] {
            const Mat<T>& dy = grads_[y.id];
            const Mat<T>& xv = vals_[x.id];
            const Mat<T>& wv = vals_[w.id];
            // dx += dy * W ; dW += dy^T * x ; db += colsum(dy)
            kern::gemm_nn(dy.data(), wv.data(), grads_[x.id].data(), dy.rows, dy.cols, wv.cols,
                          true);
            kern::gemm_tn(dy.data(), xv.data(), grads_[w.id].data(), wv.rows, dy.rows, xv.cols,
                          true);
            if (bias.valid()) {
                Mat<T>& db = grads_[bias.id];
                for (int j = 0; j < dy.cols; ++j) {
                    double s = 0.0;
                    for (int i = 0; i < dy.rows; ++i) s += static_cast<double>(dy(i, j));
                    db.a[j] += static_cast<T>(s);
                }
            }
        });
        return y;
    }

    Var matmul(Var a, Var b) {
        const Mat<T>& av = vals_[a.id];
        const Mat<T>& bv = vals_[b.id];
        require(av.cols == bv.rows, "matmul: shape mismatch");
        Var c = alloc(av.rows, bv.cols);
        kern::gemm_nn(av.data(), bv.data(), vals_[c.id].data(), av.rows, av.cols, bv.cols, false);
        push([this, a, b, c] {
            const Mat<T>& dc = grads_[c.id];
            const Mat<T>& av = vals_[a.id];
            const Mat<T>& bv = vals_[b.id];
            kern::gemm_nt(dc.data(), bv.data(), grads_[a.id].data(), dc.rows, dc.cols, bv.rows,
                          true);
            kern::gemm_tn(av.data(), dc.data(), grads_[b.id].data(), av.cols, av.rows, dc.cols,
                          true);
        });
        return c;
    }

    Var add(Var a, Var b) {
        const Mat<T>& av = vals_[a.id];
        const Mat<T>& bv = vals_[b.id];
        require(av.same_shape(bv), "add: shape mismatch");
        Var c = alloc(av.rows, av.cols);
        Mat<T>& cv = vals_[c.id];
        for (size_t i = 0; i < cv.size(); ++i) cv.a[i] = av.a[i] + bv.a[i];
        push([this, a, b, c] {
            const Mat<T>& dc = grads_[c.id];
            Mat<T>& da = grads_[a.id];
            Mat<T>& db = grads_[b.id];
            for (size_t i = 0; i < dc.size(); ++i) {
                da.a[i] += dc.a[i];
                db.a[i] += dc.a[i];
            }
        });
        return c;
    }

    Var add_const(Var a, const Mat<T>& c) {
        const Mat<T>& av = vals_[a.id];
        require(av.rows == c.rows && av.cols == c.cols, "add_const: shape mismatch");
        Var y = alloc(av.rows, av.cols);
        Mat<T>& yv = vals_[y.id];
        for (size_t i = 0; i < yv.size(); ++i) yv.a[i] = av.a[i] + c.a[i];
        push([this, a, y] {
            const Mat<T>& dy = grads_[y.id];
            Mat<T>& da = grads_[a.id];
            for (size_t i = 0; i < dy.size(); ++i) da.a[i] += dy.a[i];
        });
        return y;
    }

    Var scale(Var a, T s) {
        const Mat<T>& av = vals_[a.id];
        Var y = alloc(av.rows, av.cols);
        Mat<T>& yv = vals_[y.id];
        for (size_t i = 0; i < yv.size(); ++i) yv.a[i] = av.a[i] * s;
        push([this, a, y, s] {
            const Mat<T>& dy = grads_[y.id];
            Mat<T>& da = grads_[a.id];
            for (size_t i = 0; i < dy.size(); ++i) da.a[i] += dy.a[i] * s;
        });
        return y;
    }

    Var gelu(Var x) {
        const Mat<T>& xv = vals_[x.id];
        Var y = alloc(xv.rows, xv.cols);
        Mat<T>& yv = vals_[y.id];
        for (size_t i = 0; i < yv.size(); ++i) {
            T u = xv.a[i];
            yv.a[i] = u * gelu_cdf(u);
        }
        push([this, x, y] {
            const Mat<T>& dy = grads_[y.id];
            const Mat<T>& xv = vals_[x.id];
            Mat<T>& dx = grads_[x.id];
            for (size_t i = 0; i < dy.size(); ++i) {
                T u = xv.a[i];
                dx.a[i] += dy.a[i] * (gelu_cdf(u) + u * gelu_pdf(u));
            }
        });
        return y;
    }

    Var relu(Var x) {
        const Mat<T>& xv = vals_[x.id];
        Var y = alloc(xv.rows, xv.cols);
        Mat<T>& yv = vals_[y.id];
        for (size_t i = 0; i < yv.size(); ++i) yv.a[i] = xv.a[i] > T(0) ? xv.a[i] : T(0);
        push([this, x, y] {
            const Mat<T>& dy = grads_[y.id];
            const Mat<T>& xv = vals_[x.id];
            Mat<T>& dx = grads_[x.id];
            for (size_t i = 0; i < dy.size(); ++i)
                if (xv.a[i] > T(0)) dx.a[i] += dy.a[i];
        });
        return y;
    }

    // Per-row layer norm with learned gain/bias (each 1 x cols), eps 1e-5.
    Var layer_norm(Var x, Var gain, Var bias) {
        const Mat<T>& xv = vals_[x.id];
        const Mat<T>& gv = vals_[gain.id];
        const Mat<T>& bv = vals_[bias.id];
        require(gv.cols == xv.cols && bv.cols == xv.cols, "layer_norm: gain/bias shape");
        Var y = alloc(xv.rows, xv.cols);
        Mat<T>& yv = vals_[y.id];
        const int n = xv.cols;
        Mat<T>& xhat = scratch(y.id, xv.rows, n);
        std::vector<T>& inv_sigma = scratch_vec(y.id, xv.rows);
        for (int i = 0; i < xv.rows; ++i) {
            const T* r = xv.row(i);
            double mu = 0.0;
            for (int j = 0; j < n; ++j) mu += static_cast<double>(r[j]);
            mu /= n;
            double var = 0.0;
            for (int j = 0; j < n; ++j) {
                double d = static_cast<double>(r[j]) - mu;
                var += d * d;
            }
            var /= n;
            double is = 1.0 / std::sqrt(var + 1e-5);
            inv_sigma[i] = static_cast<T>(is);
            T* h = xhat.row(i);
            T* o = yv.row(i);
            for (int j = 0; j < n; ++j) {
                h[j] = static_cast<T>((static_cast<double>(r[j]) - mu) * is);
                o[j] = gv.a[j] * h[j] + bv.a[j];
            }
        }
        push([this, x, gain, bias, y, n] {
            const Mat<T>& dy = grads_[y.id];
            const Mat<T>& gv = vals_[gain.id];
            Mat<T>& dx = grads_[x.id];
            Mat<T>& dg = grads_[gain.id];
            Mat<T>& db = grads_[bias.id];
            const Mat<T>& xhat = scratch_ro(y.id);
            const std::vector<T>& inv_sigma = scratch_vec_ro(y.id);
            std::vector<double> dgs(n, 0.0), dbs(n, 0.0);
            for (int i = 0; i < dy.rows; ++i) {
                const T* dyr = dy.row(i);
                const T* h = xhat.row(i);
                T* dxr = dx.row(i);
                double m1 = 0.0, m2 = 0.0;
                for (int j = 0; j < n; ++j) {
                    double dh = static_cast<double>(dyr[j]) * static_cast<double>(gv.a[j]);
                    m1 += dh;
                    m2 += dh * static_cast<double>(h[j]);
                    dgs[j] += static_cast<double>(dyr[j]) * static_cast<double>(h[j]);
                    dbs[j] += static_cast<double>(dyr[j]);
                }
                m1 /= n;
                m2 /= n;
                double is = static_cast<double>(inv_sigma[i]);
                for (int j = 0; j < n; ++j) {
                    double dh = static_cast<double>(dyr[j]) * static_cast<double>(gv.a[j]);
                    dxr[j] += static_cast<T>(is * (dh - m1 - static_cast<double>(h[j]) * m2));
                }
            }
            for (int j = 0; j < n; ++j) {
                dg.a[j] += static_cast<T>(dgs[j]);
                db.a[j] += static_cast<T>(dbs[j]);
            }
        });
        return y;
    }

    // Fused multi-head scaled-dot-product attention over a batch of equal-
    // length sequences. q, k, v are (batch*seq x d_model) with heads laid out
    // as contiguous column slices of width d_model/heads. Causal masking
    // restricts row i to keys 0..i (exact prefix computation, no -inf
    // arithmetic, so later tokens cannot perturb earlier outputs even at the
    // bit level). When `capture` is non-null the row-stochastic A matrices of
    // batch sample 0 are recorded per head.
    Var attention(Var q, Var k, Var v, int batch, int seq, int heads, bool causal,
                  AttnCapture* capture = nullptr) {
        const Mat<T>& qv = vals_[q.id];
        require(qv.rows == batch * seq, "attention: row count mismatch");
        const int d_model = qv.cols;
        require(d_model % heads == 0, "attention: heads must divide d_model");
        const int dh = d_model / heads;
        const T inv_sqrt = static_cast<T>(1.0 / std::sqrt(static_cast<double>(dh)));
        Var y = alloc(batch * seq, d_model);
        Mat<T>& yv = vals_[y.id];
        const Mat<T>& kv = vals_[k.id];
        const Mat<T>& vv = vals_[v.id];

        // softmax weights kept for backward: batch x heads blocks of seq x seq
        auto attn = std::make_shared<std::vector<T>>(
            static_cast<size_t>(batch) * heads * seq * seq, T(0));
        if (capture) capture->heads.assign(heads, Mat<double>(seq, seq, 0.0));

        // per-(sample, head) panels so the score/output contractions run as
        // one gemm each instead of seq^2 short dot products
        std::vector<T> qh(static_cast<size_t>(seq) * dh), kh(qh.size()), vh(qh.size()),
            yh(qh.size());
        for (int b = 0; b < batch; ++b) {
            const int r0 = b * seq;
            for (int h = 0; h < heads; ++h) {
                const int c0 = h * dh;
                for (int i = 0; i < seq; ++i) {
                    const T* qi = qv.row(r0 + i) + c0;
                    const T* ki = kv.row(r0 + i) + c0;
                    const T* vi = vv.row(r0 + i) + c0;
                    for (int c = 0; c < dh; ++c) {
                        qh[static_cast<size_t>(i) * dh + c] = qi[c];
                        kh[static_cast<size_t>(i) * dh + c] = ki[c];
                        vh[static_cast<size_t>(i) * dh + c] = vi[c];
                    }
                }
                T* A = attn->data() + (static_cast<size_t>(b) * heads + h) * seq * seq;
                kern::gemm_nt(qh.data(), kh.data(), A, seq, dh, seq, false);
                for (int i = 0; i < seq; ++i) {
                    const int jmax = causal ? i : seq - 1;
                    T* ai = A + static_cast<size_t>(i) * seq;
                    double mx = -1e300;
                    for (int j = 0; j <= jmax; ++j) {
                        double s = static_cast<double>(ai[j]) * static_cast<double>(inv_sqrt);
                        ai[j] = static_cast<T>(s);
                        if (s > mx) mx = s;
                    }
                    double z = 0.0;
                    for (int j = 0; j <= jmax; ++j) {
                        double e = std::exp(static_cast<double>(ai[j]) - mx);
                        ai[j] = static_cast<T>(e);
                        z += e;
                    }
                    T invz = static_cast<T>(1.0 / z);
                    for (int j = 0; j <= jmax; ++j) ai[j] *= invz;
                    // masked entries stay exactly zero so the output gemm
                    // cannot leak information from later tokens
                    for (int j = jmax + 1; j < seq; ++j) ai[j] = T(0);
                    if (capture && b == 0)
                        for (int j = 0; j <= jmax; ++j)
                            capture->heads[h](i, j) = static_cast<double>(ai[j]);
                }
                kern::gemm_nn(A, vh.data(), yh.data(), seq, seq, dh, false);
                for (int i = 0; i < seq; ++i) {
                    T* oi = yv.row(r0 + i) + c0;
                    for (int c = 0; c < dh; ++c) oi[c] = yh[static_cast<size_t>(i) * dh + c];
                }
            }
        }

        push([this, q, k, v, y, attn, batch, seq, heads, dh, causal, inv_sqrt] {
            const Mat<T>& dy = grads_[y.id];
            const Mat<T>& qv = vals_[q.id];
            const Mat<T>& kv = vals_[k.id];
            const Mat<T>& vv = vals_[v.id];
            Mat<T>& dq = grads_[q.id];
            Mat<T>& dk = grads_[k.id];
            Mat<T>& dv = grads_[v.id];
            const size_t panel = static_cast<size_t>(seq) * dh;
            std::vector<T> qh(panel), kh(panel), vh(panel), dyh(panel), gh(panel);
            std::vector<T> dS(static_cast<size_t>(seq) * seq);
            for (int b = 0; b < batch; ++b) {
                const int r0 = b * seq;
                for (int h = 0; h < heads; ++h) {
                    const int c0 = h * dh;
                    for (int i = 0; i < seq; ++i)
                        for (int c = 0; c < dh; ++c) {
                            qh[static_cast<size_t>(i) * dh + c] = qv.row(r0 + i)[c0 + c];
                            kh[static_cast<size_t>(i) * dh + c] = kv.row(r0 + i)[c0 + c];
                            vh[static_cast<size_t>(i) * dh + c] = vv.row(r0 + i)[c0 + c];
                            dyh[static_cast<size_t>(i) * dh + c] = dy.row(r0 + i)[c0 + c];
                        }
                    const T* A = attn->data() + (static_cast<size_t>(b) * heads + h) * seq * seq;
                    // dA = dy V^T, then dS via the row-wise softmax jacobian
                    kern::gemm_nt(dyh.data(), vh.data(), dS.data(), seq, dh, seq, false);
                    for (int i = 0; i < seq; ++i) {
                        const int jmax = causal ? i : seq - 1;
                        const T* ai = A + static_cast<size_t>(i) * seq;
                        T* di = dS.data() + static_cast<size_t>(i) * seq;
                        double dot_aa = 0.0;
                        for (int j = 0; j <= jmax; ++j)
                            dot_aa += static_cast<double>(ai[j]) * static_cast<double>(di[j]);
                        for (int j = 0; j <= jmax; ++j)
                            di[j] = static_cast<T>(static_cast<double>(ai[j]) *
                                                   (static_cast<double>(di[j]) - dot_aa)) *
                                    inv_sqrt;
                        for (int j = jmax + 1; j < seq; ++j) di[j] = T(0);
                    }
                    // dV = A^T dy
                    kern::gemm_tn(A, dyh.data(), gh.data(), seq, seq, dh, false);
                    for (int i = 0; i < seq; ++i)
                        for (int c = 0; c < dh; ++c)
                            dv.row(r0 + i)[c0 + c] += gh[static_cast<size_t>(i) * dh + c];
                    // dQ = dS K / sqrt(dh)
                    kern::gemm_nn(dS.data(), kh.data(), gh.data(), seq, seq, dh, false);
                    for (int i = 0; i < seq; ++i)
                        for (int c = 0; c < dh; ++c)
                            dq.row(r0 + i)[c0 + c] += gh[static_cast<size_t>(i) * dh + c];
                    // dK = dS^T Q / sqrt(dh)
                    kern::gemm_tn(dS.data(), qh.data(), gh.data(), seq, seq, dh, false);
                    for (int i = 0; i < seq; ++i)
                        for (int c = 0; c < dh; ++c)
                            dk.row(r0 + i)[c0 + c] += gh[static_cast<size_t>(i) * dh + c];
                }
            }
        });
        return y;
    }

    Var concat_cols(const std::vector<Var>& xs) {
        require(!xs.empty(), "concat_cols: empty input");
        int rows = vals_[xs[0].id].rows;
        int cols = 0;
        for (Var x : xs) {
            require(vals_[x.id].rows == rows, "concat_cols: row mismatch");
            cols += vals_[x.id].cols;
        }
        Var y = alloc(rows, cols);
        Mat<T>& yv = vals_[y.id];
        int off = 0;
        for (Var x : xs) {
            const Mat<T>& xv = vals_[x.id];
            for (int i = 0; i < rows; ++i)
                for (int j = 0; j < xv.cols; ++j) yv(i, off + j) = xv(i, j);
            off += xv.cols;
        }
        auto parts = xs;
        push([this, parts, y, rows] {
            const Mat<T>& dy = grads_[y.id];
            int off = 0;
            for (Var x : parts) {
                Mat<T>& dx = grads_[x.id];
                for (int i = 0; i < rows; ++i)
                    for (int j = 0; j < dx.cols; ++j) dx(i, j) += dy(i, off + j);
                off += dx.cols;
            }
        });
        return y;
    }

    // Interleave per-step (batch x c) outputs into (batch*seq x c), row
    // b*seq + t. Inverse routing in backward.
    Var stack_steps(const std::vector<Var>& steps, int batch) {
        const int seq = static_cast<int>(steps.size());
        require(seq >= 1, "stack_steps: empty");
        const int c = vals_[steps[0].id].cols;
        Var y = alloc(batch * seq, c);
        Mat<T>& yv = vals_[y.id];
        for (int t = 0; t < seq; ++t) {
            const Mat<T>& sv = vals_[steps[t].id];
            require(sv.rows == batch && sv.cols == c, "stack_steps: shape mismatch");
            for (int b = 0; b < batch; ++b)
                for (int j = 0; j < c; ++j) yv(b * seq + t, j) = sv(b, j);
        }
        auto parts = steps;
        push([this, parts, y, batch] {
            const Mat<T>& dy = grads_[y.id];
            const int seq = static_cast<int>(parts.size());
            for (int t = 0; t < seq; ++t) {
                Mat<T>& ds = grads_[parts[t].id];
                for (int b = 0; b < batch; ++b)
                    for (int j = 0; j < ds.cols; ++j) ds(b, j) += dy(b * seq + t, j);
            }
        });
        return y;
    }

    // Trading gain per path: gain_b = sum_{t,c} delta(b*seq+t, c) * incr(b*seq+t, c).
    Var pathwise_gain(Var delta, const Mat<T>& incr, int batch, int seq) {
        const Mat<T>& dv = vals_[delta.id];
        require(dv.rows == batch * seq && incr.rows == dv.rows && incr.cols == dv.cols,
                "pathwise_gain: shape mismatch");
        Var y = alloc(batch, 1);
        Mat<T>& yv = vals_[y.id];
        const int c = dv.cols;
        for (int b = 0; b < batch; ++b) {
            double s = 0.0;
            for (int t = 0; t < seq; ++t)
                s += kern::dot(dv.row(b * seq + t), incr.row(b * seq + t), c);
            yv(b, 0) = static_cast<T>(s);
        }
        auto inc = std::make_shared<Mat<T>>(incr);
        push([this, delta, y, inc, batch, seq] {
            const Mat<T>& dy = grads_[y.id];
            Mat<T>& dd = grads_[delta.id];
            const int c = dd.cols;
            for (int b = 0; b < batch; ++b) {
                T g = dy(b, 0);
                for (int t = 0; t < seq; ++t)
                    kern::axpy(g, inc->row(b * seq + t), dd.row(b * seq + t), c);
            }
        });
        return y;
    }

    // loss = mean_b (x_b + offset_b)^2 over a (batch x 1) input.
    Var squared_error_mean(Var x, const std::vector<T>& offset) {
        const Mat<T>& xv = vals_[x.id];
        require(xv.cols == 1 && static_cast<size_t>(xv.rows) == offset.size(),
                "squared_error_mean: shape mismatch");
        Var y = alloc(1, 1);
        double s = 0.0;
        for (int b = 0; b < xv.rows; ++b) {
            double r = static_cast<double>(xv(b, 0)) + static_cast<double>(offset[b]);
            s += r * r;
        }
        vals_[y.id](0, 0) = static_cast<T>(s / xv.rows);
        auto off = std::make_shared<std::vector<T>>(offset);
        push([this, x, y, off] {
            const T g = grads_[y.id](0, 0);
            const Mat<T>& xv = vals_[x.id];
            Mat<T>& dx = grads_[x.id];
            const T inv = static_cast<T>(1.0 / xv.rows);
            for (int b = 0; b < xv.rows; ++b)
                dx(b, 0) += g * T(2) * (xv(b, 0) + (*off)[b]) * inv;
        });
        return y;
    }

    Var mean_all(Var x) {
        const Mat<T>& xv = vals_[x.id];
        Var y = alloc(1, 1);
        double s = 0.0;
        for (const T& v : xv.a) s += static_cast<double>(v);
        vals_[y.id](0, 0) = static_cast<T>(s / xv.size());
        push([this, x, y] {
            const T g = grads_[y.id](0, 0);
            Mat<T>& dx = grads_[x.id];
            const T inv = static_cast<T>(1.0 / dx.size());
            for (T& v : dx.a) v += g * inv;
        });
        return y;
    }

    // Throws a numerical error naming `where` if the value holds a non-finite entry.
    void check_finite(Var x, const std::string& where) const {
        if (!vals_[x.id].all_finite())
            throw std::runtime_error("non-finite activation in " + where);
    }

    void backward(Var scalar) {
        require(scalar.rows == 1 && scalar.cols == 1, "backward: output must be scalar");
        grads_[scalar.id](0, 0) = T(1);
        for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
    }

    // Start a fresh recording but keep the slot storage. Every op writes its
    // whole output, so reused value buffers need no re-zeroing; gradient
    // buffers are re-zeroed slot by slot in alloc(). Lets a training loop
    // record the same graph each step without reallocating.
    void reset() {
        nodes_.clear();
        live_ = 0;
    }

private:
    Var alloc(int r, int c) {
        Var v;
        v.id = live_;
        v.rows = r;
        v.cols = c;
        if (v.id < static_cast<int>(vals_.size())) {
            Mat<T>& mv = vals_[v.id];
            Mat<T>& mg = grads_[v.id];
            if (mv.rows != r || mv.cols != c) {
                mv = Mat<T>(r, c);
                mg = Mat<T>(r, c);
            } else {
                mg.fill(T(0));
            }
        } else {
            vals_.emplace_back(r, c);
            grads_.emplace_back(r, c);
        }
        ++live_;
        return v;
    }

    void push(std::function<void()> fn) { nodes_.push_back(std::move(fn)); }

    static double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.70710678118654752440); }
    static double normal_pdf(double x) {
        return 0.39894228040143267794 * std::exp(-0.5 * x * x);
    }
    // GELU factors evaluated in working precision: the float tape takes the
    // much cheaper erfcf/expf path, the double tape keeps full accuracy.
    static T gelu_cdf(T x) {
        if constexpr (std::is_same_v<T, float>)
            return 0.5f * ::erfcf(-x * 0.70710678f);
        else
            return static_cast<T>(normal_cdf(static_cast<double>(x)));
    }
    static T gelu_pdf(T x) {
        if constexpr (std::is_same_v<T, float>)
            return 0.39894228f * ::expf(-0.5f * x * x);
        else
            return static_cast<T>(normal_pdf(static_cast<double>(x)));
    }

    Mat<T>& scratch(int key, int r, int c) {
        auto& m = scratch_[key];
        m = Mat<T>(r, c);
        return m;
    }
    const Mat<T>& scratch_ro(int key) const { return scratch_.at(key); }
    std::vector<T>& scratch_vec(int key, int n) {
        auto& v = scratch_vecs_[key];
        v.assign(n, T(0));
        return v;
    }
    const std::vector<T>& scratch_vec_ro(int key) const { return scratch_vecs_.at(key); }

    // deque: node storage must be reference-stable while an op still holds
    // references taken before alloc() grows it
    std::deque<Mat<T>> vals_;
    std::deque<Mat<T>> grads_;
    int live_ = 0;
    std::vector<std::function<void()>> nodes_;
    std::unordered_map<int, Mat<T>> scratch_;
    std::unordered_map<int, std::vector<T>> scratch_vecs_;
};

}  // namespace sighedge::ad
