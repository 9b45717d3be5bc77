#include "sighedge/nn/models.hpp"

#include <cmath>

namespace sighedge::nn {

sig::PathSeries lift(const Mat<double>& features) {
    sig::PathSeries path(features.rows + 1, features.cols, 0.0);
    for (int i = 0; i < features.rows; ++i)
        for (int j = 0; j < features.cols; ++j) path(i + 1, j) = features(i, j);
    return path;
}

std::vector<Mat<double>> stream_signature_levels(const rb::FeatureBatch& fb, int depth) {
    const int n = fb.n_steps;
    const int d = fb.d_feat;
    std::vector<Mat<double>> out;
    out.reserve(depth);
    for (int lv = 1; lv <= depth; ++lv)
        out.emplace_back(fb.n_paths * n, static_cast<int>(sig::level_size(d, lv)));
    Mat<double> block(n, d);
    for (int p = 0; p < fb.n_paths; ++p) {
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < d; ++j) block(k, j) = fb.features(p * n + k, j);
        sig::SignatureStream stream = sig::stream_signature(lift(block), depth);
        for (int k = 0; k < n; ++k)
            for (int lv = 1; lv <= depth; ++lv) {
                const auto& level = stream.steps[k].levels[lv - 1];
                double* row = out[lv - 1].row(p * n + k);
                for (size_t t = 0; t < level.size(); ++t) row[t] = level[t];
            }
    }
    return out;
}

Mat<double> positional_encoding(int seq, int d_model) {
    Mat<double> pe(seq, d_model);
    for (int t = 0; t < seq; ++t)
        for (int j = 0; j < d_model; ++j) {
            double freq = std::pow(10000.0, -2.0 * (j / 2) / d_model);
            pe(t, j) = (j % 2 == 0) ? std::sin(t * freq) : std::cos(t * freq);
        }
    return pe;
}

namespace {

template <typename T>
Mat<T> tile_rows(const Mat<double>& block, int copies) {
    Mat<T> out(block.rows * copies, block.cols);
    for (int c = 0; c < copies; ++c)
        for (int i = 0; i < block.rows; ++i)
            for (int j = 0; j < block.cols; ++j)
                out(c * block.rows + i, j) = static_cast<T>(block(i, j));
    return out;
}

}  // namespace

// ------------------------------------------------------------- SigFormer ---

template <typename T>
SigFormer<T>::SigFormer(SigFormerConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    levels_.resize(cfg_.sig_depth);
    for (int lv = 1; lv <= cfg_.sig_depth; ++lv) {
        LevelSegs& L = levels_[lv - 1];
        const int in = static_cast<int>(sig::level_size(cfg_.d_feat, lv));
        const std::string p = "level" + std::to_string(lv) + ".";
        L.embed_w = params_.add(p + "embed.w", cfg_.d_model, in);
        L.embed_b = params_.add(p + "embed.b", 1, cfg_.d_model);
        L.layers.resize(cfg_.n_layers);
        for (int l = 0; l < cfg_.n_layers; ++l) {
            LayerSegs& s = L.layers[l];
            const std::string q = p + "layer" + std::to_string(l) + ".";
            s.ln1_g = params_.add(q + "ln1.g", 1, cfg_.d_model);
            s.ln1_b = params_.add(q + "ln1.b", 1, cfg_.d_model);
            s.wq = params_.add(q + "wq", cfg_.d_model, cfg_.d_model);
            s.wk = params_.add(q + "wk", cfg_.d_model, cfg_.d_model);
            s.wv = params_.add(q + "wv", cfg_.d_model, cfg_.d_model);
            s.wo = params_.add(q + "wo", cfg_.d_model, cfg_.d_model);
            s.ln2_g = params_.add(q + "ln2.g", 1, cfg_.d_model);
            s.ln2_b = params_.add(q + "ln2.b", 1, cfg_.d_model);
            s.w1 = params_.add(q + "ffn.w1", cfg_.d_ffn, cfg_.d_model);
            s.b1 = params_.add(q + "ffn.b1", 1, cfg_.d_ffn);
            s.w2 = params_.add(q + "ffn.w2", cfg_.d_model, cfg_.d_ffn);
            s.b2 = params_.add(q + "ffn.b2", 1, cfg_.d_model);
        }
        L.lnf_g = params_.add(p + "lnf.g", 1, cfg_.d_model);
        L.lnf_b = params_.add(p + "lnf.b", 1, cfg_.d_model);
    }
    head_w_ = params_.add("head.w", cfg_.d_hedge, cfg_.sig_depth * cfg_.d_model);
    head_b_ = params_.add("head.b", 1, cfg_.d_hedge);
}

template <typename T>
void SigFormer<T>::init(uint64_t seed) {
    Rng rng(mix_seed(seed, 0x51f2));
    for (auto& L : levels_) {
        params_.init_glorot(rng, L.embed_w);
        params_.init_const(L.embed_b, T(0));
        for (auto& s : L.layers) {
            params_.init_const(s.ln1_g, T(1));
            params_.init_const(s.ln1_b, T(0));
            params_.init_glorot(rng, s.wq);
            params_.init_glorot(rng, s.wk);
            params_.init_glorot(rng, s.wv);
            params_.init_glorot(rng, s.wo);
            params_.init_const(s.ln2_g, T(1));
            params_.init_const(s.ln2_b, T(0));
            params_.init_glorot(rng, s.w1);
            params_.init_const(s.b1, T(0));
            params_.init_glorot(rng, s.w2);
            params_.init_const(s.b2, T(0));
        }
        params_.init_const(L.lnf_g, T(1));
        params_.init_const(L.lnf_b, T(0));
    }
    // zero output head: the untrained strategy hedges nothing
    params_.init_const(head_w_, T(0));
    params_.init_const(head_b_, T(0));
}

template <typename T>
ad::Var SigFormer<T>::forward(ad::Tape<T>& tape, const rb::FeatureBatch& fb,
                              std::vector<ad::AttnCapture>* attn) {
    require(fb.d_feat == cfg_.d_feat, "sigformer: feature width mismatch");
    const int B = fb.n_paths;
    const int S = fb.n_steps;
    std::vector<Mat<double>> sig_levels = stream_signature_levels(fb, cfg_.sig_depth);
    Mat<double> pe = cfg_.positional_encoding ? positional_encoding(S, cfg_.d_model)
                                              : Mat<double>();
    level_streams_.clear();

    std::vector<ad::Var> level_out;
    for (int lv = 0; lv < cfg_.sig_depth; ++lv) {
        const LevelSegs& L = levels_[lv];
        ad::Var tokens = tape.constant(sig_levels[lv].template cast<T>());
        ad::Var x = tape.linear(tokens, params_.leaf(tape, L.embed_w),
                                params_.leaf(tape, L.embed_b));
        if (cfg_.positional_encoding) x = tape.add_const(x, tile_rows<T>(pe, B));
        const std::string tag = "level" + std::to_string(lv + 1);
        for (int l = 0; l < cfg_.n_layers; ++l) {
            const LayerSegs& s = L.layers[l];
            ad::Var h = tape.layer_norm(x, params_.leaf(tape, s.ln1_g),
                                        params_.leaf(tape, s.ln1_b));
            ad::Var q = tape.linear(h, params_.leaf(tape, s.wq));
            ad::Var k = tape.linear(h, params_.leaf(tape, s.wk));
            ad::Var v = tape.linear(h, params_.leaf(tape, s.wv));
            ad::AttnCapture* cap = nullptr;
            if (attn) {
                attn->emplace_back();
                cap = &attn->back();
            }
            ad::Var a = tape.attention(q, k, v, B, S, cfg_.n_heads, cfg_.causal, cap);
            x = tape.add(x, tape.linear(a, params_.leaf(tape, s.wo)));
            tape.check_finite(x, tag + ".layer" + std::to_string(l) + ".attention");
            ad::Var h2 = tape.layer_norm(x, params_.leaf(tape, s.ln2_g),
                                         params_.leaf(tape, s.ln2_b));
            ad::Var f = tape.gelu(tape.linear(h2, params_.leaf(tape, s.w1),
                                              params_.leaf(tape, s.b1)));
            x = tape.add(x, tape.linear(f, params_.leaf(tape, s.w2),
                                        params_.leaf(tape, s.b2)));
            tape.check_finite(x, tag + ".layer" + std::to_string(l) + ".ffn");
        }
        x = tape.layer_norm(x, params_.leaf(tape, L.lnf_g), params_.leaf(tape, L.lnf_b));
        level_streams_.push_back(tape.val(x).template cast<double>());
        level_out.push_back(x);
    }
    ad::Var cat = tape.concat_cols(level_out);
    return tape.linear(cat, params_.leaf(tape, head_w_), params_.leaf(tape, head_b_));
}

// ------------------------------------------------- vanilla transformer -----

template <typename T>
VanillaTransformer<T>::VanillaTransformer(SigFormerConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    embed_w_ = params_.add("embed.w", cfg_.d_model, cfg_.d_feat);
    embed_b_ = params_.add("embed.b", 1, cfg_.d_model);
    layers_.resize(cfg_.n_layers);
    for (int l = 0; l < cfg_.n_layers; ++l) {
        LayerSegs& s = layers_[l];
        const std::string q = "layer" + std::to_string(l) + ".";
        s.ln1_g = params_.add(q + "ln1.g", 1, cfg_.d_model);
        s.ln1_b = params_.add(q + "ln1.b", 1, cfg_.d_model);
        s.wq = params_.add(q + "wq", cfg_.d_model, cfg_.d_model);
        s.wk = params_.add(q + "wk", cfg_.d_model, cfg_.d_model);
        s.wv = params_.add(q + "wv", cfg_.d_model, cfg_.d_model);
        s.wo = params_.add(q + "wo", cfg_.d_model, cfg_.d_model);
        s.ln2_g = params_.add(q + "ln2.g", 1, cfg_.d_model);
        s.ln2_b = params_.add(q + "ln2.b", 1, cfg_.d_model);
        s.w1 = params_.add(q + "ffn.w1", cfg_.d_ffn, cfg_.d_model);
        s.b1 = params_.add(q + "ffn.b1", 1, cfg_.d_ffn);
        s.w2 = params_.add(q + "ffn.w2", cfg_.d_model, cfg_.d_ffn);
        s.b2 = params_.add(q + "ffn.b2", 1, cfg_.d_model);
    }
    lnf_g_ = params_.add("lnf.g", 1, cfg_.d_model);
    lnf_b_ = params_.add("lnf.b", 1, cfg_.d_model);
    head_w_ = params_.add("head.w", cfg_.d_hedge, cfg_.d_model);
    head_b_ = params_.add("head.b", 1, cfg_.d_hedge);
}

template <typename T>
void VanillaTransformer<T>::init(uint64_t seed) {
    Rng rng(mix_seed(seed, 0x7a11));
    params_.init_glorot(rng, embed_w_);
    params_.init_const(embed_b_, T(0));
    for (auto& s : layers_) {
        params_.init_const(s.ln1_g, T(1));
        params_.init_const(s.ln1_b, T(0));
        params_.init_glorot(rng, s.wq);
        params_.init_glorot(rng, s.wk);
        params_.init_glorot(rng, s.wv);
        params_.init_glorot(rng, s.wo);
        params_.init_const(s.ln2_g, T(1));
        params_.init_const(s.ln2_b, T(0));
        params_.init_glorot(rng, s.w1);
        params_.init_const(s.b1, T(0));
        params_.init_glorot(rng, s.w2);
        params_.init_const(s.b2, T(0));
    }
    params_.init_const(lnf_g_, T(1));
    params_.init_const(lnf_b_, T(0));
    params_.init_const(head_w_, T(0));
    params_.init_const(head_b_, T(0));
}

template <typename T>
ad::Var VanillaTransformer<T>::forward(ad::Tape<T>& tape, const rb::FeatureBatch& fb,
                                       std::vector<ad::AttnCapture>* attn) {
    require(fb.d_feat == cfg_.d_feat, "transformer: feature width mismatch");
    const int B = fb.n_paths;
    const int S = fb.n_steps;
    ad::Var tokens = tape.constant(fb.features.template cast<T>());
    ad::Var x = tape.linear(tokens, params_.leaf(tape, embed_w_), params_.leaf(tape, embed_b_));
    if (cfg_.positional_encoding)
        x = tape.add_const(x, tile_rows<T>(positional_encoding(S, cfg_.d_model), B));
    for (int l = 0; l < cfg_.n_layers; ++l) {
        const LayerSegs& s = layers_[l];
        ad::Var h = tape.layer_norm(x, params_.leaf(tape, s.ln1_g), params_.leaf(tape, s.ln1_b));
        ad::Var q = tape.linear(h, params_.leaf(tape, s.wq));
        ad::Var k = tape.linear(h, params_.leaf(tape, s.wk));
        ad::Var v = tape.linear(h, params_.leaf(tape, s.wv));
        ad::AttnCapture* cap = nullptr;
        if (attn) {
            attn->emplace_back();
            cap = &attn->back();
        }
        ad::Var a = tape.attention(q, k, v, B, S, cfg_.n_heads, cfg_.causal, cap);
        x = tape.add(x, tape.linear(a, params_.leaf(tape, s.wo)));
        tape.check_finite(x, "layer" + std::to_string(l) + ".attention");
        ad::Var h2 = tape.layer_norm(x, params_.leaf(tape, s.ln2_g), params_.leaf(tape, s.ln2_b));
        ad::Var f = tape.gelu(tape.linear(h2, params_.leaf(tape, s.w1), params_.leaf(tape, s.b1)));
        x = tape.add(x, tape.linear(f, params_.leaf(tape, s.w2), params_.leaf(tape, s.b2)));
        tape.check_finite(x, "layer" + std::to_string(l) + ".ffn");
    }
    x = tape.layer_norm(x, params_.leaf(tape, lnf_g_), params_.leaf(tape, lnf_b_));
    return tape.linear(x, params_.leaf(tape, head_w_), params_.leaf(tape, head_b_));
}

// --------------------------------------------------------- sig-linear ------

template <typename T>
SigLinear<T>::SigLinear(int sig_depth, int d_feat, int d_hedge, int n_steps)
    : depth_(sig_depth), d_feat_(d_feat), d_hedge_(d_hedge), n_steps_(n_steps) {
    w_ = params_.add("w", d_hedge_, static_cast<int>(sig::flat_size(d_feat_, depth_)));
}

template <typename T>
void SigLinear<T>::init(uint64_t) {
    params_.init_const(w_, T(0));
}

template <typename T>
ad::Var SigLinear<T>::forward(ad::Tape<T>& tape, const rb::FeatureBatch& fb,
                              std::vector<ad::AttnCapture>*) {
    require(fb.d_feat == d_feat_, "sig-linear: feature width mismatch");
    std::vector<Mat<double>> levels = stream_signature_levels(fb, depth_);
    const int rows = fb.n_paths * fb.n_steps;
    Mat<double> flat(rows, static_cast<int>(sig::flat_size(d_feat_, depth_)));
    int off = 0;
    for (const auto& lv : levels) {
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < lv.cols; ++j) flat(i, off + j) = lv(i, j);
        off += lv.cols;
    }
    ad::Var tokens = tape.constant(flat.cast<T>());
    return tape.linear(tokens, params_.leaf(tape, w_));
}

// -------------------------------------- semi-recurrent feed-forward --------

template <typename T>
SemiRecurrent<T>::SemiRecurrent(int d_feat, int d_hedge, int n_steps)
    : d_feat_(d_feat), d_hedge_(d_hedge), n_steps_(n_steps), hidden_(d_hedge + 15) {
    const int in = d_feat_ + d_hedge_;
    w1_ = params_.add("w1", hidden_, in);
    b1_ = params_.add("b1", 1, hidden_);
    w2_ = params_.add("w2", hidden_, hidden_);
    b2_ = params_.add("b2", 1, hidden_);
    w3_ = params_.add("w3", d_hedge_, hidden_);
    b3_ = params_.add("b3", 1, d_hedge_);
}

template <typename T>
void SemiRecurrent<T>::init(uint64_t seed) {
    Rng rng(mix_seed(seed, 0x5e31));
    params_.init_glorot(rng, w1_);
    params_.init_const(b1_, T(0));
    params_.init_glorot(rng, w2_);
    params_.init_const(b2_, T(0));
    params_.init_const(w3_, T(0));
    params_.init_const(b3_, T(0));
}

template <typename T>
ad::Var SemiRecurrent<T>::forward(ad::Tape<T>& tape, const rb::FeatureBatch& fb,
                                  std::vector<ad::AttnCapture>*) {
    require(fb.d_feat == d_feat_, "semi-recurrent: feature width mismatch");
    const int B = fb.n_paths;
    const int S = fb.n_steps;
    ad::Var w1 = params_.leaf(tape, w1_), b1 = params_.leaf(tape, b1_);
    ad::Var w2 = params_.leaf(tape, w2_), b2 = params_.leaf(tape, b2_);
    ad::Var w3 = params_.leaf(tape, w3_), b3 = params_.leaf(tape, b3_);
    ad::Var prev = tape.constant(Mat<T>(B, d_hedge_, T(0)));
    std::vector<ad::Var> deltas;
    for (int k = 0; k < S; ++k) {
        Mat<T> feat_k(B, d_feat_);
        for (int b = 0; b < B; ++b)
            for (int j = 0; j < d_feat_; ++j)
                feat_k(b, j) = static_cast<T>(fb.features(b * S + k, j));
        ad::Var in = tape.concat_cols({tape.constant(std::move(feat_k)), prev});
        ad::Var h = tape.relu(tape.linear(in, w1, b1));
        h = tape.relu(tape.linear(h, w2, b2));
        prev = tape.linear(h, w3, b3);
        deltas.push_back(prev);
    }
    return tape.stack_steps(deltas, B);
}

// ------------------------------------------------------ recurrent hedger ---

template <typename T>
RecurrentHedger<T>::RecurrentHedger(int d_feat, int d_hedge, int n_steps, int n_layers, int hidden)
    : d_feat_(d_feat), d_hedge_(d_hedge), n_steps_(n_steps), n_layers_(n_layers),
      hidden_(hidden) {
    for (int l = 0; l < n_layers_; ++l) {
        const int in = (l == 0) ? d_feat_ + d_hedge_ : hidden_;
        const std::string p = "cell" + std::to_string(l) + ".";
        wx_.push_back(params_.add(p + "wx", hidden_, in));
        wh_.push_back(params_.add(p + "wh", hidden_, hidden_));
        b_.push_back(params_.add(p + "b", 1, hidden_));
    }
    wout_ = params_.add("out.w", d_hedge_, hidden_);
    bout_ = params_.add("out.b", 1, d_hedge_);
}

template <typename T>
void RecurrentHedger<T>::init(uint64_t seed) {
    Rng rng(mix_seed(seed, 0x4e4e));
    for (int l = 0; l < n_layers_; ++l) {
        params_.init_glorot(rng, wx_[l]);
        params_.init_glorot(rng, wh_[l]);
        params_.init_const(b_[l], T(0));
    }
    params_.init_const(wout_, T(0));
    params_.init_const(bout_, T(0));
}

template <typename T>
ad::Var RecurrentHedger<T>::forward(ad::Tape<T>& tape, const rb::FeatureBatch& fb,
                                    std::vector<ad::AttnCapture>*) {
    require(fb.d_feat == d_feat_, "rnn: feature width mismatch");
    const int B = fb.n_paths;
    const int S = fb.n_steps;
    std::vector<ad::Var> wx, wh, bb;
    for (int l = 0; l < n_layers_; ++l) {
        wx.push_back(params_.leaf(tape, wx_[l]));
        wh.push_back(params_.leaf(tape, wh_[l]));
        bb.push_back(params_.leaf(tape, b_[l]));
    }
    ad::Var wout = params_.leaf(tape, wout_), bout = params_.leaf(tape, bout_);
    std::vector<ad::Var> state(n_layers_, tape.constant(Mat<T>(B, hidden_, T(0))));
    ad::Var prev = tape.constant(Mat<T>(B, d_hedge_, T(0)));
    std::vector<ad::Var> deltas;
    for (int k = 0; k < S; ++k) {
        Mat<T> feat_k(B, d_feat_);
        for (int b2 = 0; b2 < B; ++b2)
            for (int j = 0; j < d_feat_; ++j)
                feat_k(b2, j) = static_cast<T>(fb.features(b2 * S + k, j));
        ad::Var in = tape.concat_cols({tape.constant(std::move(feat_k)), prev});
        for (int l = 0; l < n_layers_; ++l) {
            ad::Var z = tape.add(tape.linear(in, wx[l], bb[l]), tape.linear(state[l], wh[l]));
            state[l] = tape.relu(z);
            in = state[l];
        }
        prev = tape.linear(in, wout, bout);
        deltas.push_back(prev);
    }
    return tape.stack_steps(deltas, B);
}

template class SigFormer<float>;
template class SigFormer<double>;
template class VanillaTransformer<float>;
template class VanillaTransformer<double>;
template class SigLinear<float>;
template class SigLinear<double>;
template class SemiRecurrent<float>;
template class SemiRecurrent<double>;
template class RecurrentHedger<float>;
template class RecurrentHedger<double>;

}  // namespace sighedge::nn
