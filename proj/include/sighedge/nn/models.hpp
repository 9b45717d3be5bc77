#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sighedge/autodiff/tape.hpp"
#include "sighedge/nn/params.hpp"
#include "sighedge/rbergomi/rbergomi.hpp"
#include "sighedge/sig/signature.hpp"

namespace sighedge::nn {

struct SigFormerConfig {
    int sig_depth = 3;
    int n_layers = 5;
    int n_heads = 12;
    int d_model = 48;
    int d_ffn = 192;  // 4 * d_model
    bool causal = true;
    bool positional_encoding = false;
    int d_feat = 2;
    int d_hedge = 2;
    int n_steps = 30;

    void validate() const {
        require(sig_depth >= 1 && n_layers >= 1 && n_heads >= 1, "config: positive sizes");
        require(d_model >= 1 && d_ffn >= 1 && d_feat >= 1 && d_hedge >= 1 && n_steps >= 1,
                "config: positive sizes");
        require(d_model % n_heads == 0, "config: d_model must be divisible by n_heads");
    }
};

// Common interface for every hedging strategy network.
template <typename T>
class HedgerModel {
public:
    virtual ~HedgerModel() = default;
    virtual const std::string& name() const = 0;
    virtual ParamStore<T>& params() = 0;
    virtual void init(uint64_t seed) = 0;
    // Builds delta (n_paths*n_steps x d_hedge) on the tape. `attn`, when
    // non-null, receives one capture per attention call in forward order.
    virtual ad::Var forward(ad::Tape<T>& tape, const rb::FeatureBatch& fb,
                            std::vector<ad::AttnCapture>* attn = nullptr) = 0;
    virtual int d_hedge() const = 0;
};

// Zero-padded lift: prepend one all-zero row to an (n x d) feature block.
sig::PathSeries lift(const Mat<double>& features);

// Streamed prefix signatures of the lifted per-sample feature paths; returns
// one constant (n_paths*n_steps x d_feat^level) block per level 1..depth.
std::vector<Mat<double>> stream_signature_levels(const rb::FeatureBatch& fb, int depth);

// Sinusoidal positional encoding, (seq x d_model).
Mat<double> positional_encoding(int seq, int d_model);

// ------------------------------------------------------------- SigFormer ---

template <typename T>
class SigFormer final : public HedgerModel<T> {
public:
    explicit SigFormer(SigFormerConfig cfg);
    const std::string& name() const override { return name_; }
    ParamStore<T>& params() override { return params_; }
    void init(uint64_t seed) override;
    ad::Var forward(ad::Tape<T>& tape, const rb::FeatureBatch& fb,
                    std::vector<ad::AttnCapture>* attn = nullptr) override;
    int d_hedge() const override { return cfg_.d_hedge; }
    const SigFormerConfig& config() const { return cfg_; }

    // Pre-concatenation per-level stream outputs of the last forward call;
    // used by the parameter-path isolation test.
    const std::vector<Mat<double>>& last_level_streams() const { return level_streams_; }

private:
    struct LayerSegs {
        int ln1_g, ln1_b, wq, wk, wv, wo, ln2_g, ln2_b, w1, b1, w2, b2;
    };
    struct LevelSegs {
        int embed_w, embed_b;
        std::vector<LayerSegs> layers;
        int lnf_g, lnf_b;
    };

    SigFormerConfig cfg_;
    std::string name_ = "sigformer";
    ParamStore<T> params_;
    std::vector<LevelSegs> levels_;
    int head_w_, head_b_;
    std::vector<Mat<double>> level_streams_;
};

// ------------------------------------------------- vanilla transformer -----

template <typename T>
class VanillaTransformer final : public HedgerModel<T> {
public:
    explicit VanillaTransformer(SigFormerConfig cfg);  // sig_depth ignored
    const std::string& name() const override { return name_; }
    ParamStore<T>& params() override { return params_; }
    void init(uint64_t seed) override;
    ad::Var forward(ad::Tape<T>& tape, const rb::FeatureBatch& fb,
                    std::vector<ad::AttnCapture>* attn = nullptr) override;
    int d_hedge() const override { return cfg_.d_hedge; }

private:
    struct LayerSegs {
        int ln1_g, ln1_b, wq, wk, wv, wo, ln2_g, ln2_b, w1, b1, w2, b2;
    };
    SigFormerConfig cfg_;
    std::string name_ = "transformer";
    ParamStore<T> params_;
    int embed_w_, embed_b_;
    std::vector<LayerSegs> layers_;
    int lnf_g_, lnf_b_, head_w_, head_b_;
};

// --------------------------------------------------------- sig-linear ------

template <typename T>
class SigLinear final : public HedgerModel<T> {
public:
    SigLinear(int sig_depth, int d_feat, int d_hedge, int n_steps);
    const std::string& name() const override { return name_; }
    ParamStore<T>& params() override { return params_; }
    void init(uint64_t seed) override;
    ad::Var forward(ad::Tape<T>& tape, const rb::FeatureBatch& fb,
                    std::vector<ad::AttnCapture>* attn = nullptr) override;
    int d_hedge() const override { return d_hedge_; }

private:
    int depth_, d_feat_, d_hedge_, n_steps_;
    std::string name_ = "sig-linear";
    ParamStore<T> params_;
    int w_;
};

// -------------------------------------- semi-recurrent feed-forward --------

// delta_k = F(features_k, delta_{k-1}) with one shared two-hidden-layer ReLU
// network of width d_hedge + 15.
template <typename T>
class SemiRecurrent final : public HedgerModel<T> {
public:
    SemiRecurrent(int d_feat, int d_hedge, int n_steps);
    const std::string& name() const override { return name_; }
    ParamStore<T>& params() override { return params_; }
    void init(uint64_t seed) override;
    ad::Var forward(ad::Tape<T>& tape, const rb::FeatureBatch& fb,
                    std::vector<ad::AttnCapture>* attn = nullptr) override;
    int d_hedge() const override { return d_hedge_; }

private:
    int d_feat_, d_hedge_, n_steps_, hidden_;
    std::string name_ = "semi-recurrent";
    ParamStore<T> params_;
    int w1_, b1_, w2_, b2_, w3_, b3_;
};

// ------------------------------------------------------ recurrent hedger ---

// delta_k = F(features_k, delta_{k-1}, H_{k-1}): a stack of ReLU recurrences
// with per-layer hidden state.
template <typename T>
class RecurrentHedger final : public HedgerModel<T> {
public:
    RecurrentHedger(int d_feat, int d_hedge, int n_steps, int n_layers = 5, int hidden = 128);
    const std::string& name() const override { return name_; }
    ParamStore<T>& params() override { return params_; }
    void init(uint64_t seed) override;
    ad::Var forward(ad::Tape<T>& tape, const rb::FeatureBatch& fb,
                    std::vector<ad::AttnCapture>* attn = nullptr) override;
    int d_hedge() const override { return d_hedge_; }

private:
    int d_feat_, d_hedge_, n_steps_, n_layers_, hidden_;
    std::string name_ = "rnn";
    ParamStore<T> params_;
    std::vector<int> wx_, wh_, b_;
    int wout_, bout_;
};

// ------------------------------------------------------------- zero --------

template <typename T>
class ZeroHedge final : public HedgerModel<T> {
public:
    ZeroHedge(int d_hedge, int n_steps) : d_hedge_(d_hedge), n_steps_(n_steps) {}
    const std::string& name() const override { return name_; }
    ParamStore<T>& params() override { return params_; }
    void init(uint64_t) override {}
    ad::Var forward(ad::Tape<T>& tape, const rb::FeatureBatch& fb,
                    std::vector<ad::AttnCapture>* = nullptr) override {
        return tape.constant(Mat<T>(fb.n_paths * fb.n_steps, d_hedge_, T(0)));
    }
    int d_hedge() const override { return d_hedge_; }

private:
    int d_hedge_, n_steps_;
    std::string name_ = "zero";
    ParamStore<T> params_;
};

}  // namespace sighedge::nn
