#include "sighedge/nn/train.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace sighedge::nn {

void TrainConfig::validate() const {
    require(learning_rate > 0.0, "train: learning_rate must be positive");
    require(batch_size >= 1 && n_steps_train >= 0, "train: bad batch/step counts");
    require(val_size >= 1 && test_size >= 1 && pricing_paths >= 1, "train: bad eval sizes");
    require(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0, "train: beta in (0,1)");
    require(eps > 0.0 && eval_every >= 1, "train: bad eps/eval_every");
}

template <typename T>
Mat<T> instrument_increments(const rb::MarketPaths& paths) {
    const int B = paths.n_paths();
    const int n = paths.n_steps();
    Mat<T> incr(B * n, 2);
    for (int b = 0; b < B; ++b)
        for (int k = 0; k < n; ++k) {
            incr(b * n + k, 0) = static_cast<T>(paths.S(b, k + 1) - paths.S(b, k));
            incr(b * n + k, 1) = static_cast<T>(paths.Theta(b, k + 1) - paths.Theta(b, k));
        }
    return incr;
}

template <typename T>
ad::Var hedging_loss(ad::Tape<T>& tape, ad::Var delta, const Mat<T>& incr,
                     const std::vector<double>& payoffs, double p0, int batch, int seq) {
    require(static_cast<int>(payoffs.size()) == batch, "hedging_loss: payoff count mismatch");
    ad::Var gain = tape.pathwise_gain(delta, incr, batch, seq);
    std::vector<T> offset(batch);
    for (int b = 0; b < batch; ++b) offset[b] = static_cast<T>(p0 - payoffs[b]);
    return tape.squared_error_mean(gain, offset);
}

double estimate_p0(const std::vector<double>& payoffs) {
    require(!payoffs.empty(), "estimate_p0: empty payoff set");
    double s = 0.0;
    for (double z : payoffs) s += z;
    return s / payoffs.size();
}

double estimate_p0(const rb::RBergomiParams& params, const rb::TimeGrid& grid, int n_paths,
                   uint64_t seed, int n_threads) {
    rb::MarketPaths paths = rb::simulate_market(params, grid, n_paths, seed, n_threads);
    std::vector<double> s_T(n_paths);
    for (int p = 0; p < n_paths; ++p) s_T[p] = paths.S(p, grid.n_steps);
    return estimate_p0(rb::payoff_call(s_T, params.strike));
}

template <typename T>
void Adam<T>::step(std::vector<T>& theta, const std::vector<T>& grad, const TrainConfig& cfg) {
    if (m.empty()) {
        m.assign(theta.size(), T(0));
        v.assign(theta.size(), T(0));
    }
    require(theta.size() == grad.size() && theta.size() == m.size(), "adam: size mismatch");
    ++t;
    const double b1 = cfg.beta1, b2 = cfg.beta2;
    const double bc1 = 1.0 - std::pow(b1, t);
    const double bc2 = 1.0 - std::pow(b2, t);
    for (size_t i = 0; i < theta.size(); ++i) {
        double g = static_cast<double>(grad[i]);
        double mi = b1 * static_cast<double>(m[i]) + (1.0 - b1) * g;
        double vi = b2 * static_cast<double>(v[i]) + (1.0 - b2) * g * g;
        m[i] = static_cast<T>(mi);
        v[i] = static_cast<T>(vi);
        theta[i] -= static_cast<T>(cfg.learning_rate * (mi / bc1) /
                                   (std::sqrt(vi / bc2) + cfg.eps));
    }
}

namespace {

template <typename T>
double loss_on_paths(HedgerModel<T>& model, const rb::MarketPaths& paths,
                     const rb::RBergomiParams& params, double p0, bool with_time) {
    const int B = paths.n_paths();
    const int n = paths.n_steps();
    rb::FeatureBatch fb = rb::extract_features(paths, params, with_time);
    ad::Tape<T> tape;
    ad::Var delta = model.forward(tape, fb);
    std::vector<double> s_T(B);
    for (int p = 0; p < B; ++p) s_T[p] = paths.S(p, n);
    std::vector<double> z = rb::payoff_call(s_T, params.strike);
    Mat<T> incr = instrument_increments<T>(paths);
    ad::Var loss = hedging_loss(tape, delta, incr, z, p0, B, n);
    return static_cast<double>(tape.val(loss)(0, 0));
}

}  // namespace

rb::MarketPaths subset_paths(const rb::MarketPaths& src, int lo, int hi) {
    rb::MarketPaths out;
    const int n = src.n_steps();
    out.seed = src.seed;
    out.S = Mat<double>(hi - lo, n + 1);
    out.V = Mat<double>(hi - lo, n + 1);
    out.Theta = Mat<double>(hi - lo, n + 1);
    out.WH = Mat<double>(hi - lo, n + 1);
    out.dW = Mat<double>(hi - lo, n);
    for (int p = lo; p < hi; ++p) {
        for (int k = 0; k <= n; ++k) {
            out.S(p - lo, k) = src.S(p, k);
            out.V(p - lo, k) = src.V(p, k);
            out.Theta(p - lo, k) = src.Theta(p, k);
            out.WH(p - lo, k) = src.WH(p, k);
        }
        for (int k = 0; k < n; ++k) out.dW(p - lo, k) = src.dW(p, k);
    }
    return out;
}

template <typename T>
double eval_loss(HedgerModel<T>& model, const rb::MarketPaths& paths,
                 const rb::RBergomiParams& params, double p0, bool with_time, int chunk_paths) {
    const int B = paths.n_paths();
    // weighted average of chunk means = overall mean (equal path weights)
    double acc = 0.0;
    for (int lo = 0; lo < B; lo += chunk_paths) {
        int hi = std::min(B, lo + chunk_paths);
        rb::MarketPaths chunk = subset_paths(paths, lo, hi);
        acc += loss_on_paths(model, chunk, params, p0, with_time) * (hi - lo);
    }
    return acc / B;
}

template <typename T>
TrainReport train(HedgerModel<T>& model, const rb::RBergomiParams& params,
                  const rb::TimeGrid& grid, const TrainConfig& cfg) {
    cfg.validate();
    const auto t_start = std::chrono::steady_clock::now();

    TrainReport rep;
    rep.seed = cfg.base_seed;
    rep.model = model.name();
    rep.grad_clip_used = cfg.grad_clip > 0.0;

    // dedicated substreams: pricing, validation, test, then per-step batches
    const uint64_t pricing_seed = mix_seed(cfg.base_seed, kPricingStream);
    const uint64_t val_seed = mix_seed(cfg.base_seed, kValStream);
    const uint64_t test_seed = mix_seed(cfg.base_seed, kTestStream);

    rep.p0 = estimate_p0(params, grid, cfg.pricing_paths, pricing_seed, cfg.n_threads);
    rb::MarketPaths val_paths =
        rb::simulate_market(params, grid, cfg.val_size, val_seed, cfg.n_threads);
    rb::MarketPaths test_paths =
        rb::simulate_market(params, grid, cfg.test_size, test_seed, cfg.n_threads);

    ZeroHedge<T> zero(model.d_hedge(), grid.n_steps);
    rep.zero_strategy_val_loss = eval_loss(zero, val_paths, params, rep.p0, cfg.with_time);
    rep.zero_strategy_test_loss = eval_loss(zero, test_paths, params, rep.p0, cfg.with_time);

    model.init(cfg.base_seed);
    Adam<T> opt;
    double last_train_loss = rep.zero_strategy_val_loss;
    // one tape for the whole run: every step records the same graph, so
    // reset() reuses the slot storage instead of reallocating activations
    ad::Tape<T> tape;

    for (int step = 0; step <= cfg.n_steps_train; ++step) {
        const bool do_eval = step % cfg.eval_every == 0 || step == cfg.n_steps_train;
        if (do_eval) {
            rep.eval_steps.push_back(step);
            rep.train_losses.push_back(last_train_loss);
            rep.val_losses.push_back(eval_loss(model, val_paths, params, rep.p0, cfg.with_time));
        }
        if (step == cfg.n_steps_train) break;
        if (cfg.max_train_seconds > 0.0) {
            double el = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                      t_start)
                            .count();
            if (el > cfg.max_train_seconds) {
                rep.timed_out = true;
                break;
            }
        }

        const uint64_t batch_seed = mix_seed(cfg.base_seed, static_cast<uint64_t>(step));
        rb::MarketPaths batch =
            rb::simulate_market(params, grid, cfg.batch_size, batch_seed, cfg.n_threads);
        rb::FeatureBatch fb = rb::extract_features(batch, params, cfg.with_time);
        std::vector<double> s_T(cfg.batch_size);
        for (int p = 0; p < cfg.batch_size; ++p) s_T[p] = batch.S(p, grid.n_steps);
        std::vector<double> z = rb::payoff_call(s_T, params.strike);
        Mat<T> incr = instrument_increments<T>(batch);

        tape.reset();
        model.params().zero_grad();
        ad::Var delta = model.forward(tape, fb);
        ad::Var loss =
            hedging_loss(tape, delta, incr, z, rep.p0, cfg.batch_size, grid.n_steps);
        last_train_loss = static_cast<double>(tape.val(loss)(0, 0));
        if (!std::isfinite(last_train_loss)) {
            rep.diverged = true;
            break;
        }
        tape.backward(loss);

        std::vector<T>& g = model.params().grad();
        if (cfg.grad_clip > 0.0) {
            double norm2 = 0.0;
            for (T v : g) norm2 += static_cast<double>(v) * static_cast<double>(v);
            double norm = std::sqrt(norm2);
            if (norm > cfg.grad_clip) {
                T s = static_cast<T>(cfg.grad_clip / norm);
                for (T& v : g) v *= s;
            }
        }
        opt.step(model.params().theta(), g, cfg);
    }

    rep.test_loss = eval_loss(model, test_paths, params, rep.p0, cfg.with_time);
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return rep;
}

void write_loss_csv(const TrainReport& report, const std::string& file) {
    std::ofstream os(file);
    if (!os) throw std::runtime_error("write_loss_csv: cannot open " + file);
    os << "step,train_loss,val_loss\n";
    os.precision(17);
    for (size_t i = 0; i < report.eval_steps.size(); ++i)
        os << report.eval_steps[i] << ',' << report.train_losses[i] << ','
           << report.val_losses[i] << '\n';
}

std::string report_to_json(const TrainReport& r) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["model"] = r.model;
    j["seed"] = r.seed;
    j["eval_steps"] = r.eval_steps;
    j["train_losses"] = r.train_losses;
    j["val_losses"] = r.val_losses;
    j["test_loss"] = r.test_loss;
    j["zero_strategy_val_loss"] = r.zero_strategy_val_loss;
    j["zero_strategy_test_loss"] = r.zero_strategy_test_loss;
    j["p0"] = r.p0;
    j["wall_seconds"] = r.wall_seconds;
    j["diverged"] = r.diverged;
    j["timed_out"] = r.timed_out;
    j["grad_clip_used"] = r.grad_clip_used;
    return j.dump(2);
}

template Mat<float> instrument_increments<float>(const rb::MarketPaths&);
template Mat<double> instrument_increments<double>(const rb::MarketPaths&);
template ad::Var hedging_loss<float>(ad::Tape<float>&, ad::Var, const Mat<float>&,
                                     const std::vector<double>&, double, int, int);
template ad::Var hedging_loss<double>(ad::Tape<double>&, ad::Var, const Mat<double>&,
                                      const std::vector<double>&, double, int, int);
template struct Adam<float>;
template struct Adam<double>;
template double eval_loss<float>(HedgerModel<float>&, const rb::MarketPaths&,
                                 const rb::RBergomiParams&, double, bool, int);
template double eval_loss<double>(HedgerModel<double>&, const rb::MarketPaths&,
                                  const rb::RBergomiParams&, double, bool, int);
template TrainReport train<float>(HedgerModel<float>&, const rb::RBergomiParams&,
                                  const rb::TimeGrid&, const TrainConfig&);
template TrainReport train<double>(HedgerModel<double>&, const rb::RBergomiParams&,
                                   const rb::TimeGrid&, const TrainConfig&);

}  // namespace sighedge::nn
