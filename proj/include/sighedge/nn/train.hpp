#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sighedge/nn/models.hpp"
#include "sighedge/rbergomi/rbergomi.hpp"

namespace sighedge::nn {

// Seed-substream tags shared by training and the experiment commands so that
// pricing/validation/test sets agree across entry points.
inline constexpr uint64_t kPricingStream = 0x9000000000000001ULL;
inline constexpr uint64_t kValStream = 0x9000000000000002ULL;
inline constexpr uint64_t kTestStream = 0x9000000000000003ULL;

// Copy of the path block [lo, hi) of a simulated batch.
rb::MarketPaths subset_paths(const rb::MarketPaths& src, int lo, int hi);

struct TrainConfig {
    double learning_rate = 1e-4;
    int batch_size = 1000;
    int n_steps_train = 2000;
    int val_size = 10000;
    int test_size = 10000;
    int pricing_paths = 100000;
    uint64_t base_seed = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int eval_every = 50;
    double grad_clip = 0.0;  // 0 disables clipping
    bool with_time = false;
    int n_threads = 1;
    // Abort training once this much wall time has elapsed (0 disables).
    // The report's timed_out flag records the abort; intended for runs that
    // must respect an external time budget.
    double max_train_seconds = 0.0;

    void validate() const;
};

struct TrainReport {
    std::vector<int> eval_steps;
    std::vector<double> train_losses;  // batch loss at each eval step
    std::vector<double> val_losses;
    double test_loss = 0.0;
    double zero_strategy_val_loss = 0.0;
    double zero_strategy_test_loss = 0.0;
    double p0 = 0.0;
    double wall_seconds = 0.0;
    uint64_t seed = 0;
    bool diverged = false;
    bool timed_out = false;
    bool grad_clip_used = false;
    std::string model;
};

// Instrument increments (S, Theta) aligned with delta rows: row b*n_steps+k
// holds I_{k+1} - I_k of path b.
template <typename T>
Mat<T> instrument_increments(const rb::MarketPaths& paths);

// Quadratic hedging loss: mean over the batch of (p0 + gain - Z)^2.
template <typename T>
ad::Var hedging_loss(ad::Tape<T>& tape, ad::Var delta, const Mat<T>& incr,
                     const std::vector<double>& payoffs, double p0, int batch, int seq);

double estimate_p0(const std::vector<double>& payoffs);

// Premium from a dedicated pricing batch, fixed before training.
double estimate_p0(const rb::RBergomiParams& params, const rb::TimeGrid& grid, int n_paths,
                   uint64_t seed, int n_threads = 1);

template <typename T>
struct Adam {
    std::vector<T> m, v;
    int t = 0;

    void step(std::vector<T>& theta, const std::vector<T>& grad, const TrainConfig& cfg);
};

// Loss of a model on a fixed data set, evaluated in row chunks (no backward).
template <typename T>
double eval_loss(HedgerModel<T>& model, const rb::MarketPaths& paths,
                 const rb::RBergomiParams& params, double p0, bool with_time,
                 int chunk_paths = 2000);

// Full training loop: fresh simulation batch per step with seed
// mix(base_seed, step), fixed validation/test sets, Adam updates.
template <typename T>
TrainReport train(HedgerModel<T>& model, const rb::RBergomiParams& params,
                  const rb::TimeGrid& grid, const TrainConfig& cfg);

void write_loss_csv(const TrainReport& report, const std::string& file);
std::string report_to_json(const TrainReport& report);

}  // namespace sighedge::nn
