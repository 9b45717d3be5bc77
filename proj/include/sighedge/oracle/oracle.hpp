#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sighedge/core/mat.hpp"
#include "sighedge/rbergomi/rbergomi.hpp"

namespace sighedge::oracle {

double normal_cdf(double x);

// Zero-rate Black-Scholes call price and delta.
double bs_price(double s, double k, double sigma, double tau);
double bs_delta(double s, double k, double sigma, double tau);

// Market state for the model hedge: time t, spot, and the conditional
// forward-variance curve Theta^t_u on the remaining grid dates u in (t, T].
struct HedgeState {
    double t = 0.0;
    double spot = 0.0;
    std::vector<double> times;  // remaining dates, strictly increasing, last == T
    std::vector<double> theta;  // Theta^t_u at those dates
};

struct ModelHedgeConfig {
    int inner_paths = 4096;
    double bump_rel = 1e-4;  // relative central-difference bump
    uint64_t seed = 1;
};

struct ModelHedgeResult {
    double delta_spot = 0.0;
    double delta_theta = 0.0;  // hedge ratio in the Theta_{T_fwd} instrument
    double price = 0.0;
    double se_spot = 0.0;   // inner-MC standard error of delta_spot
    double se_theta = 0.0;  // inner-MC standard error of delta_theta
    double se_price = 0.0;
};

// Monte Carlo perfect-hedge ratios: spot delta via central differences in S
// and the forward-variance Gateaux term via a central difference along the
// kernel direction a_i = (t_i - t)^{H-1/2}, scaled by (T-t)^{1/2-H}; all
// differences share common random numbers.
ModelHedgeResult model_hedge(const HedgeState& state, const rb::RBergomiParams& params,
                             const ModelHedgeConfig& cfg);

// Conditional forward-variance curve of one simulated path at grid date k,
// evaluated at the remaining grid dates. Uses the stored driving increments.
HedgeState state_from_path(const rb::MarketPaths& paths, const rb::TimeGrid& grid, int path,
                           int step, const rb::RBergomiParams& params);

struct StrategyStats {
    std::vector<double> pnl;            // per path
    double mean = 0.0;
    double stdev = 0.0;
    std::vector<double> quantiles;      // 1,5,25,50,75,95,99%
    std::vector<double> wealth_mean;    // cumulative wealth per step (n_steps+1)
};

// PnL of a hedge plan: pnl_b = p0 + sum_k delta_{b,k} . (I_{k+1}-I_k) - Z_b.
// `delta` is (n_paths*n_steps x d_hedge), d_hedge = 2 => instruments (S, Theta);
// d_hedge = 1 trades S only.
StrategyStats evaluate_strategy(const Mat<double>& delta, const rb::MarketPaths& paths,
                                double strike, double p0);

void write_pnl_csv(const StrategyStats& stats, const std::string& file);
void write_wealth_csv(const StrategyStats& stats, const rb::TimeGrid& grid,
                      const std::string& file);

}  // namespace sighedge::oracle
