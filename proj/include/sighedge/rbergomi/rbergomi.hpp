#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sighedge/core/mat.hpp"

namespace sighedge::rb {

struct RBergomiParams {
    double hurst = 0.1;       // H in (0, 0.5]
    double rho = -0.7;        // spot/vol correlation
    double eta = 1.9;         // vol-of-vol
    double xi = 0.235 * 0.235;  // initial forward variance
    double s0 = 1.0;
    double strike = 1.0;
    double maturity = 30.0 / 365.0;  // years
    double t_fwd = 60.0 / 365.0;     // forward-variance maturity, > maturity

    void validate() const;
};

struct TimeGrid {
    int n_steps = 30;
    double maturity = 30.0 / 365.0;

    double dt() const { return maturity / n_steps; }
    double t(int k) const { return maturity * k / n_steps; }
};

struct MarketPaths {
    Mat<double> S;      // n_paths x (n_steps+1)
    Mat<double> V;      // instantaneous variance, same shape
    Mat<double> Theta;  // forward-variance instrument Theta^t_{T_fwd}, same shape
    Mat<double> WH;     // Volterra process W^H at grid dates, same shape
    Mat<double> dW;     // price/vol driving increments, n_paths x n_steps
    uint64_t seed = 0;

    int n_paths() const { return S.rows; }
    int n_steps() const { return S.cols - 1; }
};

struct FeatureBatch {
    Mat<double> features;  // (n_paths * n_steps) x d_feat, row p*n_steps + k
    int n_paths = 0;
    int n_steps = 0;
    int d_feat = 0;
};

enum class VolterraMethod { cholesky, hybrid };

// Riemann-Liouville fractional Brownian motion W^H at grid dates 1..n_steps.
// `gaussians` supplies the driving noise row-wise per path:
//   hybrid:   2*n_steps i.i.d. N(0,1) per path (increment + near-singularity term)
//   cholesky: n_steps i.i.d. N(0,1) per path
// Returns n_paths x n_steps (date t_1..t_n). The `dW` output, when non-null,
// receives the Brownian increments that drive the kernel (hybrid only).
Mat<double> simulate_volterra(double hurst, const TimeGrid& grid, const Mat<double>& gaussians,
                              VolterraMethod method, Mat<double>* dW_out = nullptr);

// Exact covariance of the Riemann-Liouville process, Cov(W^H_s, W^H_t).
double volterra_covariance(double hurst, double s, double t);

MarketPaths simulate_market(const RBergomiParams& params, const TimeGrid& grid, int n_paths,
                            uint64_t seed, int n_threads = 1,
                            VolterraMethod method = VolterraMethod::hybrid);

std::vector<double> payoff_call(const std::vector<double>& s_T, double strike);

FeatureBatch extract_features(const MarketPaths& paths, const RBergomiParams& params,
                              bool with_time);

// CSV export: path_id, step, t, S, V, Theta
void write_paths_csv(const MarketPaths& paths, const TimeGrid& grid, const std::string& file);

// Symmetric positive-definite Cholesky with jitter escalation 1e-12 .. 1e-8.
// Returns lower-triangular L with A = L L^T. Throws on failure.
Mat<double> cholesky_spd(Mat<double> a);

}  // namespace sighedge::rb
