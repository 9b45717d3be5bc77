#include "sighedge/oracle/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "sighedge/core/rng.hpp"

namespace sighedge::oracle {

double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.70710678118654752440); }

double bs_price(double s, double k, double sigma, double tau) {
    require(s > 0.0 && k > 0.0 && sigma > 0.0 && tau > 0.0, "bs_price: domain violation");
    double sq = sigma * std::sqrt(tau);
    double d1 = (std::log(s / k) + 0.5 * sigma * sigma * tau) / sq;
    return s * normal_cdf(d1) - k * normal_cdf(d1 - sq);
}

double bs_delta(double s, double k, double sigma, double tau) {
    require(s > 0.0 && k > 0.0 && sigma > 0.0 && tau > 0.0, "bs_delta: domain violation");
    double sq = sigma * std::sqrt(tau);
    return normal_cdf((std::log(s / k) + 0.5 * sigma * sigma * tau) / sq);
}

HedgeState state_from_path(const rb::MarketPaths& paths, const rb::TimeGrid& grid, int path,
                           int step, const rb::RBergomiParams& params) {
    require(step >= 0 && step < grid.n_steps, "state_from_path: step out of range");
    const double h = params.hurst;
    const double eta = params.eta;
    const double root2h = std::sqrt(2.0 * h);
    HedgeState st;
    st.t = grid.t(step);
    st.spot = paths.S(path, step);
    for (int i = step + 1; i <= grid.n_steps; ++i) {
        double u = grid.t(i);
        // past Volterra contribution, left-point discretisation of the kernel
        double past = 0.0;
        for (int j = 0; j < step; ++j)
            past += std::pow(u - grid.t(j), h - 0.5) * paths.dW(path, j);
        past *= root2h;
        double log_theta = eta * past - 0.5 * eta * eta * std::pow(u, 2.0 * h) +
                           0.5 * eta * eta * std::pow(u - st.t, 2.0 * h);
        st.times.push_back(u);
        st.theta.push_back(params.xi * std::exp(log_theta));
    }
    return st;
}

namespace {

struct InnerPayoffs {
    std::vector<double> base, s_up, s_dn, th_up, th_dn;
};

// One common-random-number inner Monte Carlo sweep: payoffs under the base
// state and under the four bumped states.
InnerPayoffs inner_mc(const HedgeState& st, const rb::RBergomiParams& prm,
                      const ModelHedgeConfig& cfg, double eps_s, double eps_th,
                      const std::vector<double>& dir) {
    const int m = static_cast<int>(st.times.size());
    const double h = prm.hurst;
    const double eta = prm.eta;
    const double rho_perp = std::sqrt(1.0 - prm.rho * prm.rho);

    // joint covariance of (dW_1..dW_m, F_1..F_m)
    std::vector<double> u(m), du(m);
    for (int i = 0; i < m; ++i) {
        u[i] = st.times[i] - st.t;
        du[i] = u[i] - (i == 0 ? 0.0 : u[i - 1]);
    }
    Mat<double> cov(2 * m, 2 * m, 0.0);
    for (int i = 0; i < m; ++i) cov(i, i) = du[i];
    const double hp = h + 0.5;
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) {
            double lo = (i == 0) ? 0.0 : u[i - 1];
            double c = std::sqrt(2.0 * h) *
                       (std::pow(u[j] - lo, hp) - std::pow(u[j] - u[i], hp)) / hp;
            cov(i, m + j) = cov(m + j, i) = c;
        }
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j)
            cov(m + i, m + j) = cov(m + j, m + i) = rb::volterra_covariance(h, u[i], u[j]);
    Mat<double> l = rb::cholesky_spd(std::move(cov));

    InnerPayoffs out;
    out.base.resize(cfg.inner_paths);
    out.s_up.resize(cfg.inner_paths);
    out.s_dn.resize(cfg.inner_paths);
    out.th_up.resize(cfg.inner_paths);
    out.th_dn.resize(cfg.inner_paths);

    std::vector<double> z(2 * m), x(2 * m), zp(m), var_comp(m);
    for (int i = 0; i < m; ++i) var_comp[i] = 0.5 * eta * eta * std::pow(u[i], 2.0 * h);

    auto terminal_log_growth = [&](const std::vector<double>& theta,
                                   const std::vector<double>& f,
                                   const std::vector<double>& dw,
                                   const std::vector<double>& zperp) {
        double g = 0.0;
        for (int i = 0; i < m; ++i) {
            // V at the left endpoint of step i conditioned on the state
            double v = (i == 0) ? theta[0]
                                : theta[i - 1] * std::exp(eta * f[i - 1] -
                                                          0.5 * eta * eta *
                                                              std::pow(u[i - 1], 2.0 * h));
            // the i = 0 case approximates V_t by the first curve point
            double db = prm.rho * dw[i] + rho_perp * zperp[i] * std::sqrt(du[i]);
            g += -0.5 * v * du[i] + std::sqrt(v) * db;
        }
        return g;
    };

    std::vector<double> dw(m), f(m), zperp(m);
    std::vector<double> th_up(m), th_dn(m);
    for (int i = 0; i < m; ++i) {
        th_up[i] = st.theta[i] + eps_th * dir[i];
        th_dn[i] = st.theta[i] - eps_th * dir[i];
    }
    Rng rng(mix_seed(cfg.seed, 0x1717));
    for (int p = 0; p < cfg.inner_paths; ++p) {
        for (int i = 0; i < 2 * m; ++i) z[i] = rng.gaussian();
        for (int i = 0; i < m; ++i) zperp[i] = rng.gaussian();
        for (int i = 0; i < 2 * m; ++i) {
            double s = 0.0;
            for (int j = 0; j <= i; ++j) s += l(i, j) * z[j];
            x[i] = s;
        }
        for (int i = 0; i < m; ++i) {
            dw[i] = x[i];
            f[i] = x[m + i];
        }
        double g = terminal_log_growth(st.theta, f, dw, zperp);
        double gu = terminal_log_growth(th_up, f, dw, zperp);
        double gd = terminal_log_growth(th_dn, f, dw, zperp);
        out.base[p] = std::max(st.spot * std::exp(g) - prm.strike, 0.0);
        out.s_up[p] = std::max(st.spot * (1.0 + eps_s) * std::exp(g) - prm.strike, 0.0);
        out.s_dn[p] = std::max(st.spot * (1.0 - eps_s) * std::exp(g) - prm.strike, 0.0);
        out.th_up[p] = std::max(st.spot * std::exp(gu) - prm.strike, 0.0);
        out.th_dn[p] = std::max(st.spot * std::exp(gd) - prm.strike, 0.0);
    }
    return out;
}

void mean_se(const std::vector<double>& v, double& mean, double& se) {
    double s = 0.0;
    for (double x : v) s += x;
    mean = s / v.size();
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= (v.size() - 1);
    se = std::sqrt(var / v.size());
}

}  // namespace

ModelHedgeResult model_hedge(const HedgeState& state, const rb::RBergomiParams& params,
                             const ModelHedgeConfig& cfg) {
    require(!state.times.empty(), "model_hedge: empty remaining grid");
    require(state.t < params.maturity, "model_hedge: t must be before maturity");
    require(state.spot > 0.0, "model_hedge: bad spot");
    const double h = params.hurst;
    const double tau = params.maturity - state.t;
    const int m = static_cast<int>(state.times.size());

    // Gateaux direction: a driver perturbation along the kernel a_i =
    // (t_i - t)^{H-1/2} shifts the forward-variance curve by
    // Theta_i * eta * sqrt(2H) * a_i per unit of epsilon (chain rule through
    // the lognormal curve), so that is the curve bump we difference along.
    std::vector<double> dir(m);
    double dir_mean = 0.0, theta_mean = 0.0;
    for (int i = 0; i < m; ++i) {
        dir[i] = state.theta[i] * params.eta * std::sqrt(2.0 * h) *
                 std::pow(state.times[i] - state.t, h - 0.5);
        dir_mean += std::abs(dir[i]);
        theta_mean += state.theta[i];
    }
    dir_mean /= m;
    theta_mean /= m;
    const double eps_s = cfg.bump_rel;
    const bool flat_dir = !(dir_mean > 0.0);
    const double eps_th = flat_dir ? 1.0 : cfg.bump_rel * theta_mean / dir_mean;

    InnerPayoffs pay = inner_mc(state, params, cfg, eps_s, eps_th, dir);
    const int n = cfg.inner_paths;

    ModelHedgeResult res;
    double se;
    mean_se(pay.base, res.price, res.se_price);
    if (!std::isfinite(res.price)) throw std::runtime_error("model_hedge: non-finite inner MC");

    std::vector<double> diff(n);
    const double hs = 2.0 * eps_s * state.spot;
    for (int p = 0; p < n; ++p) diff[p] = (pay.s_up[p] - pay.s_dn[p]) / hs;
    mean_se(diff, res.delta_spot, res.se_spot);

    const double scale = std::pow(tau, 0.5 - h);
    for (int p = 0; p < n; ++p)
        diff[p] = scale * (pay.th_up[p] - pay.th_dn[p]) / (2.0 * eps_th);
    mean_se(diff, res.delta_theta, se);
    res.se_theta = se;
    return res;
}

StrategyStats evaluate_strategy(const Mat<double>& delta, const rb::MarketPaths& paths,
                                double strike, double p0) {
    const int B = paths.n_paths();
    const int n = paths.n_steps();
    const int d = delta.cols;
    require(delta.rows == B * n && (d == 1 || d == 2), "evaluate_strategy: shape mismatch");

    StrategyStats st;
    st.pnl.resize(B);
    st.wealth_mean.assign(n + 1, 0.0);
    for (int b = 0; b < B; ++b) {
        double wealth = p0;
        st.wealth_mean[0] += wealth;
        for (int k = 0; k < n; ++k) {
            const double* dk = delta.row(b * n + k);
            wealth += dk[0] * (paths.S(b, k + 1) - paths.S(b, k));
            if (d == 2) wealth += dk[1] * (paths.Theta(b, k + 1) - paths.Theta(b, k));
            if (k + 1 < n) st.wealth_mean[k + 1] += wealth;
        }
        double z = std::max(paths.S(b, n) - strike, 0.0);
        st.pnl[b] = wealth - z;
        st.wealth_mean[n] += st.pnl[b];
    }
    for (double& w : st.wealth_mean) w /= B;

    double s = 0.0;
    for (double v : st.pnl) s += v;
    st.mean = s / B;
    double var = 0.0;
    for (double v : st.pnl) var += (v - st.mean) * (v - st.mean);
    st.stdev = (B > 1) ? std::sqrt(var / (B - 1)) : 0.0;

    std::vector<double> sorted = st.pnl;
    std::sort(sorted.begin(), sorted.end());
    for (double q : {0.01, 0.05, 0.25, 0.50, 0.75, 0.95, 0.99}) {
        double pos = q * (B - 1);
        int lo = static_cast<int>(pos);
        int hi = std::min(lo + 1, B - 1);
        st.quantiles.push_back(sorted[lo] + (pos - lo) * (sorted[hi] - sorted[lo]));
    }
    return st;
}

void write_pnl_csv(const StrategyStats& stats, const std::string& file) {
    std::ofstream os(file);
    if (!os) throw std::runtime_error("write_pnl_csv: cannot open " + file);
    os << "path_id,pnl\n";
    os.precision(17);
    for (size_t b = 0; b < stats.pnl.size(); ++b) os << b << ',' << stats.pnl[b] << '\n';
}

void write_wealth_csv(const StrategyStats& stats, const rb::TimeGrid& grid,
                      const std::string& file) {
    std::ofstream os(file);
    if (!os) throw std::runtime_error("write_wealth_csv: cannot open " + file);
    os << "step,t,wealth\n";
    os.precision(17);
    for (size_t k = 0; k < stats.wealth_mean.size(); ++k)
        os << k << ',' << grid.t(static_cast<int>(k)) << ',' << stats.wealth_mean[k] << '\n';
}

}  // namespace sighedge::oracle
