#include "sighedge/cli/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "sighedge/core/rng.hpp"
#include "sighedge/oracle/oracle.hpp"

namespace sighedge::cli {

using nlohmann::json;
namespace fs = std::filesystem;

json default_config() {
    json j;
    // market
    j["hurst"] = 0.1;
    j["rho"] = -0.7;
    j["eta"] = 1.9;
    j["xi"] = 0.235 * 0.235;
    j["s0"] = 1.0;
    j["strike"] = 1.0;
    j["maturity"] = 30.0 / 365.0;
    j["t_fwd"] = 60.0 / 365.0;
    j["n_steps"] = 30;
    // model
    j["model"] = "sigformer";
    j["sig_depth"] = 3;
    j["n_layers"] = 5;
    j["n_heads"] = 12;
    j["d_model"] = 48;
    j["d_ffn"] = 192;
    j["causal"] = true;
    j["positional_encoding"] = false;
    j["with_time"] = false;
    // training
    j["learning_rate"] = 1e-4;
    j["batch_size"] = 1000;
    j["train_steps"] = 2000;
    j["val_size"] = 10000;
    j["test_size"] = 10000;
    j["pricing_paths"] = 100000;
    j["eval_every"] = 50;
    j["grad_clip"] = 0.0;
    // orchestration
    j["seed"] = 1;
    j["threads"] = 1;
    j["n_paths"] = 1000;       // simulate batch size
    j["attention_path"] = 0;   // path selector for the attention dump
    j["inner_paths"] = 4096;   // model-hedge inner Monte Carlo size
    j["bump_rel"] = 1e-4;
    // backtest
    j["backtest_csv"] = "";
    j["vol_index_divisor"] = 100.0;  // VIX-style index -> volatility units
    j["months"] = json::array();     // [{month:"YYYY-MM", hurst, rho, eta, xi}]
    // ablation sweep menu
    j["ablate_depths"] = json::array({1, 2, 3, 4});
    j["ablate_layers"] = json::array({1, 2, 3, 4, 5});
    return j;
}

namespace {

bool same_kind(const json& a, const json& b) {
    if (a.is_number() && b.is_number()) return true;
    return a.type() == b.type();
}

void merge_into(json& base, const json& extra) {
    for (auto it = extra.begin(); it != extra.end(); ++it) {
        if (!base.contains(it.key()))
            throw std::invalid_argument("config: unknown key '" + it.key() + "'");
        if (!same_kind(base[it.key()], it.value()))
            throw std::invalid_argument("config: wrong type for key '" + it.key() + "'");
        base[it.key()] = it.value();
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << text;
}

void echo_config(const json& cfg, const std::string& out) {
    fs::create_directories(out);
    write_text(out + "/config.echo.json", cfg.dump(2) + "\n");
}

}  // namespace

json merge_config(const json& file_cfg, const json& overrides) {
    json cfg = default_config();
    merge_into(cfg, file_cfg);
    merge_into(cfg, overrides);
    return cfg;
}

rb::RBergomiParams market_params(const json& cfg) {
    rb::RBergomiParams p;
    p.hurst = cfg.at("hurst").get<double>();
    p.rho = cfg.at("rho").get<double>();
    p.eta = cfg.at("eta").get<double>();
    p.xi = cfg.at("xi").get<double>();
    p.s0 = cfg.at("s0").get<double>();
    p.strike = cfg.at("strike").get<double>();
    p.maturity = cfg.at("maturity").get<double>();
    p.t_fwd = cfg.at("t_fwd").get<double>();
    p.validate();
    return p;
}

rb::TimeGrid time_grid(const json& cfg) {
    rb::TimeGrid g;
    g.n_steps = cfg.at("n_steps").get<int>();
    g.maturity = cfg.at("maturity").get<double>();
    require(g.n_steps >= 1 && g.maturity > 0.0, "config: bad time grid");
    return g;
}

nn::TrainConfig train_config(const json& cfg) {
    nn::TrainConfig tc;
    tc.learning_rate = cfg.at("learning_rate").get<double>();
    tc.batch_size = cfg.at("batch_size").get<int>();
    tc.n_steps_train = cfg.at("train_steps").get<int>();
    tc.val_size = cfg.at("val_size").get<int>();
    tc.test_size = cfg.at("test_size").get<int>();
    tc.pricing_paths = cfg.at("pricing_paths").get<int>();
    tc.eval_every = cfg.at("eval_every").get<int>();
    tc.grad_clip = cfg.at("grad_clip").get<double>();
    tc.with_time = cfg.at("with_time").get<bool>();
    tc.base_seed = cfg.at("seed").get<uint64_t>();
    tc.n_threads = cfg.at("threads").get<int>();
    tc.validate();
    return tc;
}

nn::SigFormerConfig net_config(const json& cfg) {
    nn::SigFormerConfig mc;
    mc.sig_depth = cfg.at("sig_depth").get<int>();
    mc.n_layers = cfg.at("n_layers").get<int>();
    mc.n_heads = cfg.at("n_heads").get<int>();
    mc.d_model = cfg.at("d_model").get<int>();
    mc.d_ffn = cfg.at("d_ffn").get<int>();
    mc.causal = cfg.at("causal").get<bool>();
    mc.positional_encoding = cfg.at("positional_encoding").get<bool>();
    mc.d_feat = cfg.at("with_time").get<bool>() ? 3 : 2;
    mc.d_hedge = 2;
    mc.n_steps = cfg.at("n_steps").get<int>();
    mc.validate();
    return mc;
}

template <typename T>
std::unique_ptr<nn::HedgerModel<T>> make_model(const std::string& name, const json& cfg) {
    nn::SigFormerConfig mc = net_config(cfg);
    if (name == "sigformer") return std::make_unique<nn::SigFormer<T>>(mc);
    if (name == "transformer") {
        // raw-feature tokens carry no order information, so the vanilla
        // transformer always gets positional encodings
        mc.positional_encoding = true;
        return std::make_unique<nn::VanillaTransformer<T>>(mc);
    }
    if (name == "sig-linear")
        return std::make_unique<nn::SigLinear<T>>(mc.sig_depth, mc.d_feat, mc.d_hedge,
                                                  mc.n_steps);
    if (name == "semi-recurrent")
        return std::make_unique<nn::SemiRecurrent<T>>(mc.d_feat, mc.d_hedge, mc.n_steps);
    if (name == "rnn")
        return std::make_unique<nn::RecurrentHedger<T>>(mc.d_feat, mc.d_hedge, mc.n_steps);
    if (name == "zero") return std::make_unique<nn::ZeroHedge<T>>(mc.d_hedge, mc.n_steps);
    throw std::invalid_argument("unknown model '" + name + "'");
}

template <typename T>
void save_checkpoint(const std::string& path, const nn::HedgerModel<T>& model,
                     const json& cfg) {
    json j;
    j["schema_version"] = 1;
    j["model"] = const_cast<nn::HedgerModel<T>&>(model).name();
    json sub;
    for (const char* k : {"sig_depth", "n_layers", "n_heads", "d_model", "d_ffn", "causal",
                          "positional_encoding", "with_time", "n_steps"})
        sub[k] = cfg.at(k);
    j["config"] = sub;
    const auto& theta = const_cast<nn::HedgerModel<T>&>(model).params().theta();
    json params = json::array();
    for (T v : theta) params.push_back(static_cast<double>(v));
    j["params"] = std::move(params);
    std::ostringstream os;
    os.precision(17);
    os << j.dump(0) << "\n";
    write_text(path, os.str());
}

template <typename T>
std::unique_ptr<nn::HedgerModel<T>> load_checkpoint(const std::string& path, json* cfg_out) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("checkpoint not found: " + path);
    json j = json::parse(is);
    if (j.value("schema_version", 0) != 1)
        throw std::invalid_argument("checkpoint: unsupported schema");
    json cfg = default_config();
    merge_into(cfg, j.at("config"));
    auto model = make_model<T>(j.at("model").get<std::string>(), cfg);
    const json& params = j.at("params");
    auto& theta = model->params().theta();
    if (params.size() != theta.size())
        throw std::invalid_argument("checkpoint: parameter count mismatch");
    for (size_t i = 0; i < theta.size(); ++i) theta[i] = static_cast<T>(params[i].get<double>());
    if (cfg_out) *cfg_out = cfg;
    return model;
}

namespace {

// ----------------------------------------------------------- commands ------

int cmd_simulate(const json& cfg, const std::string& out) {
    echo_config(cfg, out);
    rb::RBergomiParams prm = market_params(cfg);
    rb::TimeGrid grid = time_grid(cfg);
    const int n_paths = cfg.at("n_paths").get<int>();
    const uint64_t seed = cfg.at("seed").get<uint64_t>();
    rb::MarketPaths paths =
        rb::simulate_market(prm, grid, n_paths, seed, cfg.at("threads").get<int>());
    rb::write_paths_csv(paths, grid, out + "/paths.csv");

    const int n = grid.n_steps;
    auto col_stats = [&](const Mat<double>& m, int k, double& mean, double& var) {
        double s = 0.0;
        for (int p = 0; p < n_paths; ++p) s += m(p, k);
        mean = s / n_paths;
        double v = 0.0;
        for (int p = 0; p < n_paths; ++p) v += (m(p, k) - mean) * (m(p, k) - mean);
        var = (n_paths > 1) ? v / (n_paths - 1) : 0.0;
    };
    json summary;
    summary["schema_version"] = 1;
    summary["n_paths"] = n_paths;
    summary["seed"] = seed;
    double mean, var;
    col_stats(paths.S, n, mean, var);
    summary["mean_s_T"] = mean;
    summary["var_s_T"] = var;
    col_stats(paths.V, n, mean, var);
    summary["mean_v_T"] = mean;
    summary["var_v_T"] = var;
    json wh_var = json::array(), wh_var_exact = json::array(), v_mean = json::array();
    for (int k = 1; k <= n; ++k) {
        col_stats(paths.WH, k, mean, var);
        wh_var.push_back(var);
        wh_var_exact.push_back(std::pow(grid.t(k), 2.0 * prm.hurst));
        col_stats(paths.V, k, mean, var);
        v_mean.push_back(mean);
    }
    summary["wh_var"] = std::move(wh_var);
    summary["wh_var_analytic"] = std::move(wh_var_exact);
    summary["v_mean"] = std::move(v_mean);
    write_text(out + "/summary.json", summary.dump(2) + "\n");
    return 0;
}

int cmd_train(const json& cfg, const std::string& out) {
    echo_config(cfg, out);
    const std::string name = cfg.at("model").get<std::string>();
    if (name == "model-hedge")
        throw std::invalid_argument("train: model-hedge is not a trainable strategy");
    rb::RBergomiParams prm = market_params(cfg);
    rb::TimeGrid grid = time_grid(cfg);
    nn::TrainConfig tc = train_config(cfg);
    auto model = make_model<float>(name, cfg);
    nn::TrainReport rep = nn::train(*model, prm, grid, tc);
    nn::write_loss_csv(rep, out + "/losses.csv");
    write_text(out + "/train_report.json", nn::report_to_json(rep));
    save_checkpoint(out + "/checkpoint.json", *model, cfg);
    return rep.diverged ? 3 : 0;
}

// Hedge positions of a strategy on a simulated path set.
Mat<double> strategy_deltas(const std::string& name, const std::string& checkpoint,
                            const json& cfg, const rb::MarketPaths& paths,
                            const rb::RBergomiParams& prm, const rb::TimeGrid& grid) {
    const int B = paths.n_paths();
    const int n = paths.n_steps();
    if (name == "zero") return Mat<double>(B * n, 2, 0.0);
    if (name == "model-hedge") {
        oracle::ModelHedgeConfig mh;
        mh.inner_paths = cfg.at("inner_paths").get<int>();
        mh.bump_rel = cfg.at("bump_rel").get<double>();
        const uint64_t seed = cfg.at("seed").get<uint64_t>();
        Mat<double> delta(B * n, 2);
        for (int p = 0; p < B; ++p)
            for (int k = 0; k < n; ++k) {
                oracle::HedgeState st = oracle::state_from_path(paths, grid, p, k, prm);
                mh.seed = mix_seed(seed, 0xA000000000000000ULL + p * n + k);
                oracle::ModelHedgeResult r = oracle::model_hedge(st, prm, mh);
                delta(p * n + k, 0) = r.delta_spot;
                delta(p * n + k, 1) = r.delta_theta;
            }
        return delta;
    }
    if (checkpoint.empty())
        throw std::invalid_argument("a checkpoint is required for model '" + name + "'");
    json ck_cfg;
    auto model = load_checkpoint<double>(checkpoint, &ck_cfg);
    if (model->name() != name)
        throw std::invalid_argument("checkpoint holds model '" + model->name() +
                                    "', requested '" + name + "'");
    const bool with_time = ck_cfg.at("with_time").get<bool>();
    Mat<double> delta(B * n, model->d_hedge());
    const int chunk = 2000;
    for (int lo = 0; lo < B; lo += chunk) {
        int hi = std::min(B, lo + chunk);
        rb::MarketPaths part = nn::subset_paths(paths, lo, hi);
        rb::FeatureBatch fb = rb::extract_features(part, prm, with_time);
        ad::Tape<double> tape;
        ad::Var d = model->forward(tape, fb);
        const Mat<double>& val = tape.val(d);
        for (int r = 0; r < (hi - lo) * n; ++r)
            for (int c = 0; c < delta.cols; ++c) delta(lo * n + r, c) = val(r, c);
    }
    return delta;
}

int cmd_evaluate(const json& cfg, const std::string& out, const std::string& checkpoint) {
    echo_config(cfg, out);
    rb::RBergomiParams prm = market_params(cfg);
    rb::TimeGrid grid = time_grid(cfg);
    const uint64_t seed = cfg.at("seed").get<uint64_t>();
    const int threads = cfg.at("threads").get<int>();
    const std::string name = cfg.at("model").get<std::string>();

    rb::MarketPaths test = rb::simulate_market(prm, grid, cfg.at("test_size").get<int>(),
                                               mix_seed(seed, nn::kTestStream), threads);
    double p0 = nn::estimate_p0(prm, grid, cfg.at("pricing_paths").get<int>(),
                                mix_seed(seed, nn::kPricingStream), threads);
    Mat<double> delta = strategy_deltas(name, checkpoint, cfg, test, prm, grid);
    oracle::StrategyStats st = oracle::evaluate_strategy(delta, test, prm.strike, p0);
    oracle::write_pnl_csv(st, out + "/pnl.csv");
    oracle::write_wealth_csv(st, grid, out + "/wealth.csv");

    json q;
    q["schema_version"] = 1;
    q["model"] = name;
    q["p0"] = p0;
    q["n_paths"] = test.n_paths();
    q["mean"] = st.mean;
    q["stdev"] = st.stdev;
    const char* labels[] = {"q01", "q05", "q25", "q50", "q75", "q95", "q99"};
    for (size_t i = 0; i < st.quantiles.size(); ++i) q["quantiles"][labels[i]] = st.quantiles[i];
    write_text(out + "/quantiles.json", q.dump(2) + "\n");
    return 0;
}

struct BacktestRow {
    std::string date;
    double price, vol;
};

std::vector<BacktestRow> read_backtest_csv(const std::string& file) {
    std::ifstream is(file);
    if (!is) throw std::invalid_argument("backtest: cannot open " + file);
    std::string line;
    if (!std::getline(is, line) || line.rfind("date,underlying_price,vol_index", 0) != 0)
        throw std::invalid_argument("backtest: bad header, expected date,underlying_price,vol_index");
    std::vector<BacktestRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        BacktestRow r;
        std::string p, v;
        if (!std::getline(ls, r.date, ',') || !std::getline(ls, p, ',') || !std::getline(ls, v))
            throw std::invalid_argument("backtest: malformed row: " + line);
        r.price = std::stod(p);
        r.vol = std::stod(v);
        if (!(r.price > 0.0)) throw std::invalid_argument("backtest: non-positive price");
        if (!rows.empty() && !(r.date > rows.back().date))
            throw std::invalid_argument("backtest: dates must be strictly increasing");
        rows.push_back(r);
    }
    if (rows.size() < 2) throw std::invalid_argument("backtest: need at least two rows");
    return rows;
}

int cmd_backtest(const json& cfg, const std::string& out, const std::string& checkpoint) {
    echo_config(cfg, out);
    const std::string name = cfg.at("model").get<std::string>();
    if (name == "model-hedge")
        throw std::invalid_argument("backtest: model-hedge needs a forward-variance curve, "
                                    "which market data does not provide");
    const std::vector<BacktestRow> rows = read_backtest_csv(cfg.at("backtest_csv").get<std::string>());
    const double div = cfg.at("vol_index_divisor").get<double>();
    const uint64_t seed = cfg.at("seed").get<uint64_t>();
    const int threads = cfg.at("threads").get<int>();
    const bool with_time = cfg.at("with_time").get<bool>();
    const int d_feat = with_time ? 3 : 2;

    // month parameter lookup: per-month block, else the global market block
    auto month_params = [&](const std::string& month) {
        rb::RBergomiParams p = market_params(cfg);
        for (const json& m : cfg.at("months")) {
            if (m.at("month").get<std::string>() == month) {
                p.hurst = m.at("hurst").get<double>();
                p.rho = m.at("rho").get<double>();
                p.eta = m.at("eta").get<double>();
                p.xi = m.at("xi").get<double>();
                break;
            }
        }
        return p;
    };

    std::ofstream os(out + "/wealth.csv");
    if (!os) throw std::runtime_error("cannot open " + out + "/wealth.csv");
    os << "step,t,wealth\n";
    os.precision(17);

    double wealth = 0.0;
    int day = 0;
    size_t lo = 0;
    while (lo < rows.size()) {
        const std::string month = rows[lo].date.substr(0, 7);
        size_t hi = lo;
        while (hi < rows.size() && rows[hi].date.substr(0, 7) == month) ++hi;
        const int n = static_cast<int>(hi - lo) - 1;  // daily hedging steps in the month
        if (n < 1)
            throw std::invalid_argument("backtest: month " + month + " has fewer than two rows");
        rb::RBergomiParams prm = month_params(month);
        const double strike = rows[lo].price;  // K = first price of the month
        prm.s0 = strike;
        prm.strike = strike;
        prm.maturity = n / 365.0;
        prm.t_fwd = prm.maturity + 30.0 / 365.0;
        rb::TimeGrid grid{n, prm.maturity};
        double p0 = nn::estimate_p0(prm, grid, cfg.at("pricing_paths").get<int>(),
                                    mix_seed(seed, nn::kPricingStream), threads);

        Mat<double> features(n, d_feat);
        for (int k = 0; k < n; ++k) {
            features(k, 0) = rows[lo + k].price / strike;
            features(k, 1) = rows[lo + k].vol / div;
            if (with_time) features(k, 2) = static_cast<double>(k) / n;
        }
        Mat<double> delta(n, 2, 0.0);
        if (name != "zero") {
            if (checkpoint.empty())
                throw std::invalid_argument("backtest: checkpoint required for learned models");
            json ck_cfg;
            auto model = load_checkpoint<double>(checkpoint, &ck_cfg);
            if (ck_cfg.at("with_time").get<bool>() != with_time)
                throw std::invalid_argument("backtest: with_time mismatch with checkpoint");
            rb::FeatureBatch fb{features, 1, n, d_feat};
            ad::Tape<double> tape;
            ad::Var d = model->forward(tape, fb);
            delta = tape.val(d);
        }

        // wealth at the first day of the month includes the premium received
        wealth += p0;
        os << day << ',' << day / 365.0 << ',' << wealth << '\n';
        ++day;
        for (int k = 0; k < n; ++k) {
            double ds = rows[lo + k + 1].price - rows[lo + k].price;
            double v1 = rows[lo + k + 1].vol / div, v0 = rows[lo + k].vol / div;
            wealth += delta(k, 0) * ds + delta(k, 1) * (v1 * v1 - v0 * v0);
            if (k == n - 1) wealth -= std::max(rows[hi - 1].price - strike, 0.0);
            os << day << ',' << day / 365.0 << ',' << wealth << '\n';
            ++day;
        }
        lo = hi;
    }
    return 0;
}

int cmd_ablate(const json& cfg, const std::string& out) {
    echo_config(cfg, out);
    rb::RBergomiParams prm = market_params(cfg);
    rb::TimeGrid grid = time_grid(cfg);
    nn::TrainConfig tc = train_config(cfg);

    struct Variant {
        std::string name, model;
        int sig_depth, n_layers;
    };
    std::vector<Variant> menu;
    const int base_depth = cfg.at("sig_depth").get<int>();
    const int base_layers = cfg.at("n_layers").get<int>();
    for (const char* m : {"sigformer", "transformer", "sig-linear"})
        menu.push_back({m, m, base_depth, base_layers});
    for (const json& d : cfg.at("ablate_depths"))
        menu.push_back({"sigformer-depth" + std::to_string(d.get<int>()), "sigformer",
                        d.get<int>(), base_layers});
    for (const json& l : cfg.at("ablate_layers"))
        menu.push_back({"sigformer-layers" + std::to_string(l.get<int>()), "sigformer",
                        base_depth, l.get<int>()});

    std::ofstream combined(out + "/losses.csv");
    if (!combined) throw std::runtime_error("cannot open " + out + "/losses.csv");
    combined << "variant,step,train_loss,val_loss\n";
    combined.precision(17);

    json manifest;
    manifest["schema_version"] = 1;
    manifest["variants"] = json::array();
    double wall_depth3 = 0.0, wall_depth4 = 0.0;
    for (const Variant& v : menu) {
        json vcfg = cfg;
        vcfg["model"] = v.model;
        vcfg["sig_depth"] = v.sig_depth;
        vcfg["n_layers"] = v.n_layers;
        auto model = make_model<float>(v.model, vcfg);
        nn::TrainReport rep = nn::train(*model, prm, grid, tc);
        std::string file = "losses_" + v.name + ".csv";
        nn::write_loss_csv(rep, out + "/" + file);
        for (size_t i = 0; i < rep.eval_steps.size(); ++i)
            combined << v.name << ',' << rep.eval_steps[i] << ',' << rep.train_losses[i] << ','
                     << rep.val_losses[i] << '\n';
        json entry;
        entry["name"] = v.name;
        entry["model"] = v.model;
        entry["sig_depth"] = v.sig_depth;
        entry["n_layers"] = v.n_layers;
        entry["file"] = file;
        entry["wall_seconds"] = rep.wall_seconds;
        entry["test_loss"] = rep.test_loss;
        entry["zero_strategy_test_loss"] = rep.zero_strategy_test_loss;
        entry["diverged"] = rep.diverged;
        manifest["variants"].push_back(std::move(entry));
        if (v.model == "sigformer" && v.n_layers == base_layers) {
            if (v.sig_depth == 3) wall_depth3 = rep.wall_seconds;
            if (v.sig_depth == 4) wall_depth4 = rep.wall_seconds;
        }
    }
    if (wall_depth3 > 0.0 && wall_depth4 > 0.0)
        manifest["depth4_vs_depth3_runtime_ratio"] = wall_depth4 / wall_depth3;
    write_text(out + "/manifest.json", manifest.dump(2) + "\n");
    return 0;
}

int cmd_attention(const json& cfg, const std::string& out, const std::string& checkpoint) {
    echo_config(cfg, out);
    if (checkpoint.empty()) throw std::invalid_argument("attention: checkpoint required");
    json ck_cfg;
    auto model = load_checkpoint<double>(checkpoint, &ck_cfg);
    auto* sf = dynamic_cast<nn::SigFormer<double>*>(model.get());
    if (!sf) throw std::invalid_argument("attention: checkpoint must hold a sigformer model");
    const nn::SigFormerConfig& mc = sf->config();

    rb::RBergomiParams prm = market_params(cfg);
    rb::TimeGrid grid = time_grid(cfg);
    const uint64_t seed = cfg.at("seed").get<uint64_t>();
    const int sel = cfg.at("attention_path").get<int>();
    const int test_size = cfg.at("test_size").get<int>();
    if (sel < 0 || sel >= test_size)
        throw std::invalid_argument("attention: path selector out of range");
    rb::MarketPaths test = rb::simulate_market(prm, grid, test_size,
                                               mix_seed(seed, nn::kTestStream),
                                               cfg.at("threads").get<int>());
    rb::MarketPaths one = nn::subset_paths(test, sel, sel + 1);
    rb::FeatureBatch fb =
        rb::extract_features(one, prm, ck_cfg.at("with_time").get<bool>());

    std::vector<ad::AttnCapture> caps;
    ad::Tape<double> tape;
    model->forward(tape, fb, &caps);
    require(static_cast<int>(caps.size()) == mc.sig_depth * mc.n_layers,
            "attention: unexpected capture count");

    fs::create_directories(out + "/attention");
    for (int lv = 0; lv < mc.sig_depth; ++lv)
        for (int l = 0; l < mc.n_layers; ++l) {
            const ad::AttnCapture& cap = caps[lv * mc.n_layers + l];
            for (int h = 0; h < static_cast<int>(cap.heads.size()); ++h) {
                std::ostringstream path;
                path << out << "/attention/L" << (l + 1) << "_S" << (lv + 1) << "_H" << (h + 1)
                     << ".csv";
                std::ofstream os(path.str());
                if (!os) throw std::runtime_error("cannot open " + path.str());
                os.precision(17);
                const Mat<double>& a = cap.heads[h];
                for (int r = 0; r < a.rows; ++r)
                    for (int c = 0; c < a.cols; ++c) os << a(r, c) << (c + 1 < a.cols ? ',' : '\n');
            }
        }

    std::ofstream os(out + "/features.csv");
    if (!os) throw std::runtime_error("cannot open " + out + "/features.csv");
    os << "step,t";
    for (int c = 0; c < fb.d_feat; ++c) os << ",f" << c;
    os << '\n';
    os.precision(17);
    for (int k = 0; k < fb.n_steps; ++k) {
        os << k << ',' << grid.t(k);
        for (int c = 0; c < fb.d_feat; ++c) os << ',' << fb.features(k, c);
        os << '\n';
    }
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"deep-hedging laboratory"};
    app.require_subcommand(1);
    std::string config_path, out = "out", model, checkpoint;
    uint64_t seed = 0;
    int threads = 0;
    bool seed_set = false, threads_set = false, model_set = false;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--out", out, "output directory");
    app.add_option("--checkpoint", checkpoint, "checkpoint file");
    app.add_option("--model", model, "strategy name")->each([&](const std::string&) {
        model_set = true;
    });
    app.add_option("--seed", seed, "base RNG seed")->each([&](const std::string&) {
        seed_set = true;
    });
    app.add_option("--threads", threads, "simulation threads")->each([&](const std::string&) {
        threads_set = true;
    });
    std::vector<std::string> verbs = {"simulate", "train",  "evaluate",
                                      "backtest", "ablate", "attention"};
    for (const std::string& v : verbs) app.add_subcommand(v)->fallthrough();

    std::vector<std::string> argv_s = args;
    std::vector<const char*> argv = {"sighedge"};
    for (const std::string& a : argv_s) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        json file_cfg = json::object();
        if (!config_path.empty()) {
            std::ifstream is(config_path);
            if (!is) throw std::invalid_argument("cannot open config " + config_path);
            file_cfg = json::parse(is);
        }
        json overrides = json::object();
        if (seed_set) overrides["seed"] = seed;
        if (threads_set) overrides["threads"] = threads;
        if (model_set) overrides["model"] = model;
        json cfg = merge_config(file_cfg, overrides);

        const std::string verb = app.get_subcommands().front()->get_name();
        if (verb == "simulate") return cmd_simulate(cfg, out);
        if (verb == "train") return cmd_train(cfg, out);
        if (verb == "evaluate") return cmd_evaluate(cfg, out, checkpoint);
        if (verb == "backtest") return cmd_backtest(cfg, out, checkpoint);
        if (verb == "ablate") return cmd_ablate(cfg, out);
        if (verb == "attention") return cmd_attention(cfg, out, checkpoint);
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const json::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    }
}

template std::unique_ptr<nn::HedgerModel<float>> make_model<float>(const std::string&,
                                                                   const json&);
template std::unique_ptr<nn::HedgerModel<double>> make_model<double>(const std::string&,
                                                                     const json&);
template void save_checkpoint<float>(const std::string&, const nn::HedgerModel<float>&,
                                     const json&);
template void save_checkpoint<double>(const std::string&, const nn::HedgerModel<double>&,
                                      const json&);
template std::unique_ptr<nn::HedgerModel<float>> load_checkpoint<float>(const std::string&,
                                                                        json*);
template std::unique_ptr<nn::HedgerModel<double>> load_checkpoint<double>(const std::string&,
                                                                          json*);

}  // namespace sighedge::cli
