#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "sighedge/nn/models.hpp"
#include "sighedge/nn/train.hpp"

namespace sighedge::cli {

// Built-in defaults for every recognized flat config key.
nlohmann::json default_config();

// defaults <- file <- flag overrides; unknown keys or type mismatches throw
// std::invalid_argument.
nlohmann::json merge_config(const nlohmann::json& file_cfg, const nlohmann::json& overrides);

rb::RBergomiParams market_params(const nlohmann::json& cfg);
rb::TimeGrid time_grid(const nlohmann::json& cfg);
nn::TrainConfig train_config(const nlohmann::json& cfg);
nn::SigFormerConfig net_config(const nlohmann::json& cfg);

// Model factory for {sigformer|transformer|sig-linear|rnn|semi-recurrent|zero}.
template <typename T>
std::unique_ptr<nn::HedgerModel<T>> make_model(const std::string& name,
                                               const nlohmann::json& cfg);

template <typename T>
void save_checkpoint(const std::string& path, const nn::HedgerModel<T>& model,
                     const nlohmann::json& cfg);

// Rebuilds the model from the config block stored in the checkpoint and loads
// its parameters. `cfg_out`, when non-null, receives that config block.
template <typename T>
std::unique_ptr<nn::HedgerModel<T>> load_checkpoint(const std::string& path,
                                                    nlohmann::json* cfg_out = nullptr);

// Full command-line entry point (argv without the program name). Returns the
// process exit code: 0 success, 2 config error, 3 numerical failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace sighedge::cli
