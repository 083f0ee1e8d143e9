#pragma once

// Run configuration files: INI-style sections of key = value lines.
//
//   [run]      preset, seed, n_theta, grid, threads
//   [network]  theta_layers, theta_width, theta_activation, eta_layers, ...
//   [training] epochs, n_max, n_min, lambda, tau_theta, reset_frequency, ...
//   [entropy]  c_count, c_lo, c_hi, abs_eta
//   [sampling] sampler, m_int, m_tb, m_sb
//
// Unknown sections or keys are errors. Overrides are "key=value" or
// "section.key=value"; a bare key must name exactly one entry.

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "wpinn/oracles.hpp"
#include "wpinn/training.hpp"

namespace wpinn {

struct RunConfig {
  PresetId preset = PresetId::standing_shock;
  TrainingConfig training;
  GridId grid = GridId::single;
  int n_theta = 10;
  int threads = 0;  // 0: available parallelism capped by n_theta
};

/// Preset defaults: 5000 epochs and n_theta 10 for the Riemann problems;
/// 75000 epochs, n_theta 15 and Sobol points for the sine datum.
RunConfig default_run_config(PresetId preset);

/// Applies every entry of an INI stream. Throws ConfigError on syntax errors,
/// unknown keys or bad values. A `preset` entry resets all other fields to that
/// preset's defaults first, so it is applied before the rest of the file.
void apply_config(RunConfig& config, std::istream& in);
void apply_config_file(RunConfig& config, const std::string& path);
void apply_override(RunConfig& config, std::string_view assignment);

/// Resolved configuration (defaults filled in) in the same format; reading it
/// back yields an identical RunConfig.
std::string to_ini(const RunConfig& config);

/// Names "section.key" of every recognised entry.
std::vector<std::string> config_keys();

}  // namespace wpinn
