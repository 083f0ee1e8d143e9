#include "wpinn/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "wpinn/errors.hpp"
#include "wpinn/metrics.hpp"

namespace wpinn {

namespace {

double to_double(const std::string& s) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) throw ConfigError("not a number: '" + s + "'");
  return v;
}

template <typename Int>
Int to_int(const std::string& s) {
  Int v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) throw ConfigError("not an integer: '" + s + "'");
  return v;
}

std::string_view to_string(GridId g) {
  switch (g) {
    case GridId::single: return "single";
    case GridId::table1: return "table1";
    case GridId::table2: return "table2";
  }
  return "single";
}

struct Entry {
  const char* section;
  const char* key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Entry int_entry(const char* section, const char* key, T TrainingConfig::*field) {
  return {section, key, [field](RunConfig& c, const std::string& v) { c.training.*field = to_int<T>(v); },
          [field](const RunConfig& c) { return std::to_string(c.training.*field); }};
}

Entry real_entry(const char* section, const char* key, double TrainingConfig::*field) {
  return {section, key, [field](RunConfig& c, const std::string& v) { c.training.*field = to_double(v); },
          [field](const RunConfig& c) { return format_double(c.training.*field); }};
}

Interval resolved_c_range(const RunConfig& c) {
  if (c.training.c_range) return *c.training.c_range;
  const EntropyCSet grid = make_c_grid(c.training, make_preset(c.preset));
  return {grid.c_min, grid.c_max};
}

CollocationCounts resolved_counts(const RunConfig& c) {
  return c.training.counts.value_or(make_preset(c.preset).counts);
}

Entry count_entry(const char* key, int CollocationCounts::*field) {
  return {"sampling", key,
          [field](RunConfig& c, const std::string& v) {
            CollocationCounts counts = resolved_counts(c);
            counts.*field = to_int<int>(v);
            c.training.counts = counts;
          },
          [field](const RunConfig& c) { return std::to_string(resolved_counts(c).*field); }};
}

Entry range_entry(const char* key, double Interval::*field) {
  return {"entropy", key,
          [field](RunConfig& c, const std::string& v) {
            Interval r = resolved_c_range(c);
            r.*field = to_double(v);
            c.training.c_range = r;
          },
          [field](const RunConfig& c) { return format_double(resolved_c_range(c).*field); }};
}

const std::vector<Entry>& entries() {
  using TC = TrainingConfig;
  static const std::vector<Entry> table = {
      {"run", "preset", [](RunConfig& c, const std::string& v) { c = default_run_config(parse_preset(v)); },
       [](const RunConfig& c) { return std::string(to_string(c.preset)); }},
      {"run", "seed", [](RunConfig& c, const std::string& v) { c.training.seed = to_int<std::uint64_t>(v); },
       [](const RunConfig& c) { return std::to_string(c.training.seed); }},
      {"run", "n_theta", [](RunConfig& c, const std::string& v) { c.n_theta = to_int<int>(v); },
       [](const RunConfig& c) { return std::to_string(c.n_theta); }},
      {"run", "grid", [](RunConfig& c, const std::string& v) { c.grid = parse_grid(v); },
       [](const RunConfig& c) { return std::string(to_string(c.grid)); }},
      {"run", "threads", [](RunConfig& c, const std::string& v) { c.threads = to_int<int>(v); },
       [](const RunConfig& c) { return std::to_string(c.threads); }},
      {"run", "label", [](RunConfig& c, const std::string& v) { c.training.label = v; },
       [](const RunConfig& c) { return c.training.label; }},

      int_entry("network", "theta_layers", &TC::theta_hidden_layers),
      int_entry("network", "theta_width", &TC::theta_width),
      {"network", "theta_activation",
       [](RunConfig& c, const std::string& v) { c.training.activation_theta = parse_activation(v); },
       [](const RunConfig& c) { return std::string(to_string(c.training.activation_theta)); }},
      int_entry("network", "eta_layers", &TC::eta_hidden_layers),
      int_entry("network", "eta_width", &TC::eta_width),
      {"network", "eta_activation",
       [](RunConfig& c, const std::string& v) { c.training.activation_eta = parse_activation(v); },
       [](const RunConfig& c) { return std::string(to_string(c.training.activation_eta)); }},

      int_entry("training", "epochs", &TC::epochs),
      int_entry("training", "n_max", &TC::n_max),
      int_entry("training", "n_min", &TC::n_min),
      real_entry("training", "reset_frequency", &TC::reset_frequency),
      real_entry("training", "lambda", &TC::lambda),
      {"training", "lambda_placement",
       [](RunConfig& c, const std::string& v) { c.training.lambda_placement = parse_lambda_placement(v); },
       [](const RunConfig& c) { return std::string(to_string(c.training.lambda_placement)); }},
      real_entry("training", "tau_theta", &TC::tau_theta),
      real_entry("training", "tau_eta", &TC::tau_eta),
      {"training", "optimizer", [](RunConfig& c, const std::string& v) { c.training.optimizer = parse_optimizer(v); },
       [](const RunConfig& c) { return std::string(to_string(c.training.optimizer)); }},
      {"training", "test_sign", [](RunConfig& c, const std::string& v) { c.training.test_sign = parse_test_sign(v); },
       [](const RunConfig& c) { return std::string(to_string(c.training.test_sign)); }},
      {"training", "residual", [](RunConfig& c, const std::string& v) { c.training.residual = parse_residual(v); },
       [](const RunConfig& c) { return std::string(to_string(c.training.residual)); }},
      real_entry("training", "denominator_floor", &TC::denominator_floor),
      real_entry("training", "cutoff_fraction", &TC::cutoff_fraction),
      int_entry("training", "kernel_threads", &TC::kernel_threads),

      int_entry("entropy", "c_count", &TC::c_count),
      range_entry("c_lo", &Interval::lo),
      range_entry("c_hi", &Interval::hi),
      real_entry("entropy", "abs_eta", &TC::abs_eta),

      {"sampling", "sampler", [](RunConfig& c, const std::string& v) { c.training.sampler = parse_sampler(v); },
       [](const RunConfig& c) { return std::string(to_string(c.training.sampler)); }},
      count_entry("m_int", &CollocationCounts::interior),
      count_entry("m_tb", &CollocationCounts::temporal_boundary),
      count_entry("m_sb", &CollocationCounts::spatial_boundary),
  };
  return table;
}

const Entry& find_entry(std::string_view name) {
  const auto dot = name.find('.');
  const Entry* found = nullptr;
  int matches = 0;
  for (const auto& e : entries()) {
    const bool hit = dot == std::string_view::npos
                         ? name == e.key
                         : name.substr(0, dot) == e.section && name.substr(dot + 1) == e.key;
    if (hit) {
      found = &e;
      ++matches;
    }
  }
  if (matches == 0) throw ConfigError("unknown config key '" + std::string(name) + "'");
  if (matches > 1) throw ConfigError("ambiguous config key '" + std::string(name) + "'");
  return *found;
}

void set_entry(RunConfig& config, const Entry& e, const std::string& value) {
  try {
    e.set(config, value);
  } catch (const ConfigError& err) {
    throw ConfigError(std::string(e.section) + '.' + e.key + ": " + err.what());
  }
}

}  // namespace

RunConfig default_run_config(PresetId preset) {
  RunConfig c;
  c.preset = preset;
  if (preset == PresetId::sine) {
    c.training.epochs = 75000;
    c.training.sampler = SamplerKind::sobol;
    c.n_theta = 15;
  }
  return c;
}

void apply_config(RunConfig& config, std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& err) {
    throw ConfigError(std::string("config syntax: ") + err.what());
  }
  std::vector<std::pair<const Entry*, std::string>> assignments;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError("config entry '" + section + "' outside any section");
    for (const auto& [key, value] : body)
      assignments.emplace_back(&find_entry(section + '.' + key), value.data());
  }
  // The preset resets defaults, so it goes first.
  for (const auto& [e, v] : assignments)
    if (std::string_view(e->key) == "preset") set_entry(config, *e, v);
  for (const auto& [e, v] : assignments)
    if (std::string_view(e->key) != "preset") set_entry(config, *e, v);
}

void apply_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  apply_config(config, in);
}

void apply_override(RunConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) throw ConfigError("override must be key=value: '" + std::string(assignment) + "'");
  auto trim = [](std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    return s;
  };
  const Entry& e = find_entry(trim(assignment.substr(0, eq)));
  set_entry(config, e, std::string(trim(assignment.substr(eq + 1))));
}

std::string to_ini(const RunConfig& config) {
  std::ostringstream out;
  std::string section;
  for (const auto& e : entries()) {
    if (section != e.section) {
      if (!section.empty()) out << '\n';
      section = e.section;
      out << '[' << section << "]\n";
    }
    out << e.key << " = " << e.get(config) << '\n';
  }
  return out.str();
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& e : entries()) keys.push_back(std::string(e.section) + '.' + e.key);
  return keys;
}

}  // namespace wpinn
