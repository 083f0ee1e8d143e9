#include <doctest.h>

#include <sstream>

#include "wpinn/config.hpp"
#include "wpinn/errors.hpp"

using namespace wpinn;

namespace {

RunConfig parse(const std::string& text, PresetId base = PresetId::standing_shock) {
  RunConfig c = default_run_config(base);
  std::istringstream in(text);
  apply_config(c, in);
  return c;
}

}  // namespace

TEST_CASE("preset defaults") {
  const RunConfig s = default_run_config(PresetId::standing_shock);
  CHECK(s.training.epochs == 5000);
  CHECK(s.n_theta == 10);
  const RunConfig sine = default_run_config(PresetId::sine);
  CHECK(sine.training.epochs == 75000);
  CHECK(sine.n_theta == 15);
  CHECK(sine.training.sampler == SamplerKind::sobol);
}

TEST_CASE("to_ini round trips") {
  for (auto id : {PresetId::standing_shock, PresetId::moving_shock, PresetId::rarefaction, PresetId::sine}) {
    RunConfig c = default_run_config(id);
    c.training.lambda = 0.1;
    c.training.tau_theta = 1.0 / 3.0;
    c.training.n_max = 7;
    c.training.label = "tuned";
    c.n_theta = 3;
    const std::string ini = to_ini(c);
    const RunConfig back = parse(ini);
    CHECK(back.preset == id);
    CHECK(to_ini(back) == ini);
    CHECK(back.training.tau_theta == c.training.tau_theta);
  }
}

TEST_CASE("every key appears in the written file") {
  const std::string ini = to_ini(default_run_config(PresetId::moving_shock));
  for (const auto& key : config_keys()) {
    const auto dot = key.find('.');
    CAPTURE(key);
    CHECK(ini.find("[" + key.substr(0, dot) + "]") != std::string::npos);
    CHECK(ini.find("\n" + key.substr(dot + 1) + " = ") != std::string::npos);
  }
}

TEST_CASE("file entries") {
  const RunConfig c = parse("[training]\nepochs = 12\nlambda = 2.5\n[network]\ntheta_activation = tanh\n");
  CHECK(c.training.epochs == 12);
  CHECK(c.training.lambda == 2.5);
  CHECK(c.training.activation_theta == Activation::tanh);

  // The preset entry is applied first, whatever its position.
  const RunConfig p = parse("[training]\nepochs = 12\n[run]\npreset = sine\n");
  CHECK(p.preset == PresetId::sine);
  CHECK(p.training.epochs == 12);
  CHECK(p.n_theta == 15);
}

TEST_CASE("bad input is a ConfigError") {
  CHECK_THROWS_AS(parse("[training]\nepochz = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse("[nope]\nepochs = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse("[training]\nepochs = three\n"), ConfigError);
  CHECK_THROWS_AS(parse("[training]\nlambda = 1.5x\n"), ConfigError);
  CHECK_THROWS_AS(parse("[run]\npreset = kdv\n"), ConfigError);
  CHECK_THROWS_AS(parse("[training\n"), ConfigError);
  RunConfig c = default_run_config(PresetId::standing_shock);
  CHECK_THROWS_AS(apply_config_file(c, "/nonexistent/run.ini"), ConfigError);
}

TEST_CASE("overrides") {
  RunConfig c = default_run_config(PresetId::rarefaction);
  apply_override(c, "epochs=40");
  apply_override(c, "training.lambda=0.5");
  apply_override(c, "sampling.m_int=128");
  CHECK(c.training.epochs == 40);
  CHECK(c.training.lambda == 0.5);
  CHECK(c.training.counts->interior == 128);
  CHECK(c.training.counts->temporal_boundary == 4096);
  CHECK_THROWS_AS(apply_override(c, "epochs"), ConfigError);
  CHECK_THROWS_AS(apply_override(c, "bogus=1"), ConfigError);
  CHECK_THROWS_AS(apply_override(c, "run.epochs=1"), ConfigError);

  apply_override(c, "preset=moving_shock");
  CHECK(c.preset == PresetId::moving_shock);
  CHECK(c.training.epochs == 5000);
}
