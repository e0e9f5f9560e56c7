#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "docforensics/config.hpp"
#include "docforensics/errors.hpp"

using namespace docforensics;
using namespace docforensics::config;

TEST_CASE("defaults cover every documented key") {
  const Settings s;
  CHECK(s.values().size() == known_keys().size());
  CHECK(s.get("model.variant") == "dpv2");
  CHECK(s.get_double("density.high") == 0.2);
  CHECK(s.get_double("density.low") == 0.45);
  CHECK(s.get_int("train.epochs") == 20);
  CHECK(s.get_double("train.lr") == 0.01);
}

TEST_CASE("parsing, comments and unknown keys") {
  Settings s;
  s.merge_text("# comment\n\n  seed = 11 \ngrade.t_hi=0.9\n", "inline");
  CHECK(s.get_u64("seed") == 11);
  CHECK(s.get_double("grade.t_hi") == 0.9);
  CHECK_THROWS_AS(s.merge_text("bogus.key = 1\n", "inline"), ConfigError);
  CHECK_THROWS_AS(s.merge_text("no equals sign\n", "inline"), ConfigError);
  CHECK_THROWS_AS(s.merge_overrides({"seed"}), ConfigError);
  s.set("seed", "abc");
  CHECK_THROWS_AS(s.get_u64("seed"), ConfigError);
  CHECK_THROWS_AS(s.get("nope"), ConfigError);
}

TEST_CASE("hash depends on values, not on assignment order") {
  Settings a, b;
  a.merge_overrides({"seed=3", "grade.t_lo=0.4"});
  b.merge_overrides({"grade.t_lo=0.4", "seed=3"});
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 16);
  b.set("seed", "4");
  CHECK(a.hash() != b.hash());
}

TEST_CASE("typed views validate cross-key constraints") {
  Settings s;
  CHECK_NOTHROW(pipeline_config(s));
  s.set("density.high", "0.6");
  CHECK_THROWS_AS(pipeline_config(s), ConfigError);
  s = Settings();
  s.set("grade.t_lo", "0.9");
  CHECK_THROWS_AS(pipeline_config(s), ConfigError);
  s = Settings();
  s.set("localization.strategy", "V7");
  CHECK_THROWS_AS(pipeline_config(s), ConfigError);
  s = Settings();
  s.set("model.variant", "dpv7");
  CHECK_THROWS_AS(model_config(s), ConfigError);
  s = Settings();
  s.set("model.variant", "dpv2.1");
  s.set("train.lr", "");
  CHECK(model_config(s).lr == doctest::Approx(3e-4));
  CHECK_FALSE(train_params(s).lr.has_value());
  s.set("train.lr", "0.01");
  CHECK(model_config(s).lr == doctest::Approx(0.01));
  CHECK(*train_params(s).lr == doctest::Approx(0.01));
  s = Settings();
  s.set("corpus.op_mix", "splice:1,warp:2");
  CHECK_THROWS_AS(corpus_config(s), ConfigError);
  s.set("corpus.op_mix", "splice:1,erase:2");
  CHECK(corpus_config(s).op_mix.size() == 2);
}

TEST_CASE("file, environment fallback and overrides") {
  const auto dir = std::filesystem::temp_directory_path();
  const auto file = dir / "docforensics_test.conf";
  const auto env_file = dir / "docforensics_env.conf";
  std::ofstream(file) << "seed = 21\n";
  std::ofstream(env_file) << "seed = 33\ngrade.t_hi = 0.95\n";

  ::setenv("DOCFORENSICS_CONFIG", env_file.c_str(), 1);
  CHECK(load_settings(std::nullopt, {}).get_u64("seed") == 33);
  CHECK(load_settings(file, {}).get_u64("seed") == 21);
  CHECK(load_settings(file, {}).get_double("grade.t_hi") == 0.8);
  CHECK(load_settings(std::nullopt, {"seed=5"}).get_u64("seed") == 5);
  ::unsetenv("DOCFORENSICS_CONFIG");
  CHECK(load_settings(std::nullopt, {}).get_u64("seed") == 7);
  CHECK_THROWS_AS(load_settings(dir / "missing.conf", {}), IoError);
  std::filesystem::remove(file);
  std::filesystem::remove(env_file);
}
