#include <cstdlib>

#include <gtest/gtest.h>

#include "qaea/config.hpp"
#include "qaea/error.hpp"
#include "test_util.hpp"

namespace qaea {
namespace {

using nlohmann::json;

TEST(Config, Defaults) {
  RunConfig c;
  EXPECT_EQ(c.threshold, 9);
  EXPECT_EQ(c.strategy, Strategy::tmo);
  EXPECT_EQ(c.k_values, (std::vector<std::size_t>{1, 10}));
  EXPECT_NO_THROW(validate(c));
}

TEST(Config, FromJson) {
  auto c = config_from_json(json::parse(R"({
    "corpus": "c.jsonl", "threshold": 7, "tasks": ["ee"], "strategy": "TRI",
    "components": ["original", "qa"], "k_values": [5], "gain": "linear", "sample": 3, "seed": 12,
    "generator": {"type": "mock", "profile": "noisy", "malformed_probability": 0.5}})"));
  EXPECT_EQ(c.corpus, "c.jsonl");
  EXPECT_EQ(c.threshold, 7);
  EXPECT_EQ(c.tasks, std::vector<Task>{Task::ee});
  EXPECT_EQ(c.strategy, Strategy::tri);
  EXPECT_EQ(c.components, (std::vector<Kind>{Kind::original, Kind::qa}));
  EXPECT_EQ(c.gain, Gain::linear);
  EXPECT_EQ(c.sample, 3u);
  EXPECT_EQ(c.seed, 12u);
  EXPECT_EQ(c.generator["profile"], "noisy");
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(config_from_json(json::parse(R"({"treshold": 9})")), ValidationError);
  EXPECT_THROW(config_from_json(json::parse(R"({"threshold": "high"})")), ValidationError);
  EXPECT_THROW(config_from_json(json::parse(R"({"strategy": "MIX"})")), ValidationError);
  EXPECT_THROW(config_from_json(json::parse(R"({"gain": "cubic"})")), ValidationError);
  EXPECT_THROW(config_from_json(json::parse("[1]")), ValidationError);
}

TEST(Config, Validate) {
  auto expect_invalid = [](auto mutate) {
    RunConfig c;
    mutate(c);
    EXPECT_THROW(validate(c), ValidationError);
  };
  expect_invalid([](RunConfig& c) { c.threshold = 11; });
  expect_invalid([](RunConfig& c) { c.threshold = -1; });
  expect_invalid([](RunConfig& c) { c.tasks.clear(); });
  expect_invalid([](RunConfig& c) { c.components.clear(); });
  expect_invalid([](RunConfig& c) { c.strategy = Strategy::not_applicable; });
  expect_invalid([](RunConfig& c) { c.k_values = {0}; });
  expect_invalid([](RunConfig& c) { c.parallelism = 0; });
  expect_invalid([](RunConfig& c) { c.sample = 0; });
  expect_invalid([](RunConfig& c) { c.embedder = {{"dimension", 3}}; });
}

TEST(Config, JsonRoundTrip) {
  RunConfig c;
  c.threshold = 5;
  c.sample = 4;
  c.prompts_dir = "p/v2";
  c.tasks = {Task::ee, Task::qag};
  auto back = config_from_json(json::parse(config_to_json(c).dump()));
  // Backend objects come back with sorted keys.
  EXPECT_EQ(json::parse(config_to_json(back).dump()), json::parse(config_to_json(c).dump()));
}

TEST(Config, LoadFile) {
  testing::TempDir dir;
  testing::write_file(dir / "c.json", R"({"threshold": 5})");
  EXPECT_EQ(load_config(dir / "c.json").threshold, 5);
  testing::write_file(dir / "bad.json", "{");
  EXPECT_THROW(load_config(dir / "bad.json"), ValidationError);
  EXPECT_THROW(load_config(dir / "none.json"), ValidationError);
}

TEST(ConfigHash, CoversPipelineFieldsOnly) {
  RunConfig a, b;
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 64u);
  b.strategy = Strategy::tri;
  b.k_values = {3};
  b.output_dir = "elsewhere";
  b.parallelism = 1;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.threshold = 5;
  EXPECT_NE(config_hash(a), config_hash(b));
  RunConfig c;
  c.embedder["dimension"] = 64;
  EXPECT_NE(config_hash(a), config_hash(c));
  RunConfig d;
  d.prompts_dir = "x";
  EXPECT_NE(config_hash(a), config_hash(d));
}

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  testing::TempDir dir;
  testing::write_file(dir / "f", "abc");
  EXPECT_EQ(file_sha256(dir / "f"), sha256_hex("abc"));
}

TEST(Backends, MockFactories) {
  RunConfig c;
  EXPECT_EQ(make_generator(c).backend().id(), "mock:generator");
  EXPECT_EQ(make_evaluator(c).backend().id(), "mock:evaluator:heuristic");
  c.evaluator = {{"type", "mock"}, {"profile", "constant"}, {"score", 4}};
  EXPECT_EQ(make_evaluator(c).backend().id(), "mock:evaluator:constant");
  c.embedder = {{"type", "hash"}, {"dimension", 32}, {"seed", 2}};
  auto e = make_embedder(c);
  EXPECT_EQ(e->dimension(), 32u);
  EXPECT_EQ(e->id(), "hash:d32:s2");
}

TEST(Backends, HttpFactories) {
  RunConfig c;
  c.generator = {{"type", "http"}, {"endpoint", "http://127.0.0.1:9/v1/chat"}, {"model", "gen-1"}};
  auto g = make_generator(c);
  EXPECT_EQ(g.model_name(), "gen-1");
  c.embedder = {{"type", "http"}, {"endpoint", "http://127.0.0.1:9/emb"}, {"model", "e"}, {"dimension", 8}};
  EXPECT_EQ(make_embedder(c)->dimension(), 8u);
  c.evaluator = {{"type", "http"}, {"endpoint", "http://x/y"}, {"model", "m"}, {"api_key_env", "QAEA_TEST_UNSET_KEY"}};
  ::unsetenv("QAEA_TEST_UNSET_KEY");
  EXPECT_THROW(make_evaluator(c), ValidationError);
}

TEST(Backends, UnknownTypes) {
  RunConfig c;
  c.generator = {{"type", "grpc"}};
  EXPECT_THROW(make_generator(c), ValidationError);
  c.generator = {{"type", "mock"}, {"profile", "sarcastic"}};
  EXPECT_THROW(make_generator(c), ValidationError);
  c.evaluator = {{"type", "mock"}, {"profile", "random"}};
  EXPECT_THROW(make_evaluator(c), ValidationError);
  c.embedder = {{"type", "bert"}};
  EXPECT_THROW(make_embedder(c), ValidationError);
}

}  // namespace
}  // namespace qaea
