#pragma once

// Run configuration shared by the CLI stages: one JSON file, overridable by
// flags. Backends are described as JSON objects and built on demand.
//
//   generator: {"type": "mock", "profile": "echo-oracle", "seed": 0, "malformed_probability": 0}
//              {"type": "http", "endpoint": ..., "model": ..., "api_key_env": "OPENAI_API_KEY"}
//   evaluator: {"type": "mock", "profile": "heuristic"} or {"type": "mock", "profile": "constant", "score": 10}
//              or an http object as above
//   embedder:  {"type": "hash", "dimension": 1024, "seed": 0}
//              {"type": "http", "endpoint": ..., "model": ..., "dimension": ..., "batch_size": 32}

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qaea/embed.hpp"
#include "qaea/eval.hpp"
#include "qaea/llm.hpp"
#include "qaea/types.hpp"

namespace qaea {

struct RunConfig {
  std::filesystem::path corpus;
  std::filesystem::path queries;
  std::filesystem::path qrels;
  std::filesystem::path output_dir = "out";
  std::optional<std::filesystem::path> prompts_dir;  // builtin templates when unset

  nlohmann::ordered_json generator = {{"type", "mock"}, {"profile", "echo-oracle"}, {"seed", 0}};
  nlohmann::ordered_json evaluator = {{"type", "mock"}, {"profile", "heuristic"}};
  nlohmann::ordered_json embedder = {{"type", "hash"}, {"dimension", 1024}, {"seed", 0}};

  int threshold = 9;
  std::vector<Task> tasks{Task::qag, Task::ee};
  Language language = Language::en;
  std::optional<std::size_t> sample;  // ingest only this many documents
  std::uint64_t seed = 0;

  // Evaluation-time settings; not part of the config hash.
  Strategy strategy = Strategy::tmo;
  std::vector<Kind> components{Kind::original, Kind::qa, Kind::event};
  std::vector<std::size_t> k_values{1, 10};
  Gain gain = Gain::exponential;
  std::size_t parallelism = 4;
};

/// Missing keys keep their defaults; unknown keys are rejected.
RunConfig config_from_json(const nlohmann::json& value);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::ordered_json config_to_json(const RunConfig& config);

/// Throws ValidationError when a field is out of range.
void validate(const RunConfig& config);

/// SHA-256 over the fields that shape the artifacts (paths excluded, eval-time
/// settings excluded), as lowercase hex.
std::string config_hash(const RunConfig& config);

std::string sha256_hex(std::string_view bytes);
std::string file_sha256(const std::filesystem::path& path);

llm::Gateway make_generator(const RunConfig& config);
llm::Gateway make_evaluator(const RunConfig& config);
std::unique_ptr<EmbeddingProvider> make_embedder(const RunConfig& config);

}  // namespace qaea
