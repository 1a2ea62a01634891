#include "qaea/config.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "qaea/error.hpp"

namespace qaea {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const std::set<std::string> kKnownKeys = {"corpus",    "queries",    "qrels",      "output_dir", "prompts_dir",
                                          "generator", "evaluator",  "embedder",   "threshold",  "tasks",
                                          "language",  "sample",     "seed",       "strategy",   "components",
                                          "k_values",  "gain",       "parallelism"};

Gain parse_gain(const std::string& name) {
  if (name == "exponential") return Gain::exponential;
  if (name == "linear") return Gain::linear;
  throw ValidationError("unknown gain \"" + name + "\" (expected exponential or linear)");
}

std::string backend_type(const ordered_json& backend, const char* role) {
  if (!backend.is_object() || !backend.contains("type") || !backend["type"].is_string())
    throw ValidationError(std::string(role) + " backend needs a string \"type\"");
  return backend["type"].get<std::string>();
}

std::string api_key(const ordered_json& backend) {
  if (backend.contains("api_key_env")) {
    const auto name = backend["api_key_env"].get<std::string>();
    const char* value = std::getenv(name.c_str());
    if (!value) throw ValidationError("environment variable " + name + " is not set");
    return value;
  }
  return "";
}

llm::Gateway http_gateway(const ordered_json& backend, std::size_t parallelism) {
  llm::HttpConfig http;
  http.endpoint = backend.at("endpoint").get<std::string>();
  http.model = backend.at("model").get<std::string>();
  http.api_key = api_key(backend);
  if (backend.contains("timeout_s")) http.timeout = std::chrono::seconds(backend["timeout_s"].get<int>());
  llm::RetryPolicy policy;
  if (backend.contains("max_retries")) policy.max_retries = backend["max_retries"].get<int>();
  llm::Gateway gateway(std::make_shared<llm::HttpChatBackend>(http), policy, parallelism);
  gateway.set_model_name(http.model);
  return gateway;
}

template <typename T>
T get_or(const ordered_json& obj, const char* key, T fallback) {
  return obj.contains(key) ? obj[key].get<T>() : fallback;
}

}  // namespace

RunConfig config_from_json(const json& value) {
  if (!value.is_object()) throw ValidationError("config must be a JSON object");
  for (const auto& [key, _] : value.items())
    if (!kKnownKeys.count(key)) throw ValidationError("unknown config key \"" + key + "\"");

  RunConfig c;
  try {
    if (value.contains("corpus")) c.corpus = value["corpus"].get<std::string>();
    if (value.contains("queries")) c.queries = value["queries"].get<std::string>();
    if (value.contains("qrels")) c.qrels = value["qrels"].get<std::string>();
    if (value.contains("output_dir")) c.output_dir = value["output_dir"].get<std::string>();
    if (value.contains("prompts_dir") && !value["prompts_dir"].is_null())
      c.prompts_dir = value["prompts_dir"].get<std::string>();
    if (value.contains("generator")) c.generator = value["generator"];
    if (value.contains("evaluator")) c.evaluator = value["evaluator"];
    if (value.contains("embedder")) c.embedder = value["embedder"];
    if (value.contains("threshold")) c.threshold = value["threshold"].get<int>();
    if (value.contains("tasks")) {
      c.tasks.clear();
      for (const auto& t : value["tasks"]) c.tasks.push_back(parse_task(t.get<std::string>()));
    }
    if (value.contains("language")) c.language = parse_language(value["language"].get<std::string>());
    if (value.contains("sample") && !value["sample"].is_null()) c.sample = value["sample"].get<std::size_t>();
    if (value.contains("seed")) c.seed = value["seed"].get<std::uint64_t>();
    if (value.contains("strategy")) c.strategy = parse_strategy(value["strategy"].get<std::string>());
    if (value.contains("components")) {
      c.components.clear();
      for (const auto& k : value["components"]) c.components.push_back(parse_kind(k.get<std::string>()));
    }
    if (value.contains("k_values")) c.k_values = value["k_values"].get<std::vector<std::size_t>>();
    if (value.contains("gain")) c.gain = parse_gain(value["gain"].get<std::string>());
    if (value.contains("parallelism")) c.parallelism = value["parallelism"].get<std::size_t>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad config value: ") + e.what());
  } catch (const ArgumentError& e) {
    throw ValidationError(e.what());
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  json value = json::parse(in, nullptr, false);
  if (value.is_discarded()) throw ValidationError("config " + path.string() + " is not valid JSON");
  return config_from_json(value);
}

ordered_json config_to_json(const RunConfig& c) {
  ordered_json tasks = ordered_json::array();
  for (Task t : c.tasks) tasks.push_back(to_string(t));
  ordered_json components = ordered_json::array();
  for (Kind k : c.components) components.push_back(to_string(k));
  return {{"corpus", c.corpus.generic_string()},
          {"queries", c.queries.generic_string()},
          {"qrels", c.qrels.generic_string()},
          {"output_dir", c.output_dir.generic_string()},
          {"prompts_dir", c.prompts_dir ? ordered_json(c.prompts_dir->generic_string()) : ordered_json(nullptr)},
          {"generator", c.generator},
          {"evaluator", c.evaluator},
          {"embedder", c.embedder},
          {"threshold", c.threshold},
          {"tasks", tasks},
          {"language", to_string(c.language)},
          {"sample", c.sample ? ordered_json(*c.sample) : ordered_json(nullptr)},
          {"seed", c.seed},
          {"strategy", to_string(c.strategy)},
          {"components", components},
          {"k_values", c.k_values},
          {"gain", c.gain == Gain::exponential ? "exponential" : "linear"},
          {"parallelism", c.parallelism}};
}

void validate(const RunConfig& c) {
  if (c.threshold < 0 || c.threshold > 10)
    throw ValidationError("threshold must be in [0, 10], got " + std::to_string(c.threshold));
  if (c.tasks.empty()) throw ValidationError("at least one task is required");
  if (c.components.empty()) throw ValidationError("at least one component is required");
  if (c.strategy == Strategy::not_applicable) throw ValidationError("strategy must be TRI or TMO");
  if (c.k_values.empty()) throw ValidationError("at least one k value is required");
  for (auto k : c.k_values)
    if (k == 0) throw ValidationError("k values must be positive");
  if (c.parallelism == 0) throw ValidationError("parallelism must be positive");
  if (c.sample && *c.sample == 0) throw ValidationError("sample size must be positive");
  backend_type(c.generator, "generator");
  backend_type(c.evaluator, "evaluator");
  backend_type(c.embedder, "embedder");
}

std::string config_hash(const RunConfig& c) {
  ordered_json tasks = ordered_json::array();
  for (Task t : c.tasks) tasks.push_back(to_string(t));
  ordered_json pipeline = {{"generator", c.generator},
                           {"evaluator", c.evaluator},
                           {"embedder", c.embedder},
                           {"threshold", c.threshold},
                           {"tasks", tasks},
                           {"language", to_string(c.language)},
                           {"sample", c.sample ? ordered_json(*c.sample) : ordered_json(nullptr)},
                           {"seed", c.seed},
                           {"prompts", c.prompts_dir ? "custom" : "builtin"}};
  return sha256_hex(pipeline.dump());
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 failed");
  std::ostringstream out;
  for (unsigned int i = 0; i < length; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return out.str();
}

std::string file_sha256(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return sha256_hex(buffer.str());
}

llm::Gateway make_generator(const RunConfig& c) {
  const auto type = backend_type(c.generator, "generator");
  if (type == "http") return http_gateway(c.generator, c.parallelism);
  if (type != "mock") throw ValidationError("unknown generator type \"" + type + "\"");
  llm::MockProfile profile;
  try {
    profile.kind = llm::parse_mock_profile(get_or<std::string>(c.generator, "profile", "echo-oracle"));
  } catch (const ArgumentError& e) {
    throw ValidationError(e.what());
  }
  profile.seed = get_or<std::uint64_t>(c.generator, "seed", c.seed);
  profile.malformed_probability = get_or<double>(c.generator, "malformed_probability", 0.0);
  return llm::Gateway(llm::make_mock_generator(profile), {}, c.parallelism);
}

llm::Gateway make_evaluator(const RunConfig& c) {
  const auto type = backend_type(c.evaluator, "evaluator");
  if (type == "http") return http_gateway(c.evaluator, c.parallelism);
  if (type != "mock") throw ValidationError("unknown evaluator type \"" + type + "\"");
  const auto profile = get_or<std::string>(c.evaluator, "profile", "heuristic");
  if (profile == "heuristic") return llm::Gateway(llm::make_heuristic_evaluator(), {}, c.parallelism);
  if (profile == "constant")
    return llm::Gateway(llm::make_constant_evaluator(get_or<int>(c.evaluator, "score", 10)), {}, c.parallelism);
  throw ValidationError("unknown mock evaluator profile \"" + profile + "\"");
}

std::unique_ptr<EmbeddingProvider> make_embedder(const RunConfig& c) {
  const auto type = backend_type(c.embedder, "embedder");
  if (type == "hash")
    return std::make_unique<HashEmbedder>(get_or<std::size_t>(c.embedder, "dimension", 1024),
                                          get_or<std::uint64_t>(c.embedder, "seed", 0));
  if (type != "http") throw ValidationError("unknown embedder type \"" + type + "\"");
  HttpEmbeddingConfig http;
  http.endpoint = c.embedder.at("endpoint").get<std::string>();
  http.model = c.embedder.at("model").get<std::string>();
  http.api_key = api_key(c.embedder);
  http.dimension = get_or<std::size_t>(c.embedder, "dimension", 1024);
  http.batch_size = get_or<std::size_t>(c.embedder, "batch_size", 32);
  return std::make_unique<HttpEmbeddingProvider>(http);
}

}  // namespace qaea
