#include "qaea/embed.hpp"

#include <regex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "qaea/error.hpp"
#include "qaea/log.hpp"
#include "text_util.hpp"

namespace qaea {

using nlohmann::json;

namespace {

void add_feature(DenseVector<double>& v, std::string_view feature, std::uint64_t seed) {
  std::uint64_t h = detail::mix64(detail::fnv1a(feature) ^ detail::mix64(seed));
  auto bucket = static_cast<Eigen::Index>(h % static_cast<std::uint64_t>(v.size()));
  v[bucket] += (h >> 63) ? -1.0 : 1.0;
}

}  // namespace

Embedding hash_embed(std::string_view text, std::size_t dimension, std::uint64_t seed) {
  if (dimension == 0) throw ArgumentError("embedding dimension must be positive");
  auto tokens = detail::tokenize(text, /*strip_punctuation=*/true);
  if (tokens.empty()) throw ArgumentError("text has no tokens to embed");
  DenseVector<double> v = DenseVector<double>::Zero(static_cast<Eigen::Index>(dimension));
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    add_feature(v, tokens[i], seed);
    if (i + 1 < tokens.size()) add_feature(v, tokens[i] + '\x1f' + tokens[i + 1], seed);
  }
  return Embedding(std::move(v)).normalized();
}

HashEmbedder::HashEmbedder(std::size_t dimension, std::uint64_t seed) : dimension_(dimension), seed_(seed) {
  if (dimension_ == 0) throw ArgumentError("embedding dimension must be positive");
}

std::string HashEmbedder::id() const {
  return "hash:d" + std::to_string(dimension_) + ":s" + std::to_string(seed_);
}

std::vector<Embedding> HashEmbedder::embed(std::span<const std::string> texts) {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(hash_embed(t, dimension_, seed_));
  return out;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(HttpEmbeddingConfig config) : config_(std::move(config)) {
  if (config_.batch_size == 0) throw ArgumentError("batch size must be positive");
  static const std::regex url(R"(^https?://[^/]+(/.*)?$)");
  if (!std::regex_match(config_.endpoint, url)) throw ArgumentError("invalid endpoint URL \"" + config_.endpoint + "\"");
}

std::string HttpEmbeddingProvider::id() const { return "http:" + config_.model + "@" + config_.endpoint; }

std::vector<Embedding> HttpEmbeddingProvider::embed(std::span<const std::string> texts) {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (std::size_t first = 0; first < texts.size(); first += config_.batch_size) {
    auto batch = texts.subspan(first, std::min(config_.batch_size, texts.size() - first));
    auto vectors = embed_batch(batch, first);
    for (auto& v : vectors) out.push_back(std::move(v));
  }
  return out;
}

std::vector<Embedding> HttpEmbeddingProvider::embed_batch(std::span<const std::string> batch, std::size_t first_index) {
  static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  std::regex_match(config_.endpoint, m, url);
  std::string path = m[2].matched ? m[2].str() : "/";
  const std::string batch_name = "batch [" + std::to_string(first_index) + ", " +
                                 std::to_string(first_index + batch.size()) + ")";

  json body = {{"model", config_.model}, {"input", std::vector<std::string>(batch.begin(), batch.end())}};
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  for (int attempt = 0;; ++attempt) {
    httplib::Client client(m[1].str());
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    auto result = client.Post(path, headers, body.dump(-1, ' ', false, json::error_handler_t::replace),
                              "application/json");
    std::string reason;
    if (!result) {
      reason = httplib::to_string(result.error());
      if (attempt >= config_.retry.max_retries)
        throw TransportError("embedding " + batch_name + " failed: " + reason);
    } else if (result->status == 429 || result->status >= 500) {
      reason = "HTTP " + std::to_string(result->status);
      if (attempt >= config_.retry.max_retries) throw BackendError(result->status, batch_name + ": " + result->body);
    } else if (result->status < 200 || result->status >= 300) {
      throw BackendError(result->status, batch_name + ": " + result->body.substr(0, 256));
    } else {
      std::vector<Embedding> vectors(batch.size());
      try {
        auto reply = json::parse(result->body);
        const json& rows = reply.is_object() ? reply.at("data") : reply;
        if (!rows.is_array() || rows.size() != batch.size())
          throw ArgumentError("embedding " + batch_name + ": expected " + std::to_string(batch.size()) + " vectors");
        for (std::size_t i = 0; i < rows.size(); ++i) {
          const json& row = rows[i].is_object() ? rows[i].at("embedding") : rows[i];
          std::size_t slot = rows[i].is_object() ? rows[i].value("index", i) : i;
          if (slot >= batch.size()) throw ArgumentError("embedding " + batch_name + ": index out of range");
          auto values = row.get<std::vector<double>>();
          vectors[slot] = Embedding(Eigen::Map<const DenseVector<double>>(values.data(),
                                                                          static_cast<Eigen::Index>(values.size())));
        }
      } catch (const json::exception& e) {
        throw BackendError(result->status, batch_name + ": malformed response: " + e.what());
      }
      return vectors;
    }
    auto delay = config_.retry.backoff(attempt + 1);
    log::warn("embed.retry", {{"batch", batch_name},
                              {"retry", std::to_string(attempt + 1)},
                              {"backoff_ms", std::to_string(delay.count())},
                              {"reason", reason}});
    std::this_thread::sleep_for(delay);
  }
}

std::vector<Embedding> embed_texts(std::span<const std::string> texts, EmbeddingProvider& provider) {
  for (std::size_t i = 0; i < texts.size(); ++i)
    if (texts[i].empty()) throw ArgumentError("text " + std::to_string(i) + " is empty");
  auto raw = provider.embed(texts);
  if (raw.size() != texts.size())
    throw ArgumentError("provider " + provider.id() + " returned " + std::to_string(raw.size()) + " vectors for " +
                        std::to_string(texts.size()) + " texts");
  std::vector<Embedding> out;
  out.reserve(raw.size());
  for (auto& e : raw) {
    if (static_cast<std::size_t>(e.dimension()) != provider.dimension())
      throw ArgumentError("provider " + provider.id() + " returned dimension " + std::to_string(e.dimension()) +
                          ", expected " + std::to_string(provider.dimension()));
    out.push_back(e.normalized());
  }
  return out;
}

}  // namespace qaea
