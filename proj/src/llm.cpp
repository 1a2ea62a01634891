#include "qaea/llm.hpp"

#include <cmath>
#include <regex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "qaea/error.hpp"
#include "qaea/log.hpp"

namespace qaea::llm {

using nlohmann::json;

namespace {

bool retryable(int status) { return status == 429 || status >= 500; }

std::string excerpt(const std::string& body, std::size_t limit = 256) {
  return body.size() <= limit ? body : body.substr(0, limit) + "...";
}

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

ParsedUrl parse_url(const std::string& url) {
  static const std::regex pattern(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, pattern)) throw ArgumentError("invalid endpoint URL \"" + url + "\"");
  return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

}  // namespace

std::chrono::milliseconds RetryPolicy::backoff(int retry) const {
  double scale = std::pow(multiplier, std::max(0, retry - 1));
  return std::chrono::milliseconds(static_cast<long long>(initial_backoff.count() * scale));
}

Gateway::Gateway(std::shared_ptr<ChatBackend> backend, RetryPolicy policy, std::size_t parallelism,
                 Sleeper sleeper)
    : backend_(std::move(backend)),
      policy_(policy),
      sleeper_(std::move(sleeper)),
      slots_(std::make_unique<std::counting_semaphore<1024>>(
          static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(parallelism, 1, 1024)))) {
  if (!backend_) throw ArgumentError("gateway needs a backend");
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

ChatResponse Gateway::complete(const ChatRequest& request) const {
  ChatRequest effective = request;
  if (effective.model_name.empty()) effective.model_name = model_name_;

  slots_->acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{*slots_};

  auto start = std::chrono::steady_clock::now();
  for (int attempt = 0;; ++attempt) {
    std::string reason;
    try {
      ChatResponse response = backend_->complete(effective);
      response.attempts = attempt + 1;
      response.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - start);
      if (response.backend_id.empty()) response.backend_id = backend_->id();
      if (response.text.empty())
        throw EmptyOutputError("backend " + backend_->id() + " returned an empty completion");
      return response;
    } catch (const TransportError& e) {
      if (attempt >= policy_.max_retries) throw;
      reason = e.what();
    } catch (const BackendError& e) {
      if (!retryable(e.status()) || attempt >= policy_.max_retries) throw;
      reason = "HTTP " + std::to_string(e.status());
    }
    auto delay = policy_.backoff(attempt + 1);
    log::warn("llm.retry", {{"backend", backend_->id()},
                            {"retry", std::to_string(attempt + 1)},
                            {"backoff_ms", std::to_string(delay.count())},
                            {"reason", reason}});
    sleeper_(delay);
  }
}

HttpChatBackend::HttpChatBackend(HttpConfig config) : config_(std::move(config)) {
  parse_url(config_.endpoint);
}

std::string HttpChatBackend::id() const { return "http:" + config_.model + "@" + config_.endpoint; }

ChatResponse HttpChatBackend::complete(const ChatRequest& request) {
  auto url = parse_url(config_.endpoint);
  httplib::Client client(url.origin);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  client.set_write_timeout(config_.timeout);

  json messages = json::array();
  if (request.system_prompt) messages.push_back({{"role", "system"}, {"content", *request.system_prompt}});
  messages.push_back({{"role", "user"}, {"content", request.user_prompt}});
  json body = {{"model", request.model_name.empty() ? config_.model : request.model_name},
               {"messages", messages},
               {"temperature", request.temperature},
               {"max_tokens", request.max_output_tokens}};

  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  auto start = std::chrono::steady_clock::now();
  auto result = client.Post(url.path, headers, body.dump(-1, ' ', false, json::error_handler_t::replace),
                            "application/json");
  if (!result) throw TransportError(id() + ": " + httplib::to_string(result.error()));
  if (result->status < 200 || result->status >= 300)
    throw BackendError(result->status, excerpt(result->body));

  ChatResponse response;
  response.backend_id = id();
  response.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - start);
  try {
    auto reply = json::parse(result->body);
    const auto& content = reply.at("choices").at(0).at("message").at("content");
    if (content.is_string()) response.text = content.get<std::string>();
  } catch (const json::exception& e) {
    throw BackendError(result->status, std::string("malformed response: ") + e.what());
  }
  return response;
}

MockChatBackend::MockChatBackend(std::string id, Handler handler)
    : id_(std::move(id)), handler_(std::move(handler)) {}

std::shared_ptr<MockChatBackend> MockChatBackend::canned(std::map<std::string, std::string> canned) {
  return std::make_shared<MockChatBackend>("mock:canned", [table = std::move(canned)](const ChatRequest& r) {
    auto it = table.find(r.user_prompt);
    return it == table.end() ? std::string() : it->second;
  });
}

ChatResponse MockChatBackend::complete(const ChatRequest& request) {
  ChatResponse response;
  response.text = handler_(request);
  response.backend_id = id_;
  return response;
}

}  // namespace qaea::llm
