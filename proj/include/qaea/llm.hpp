#pragma once

// Chat-completion gateway. A backend performs one call; the Gateway adds
// retries with exponential backoff and a concurrency limit, and is safe to
// share between threads.

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "qaea/types.hpp"

namespace qaea::llm {

struct ChatRequest {
  std::string model_name;
  std::optional<std::string> system_prompt;
  std::string user_prompt;
  double temperature = 0.0;
  int max_output_tokens = 4096;
};

struct ChatResponse {
  std::string text;
  std::chrono::milliseconds latency{0};
  std::string backend_id;
  int attempts = 1;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string id() const = 0;

  /// One attempt. Throws TransportError on network failure and BackendError
  /// on a non-success status; the Gateway decides whether to retry.
  virtual ChatResponse complete(const ChatRequest& request) = 0;
};

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;

  /// Delay before retry number `retry` (1-based).
  std::chrono::milliseconds backoff(int retry) const;
};

class Gateway {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit Gateway(std::shared_ptr<ChatBackend> backend, RetryPolicy policy = {},
                   std::size_t parallelism = 4, Sleeper sleeper = {});

  /// Returns the backend's text verbatim. Retries transport failures, HTTP 429
  /// and 5xx; other statuses surface immediately. Empty text raises
  /// EmptyOutputError. Each retry is logged as event "llm.retry".
  ChatResponse complete(const ChatRequest& request) const;

  const ChatBackend& backend() const { return *backend_; }
  const std::string& model_name() const { return model_name_; }
  void set_model_name(std::string name) { model_name_ = std::move(name); }

 private:
  std::shared_ptr<ChatBackend> backend_;
  RetryPolicy policy_;
  Sleeper sleeper_;
  std::string model_name_;
  std::unique_ptr<std::counting_semaphore<1024>> slots_;
};

struct HttpConfig {
  std::string endpoint;  // full URL, e.g. https://api.example.com/v1/chat/completions
  std::string model;
  std::string api_key;
  std::chrono::seconds timeout{60};
};

/// OpenAI-style endpoint: POST {model, messages, temperature, max_tokens};
/// returns choices[0].message.content.
class HttpChatBackend final : public ChatBackend {
 public:
  explicit HttpChatBackend(HttpConfig config);
  std::string id() const override;
  ChatResponse complete(const ChatRequest& request) override;

 private:
  HttpConfig config_;
};

/// Function-backed backend for tests and offline runs.
class MockChatBackend final : public ChatBackend {
 public:
  using Handler = std::function<std::string(const ChatRequest&)>;

  MockChatBackend(std::string id, Handler handler);

  /// Looks the user prompt up in `canned`; unknown prompts yield "".
  static std::shared_ptr<MockChatBackend> canned(std::map<std::string, std::string> canned);

  std::string id() const override { return id_; }
  ChatResponse complete(const ChatRequest& request) override;

 private:
  std::string id_;
  Handler handler_;
};

// ---------------------------------------------------------------------------
// Deterministic mock generators and evaluators.

struct MockProfile {
  enum class Kind { echo_oracle, noisy, adversarial_low_score };
  Kind kind = Kind::echo_oracle;
  /// noisy only: chance that an output is truncated into malformed JSON.
  double malformed_probability = 0.0;
  std::uint64_t seed = 0;
};

MockProfile::Kind parse_mock_profile(std::string_view name);

/// Structured output a mock generator emits for `document_text`.
///  - echo_oracle: one unit per sentence; QA pairs ask "What is X?" and answer
///    with the sentence verbatim, events carry the sentence as their "event".
///  - noisy: echo_oracle output with the final closing bracket dropped, with
///    the configured probability (drawn from a generator seeded by text and seed).
///  - adversarial_low_score: units unrelated to the input.
std::string mock_generate(std::string_view document_text, Task task, const MockProfile& profile);

/// Generator backend answering generation and regeneration prompts with
/// mock_generate. Regeneration always answers with echo_oracle output.
std::shared_ptr<ChatBackend> make_mock_generator(MockProfile profile);

/// Evaluator returning a fixed total score. Scores below 10 carry one
/// Relevance deduction for the difference.
std::shared_ptr<ChatBackend> make_constant_evaluator(int total_score);

/// Evaluator whose score is computed per call from the scored document and
/// the generated output.
std::shared_ptr<ChatBackend> make_scripted_evaluator(
    std::function<int(std::string_view document, std::string_view generated)> script);

/// Evaluator that deducts one Relevance point per unit with no word overlap
/// with the document, and five Clarity points when the output is not valid JSON.
std::shared_ptr<ChatBackend> make_heuristic_evaluator();

/// Text between the first "<tag>\n" and the following "\n</tag>" of a prompt.
std::optional<std::string> prompt_section(std::string_view prompt, std::string_view tag);

/// Splits on sentence-final punctuation (. ! ? and the CJK full stop), keeping it.
std::vector<std::string> split_sentences(std::string_view text);

}  // namespace qaea::llm
