#include <random>
#include <regex>
#include <set>

#include <json.hpp>

#include "qaea/augment.hpp"
#include "qaea/error.hpp"
#include "qaea/llm.hpp"
#include "text_util.hpp"

namespace qaea::llm {

using nlohmann::ordered_json;

namespace {

constexpr std::string_view kCjkFullStop = "\xE3\x80\x82";

std::string trim(std::string_view s) {
  auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

// Sentences stating something about an entity ("X is Y"); the mock treats
// these as the key information of a text.
const std::regex& copula() {
  static const std::regex pattern(R"( (is|are|was|were) )");
  return pattern;
}

std::string subject_of(const std::string& sentence) {
  std::smatch m;
  if (std::regex_search(sentence, m, copula()) && m.position(0) > 0) return sentence.substr(0, m.position(0));
  auto words = detail::tokenize(sentence, true);
  std::string subject;
  for (std::size_t i = 0; i < words.size() && i < 4; ++i) subject += (i ? " " : "") + words[i];
  return subject;
}

std::vector<std::string> key_sentences(std::string_view text) {
  auto sentences = split_sentences(text);
  std::vector<std::string> keys;
  for (auto& s : sentences)
    if (std::regex_search(s, copula())) keys.push_back(s);
  if (keys.empty() && !sentences.empty()) keys.push_back(sentences.front());
  return keys;
}

std::string echo_oracle(std::string_view text, Task task) {
  auto sentences = key_sentences(text);
  if (task == Task::qag) {
    ordered_json pairs = ordered_json::array();
    for (const auto& s : sentences) pairs.push_back({"What is " + subject_of(s) + "?", s});
    return ordered_json{{"factual inquiry", pairs}}.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
  }
  ordered_json events = ordered_json::array();
  for (const auto& s : sentences) {
    std::string subject = subject_of(s);
    events.push_back({{"event type", "Statement"},
                      {"time", nullptr},
                      {"location", nullptr},
                      {"event subject", subject.empty() ? ordered_json(nullptr) : ordered_json(subject)},
                      {"event object", nullptr},
                      {"event", s},
                      {"impact", nullptr}});
  }
  return events.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

std::string adversarial(Task task) {
  if (task == Task::qag) {
    ordered_json pairs = ordered_json::array();
    for (int k = 1; k <= 6; ++k)
      pairs.push_back({"What powers flux capacitor number " + std::to_string(k) + "?",
                       "Quantum marmalade oscillating at " + std::to_string(k * 17) + " zentons."});
    return ordered_json{{"factual inquiry", pairs}}.dump();
  }
  ordered_json events = ordered_json::array();
  for (int k = 1; k <= 6; ++k)
    events.push_back({{"event type", "Hallucination"},
                      {"time", "stardate " + std::to_string(4000 + k)},
                      {"location", "Atlantis"},
                      {"event subject", "Marmalade guild"},
                      {"event object", nullptr},
                      {"event", "Zentons oscillated beyond quantum capacity"},
                      {"impact", nullptr}});
  return events.dump();
}

// Task named by the prompt's output schema, looking only outside quoted sections.
Task task_of_prompt(std::string_view prompt) {
  std::string outside(prompt);
  for (std::string_view tag : {"document", "generated", "deductions"}) {
    std::string open = "<" + std::string(tag) + ">\n";
    std::string close = "\n</" + std::string(tag) + ">";
    auto a = outside.find(open);
    if (a == std::string::npos) continue;
    auto b = outside.find(close, a + open.size() - 1);
    if (b == std::string::npos) continue;
    outside.erase(a, b + close.size() - a);
  }
  if (outside.find("EVENT_json") != std::string::npos) return Task::ee;
  if (outside.find("QA_json") != std::string::npos) return Task::qag;
  throw ArgumentError("prompt names neither QA_json nor EVENT_json");
}

std::string score_json(int total, std::string reason) {
  total = std::clamp(total, 0, 10);
  ordered_json detail = ordered_json::array();
  if (total < 10)
    detail.push_back({{"deduction reason", std::move(reason)}, {"deduction score", 10 - total}, {"related content", ""}});
  return ordered_json{{"total score", total}, {"detail", detail}}.dump();
}

std::set<std::string> content_words(std::string_view text) {
  std::set<std::string> words;
  for (auto& w : detail::tokenize(text, true))
    if (w.size() >= 5 || (!w.empty() && static_cast<unsigned char>(w[0]) >= 0x80)) words.insert(w);
  return words;
}

}  // namespace

std::optional<std::string> prompt_section(std::string_view prompt, std::string_view tag) {
  std::string open = "<" + std::string(tag) + ">\n";
  std::string close = "\n</" + std::string(tag) + ">";
  auto a = prompt.find(open);
  if (a == std::string_view::npos) return std::nullopt;
  auto begin = a + open.size();
  auto b = prompt.find(close, begin);
  if (b == std::string_view::npos) return std::nullopt;
  return std::string(prompt.substr(begin, b - begin));
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    std::size_t end = std::string_view::npos;
    char c = text[i];
    if ((c == '.' || c == '!' || c == '?') &&
        (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1]))))
      end = i + 1;
    else if (text.substr(i, kCjkFullStop.size()) == kCjkFullStop)
      end = i + kCjkFullStop.size();
    if (end == std::string_view::npos) continue;
    if (auto s = trim(text.substr(start, end - start)); !s.empty()) out.push_back(std::move(s));
    start = end;
    i = end - 1;
  }
  if (auto s = trim(text.substr(std::min(start, text.size()))); !s.empty()) out.push_back(std::move(s));
  return out;
}

MockProfile::Kind parse_mock_profile(std::string_view name) {
  if (name == "echo-oracle" || name == "echo_oracle") return MockProfile::Kind::echo_oracle;
  if (name == "noisy") return MockProfile::Kind::noisy;
  if (name == "adversarial-low-score" || name == "adversarial_low_score")
    return MockProfile::Kind::adversarial_low_score;
  throw ArgumentError("unknown mock profile \"" + std::string(name) + "\"");
}

std::string mock_generate(std::string_view document_text, Task task, const MockProfile& profile) {
  switch (profile.kind) {
    case MockProfile::Kind::echo_oracle: return echo_oracle(document_text, task);
    case MockProfile::Kind::adversarial_low_score: return adversarial(task);
    case MockProfile::Kind::noisy: {
      std::string out = echo_oracle(document_text, task);
      std::uint64_t state = detail::fnv1a(document_text);
      state = detail::mix64(state ^ detail::mix64(profile.seed) ^ static_cast<std::uint64_t>(task));
      std::mt19937_64 rng(state);
      std::uniform_real_distribution<double> coin(0.0, 1.0);
      if (coin(rng) < profile.malformed_probability) out.pop_back();
      return out;
    }
  }
  return {};
}

std::shared_ptr<ChatBackend> make_mock_generator(MockProfile profile) {
  std::string id = "mock:generator";
  return std::make_shared<MockChatBackend>(id, [profile](const ChatRequest& request) -> std::string {
    auto document = prompt_section(request.user_prompt, "document");
    if (!document || document->empty()) return {};
    Task task = task_of_prompt(request.user_prompt);
    if (prompt_section(request.user_prompt, "generated")) return echo_oracle(*document, task);
    return mock_generate(*document, task, profile);
  });
}

std::shared_ptr<ChatBackend> make_constant_evaluator(int total_score) {
  return std::make_shared<MockChatBackend>(
      "mock:evaluator:constant", [total_score](const ChatRequest&) {
        return score_json(total_score, "Relevance: scripted deduction");
      });
}

std::shared_ptr<ChatBackend> make_scripted_evaluator(
    std::function<int(std::string_view document, std::string_view generated)> script) {
  return std::make_shared<MockChatBackend>(
      "mock:evaluator:scripted", [script = std::move(script)](const ChatRequest& request) {
        auto document = prompt_section(request.user_prompt, "document").value_or("");
        auto generated = prompt_section(request.user_prompt, "generated").value_or("");
        return score_json(script(document, generated), "Relevance: scripted deduction");
      });
}

std::shared_ptr<ChatBackend> make_heuristic_evaluator() {
  return std::make_shared<MockChatBackend>("mock:evaluator:heuristic", [](const ChatRequest& request) {
    auto document = prompt_section(request.user_prompt, "document").value_or("");
    auto generated = prompt_section(request.user_prompt, "generated").value_or("");
    Task task = task_of_prompt(request.user_prompt);

    std::vector<std::string> unit_texts;
    try {
      if (task == Task::qag) {
        for (const auto& qa : parse_qa_json(generated).value) unit_texts.push_back(qa.question + " " + qa.answer);
      } else {
        for (const auto& ev : parse_event_json(generated).value) {
          std::string text;
          for (const auto* e : ev.elements())
            if (*e) text += **e + " ";
          unit_texts.push_back(text);
        }
      }
    } catch (const ParseError&) {
      return score_json(5, "Clarity: output is not valid JSON");
    }
    if (unit_texts.empty()) return score_json(0, "Completeness: no units generated");

    auto doc_words = content_words(document);
    const auto doc_tokens = detail::tokenize(document, true);
    const std::set<std::string> all_doc_words(doc_tokens.begin(), doc_tokens.end());
    ordered_json detail = ordered_json::array();
    int deducted = 0;
    for (const auto& text : unit_texts) {
      bool grounded = false;
      auto words = content_words(text);
      if (words.empty()) {
        // Only short words: plain overlap.
        for (const auto& w : detail::tokenize(text, true)) grounded = grounded || all_doc_words.count(w);
      }
      for (const auto& w : words) grounded = grounded || doc_words.count(w);
      if (!grounded) {
        detail.push_back({{"deduction reason", "Relevance: content not found in the original text"},
                          {"deduction score", 1},
                          {"related content", text}});
        ++deducted;
      }
    }
    return ordered_json{{"total score", std::max(0, 10 - deducted)}, {"detail", detail}}.dump(
        -1, ' ', false, ordered_json::error_handler_t::replace);
  });
}

}  // namespace qaea::llm
