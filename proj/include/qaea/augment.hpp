#pragma once

// Structured augmentation: QA pairs and events generated from a document,
// scored by a second model, and regenerated once when the score is at or
// below the threshold.

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qaea/corpus.hpp"
#include "qaea/llm.hpp"
#include "qaea/prompts.hpp"
#include "qaea/types.hpp"

namespace qaea {

enum class QuestionType {
  factual_inquiry,
  explanation_and_definition,
  cause_and_effect,
  comparison_and_contrast,
  evaluation_and_opinion,
};

inline constexpr std::array<QuestionType, 5> kQuestionTypes = {
    QuestionType::factual_inquiry, QuestionType::explanation_and_definition,
    QuestionType::cause_and_effect, QuestionType::comparison_and_contrast,
    QuestionType::evaluation_and_opinion};

/// Key used in QA_json, e.g. "cause and effect".
std::string_view to_string(QuestionType type);

/// Case-, whitespace-, '-' and '_'-insensitive match against the five keys.
std::optional<QuestionType> match_question_type(std::string_view key);

struct QaPair {
  QuestionType question_type = QuestionType::factual_inquiry;
  std::string question;
  std::string answer;

  friend bool operator==(const QaPair&, const QaPair&) = default;
};

/// One extracted event. Absent elements are nullopt; at least one is set.
struct Event {
  std::optional<std::string> event_type;
  std::optional<std::string> time;
  std::optional<std::string> location;
  std::optional<std::string> event_subject;
  std::optional<std::string> event_object;
  std::optional<std::string> event;
  std::optional<std::string> impact;

  /// Elements in schema order: event type, time, location, event subject,
  /// event object, event, impact.
  std::array<const std::optional<std::string>*, 7> elements() const;
  std::size_t present_count() const;

  friend bool operator==(const Event&, const Event&) = default;
};

/// Element keys in schema order.
inline constexpr std::array<std::string_view, 7> kEventKeys = {
    "event type", "time", "location", "event subject", "event object", "event", "impact"};

inline constexpr std::array<std::string_view, 4> kScoreCriteria = {"Relevance", "Clarity", "Consistency",
                                                                    "Completeness"};

struct Deduction {
  std::string deduction_reason;
  int deduction_score = 1;
  std::string related_content;

  friend bool operator==(const Deduction&, const Deduction&) = default;
};

/// Evaluator verdict. total_score == max(0, 10 - sum of deduction scores).
struct ScoreReport {
  int total_score = 10;
  std::vector<Deduction> deductions;

  friend bool operator==(const ScoreReport&, const ScoreReport&) = default;
};

template <typename T>
struct Parsed {
  T value;
  std::vector<std::string> warnings;
};

/// Parsers accept arbitrary model output. They either return a value with
/// warnings about skipped parts or throw ParseError when no JSON is present.
Parsed<std::vector<QaPair>> parse_qa_json(std::string_view raw);
Parsed<std::vector<Event>> parse_event_json(std::string_view raw);
Parsed<ScoreReport> parse_score_json(std::string_view raw);

struct GeneratedUnit {
  /// monostate for externally imported units that only carry text.
  std::variant<std::monostate, QaPair, Event> content;
  std::string text;

  friend bool operator==(const GeneratedUnit&, const GeneratedUnit&) = default;
};

struct GenerationRecord {
  std::string doc_id;
  Task task = Task::qag;
  /// First output, plus the regenerated output when regeneration fired.
  std::vector<std::string> attempt_outputs;
  /// Verdict on the first output; this is what the threshold is compared to.
  ScoreReport score;
  /// Verdict on the regenerated output, kept for inspection only.
  std::optional<ScoreReport> final_score;
  bool regenerated = false;
  /// Final output could not be parsed; the document keeps only its original vector.
  bool failed = false;
  std::vector<GeneratedUnit> units;
  std::vector<std::string> warnings;

  friend bool operator==(const GenerationRecord&, const GenerationRecord&) = default;
};

struct AugmentOptions {
  /// Regenerate when the first score is <= threshold. -1 disables regeneration.
  int threshold = 9;
  Language language = Language::en;
  llm::ChatRequest request_defaults{};
  const PromptTemplates* templates = nullptr;
};

/// Generate -> evaluate -> (regenerate once) -> parse -> revert, for one document.
GenerationRecord augment_document(const Document& doc, Task task, const llm::Gateway& generator,
                                  const llm::Gateway& evaluator, const AugmentOptions& options = {});

/// Runs augment_document over every (document, task) pair with up to
/// `parallelism` workers. Output order is corpus order, then task order.
std::vector<GenerationRecord> augment_corpus(const Corpus& corpus, const std::vector<Task>& tasks,
                                             const llm::Gateway& generator, const llm::Gateway& evaluator,
                                             const AugmentOptions& options, std::size_t parallelism);

/// generations.jsonl: one record per line.
void write_generations(std::ostream& out, const std::vector<GenerationRecord>& records);

/// Reads generations.jsonl. Imported records may omit attempts and scores and
/// may carry text-only units; missing texts are reverted from structured units.
std::vector<GenerationRecord> read_generations(std::istream& in, Language language = Language::en);

}  // namespace qaea
