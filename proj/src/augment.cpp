#include "qaea/augment.hpp"

#include <atomic>
#include <exception>
#include <istream>
#include <mutex>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "qaea/error.hpp"
#include "qaea/log.hpp"
#include "qaea/organize.hpp"

namespace qaea {

using nlohmann::json;

namespace {

ScoreReport score_output(const llm::Gateway& evaluator, const Document& doc, Task task,
                         std::string_view generated, const AugmentOptions& options,
                         const PromptTemplates& templates, std::vector<std::string>& warnings) {
  llm::ChatRequest request = options.request_defaults;
  request.user_prompt = build_score_prompt(generated, doc.text, task, templates);
  auto reply = evaluator.complete(request);
  try {
    auto parsed = parse_score_json(reply.text);
    for (auto& w : parsed.warnings) warnings.push_back("score: " + w);
    return parsed.value;
  } catch (const ParseError& e) {
    // An unreadable verdict counts as a failing one.
    warnings.push_back(std::string("score: ") + e.what());
    return ScoreReport{0, {{"Completeness: evaluator verdict could not be parsed", 10, ""}}};
  }
}

std::vector<GeneratedUnit> parse_units(std::string_view raw, Task task, Language language,
                                       std::vector<std::string>& warnings) {
  std::vector<GeneratedUnit> units;
  if (task == Task::qag) {
    auto parsed = parse_qa_json(raw);
    for (auto& w : parsed.warnings) warnings.push_back(w);
    for (auto& qa : parsed.value) {
      std::string text = revert_qa(qa);
      units.push_back({std::move(qa), std::move(text)});
    }
  } else {
    auto parsed = parse_event_json(raw);
    for (auto& w : parsed.warnings) warnings.push_back(w);
    for (auto& event : parsed.value) {
      std::string text = revert_event(event, language);
      units.push_back({std::move(event), std::move(text)});
    }
  }
  return units;
}

json score_to_json(const ScoreReport& score) {
  json detail = json::array();
  for (const auto& d : score.deductions)
    detail.push_back({{"deduction reason", d.deduction_reason},
                      {"deduction score", d.deduction_score},
                      {"related content", d.related_content}});
  return {{"total score", score.total_score}, {"detail", detail}};
}

ScoreReport score_from_json(const json& value) {
  auto parsed = parse_score_json(value.dump());
  return parsed.value;
}

json optional_json(const std::optional<std::string>& value) {
  return value ? json(*value) : json(nullptr);
}

json unit_to_json(const GeneratedUnit& unit) {
  if (const auto* qa = std::get_if<QaPair>(&unit.content)) {
    return {{"kind", "qa"},
            {"unit",
             {{"question type", to_string(qa->question_type)}, {"question", qa->question}, {"answer", qa->answer}}},
            {"text", unit.text}};
  }
  if (const auto* event = std::get_if<Event>(&unit.content)) {
    json body = json::object();
    auto elements = event->elements();
    for (std::size_t i = 0; i < kEventKeys.size(); ++i) body[std::string(kEventKeys[i])] = optional_json(*elements[i]);
    return {{"kind", "event"}, {"unit", body}, {"text", unit.text}};
  }
  return {{"kind", "text"}, {"text", unit.text}};
}

GeneratedUnit unit_from_json(const json& value, Task task, Language language, std::size_t line) {
  GeneratedUnit unit;
  if (auto it = value.find("unit"); it != value.end() && it->is_object()) {
    if (task == Task::qag) {
      auto parsed = parse_qa_json(json{{(*it).value("question type", "factual inquiry"),
                                        json::array({json::array({(*it).value("question", ""),
                                                                  (*it).value("answer", "")})})}}
                                      .dump());
      if (parsed.value.size() != 1) throw ParseError("malformed QA unit", line);
      unit.content = parsed.value.front();
    } else {
      auto parsed = parse_event_json(json::array({*it}).dump());
      if (parsed.value.size() != 1) throw ParseError("malformed event unit", line);
      unit.content = parsed.value.front();
    }
  }
  if (auto it = value.find("text"); it != value.end() && it->is_string()) unit.text = it->get<std::string>();
  else unit.text = revert_unit(unit, language);
  if (unit.text.empty()) throw ParseError("unit without text", line);
  return unit;
}

}  // namespace

GenerationRecord augment_document(const Document& doc, Task task, const llm::Gateway& generator,
                                  const llm::Gateway& evaluator, const AugmentOptions& options) {
  if (options.threshold < -1 || options.threshold > 10)
    throw ArgumentError("threshold must lie in [-1, 10], got " + std::to_string(options.threshold));
  const PromptTemplates& templates = options.templates ? *options.templates : PromptTemplates::builtin();

  GenerationRecord record;
  record.doc_id = doc.doc_id;
  record.task = task;

  llm::ChatRequest request = options.request_defaults;
  request.user_prompt = build_generate_prompt(task, doc.text, templates);
  record.attempt_outputs.push_back(generator.complete(request).text);
  record.score = score_output(evaluator, doc, task, record.attempt_outputs.back(), options, templates,
                              record.warnings);

  if (record.score.total_score <= options.threshold) {
    record.regenerated = true;
    request.user_prompt = build_regen_prompt(doc.text, record.attempt_outputs.back(), record.score, task, templates);
    record.attempt_outputs.push_back(generator.complete(request).text);
    record.final_score = score_output(evaluator, doc, task, record.attempt_outputs.back(), options, templates,
                                      record.warnings);
  }

  try {
    record.units = parse_units(record.attempt_outputs.back(), task, options.language, record.warnings);
  } catch (const ParseError& e) {
    record.failed = true;
    record.warnings.push_back(e.what());
    log::warn("augment.failed", {{"doc_id", doc.doc_id}, {"task", std::string(to_string(task))}, {"error", e.what()}});
  }
  return record;
}

std::vector<GenerationRecord> augment_corpus(const Corpus& corpus, const std::vector<Task>& tasks,
                                             const llm::Gateway& generator, const llm::Gateway& evaluator,
                                             const AugmentOptions& options, std::size_t parallelism) {
  const std::size_t jobs = corpus.size() * tasks.size();
  std::vector<GenerationRecord> records(jobs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t job = next++; job < jobs; job = next++) {
      try {
        records[job] = augment_document(corpus[job / tasks.size()], tasks[job % tasks.size()], generator,
                                        evaluator, options);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = jobs;
      }
    }
  };

  std::size_t workers = std::clamp<std::size_t>(parallelism, 1, std::max<std::size_t>(jobs, 1));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return records;
}

void write_generations(std::ostream& out, const std::vector<GenerationRecord>& records) {
  for (const auto& r : records) {
    json units = json::array();
    for (const auto& u : r.units) units.push_back(unit_to_json(u));
    json line = {{"doc_id", r.doc_id},
                 {"task", to_string(r.task)},
                 {"attempts", r.attempt_outputs},
                 {"score", score_to_json(r.score)},
                 {"final_score", r.final_score ? score_to_json(*r.final_score) : json(nullptr)},
                 {"regenerated", r.regenerated},
                 {"failed", r.failed},
                 {"units", units},
                 {"warnings", r.warnings}};
    out << line.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
  }
}

std::vector<GenerationRecord> read_generations(std::istream& in, Language language) {
  std::vector<GenerationRecord> records;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json value;
    try {
      value = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(e.what(), line);
    }
    if (!value.is_object() || !value.contains("doc_id") || !value.contains("task"))
      throw ParseError("generation record needs doc_id and task", line);

    GenerationRecord r;
    try {
      r.doc_id = value.at("doc_id").get<std::string>();
      r.task = parse_task(value.at("task").get<std::string>());
      r.attempt_outputs = value.value("attempts", std::vector<std::string>{});
      if (auto it = value.find("score"); it != value.end() && it->is_object()) r.score = score_from_json(*it);
      if (auto it = value.find("final_score"); it != value.end() && it->is_object())
        r.final_score = score_from_json(*it);
      r.regenerated = value.value("regenerated", false);
      r.failed = value.value("failed", false);
      r.warnings = value.value("warnings", std::vector<std::string>{});
      if (auto it = value.find("units"); it != value.end()) {
        if (!it->is_array()) throw ParseError("\"units\" must be a list", line);
        for (const auto& u : *it) r.units.push_back(unit_from_json(u, r.task, language, line));
      }
    } catch (const json::exception& e) {
      throw ParseError(e.what(), line);
    } catch (const ArgumentError& e) {
      throw ParseError(e.what(), line);
    }
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace qaea
