#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "qaea/augment.hpp"
#include "qaea/error.hpp"
#include "qaea/json_extract.hpp"

namespace qaea {

using nlohmann::json;

namespace {

// Lowercase, '-' and '_' as spaces, whitespace collapsed and trimmed.
std::string normalize_key(std::string_view key) {
  std::string out;
  bool pending_space = false;
  for (unsigned char c : key) {
    if (std::isspace(c) || c == '-' || c == '_') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

std::string short_dump(const json& value) {
  std::string s = value.dump(-1, ' ', false, json::error_handler_t::replace);
  return s.size() > 80 ? s.substr(0, 80) + "..." : s;
}

std::optional<std::string> element_value(const json& value) {
  if (value.is_null()) return std::nullopt;
  std::string s = value.is_string() ? value.get<std::string>()
                                    : value.dump(-1, ' ', false, json::error_handler_t::replace);
  auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return std::nullopt;
  return s;
}

std::optional<int> as_integer(const json& value) {
  if (value.is_number_integer()) {
    auto v = value.get<long long>();
    return static_cast<int>(std::clamp<long long>(v, -1000, 1000));
  }
  if (value.is_number_float()) {
    double v = value.get<double>();
    if (!std::isfinite(v)) return std::nullopt;
    return static_cast<int>(std::lround(std::clamp(v, -1000.0, 1000.0)));
  }
  if (value.is_string()) {
    const auto& s = value.get_ref<const std::string&>();
    try {
      std::size_t used = 0;
      int v = std::stoi(s, &used);
      if (used > 0) return std::clamp(v, -1000, 1000);
    } catch (const std::exception&) {
    }
  }
  return std::nullopt;
}

bool names_criterion(std::string_view reason) {
  std::string lower = normalize_key(reason);
  for (std::string_view stem : {"relevan", "clar", "clear", "consisten", "complet"})
    if (lower.find(stem) != std::string::npos) return true;
  return false;
}

Event parse_event_object(const json& obj, std::vector<std::string>& warnings) {
  Event event;
  std::array<std::optional<std::string>*, 7> slots = {&event.event_type,    &event.time,
                                                       &event.location,      &event.event_subject,
                                                       &event.event_object, &event.event,
                                                       &event.impact};
  for (const auto& [key, value] : obj.items()) {
    std::string normalized = normalize_key(key);
    auto it = std::find(kEventKeys.begin(), kEventKeys.end(), normalized);
    if (it == kEventKeys.end()) {
      warnings.push_back("unknown event element \"" + normalized + "\" skipped");
      continue;
    }
    *slots[static_cast<std::size_t>(it - kEventKeys.begin())] = element_value(value);
  }
  return event;
}

}  // namespace

std::string_view to_string(QuestionType type) {
  switch (type) {
    case QuestionType::factual_inquiry: return "factual inquiry";
    case QuestionType::explanation_and_definition: return "explanation and definition";
    case QuestionType::cause_and_effect: return "cause and effect";
    case QuestionType::comparison_and_contrast: return "comparison and contrast";
    case QuestionType::evaluation_and_opinion: return "evaluation and opinion";
  }
  return "factual inquiry";
}

std::optional<QuestionType> match_question_type(std::string_view key) {
  std::string normalized = normalize_key(key);
  for (auto type : kQuestionTypes)
    if (normalized == to_string(type)) return type;
  return std::nullopt;
}

std::array<const std::optional<std::string>*, 7> Event::elements() const {
  return {&event_type, &time, &location, &event_subject, &event_object, &event, &impact};
}

std::size_t Event::present_count() const {
  auto all = elements();
  return static_cast<std::size_t>(
      std::count_if(all.begin(), all.end(), [](const auto* e) { return e->has_value(); }));
}

Parsed<std::vector<QaPair>> parse_qa_json(std::string_view raw) {
  auto value = extract_json(raw, JsonShape::object);
  if (!value) throw ParseError("no JSON object in QA output");

  Parsed<std::vector<QaPair>> out;
  for (const auto& [key, pairs] : value->items()) {
    auto type = match_question_type(key);
    if (!type) {
      out.warnings.push_back("unknown question type \"" + key + "\" skipped");
      continue;
    }
    if (!pairs.is_array()) {
      out.warnings.push_back("question type \"" + key + "\" does not hold a list");
      continue;
    }
    for (const auto& pair : pairs) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string()) {
        out.warnings.push_back("malformed pair " + short_dump(pair) + " skipped");
        continue;
      }
      QaPair qa{*type, pair[0].get<std::string>(), pair[1].get<std::string>()};
      if (qa.question.empty() || qa.answer.empty()) {
        out.warnings.push_back("pair with empty question or answer skipped");
        continue;
      }
      out.value.push_back(std::move(qa));
    }
  }
  return out;
}

Parsed<std::vector<Event>> parse_event_json(std::string_view raw) {
  auto value = extract_json(raw, JsonShape::any);
  if (!value) throw ParseError("no JSON value in event output");

  // Accept a bare list, a single event object, or an object wrapping one list.
  json items = json::array();
  if (value->is_array()) {
    items = std::move(*value);
  } else {
    const json* wrapped = nullptr;
    for (const auto& [key, v] : value->items())
      if (v.is_array() && !wrapped) wrapped = &v;
    if (wrapped && value->size() == 1) items = *wrapped;
    else items.push_back(std::move(*value));
  }

  Parsed<std::vector<Event>> out;
  for (const auto& item : items) {
    if (!item.is_object()) {
      out.warnings.push_back("non-object event " + short_dump(item) + " skipped");
      continue;
    }
    Event event = parse_event_object(item, out.warnings);
    if (event.present_count() == 0) {
      out.warnings.push_back("event with no elements skipped");
      continue;
    }
    out.value.push_back(std::move(event));
  }
  return out;
}

Parsed<ScoreReport> parse_score_json(std::string_view raw) {
  auto value = extract_json(raw, JsonShape::object);
  if (!value) throw ParseError("no JSON object in score output");

  const json* total = nullptr;
  const json* detail = nullptr;
  for (const auto& [key, v] : value->items()) {
    std::string k = normalize_key(key);
    if (k == "total score" || k == "score" || k == "total") total = &v;
    else if (k == "detail" || k == "details") detail = &v;
  }
  if (!total && !detail) throw ParseError("score output has neither \"total score\" nor \"detail\"");

  Parsed<ScoreReport> out;
  if (detail && detail->is_array()) {
    for (const auto& item : *detail) {
      if (!item.is_object()) {
        out.warnings.push_back("non-object deduction skipped");
        continue;
      }
      Deduction d;
      std::optional<int> points;
      for (const auto& [key, v] : item.items()) {
        std::string k = normalize_key(key);
        if (k == "deduction reason") d.deduction_reason = element_value(v).value_or("");
        else if (k == "deduction score") points = as_integer(v);
        else if (k == "related content") d.related_content = element_value(v).value_or("");
      }
      if (points && *points < 0) points = -*points;
      if (!points || *points == 0) {
        out.warnings.push_back("deduction without a positive score skipped");
        continue;
      }
      if (!names_criterion(d.deduction_reason)) {
        out.warnings.push_back("deduction reason \"" + d.deduction_reason + "\" names no criterion; skipped");
        continue;
      }
      d.deduction_score = *points;
      out.value.deductions.push_back(std::move(d));
    }
  } else if (detail && !detail->is_null()) {
    out.warnings.push_back("\"detail\" is not a list");
  }

  int deducted = std::accumulate(out.value.deductions.begin(), out.value.deductions.end(), 0,
                                 [](int acc, const Deduction& d) { return acc + d.deduction_score; });
  int computed = std::max(0, 10 - deducted);
  std::optional<int> stated = total ? as_integer(*total) : std::nullopt;
  if (!stated) {
    out.warnings.push_back("missing total score; computed from deductions");
  } else if (*stated != computed) {
    out.warnings.push_back("stated total " + std::to_string(*stated) + " disagrees with deductions; using " +
                           std::to_string(computed));
  }
  out.value.total_score = computed;
  return out;
}

}  // namespace qaea
