#include "qaea/organize.hpp"

#include "qaea/error.hpp"

namespace qaea {

std::string revert_qa(const QaPair& pair) { return pair.question + " " + pair.answer; }

std::string revert_event(const Event& event, Language language) {
  const std::string_view separator = language == Language::zh ? "\xE3\x80\x82" : ". ";
  std::string out;
  bool first = true;
  for (const auto* element : event.elements()) {
    if (!element->has_value()) continue;
    if (!first) out += separator;
    out += **element;
    first = false;
  }
  if (first) throw ArgumentError("event has no elements");
  return out;
}

std::string revert_unit(const GeneratedUnit& unit, Language language) {
  if (const auto* qa = std::get_if<QaPair>(&unit.content)) return revert_qa(*qa);
  if (const auto* event = std::get_if<Event>(&unit.content)) return revert_event(*event, language);
  return unit.text;
}

std::vector<std::string> organize(const std::vector<std::string>& units, Strategy strategy) {
  if (strategy != Strategy::tmo || units.empty()) return units;
  std::string merged = units.front();
  for (std::size_t i = 1; i < units.size(); ++i) {
    merged += ' ';
    merged += units[i];
  }
  return {std::move(merged)};
}

OrganizedTexts organize(const GenerationRecord& record, Strategy strategy) {
  if (strategy == Strategy::not_applicable) throw ArgumentError("generated texts need TRI or TMO");
  std::vector<std::string> texts;
  texts.reserve(record.units.size());
  for (const auto& unit : record.units) texts.push_back(unit.text);
  return {record.doc_id, kind_of(record.task), strategy, organize(texts, strategy)};
}

}  // namespace qaea
