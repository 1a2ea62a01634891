#pragma once

#include <string>
#include <vector>

#include "qaea/augment.hpp"
#include "qaea/types.hpp"

namespace qaea {

struct OrganizedTexts {
  std::string doc_id;
  Kind kind = Kind::qa;
  Strategy strategy = Strategy::tri;
  std::vector<std::string> texts;
};

/// Question, one space, answer. No punctuation is added.
std::string revert_qa(const QaPair& pair);

/// Present elements in schema order joined by ". " (or "。" for Chinese).
/// Throws ArgumentError when every element is null.
std::string revert_event(const Event& event, Language language = Language::en);

/// Reverted text for any structured unit; text-only units pass through.
std::string revert_unit(const GeneratedUnit& unit, Language language = Language::en);

/// TRI keeps the list; TMO joins it with single spaces into at most one text.
std::vector<std::string> organize(const std::vector<std::string>& units, Strategy strategy);

/// Organizes the reverted units of one generation record.
OrganizedTexts organize(const GenerationRecord& record, Strategy strategy);

}  // namespace qaea
