#pragma once

#include <string>
#include <string_view>

namespace qaea {

/// Augmentation task: question-answer generation or event extraction.
enum class Task { qag, ee };

/// How generated texts of one document become retrieval units.
/// `tri` keeps each text independent; `tmo` merges them into one.
enum class Strategy { tri, tmo, not_applicable };

/// Provenance of a stored vector.
enum class Kind { original, qa, event };

enum class Language { en, zh };

std::string_view to_string(Task task);
std::string_view to_string(Strategy strategy);
std::string_view to_string(Kind kind);
std::string_view to_string(Language language);

/// Inverse of to_string; case-insensitive. Throw ArgumentError on unknown names.
Task parse_task(std::string_view name);
Strategy parse_strategy(std::string_view name);
Kind parse_kind(std::string_view name);
Language parse_language(std::string_view name);

/// Vector kind produced by a task.
constexpr Kind kind_of(Task task) { return task == Task::qag ? Kind::qa : Kind::event; }

}  // namespace qaea
