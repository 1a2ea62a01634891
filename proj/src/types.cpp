#include "qaea/types.hpp"

#include <algorithm>
#include <cctype>

#include "qaea/error.hpp"

namespace qaea {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view to_string(Task task) { return task == Task::qag ? "QAG" : "EE"; }

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::tri: return "TRI";
    case Strategy::tmo: return "TMO";
    case Strategy::not_applicable: return "NA";
  }
  return "NA";
}

std::string_view to_string(Kind kind) {
  switch (kind) {
    case Kind::original: return "original";
    case Kind::qa: return "qa";
    case Kind::event: return "event";
  }
  return "original";
}

std::string_view to_string(Language language) { return language == Language::zh ? "zh" : "en"; }

Task parse_task(std::string_view name) {
  auto n = lower(name);
  if (n == "qag" || n == "qa") return Task::qag;
  if (n == "ee" || n == "event") return Task::ee;
  throw ArgumentError("unknown task \"" + std::string(name) + "\"");
}

Strategy parse_strategy(std::string_view name) {
  auto n = lower(name);
  if (n == "tri") return Strategy::tri;
  if (n == "tmo") return Strategy::tmo;
  if (n == "na") return Strategy::not_applicable;
  throw ArgumentError("unknown strategy \"" + std::string(name) + "\"");
}

Kind parse_kind(std::string_view name) {
  auto n = lower(name);
  if (n == "original" || n == "ori") return Kind::original;
  if (n == "qa") return Kind::qa;
  if (n == "event") return Kind::event;
  throw ArgumentError("unknown kind \"" + std::string(name) + "\"");
}

Language parse_language(std::string_view name) {
  auto n = lower(name);
  if (n == "en") return Language::en;
  if (n == "zh") return Language::zh;
  throw ArgumentError("unknown language \"" + std::string(name) + "\"");
}

}  // namespace qaea
