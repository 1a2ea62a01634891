#include "qaea/json_extract.hpp"

namespace qaea {
namespace {

bool opens(char c, JsonShape shape) {
  switch (shape) {
    case JsonShape::object: return c == '{';
    case JsonShape::array: return c == '[';
    case JsonShape::any: return c == '{' || c == '[';
  }
  return false;
}

// End index (inclusive) of the bracket group starting at `begin`, ignoring
// brackets inside string literals; npos when it never closes.
std::size_t match_group(std::string_view raw, std::size_t begin) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = begin; i < raw.size(); ++i) {
    char c = raw[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    switch (c) {
      case '"': in_string = true; break;
      case '{':
      case '[': ++depth; break;
      case '}':
      case ']':
        if (--depth == 0) return i;
        break;
      default: break;
    }
  }
  return std::string_view::npos;
}

}  // namespace

std::optional<nlohmann::json> extract_json(std::string_view raw, JsonShape shape) {
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!opens(raw[i], shape)) continue;
    std::size_t end = match_group(raw, i);
    if (end == std::string_view::npos) continue;
    auto value = nlohmann::json::parse(raw.substr(i, end - i + 1), nullptr, /*allow_exceptions=*/false);
    if (!value.is_discarded()) return value;
  }
  return std::nullopt;
}

}  // namespace qaea
