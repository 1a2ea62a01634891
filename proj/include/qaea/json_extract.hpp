#pragma once

#include <optional>
#include <string_view>

#include <json.hpp>

namespace qaea {

enum class JsonShape { object, array, any };

/// First balanced JSON value of the requested shape inside free-form model
/// output. Surrounding prose and code fences are skipped; candidates that fail
/// to parse are passed over. Never throws.
std::optional<nlohmann::json> extract_json(std::string_view raw, JsonShape shape);

}  // namespace qaea
