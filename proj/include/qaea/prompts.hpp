#pragma once

// Generation, scoring and regeneration prompts. Templates are plain text with
// {{placeholder}} slots; the built-in set is compiled from prompts/<version>/.

#include <filesystem>
#include <string>
#include <string_view>

#include "qaea/types.hpp"

namespace qaea {

struct ScoreReport;

struct PromptTemplates {
  std::string version;
  std::string qag_generate;
  std::string ee_generate;
  std::string score;
  std::string regenerate;

  static const PromptTemplates& builtin();

  /// Reads qag_generate.txt, ee_generate.txt, score.txt and regenerate.txt
  /// from `dir`; the directory name becomes the version.
  static PromptTemplates load(const std::filesystem::path& dir);
};

std::string build_qag_prompt(std::string_view document_text,
                             const PromptTemplates& templates = PromptTemplates::builtin());
std::string build_ee_prompt(std::string_view document_text,
                            const PromptTemplates& templates = PromptTemplates::builtin());
std::string build_generate_prompt(Task task, std::string_view document_text,
                                  const PromptTemplates& templates = PromptTemplates::builtin());

std::string build_score_prompt(std::string_view generated_raw, std::string_view original_text, Task task,
                               const PromptTemplates& templates = PromptTemplates::builtin());

std::string build_regen_prompt(std::string_view original_text, std::string_view generated_raw,
                               const ScoreReport& score, Task task,
                               const PromptTemplates& templates = PromptTemplates::builtin());

/// Replaces every {{name}} occurrence. Replacement text is not rescanned.
std::string fill_template(std::string_view tmpl,
                          std::initializer_list<std::pair<std::string_view, std::string_view>> slots);

}  // namespace qaea
