#include "qaea/prompts.hpp"

#include <fstream>
#include <sstream>

#include "qaea/augment.hpp"
#include "qaea/error.hpp"

namespace qaea {
namespace {

std::string_view output_kind(Task task) {
  return task == Task::qag ? "question-answer pairs" : "events";
}

std::string_view schema_name(Task task) { return task == Task::qag ? "QA_json" : "EVENT_json"; }

const std::string& generate_template(Task task, const PromptTemplates& t) {
  return task == Task::qag ? t.qag_generate : t.ee_generate;
}

// Output-indicator section of a generation template, reused when asking for a rewrite.
std::string format_instruction(Task task, const PromptTemplates& t) {
  const std::string& tmpl = generate_template(task, t);
  constexpr std::string_view marker = "Output indicator:";
  auto pos = tmpl.rfind(marker);
  std::string tail = pos == std::string::npos ? std::string() : tmpl.substr(pos + marker.size());
  auto first = tail.find_first_not_of(" \n");
  auto last = tail.find_last_not_of(" \n");
  return first == std::string::npos ? std::string() : tail.substr(first, last - first + 1);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot read prompt template " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void require_document(std::string_view text) {
  if (text.empty()) throw ArgumentError("document text is empty");
}

}  // namespace

std::string fill_template(std::string_view tmpl,
                          std::initializer_list<std::pair<std::string_view, std::string_view>> slots) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    auto open = tmpl.find("{{", i);
    if (open == std::string_view::npos) break;
    auto close = tmpl.find("}}", open + 2);
    if (close == std::string_view::npos) break;
    std::string_view name = tmpl.substr(open + 2, close - open - 2);
    const std::string_view* value = nullptr;
    for (const auto& slot : slots)
      if (slot.first == name) value = &slot.second;
    out.append(tmpl.substr(i, open - i));
    if (value) out.append(*value);
    else out.append(tmpl.substr(open, close + 2 - open));
    i = close + 2;
  }
  out.append(tmpl.substr(std::min(i, tmpl.size())));
  return out;
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& dir) {
  return {dir.filename().string(), read_file(dir / "qag_generate.txt"), read_file(dir / "ee_generate.txt"),
          read_file(dir / "score.txt"), read_file(dir / "regenerate.txt")};
}

std::string build_qag_prompt(std::string_view document_text, const PromptTemplates& templates) {
  return build_generate_prompt(Task::qag, document_text, templates);
}

std::string build_ee_prompt(std::string_view document_text, const PromptTemplates& templates) {
  return build_generate_prompt(Task::ee, document_text, templates);
}

std::string build_generate_prompt(Task task, std::string_view document_text, const PromptTemplates& templates) {
  require_document(document_text);
  return fill_template(generate_template(task, templates), {{"document", document_text}});
}

std::string build_score_prompt(std::string_view generated_raw, std::string_view original_text, Task task,
                               const PromptTemplates& templates) {
  require_document(original_text);
  return fill_template(templates.score, {{"output_kind", output_kind(task)},
                                         {"schema_name", schema_name(task)},
                                         {"document", original_text},
                                         {"generated", generated_raw}});
}

std::string build_regen_prompt(std::string_view original_text, std::string_view generated_raw,
                               const ScoreReport& score, Task task, const PromptTemplates& templates) {
  require_document(original_text);
  std::string deductions;
  for (const auto& d : score.deductions) {
    deductions += "- " + d.deduction_reason + " (-" + std::to_string(d.deduction_score) + ")";
    if (!d.related_content.empty()) deductions += ": " + d.related_content;
    deductions += '\n';
  }
  if (deductions.empty()) deductions = "- total score " + std::to_string(score.total_score) + " of 10\n";
  deductions.pop_back();
  std::string format = format_instruction(task, templates);
  return fill_template(templates.regenerate, {{"output_kind", output_kind(task)},
                                              {"document", original_text},
                                              {"generated", generated_raw},
                                              {"deductions", deductions},
                                              {"format_instruction", format}});
}

}  // namespace qaea
