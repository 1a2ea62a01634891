#include <gtest/gtest.h>

#include "qaea/augment.hpp"
#include "qaea/error.hpp"
#include "qaea/prompts.hpp"
#include "test_util.hpp"

namespace qaea {
namespace {

bool contains(const std::string& s, std::string_view needle) { return s.find(needle) != std::string::npos; }

TEST(FillTemplate, ReplacesEverySlot) {
  EXPECT_EQ(fill_template("{{a}}-{{b}}-{{a}}", {{"a", "1"}, {"b", "2"}}), "1-2-1");
}

TEST(FillTemplate, UnknownSlotsAndReplacementsAreLeftAlone) {
  EXPECT_EQ(fill_template("{{x}} {{a}}", {{"a", "{{x}}"}}), "{{x}} {{x}}");
  EXPECT_EQ(fill_template("open {{ only", {}), "open {{ only");
}

TEST(Builtin, HasAllTemplates) {
  const auto& t = PromptTemplates::builtin();
  EXPECT_FALSE(t.version.empty());
  for (const auto* body : {&t.qag_generate, &t.ee_generate, &t.score, &t.regenerate}) EXPECT_FALSE(body->empty());
}

TEST(GeneratePrompt, QagEmbedsDocumentAndSchema) {
  auto p = build_qag_prompt("Paris is the capital of France.");
  EXPECT_TRUE(contains(p, "Paris is the capital of France."));
  EXPECT_TRUE(contains(p, "QA_json"));
  for (auto type : kQuestionTypes) EXPECT_TRUE(contains(p, to_string(type))) << to_string(type);
  EXPECT_EQ(p, build_generate_prompt(Task::qag, "Paris is the capital of France."));
}

TEST(GeneratePrompt, EeNamesEveryElement) {
  auto p = build_ee_prompt("Rome was founded.");
  EXPECT_TRUE(contains(p, "EVENT_json"));
  for (auto key : kEventKeys) EXPECT_TRUE(contains(p, key)) << key;
  EXPECT_EQ(llm::prompt_section(p, "document"), "Rome was founded.");
}

TEST(GeneratePrompt, EmptyDocumentRejected) {
  EXPECT_THROW(build_qag_prompt(""), ArgumentError);
  EXPECT_THROW(build_score_prompt("{}", "", Task::qag), ArgumentError);
}

TEST(ScorePrompt, NamesAllCriteria) {
  for (Task task : {Task::qag, Task::ee}) {
    auto p = build_score_prompt("{\"x\": 1}", "Some text.", task);
    for (auto c : kScoreCriteria) EXPECT_TRUE(contains(p, c)) << c;
    EXPECT_TRUE(contains(p, "10"));
    EXPECT_TRUE(contains(p, "Score_json"));
    EXPECT_TRUE(contains(p, "total score"));
    EXPECT_EQ(llm::prompt_section(p, "document"), "Some text.");
    EXPECT_EQ(llm::prompt_section(p, "generated"), "{\"x\": 1}");
  }
  EXPECT_TRUE(contains(build_score_prompt("g", "d", Task::ee), "EVENT_json"));
}

TEST(RegenPrompt, EmbedsDeductionsAndPriorOutputVerbatim) {
  ScoreReport score{7, {{"Relevance: invented fact", 2, "the moon"}, {"Clarity: vague", 1, ""}}};
  const std::string prior = "{\"factual inquiry\": [[\"q?\", \"weird {{document}} a\"]]}";
  auto p = build_regen_prompt("Original text here.", prior, score, Task::qag);
  for (const auto& d : score.deductions) EXPECT_TRUE(contains(p, d.deduction_reason));
  EXPECT_TRUE(contains(p, "the moon"));
  EXPECT_TRUE(contains(p, prior));
  EXPECT_TRUE(contains(p, "Original text here."));
  EXPECT_TRUE(contains(p, "QA_json"));
}

TEST(RegenPrompt, NoDeductionsStillExplainsScore) {
  auto p = build_regen_prompt("Doc.", "[]", ScoreReport{4, {}}, Task::ee);
  EXPECT_TRUE(contains(p, "total score 4"));
  EXPECT_TRUE(contains(p, "EVENT_json"));
}

TEST(Templates, LoadFromDirectory) {
  testing::TempDir dir;
  auto v = dir / "v9";
  std::filesystem::create_directories(v);
  testing::write_file(v / "qag_generate.txt", "Q {{document}}");
  testing::write_file(v / "ee_generate.txt", "E {{document}}");
  testing::write_file(v / "score.txt", "S {{document}} {{generated}}");
  testing::write_file(v / "regenerate.txt", "R {{deductions}}");
  auto t = PromptTemplates::load(v);
  EXPECT_EQ(t.version, "v9");
  EXPECT_EQ(build_qag_prompt("doc", t), "Q doc");
  EXPECT_EQ(build_score_prompt("g", "d", Task::qag, t), "S d g");
  EXPECT_EQ(build_regen_prompt("d", "g", ScoreReport{9, {{"Clarity", 1, ""}}}, Task::qag, t), "R - Clarity (-1)");
}

TEST(Templates, MissingFileIsAnError) {
  testing::TempDir dir;
  EXPECT_THROW(PromptTemplates::load(dir.path()), ArgumentError);
}

TEST(Templates, ShippedFilesMatchBuiltin) {
  auto t = PromptTemplates::load(std::filesystem::path(QAEA_SOURCE_DIR) / "prompts" / "v1");
  const auto& b = PromptTemplates::builtin();
  EXPECT_EQ(t.version, b.version);
  EXPECT_EQ(t.qag_generate, b.qag_generate);
  EXPECT_EQ(t.score, b.score);
  EXPECT_EQ(t.regenerate, b.regenerate);
}

}  // namespace
}  // namespace qaea
