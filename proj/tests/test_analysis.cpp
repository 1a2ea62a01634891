#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "qaea/analysis.hpp"
#include "qaea/error.hpp"

namespace qaea::analysis {
namespace {

bool is_subsequence(std::string_view small, std::string_view big) {
  std::size_t j = 0;
  for (char c : big)
    if (j < small.size() && small[j] == c) ++j;
  return j == small.size();
}

const std::string kText =
    "The committee met on Tuesday to review the annual budget and approve two new research grants for the lab.";

TEST(Noise, InsertsExactCharacterCount) {
  for (double p : {0.0, 0.01, 0.2, 0.5, 1.0, 2.5}) {
    auto noisy = inject_noise(kText, {p, 4});
    EXPECT_EQ(noisy.text.size() - kText.size(), static_cast<std::size_t>(std::llround(p * kText.size()))) << p;
    EXPECT_TRUE(is_subsequence(kText, noisy.text));
  }
}

TEST(Noise, HundredCharsTwentyPercent) {
  std::string text(100, 'x');
  for (std::size_t i = 9; i < 100; i += 10) text[i] = ' ';
  auto noisy = inject_noise(text, {0.2, 0});
  EXPECT_EQ(noisy.text.size(), 120u);
}

TEST(Noise, ZeroIsIdentity) {
  auto noisy = inject_noise(kText, {0.0, 1});
  EXPECT_EQ(noisy.text, kText);
  EXPECT_TRUE(noisy.noise_tokens.empty());
}

TEST(Noise, DeterministicPerSeed) {
  auto a = inject_noise(kText, {0.5, 9}), b = inject_noise(kText, {0.5, 9}), c = inject_noise(kText, {0.5, 10});
  EXPECT_EQ(a.text, b.text);
  EXPECT_EQ(a.noise_tokens, b.noise_tokens);
  EXPECT_NE(a.text, c.text);
}

TEST(Noise, TokensAreAlphanumericAndWhitespaceDelimited) {
  auto noisy = inject_noise(kText, {1.0, 2});
  for (const auto& t : noisy.noise_tokens) {
    EXPECT_GE(t.size(), 1u);
    EXPECT_LE(t.size(), 12u);
    EXPECT_TRUE(std::all_of(t.begin(), t.end(), [](unsigned char c) { return std::isalnum(c); }));
    EXPECT_NE(noisy.text.find(" " + t), std::string::npos);
  }
  std::size_t long_tokens = std::count_if(noisy.noise_tokens.begin(), noisy.noise_tokens.end(),
                                          [](const std::string& t) { return t.size() >= 5; });
  EXPECT_GE(long_tokens + 1, noisy.noise_tokens.size());
}

TEST(Noise, CountsCodePoints) {
  const std::string cjk = "\xE4\xB8\xAD\xE6\x96\x87\xE6\x96\x87\xE6\x9C\xAC \xE6\xB5\x8B\xE8\xAF\x95";  // 7 code points
  auto noisy = inject_noise(cjk, {1.0, 0});
  EXPECT_EQ(noisy.text.size() - cjk.size(), 7u);
  EXPECT_TRUE(is_subsequence(cjk, noisy.text));
}

TEST(Noise, Errors) {
  EXPECT_THROW(inject_noise("", {0.2, 0}), ArgumentError);
  EXPECT_THROW(inject_noise("abc", {-0.1, 0}), ArgumentError);
}

TEST(Noise, PropertyOverRandomTexts) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> word_len(1, 9), words(1, 40), ch('a', 'z');
  std::uniform_real_distribution<double> pct(0.0, 1.5);
  for (int trial = 0; trial < 300; ++trial) {
    std::string text;
    for (int w = words(rng); w > 0; --w) {
      if (!text.empty()) text += ' ';
      for (int i = word_len(rng); i > 0; --i) text += static_cast<char>(ch(rng));
    }
    double p = pct(rng);
    auto noisy = inject_noise(text, {p, rng()});
    ASSERT_EQ(noisy.text.size() - text.size(), static_cast<std::size_t>(std::llround(p * text.size())));
    ASSERT_TRUE(is_subsequence(text, noisy.text));
  }
}

TEST(Retained, StripAllAndEchoAll) {
  auto noisy = inject_noise(kText, {1.0, 3});
  ASSERT_FALSE(noisy.noise_tokens.empty());
  std::vector<std::string> stripped{kText}, echoed{noisy.text};
  EXPECT_EQ(retained_noise(stripped, noisy.noise_tokens), 0.0);
  EXPECT_EQ(retained_noise(echoed, noisy.noise_tokens), 1.0);
  EXPECT_EQ(retained_noise(echoed, {}), 0.0);
}

TEST(Retained, EveryTenthToken) {
  std::vector<std::string> tokens;
  std::string kept;
  for (int i = 0; i < 1000; ++i) {
    tokens.push_back("tok" + std::to_string(100000 + i));
    if (i % 10 == 0) kept += tokens.back() + " ";
  }
  std::vector<std::string> generated{kept};
  EXPECT_DOUBLE_EQ(retained_noise(generated, tokens), 0.1);
}

TEST(Retained, MonotoneInGeneratedTexts) {
  std::vector<std::string> tokens{"aaaaa", "bbbbb", "ccccc"};
  std::vector<std::string> g{"aaaaa"};
  double before = retained_noise(g, tokens);
  g.push_back("zzz bbbbb");
  EXPECT_GE(retained_noise(g, tokens), before);
}

TEST(SelfBleu, IdenticalAndDisjoint) {
  std::vector<std::string> same{"the quick brown fox jumps", "the quick brown fox jumps"};
  EXPECT_DOUBLE_EQ(self_bleu(same), 1.0);
  std::vector<std::string> disjoint{"alpha beta gamma delta", "one two three four"};
  EXPECT_EQ(self_bleu(disjoint), 0.0);
  std::vector<std::string> one{"x"};
  EXPECT_THROW(self_bleu(one), ArgumentError);
}

TEST(SelfBleu, ThreeTextHandOracle) {
  // Counted by hand: (p1..p4, brevity) per candidate.
  //   A: 5/6, 5/5, 4/4, 2/3, BP 1
  //   B: 6/6, 3/5, 2/4, 1/3, BP 1
  //   C: 5/7, 3/6, 2/5, 1/4, BP 1 (c = 7 > r = 6)
  std::vector<std::string> texts{"the cat sat on the mat", "the cat sat on a mat", "a dog sat on the mat today"};
  const double a = std::pow((5.0 / 6) * (2.0 / 3), 0.25);
  const double b = std::pow((3.0 / 5) * (2.0 / 4) * (1.0 / 3), 0.25);
  const double c = std::pow((5.0 / 7) * (3.0 / 6) * (2.0 / 5) * (1.0 / 4), 0.25);
  EXPECT_NEAR(self_bleu(texts), (a + b + c) / 3.0, 1e-12);
}

TEST(SelfBleu, BrevityPenalty) {
  // Candidate shorter than its only reference: exp(1 - r/c).
  std::vector<std::string> texts{"a b c d", "a b c d e f"};
  const double short_one = std::exp(1.0 - 6.0 / 4.0);
  const double long_one = std::pow(1.0 * 1.0 * 1.0 * 1.0 * (4.0 / 6) * (3.0 / 5) * (2.0 / 4) * (1.0 / 3), 0.25);
  EXPECT_NEAR(self_bleu(texts), (short_one + long_one) / 2.0, 1e-12);
}

TEST(SelfBleu, PermutationInvariant) {
  std::vector<std::string> texts{"the cat sat on the mat", "the cat sat on a mat", "a dog sat on the mat today",
                                 "on the mat a cat sat"};
  double base = self_bleu(texts);
  std::sort(texts.begin(), texts.end());
  do {
    EXPECT_NEAR(self_bleu(texts), base, 1e-12);
  } while (std::next_permutation(texts.begin(), texts.end()));
}

TEST(Compression, RepetitiveTextCompresses) {
  std::string ab;
  for (int i = 0; i < 1000; ++i) ab += "ab";
  std::vector<std::string> texts{ab};
  EXPECT_GT(compression_ratio(texts), 5.0);
  std::vector<std::string> plain{kText};
  EXPECT_GT(compression_ratio(plain), 0.5);
  EXPECT_THROW(compression_ratio({}), ArgumentError);
}

TEST(SelfRepetition, Values) {
  std::vector<std::string> same{"one two three four five", "one two three four five"};
  EXPECT_DOUBLE_EQ(self_repetition(same), 1.0);
  std::vector<std::string> half{"a b c d e", "a b c d x"};
  // distinct 4-grams: abcd, bcde, bcdx; only abcd is shared.
  EXPECT_DOUBLE_EQ(self_repetition(half), 1.0 / 3.0);
  std::vector<std::string> short_texts{"a b", "a b"};
  EXPECT_EQ(self_repetition(short_texts), 0.0);
}

TEST(SelfEmbed, DisjointVocabularyNearZero) {
  HashEmbedder embedder(1024, 0);
  std::vector<std::string> texts{"alpha beta gamma delta", "one two three four", "red green blue yellow"};
  EXPECT_LT(std::abs(self_embed_score(texts, embedder)), 0.2);
  std::vector<std::string> same{"x y z", "x y z"};
  EXPECT_NEAR(self_embed_score(same, embedder), 1.0, 1e-12);
  auto scores = diversity(texts, embedder);
  EXPECT_EQ(scores.self_bleu, 0.0);
  EXPECT_EQ(scores.self_repetition, 0.0);
}

GenerationRecord record(Task task, std::size_t units, bool failed = false) {
  GenerationRecord r;
  r.task = task;
  r.failed = failed;
  for (std::size_t i = 0; i < units; ++i) r.units.push_back({std::monostate{}, "u"});
  return r;
}

TEST(UnitCounts, Means) {
  std::vector<GenerationRecord> records{record(Task::qag, 2), record(Task::ee, 1), record(Task::qag, 2),
                                        record(Task::ee, 1)};
  auto c = unit_count_stats(records);
  EXPECT_DOUBLE_EQ(c.mean_qa, 2.0);
  EXPECT_DOUBLE_EQ(c.mean_events, 1.0);
  records.push_back(record(Task::qag, 0, true));
  records.push_back(record(Task::qag, 0));
  records.push_back(record(Task::qag, 5));
  c = unit_count_stats(records);
  EXPECT_DOUBLE_EQ(c.mean_qa, 3.0);
  EXPECT_EQ(c.qa_documents, 3u);
  EXPECT_EQ(unit_count_stats({}).mean_qa, 0.0);
}

}  // namespace
}  // namespace qaea::analysis
