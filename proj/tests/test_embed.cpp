#include <gtest/gtest.h>

#include "qaea/embed.hpp"
#include "qaea/error.hpp"
#include "qaea/vdb.hpp"

namespace qaea {
namespace {

// Provider returning whatever the test sets up.
class FixedProvider final : public EmbeddingProvider {
 public:
  std::vector<Embedding> reply;
  std::size_t dim = 3;
  std::string id() const override { return "fixed"; }
  std::size_t dimension() const override { return dim; }
  std::vector<Embedding> embed(std::span<const std::string>) override { return reply; }
};

Embedding vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x[i++] = d;
  return Embedding(x);
}

TEST(Embedding, CachedNormAndNormalize) {
  auto e = vec({3, 4});
  EXPECT_DOUBLE_EQ(e.norm(), 5.0);
  auto n = e.normalized();
  EXPECT_DOUBLE_EQ(n.norm(), 1.0);
  EXPECT_DOUBLE_EQ(n.values()[0], 0.6);
  EXPECT_EQ(vec({0, 0}).normalized().norm(), 0.0);
  EXPECT_EQ(e.cast<float>().values()[1], 4.0f);
}

TEST(HashEmbed, DeterministicAndUnitLength) {
  auto a = hash_embed("The quick brown fox", 256, 1);
  auto b = hash_embed("The quick brown fox", 256, 1);
  EXPECT_EQ(a.values(), b.values());
  EXPECT_NEAR(a.norm(), 1.0, 1e-12);
  EXPECT_EQ(a.dimension(), 256);
}

TEST(HashEmbed, CaseAndPunctuationInsensitive) {
  EXPECT_EQ(hash_embed("Hello, World!", 128, 0).values(), hash_embed("hello world", 128, 0).values());
}

TEST(HashEmbed, SeedChangesVector) {
  EXPECT_NE(hash_embed("alpha beta", 128, 0).values(), hash_embed("alpha beta", 128, 1).values());
}

TEST(HashEmbed, OverlapRaisesSimilarity) {
  auto q = hash_embed("capital of france", 1024, 0);
  auto near = hash_embed("paris is the capital of france", 1024, 0);
  auto far = hash_embed("penguins swim in cold water", 1024, 0);
  EXPECT_GT(cosine(q, near), cosine(q, far));
  EXPECT_NEAR(cosine(q, q), 1.0, 1e-12);
}

TEST(HashEmbed, CjkSplitPerCharacter) {
  auto a = hash_embed("\xE4\xB8\xAD\xE6\x96\x87", 256, 0);
  auto b = hash_embed("\xE4\xB8\xAD \xE6\x96\x87", 256, 0);
  EXPECT_EQ(a.values(), b.values());
}

TEST(HashEmbed, Errors) {
  EXPECT_THROW(hash_embed("", 16, 0), ArgumentError);
  EXPECT_THROW(hash_embed("...", 16, 0), ArgumentError);
  EXPECT_THROW(hash_embed("x", 0, 0), ArgumentError);
  EXPECT_THROW(HashEmbedder(0), ArgumentError);
}

TEST(EmbedTexts, NormalizesProviderOutput) {
  FixedProvider p;
  p.reply = {vec({3, 4, 0}), vec({0, 0, 2})};
  std::vector<std::string> texts{"a", "b"};
  auto out = embed_texts(texts, p);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_DOUBLE_EQ(out[0].values()[0], 0.6);
  EXPECT_DOUBLE_EQ(out[1].norm(), 1.0);
}

TEST(EmbedTexts, Errors) {
  FixedProvider p;
  std::vector<std::string> texts{"a", "b"};
  p.reply = {vec({1, 0, 0})};
  EXPECT_THROW(embed_texts(texts, p), ArgumentError);
  p.reply = {vec({1, 0, 0}), vec({1, 0})};
  EXPECT_THROW(embed_texts(texts, p), ArgumentError);
  std::vector<std::string> with_empty{"a", ""};
  p.reply = {vec({1, 0, 0}), vec({0, 1, 0})};
  EXPECT_THROW(embed_texts(with_empty, p), ArgumentError);
}

TEST(HashEmbedder, MatchesFreeFunction) {
  HashEmbedder h(64, 9);
  std::vector<std::string> texts{"one two", "three"};
  auto out = h.embed(texts);
  EXPECT_EQ(out[1].values(), hash_embed("three", 64, 9).values());
  EXPECT_EQ(h.id(), "hash:d64:s9");
}

TEST(Cosine, Errors) {
  EXPECT_THROW(cosine(vec({1, 0}), vec({1, 0, 0})), ArgumentError);
  EXPECT_THROW(cosine(vec({0, 0}), vec({1, 0})), ArgumentError);
  EXPECT_DOUBLE_EQ(cosine(vec({1, 0}), vec({-2, 0})), -1.0);
}

}  // namespace
}  // namespace qaea
