#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "qaea/error.hpp"
#include "qaea/vdb.hpp"
#include "test_util.hpp"

namespace qaea {
namespace {

Embedding random_vec(std::mt19937_64& rng, std::size_t d) {
  std::normal_distribution<double> n;
  Eigen::VectorXd v(static_cast<Eigen::Index>(d));
  for (auto& x : v) x = n(rng);
  return Embedding(v);
}

Embedding vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x[i++] = d;
  return Embedding(x);
}

VectorEntry original(std::string id, Embedding e) { return {id, std::move(e), id, Kind::original, Strategy::not_applicable, {}}; }

VectorStore random_store(std::mt19937_64& rng, std::size_t n, std::size_t d) {
  VectorStore s(d);
  for (std::size_t i = 0; i < n; ++i) s.insert(original("v" + std::to_string(i), random_vec(rng, d)));
  return s;
}

TEST(Store, InsertValidation) {
  VectorStore s;
  s.insert(original("a", vec({1, 0})));
  EXPECT_EQ(s.dimension(), 2u);
  EXPECT_THROW(s.insert(original("a", vec({0, 1}))), ValidationError);
  EXPECT_THROW(s.insert(original("b", vec({1, 0, 0}))), ValidationError);
  EXPECT_THROW(s.insert(original("c", vec({0, 0}))), ValidationError);
  EXPECT_THROW(s.insert(original("", vec({0, 1}))), ValidationError);
  EXPECT_THROW(s.insert({"d", vec({0, 1}), "d", Kind::original, Strategy::tri, {}}), ValidationError);
  EXPECT_THROW(s.insert({"e", vec({0, 1}), "e", Kind::original, Strategy::not_applicable, 0}), ValidationError);
  EXPECT_THROW(s.insert({"f", vec({0, 1}), "f", Kind::qa, Strategy::not_applicable, {}}), ValidationError);
  s.insert({"g", vec({0, 1}), "a", Kind::qa, Strategy::tri, 0});
  EXPECT_EQ(s.size(), 2u);
  EXPECT_EQ(s.max_rows_per_doc(), 2u);
  EXPECT_EQ(s.find("g"), 1u);
  EXPECT_FALSE(s.find("zz"));
}

TEST(Store, SearchRanksByCosine) {
  VectorStore s;
  s.insert(original("a", vec({1, 0})));
  s.insert(original("b", vec({1, 1})));
  s.insert(original("c", vec({-1, 0})));
  auto hits = s.search(vec({2, 0}), 2);
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_EQ(hits[0].vector_id, "a");
  EXPECT_DOUBLE_EQ(hits[0].score, 1.0);
  EXPECT_EQ(hits[0].rank, 1u);
  EXPECT_EQ(hits[1].vector_id, "b");
  EXPECT_NEAR(hits[1].score, std::sqrt(0.5), 1e-7);
  EXPECT_EQ(s.search(vec({1, 0}), 99).size(), 3u);
}

TEST(Store, TiesBrokenById) {
  VectorStore s;
  for (std::string id : {"c", "a", "b"}) s.insert(original(id, vec({1, 1})));
  auto hits = s.search(vec({1, 1}), 3);
  EXPECT_EQ(hits[0].vector_id, "a");
  EXPECT_EQ(hits[1].vector_id, "b");
  EXPECT_EQ(hits[2].vector_id, "c");
}

TEST(Store, SearchErrors) {
  VectorStore s;
  EXPECT_THROW(s.search(vec({1, 0}), 1), ArgumentError);
  s.insert(original("a", vec({1, 0})));
  EXPECT_THROW(s.search(vec({1, 0}), 0), ArgumentError);
  EXPECT_THROW(s.search(vec({1, 0, 0}), 1), ArgumentError);
  EXPECT_THROW(s.search(vec({0, 0}), 1), ArgumentError);
}

TEST(Store, SimCountGrowsByStoreSize) {
  std::mt19937_64 rng(1);
  auto s = random_store(rng, 37, 8);
  EXPECT_EQ(s.sim_count(), 0u);
  for (int q = 0; q < 5; ++q) s.search(random_vec(rng, 8), 3);
  EXPECT_EQ(s.sim_count(), 5u * 37u);
  s.reset_sim_count();
  EXPECT_EQ(s.sim_count(), 0u);
}

TEST(Store, TopKMatchesFullSort) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + rng() % 300, d = 1 + rng() % 64;
    auto s = random_store(rng, n, d);
    auto q = random_vec(rng, d);
    // Oracle in float-stored precision, like the store.
    std::vector<std::pair<double, std::string>> all;
    for (std::size_t i = 0; i < n; ++i) {
      Eigen::VectorXd r = s.row(i).cast<double>();
      all.emplace_back(r.dot(q.values()) / (r.norm() * q.norm()), s.info(i).vector_id);
    }
    std::sort(all.begin(), all.end(), [](auto& a, auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });
    for (std::size_t k : {std::size_t{1}, std::size_t{10}, n}) {
      auto hits = s.search(q, k);
      ASSERT_EQ(hits.size(), std::min(k, n));
      for (std::size_t i = 0; i < hits.size(); ++i) EXPECT_EQ(hits[i].vector_id, all[i].second);
    }
  }
}

TEST(Compose, UnionAndErrors) {
  VectorStore a, b, c;
  a.insert(original("x", vec({1, 0})));
  b.insert({"x#qa", vec({0, 1}), "x", Kind::qa, Strategy::tmo, {}});
  auto ab = compose({&a, &b});
  EXPECT_EQ(ab.size(), 2u);
  EXPECT_EQ(ab.info(1).kind, Kind::qa);
  EXPECT_EQ(ab.search(vec({0, 1}), 1)[0].doc_id, "x");
  EXPECT_THROW(compose({&a, &a}), ValidationError);
  c.insert(original("y", vec({1, 0, 0})));
  EXPECT_THROW(compose({&a, &c}), ValidationError);
  VectorStore empty;
  EXPECT_EQ(compose({&empty, &a}).size(), 1u);
}

TEST(Persist, RoundTripBitExact) {
  testing::TempDir dir;
  std::mt19937_64 rng(3);
  VectorStore s(16);
  for (int i = 0; i < 200; ++i) {
    Kind kind = i % 3 == 0 ? Kind::original : (i % 3 == 1 ? Kind::qa : Kind::event);
    std::optional<int> unit = kind == Kind::original ? std::nullopt : std::optional<int>(i % 4);
    Strategy strategy = kind == Kind::original ? Strategy::not_applicable : Strategy::tri;
    s.insert({"id" + std::to_string(i), random_vec(rng, 16), "doc" + std::to_string(i / 3), kind, strategy, unit});
  }
  persist(s, dir / "s.vec");
  EXPECT_TRUE(std::filesystem::exists(dir / "s.meta.jsonl"));
  EXPECT_EQ(std::filesystem::file_size(dir / "s.vec"), kVecHeaderBytes + 200u * 16u * 4u);
  auto back = load_store(dir / "s.vec");
  ASSERT_EQ(back.size(), s.size());
  EXPECT_EQ(back.infos(), s.infos());
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(std::memcmp(back.row(i).data(), s.row(i).data(), 64), 0);
}

TEST(Persist, EmptyStore) {
  testing::TempDir dir;
  persist(VectorStore(4), dir / "e.vec");
  auto back = load_store(dir / "e.vec");
  EXPECT_TRUE(back.empty());
  EXPECT_EQ(back.dimension(), 4u);
}

TEST(Persist, CorruptionReportsOffset) {
  testing::TempDir dir;
  VectorStore s;
  s.insert(original("a", vec({1, 2, 3})));
  s.insert(original("b", vec({3, 2, 1})));
  persist(s, dir / "s.vec");
  auto bytes = testing::read_file(dir / "s.vec");

  testing::write_file(dir / "t.vec", bytes.substr(0, bytes.size() - 4));
  std::filesystem::copy_file(dir / "s.meta.jsonl", dir / "t.meta.jsonl");
  try {
    load_store(dir / "t.vec");
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_EQ(e.offset(), bytes.size() - 4);
  }

  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  testing::write_file(dir / "m.vec", bad_magic);
  std::filesystem::copy_file(dir / "s.meta.jsonl", dir / "m.meta.jsonl");
  EXPECT_THROW(load_store(dir / "m.vec"), LoadError);

  testing::write_file(dir / "h.vec", bytes.substr(0, 10));
  EXPECT_THROW(load_store(dir / "h.vec"), LoadError);

  testing::write_file(dir / "p.vec", bytes);
  testing::write_file(dir / "p.meta.jsonl", "{\"vector_id\": \"a\", \"doc_id\": \"a\", \"kind\": \"original\", \"strategy\": \"NA\"}\nnot json\n");
  try {
    load_store(dir / "p.vec");
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_EQ(e.offset(), 2u);
  }

  EXPECT_THROW(load_store(dir / "missing.vec"), LoadError);
}

TEST(Persist, MetaPath) { EXPECT_EQ(meta_path("out/vdb_qa.TRI.vec"), std::filesystem::path("out/vdb_qa.TRI.meta.jsonl")); }

}  // namespace
}  // namespace qaea
