#pragma once

// Retrieval datasets: corpus, queries and graded relevance judgments, each
// stored as line-delimited JSON.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace qaea {

struct Document {
  std::string doc_id;
  std::string text;
  std::map<std::string, std::string> metadata;

  friend bool operator==(const Document&, const Document&) = default;
};

struct Query {
  std::string query_id;
  std::string text;

  friend bool operator==(const Query&, const Query&) = default;
};

struct QrelEntry {
  std::string query_id;
  std::string doc_id;
  int relevance = 0;

  friend bool operator==(const QrelEntry&, const QrelEntry&) = default;
};

/// Ordered collection with unique ids. Read-only after construction.
template <typename Item>
class Collection {
 public:
  Collection() = default;

  /// Throws ValidationError on an empty or repeated id.
  void add(Item item);

  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }
  const Item& operator[](std::size_t i) const { return items_[i]; }
  const Item* find(const std::string& id) const;
  bool contains(const std::string& id) const { return index_.count(id) != 0; }

  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }
  const std::vector<Item>& items() const noexcept { return items_; }

 private:
  std::vector<Item> items_;
  std::unordered_map<std::string, std::size_t> index_;
};

using Corpus = Collection<Document>;
using QuerySet = Collection<Query>;

/// Graded judgments keyed by query. Grades are non-negative integers; 0 means
/// judged non-relevant.
class Qrels {
 public:
  /// Throws ValidationError on a negative grade or a repeated (query, doc) pair.
  void add(QrelEntry entry);

  /// Grades for one query; empty map when the query is unjudged.
  const std::map<std::string, int>& for_query(const std::string& query_id) const;
  int grade(const std::string& query_id, const std::string& doc_id) const;

  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<QrelEntry>& entries() const noexcept { return entries_; }

 private:
  std::vector<QrelEntry> entries_;
  std::map<std::string, std::map<std::string, int>> by_query_;
};

Corpus read_corpus(std::istream& in);
QuerySet read_queries(std::istream& in);
Qrels read_qrels(std::istream& in);

Corpus load_corpus(const std::filesystem::path& path);
QuerySet load_queries(const std::filesystem::path& path);
Qrels load_qrels(const std::filesystem::path& path);

void write_corpus(std::ostream& out, const Corpus& corpus);
void write_queries(std::ostream& out, const QuerySet& queries);
void write_qrels(std::ostream& out, const Qrels& qrels);

/// Warns (does not throw) about judgments naming documents or queries that are
/// not loaded. Returns the number of dangling references.
std::size_t check_references(const Qrels& qrels, const Corpus& corpus, const QuerySet& queries);

/// Uniform sample of `size` documents without replacement. The result keeps
/// the input's relative order and depends only on (corpus order, size, seed).
Corpus sample_subset(const Corpus& corpus, std::size_t size, std::uint64_t seed);

}  // namespace qaea
