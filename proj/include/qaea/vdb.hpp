#pragma once

// Flat vector store with provenance and exact top-k cosine search.
//
// Rows are held as float32, the on-disk precision. Cosine scores are computed
// in double against cached row norms. Each search adds the store size to a
// similarity-computation counter.

#include <atomic>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "qaea/embed.hpp"
#include "qaea/error.hpp"
#include "qaea/types.hpp"

namespace qaea {

/// Cosine similarity of two dense vectors. Throws ArgumentError on a zero
/// norm or mismatched sizes.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine(const Eigen::MatrixBase<DerivedA>& u, const Eigen::MatrixBase<DerivedB>& v) {
  using Scalar = typename DerivedA::Scalar;
  if (u.size() != v.size()) throw ArgumentError("cosine of vectors with different dimensions");
  const Scalar nu = u.norm();
  const Scalar nv = v.template cast<Scalar>().norm();
  if (nu == Scalar(0) || nv == Scalar(0)) throw ArgumentError("cosine of a zero vector");
  return u.dot(v.template cast<Scalar>()) / (nu * nv);
}

template <typename Scalar>
Scalar cosine(const BasicEmbedding<Scalar>& u, const BasicEmbedding<Scalar>& v) {
  return cosine(u.values(), v.values());
}

struct VectorEntry {
  std::string vector_id;
  Embedding embedding;
  std::string doc_id;
  Kind kind = Kind::original;
  Strategy strategy = Strategy::not_applicable;
  std::optional<int> unit_index;
};

/// Provenance of a stored row (everything but the vector).
struct EntryInfo {
  std::string vector_id;
  std::string doc_id;
  Kind kind = Kind::original;
  Strategy strategy = Strategy::not_applicable;
  std::optional<int> unit_index;

  friend bool operator==(const EntryInfo&, const EntryInfo&) = default;
};

struct SearchHit {
  std::string vector_id;
  std::string doc_id;
  Kind kind = Kind::original;
  double score = 0.0;
  std::size_t rank = 0;  // 1-based
};

class VectorStore {
 public:
  explicit VectorStore(std::size_t dimension = 0);
  VectorStore(const VectorStore& other);
  VectorStore& operator=(const VectorStore& other);
  VectorStore(VectorStore&& other) noexcept;
  VectorStore& operator=(VectorStore&& other) noexcept;

  /// Throws ValidationError on a duplicate id, a dimension mismatch, a zero
  /// vector, or an original entry carrying a strategy or unit index.
  void insert(const VectorEntry& entry);

  std::size_t size() const noexcept { return info_.size(); }
  bool empty() const noexcept { return info_.empty(); }
  std::size_t dimension() const noexcept { return dimension_; }

  const EntryInfo& info(std::size_t row) const { return info_[row]; }
  const std::vector<EntryInfo>& infos() const noexcept { return info_; }
  /// Stored float32 row.
  Eigen::Map<const Eigen::VectorXf> row(std::size_t i) const;
  std::optional<std::size_t> find(const std::string& vector_id) const;

  /// Most rows owned by any single document.
  std::size_t max_rows_per_doc() const;

  /// Exact top-k by cosine, ties broken by ascending vector_id. k larger than
  /// the store returns every entry ranked. Thread-safe against other searches.
  std::vector<SearchHit> search(const Embedding& query, std::size_t k) const;

  std::uint64_t sim_count() const noexcept { return sim_count_.load(); }
  void reset_sim_count() noexcept { sim_count_.store(0); }

 private:
  std::size_t dimension_;
  std::vector<float> rows_;
  std::vector<double> norms_;
  std::vector<EntryInfo> info_;
  std::unordered_map<std::string, std::size_t> by_id_;
  mutable std::atomic<std::uint64_t> sim_count_{0};

  friend VectorStore compose(const std::vector<const VectorStore*>& stores);
  friend void persist(const VectorStore& store, const std::filesystem::path& vec_path);
  friend VectorStore load_store(const std::filesystem::path& vec_path);
};

/// Union of component stores, e.g. original + qa + event. Dimensions must
/// agree and ids must be disjoint.
VectorStore compose(const std::vector<const VectorStore*>& stores);

/// Writes `<name>.vec` (header + little-endian float32 rows) and the
/// provenance sidecar `<name>.meta.jsonl`.
void persist(const VectorStore& store, const std::filesystem::path& vec_path);

/// Reads a store written by persist. Throws LoadError with the failing offset.
VectorStore load_store(const std::filesystem::path& vec_path);

/// Sidecar path for a .vec file.
std::filesystem::path meta_path(const std::filesystem::path& vec_path);

inline constexpr std::size_t kVecHeaderBytes = 24;

}  // namespace qaea
