#pragma once

// Dense text embeddings. Every provider output is L2-normalized at ingestion
// so that cosine similarity reduces to an inner product downstream.

#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "qaea/llm.hpp"

namespace qaea {

template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// A vector together with its cached Euclidean norm.
template <typename Scalar>
class BasicEmbedding {
 public:
  BasicEmbedding() = default;
  explicit BasicEmbedding(DenseVector<Scalar> values) : values_(std::move(values)), norm_(values_.norm()) {}

  const DenseVector<Scalar>& values() const noexcept { return values_; }
  Scalar norm() const noexcept { return norm_; }
  Eigen::Index dimension() const noexcept { return values_.size(); }

  /// Unit-length copy; the zero vector is returned unchanged.
  BasicEmbedding normalized() const {
    if (norm_ == Scalar(0)) return *this;
    return BasicEmbedding(values_ / norm_);
  }

  template <typename Other>
  BasicEmbedding<Other> cast() const {
    return BasicEmbedding<Other>(values_.template cast<Other>());
  }

 private:
  DenseVector<Scalar> values_;
  Scalar norm_ = Scalar(0);
};

using Embedding = BasicEmbedding<double>;

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string id() const = 0;
  virtual std::size_t dimension() const = 0;
  /// Raw vectors, one per text, in input order.
  virtual std::vector<Embedding> embed(std::span<const std::string> texts) = 0;
};

/// Signed feature hashing of lowercased word unigrams and bigrams (CJK text is
/// split per character). Pure and thread-safe.
class HashEmbedder final : public EmbeddingProvider {
 public:
  explicit HashEmbedder(std::size_t dimension = 1024, std::uint64_t seed = 0);
  std::string id() const override;
  std::size_t dimension() const override { return dimension_; }
  std::vector<Embedding> embed(std::span<const std::string> texts) override;

 private:
  std::size_t dimension_;
  std::uint64_t seed_;
};

struct HttpEmbeddingConfig {
  std::string endpoint;
  std::string model;
  std::string api_key;
  std::size_t batch_size = 32;
  std::size_t dimension = 1024;
  std::chrono::seconds timeout{60};
  llm::RetryPolicy retry{};
};

/// POST {model, input: [...]} per batch. Accepts either a bare list of float
/// arrays or an OpenAI-style {"data": [{"embedding": [...], "index": i}]} reply.
class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit HttpEmbeddingProvider(HttpEmbeddingConfig config);
  std::string id() const override;
  std::size_t dimension() const override { return config_.dimension; }
  std::vector<Embedding> embed(std::span<const std::string> texts) override;

 private:
  std::vector<Embedding> embed_batch(std::span<const std::string> batch, std::size_t first_index);

  HttpEmbeddingConfig config_;
};

/// Deterministic hashing embedding of one text. Throws ArgumentError when the
/// text has no tokens.
Embedding hash_embed(std::string_view text, std::size_t dimension, std::uint64_t seed);

/// Embeds and normalizes. Throws ArgumentError on an empty string and on a
/// provider returning the wrong count or dimension.
std::vector<Embedding> embed_texts(std::span<const std::string> texts, EmbeddingProvider& provider);

}  // namespace qaea
