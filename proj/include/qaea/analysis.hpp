#pragma once

// Diversity metrics over generated text sets, noise injection with retention
// measurement, and generated-unit counts.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qaea/augment.hpp"
#include "qaea/embed.hpp"

namespace qaea::analysis {

struct NoiseSpec {
  double percentage = 0.0;  // 0.2 means 20% of the text's code points
  std::uint64_t seed = 0;
};

struct NoisyText {
  std::string text;
  std::vector<std::string> noise_tokens;
};

/// Inserts round(percentage * code points) noise characters as " token"
/// pieces (tokens of 5-12 letters and digits) at random word boundaries.
/// Original characters keep their order. Below 6 characters a single shorter
/// piece is used; a 1-character budget appends one character to the end.
NoisyText inject_noise(std::string_view text, const NoiseSpec& spec);

/// Fraction of noise tokens found verbatim in the generated texts joined by
/// newlines. 0 when there are no tokens.
double retained_noise(std::span<const std::string> generated_texts, std::span<const std::string> noise_tokens);

/// Mean BLEU-4 of each text against all others (uniform weights, clipped
/// counts, closest-length brevity penalty). Needs at least 2 texts.
double self_bleu(std::span<const std::string> texts);

/// bytes(joined) / bytes(DEFLATE(joined)), texts joined by newlines.
double compression_ratio(std::span<const std::string> texts);

/// Share of distinct 4-grams that occur in more than one text.
double self_repetition(std::span<const std::string> texts);

/// Mean pairwise cosine of the texts' embeddings. Needs at least 2 texts.
double self_embed_score(std::span<const std::string> texts, EmbeddingProvider& embedder);

struct DiversityScores {
  double compression_ratio = 0.0;
  double self_bleu = 0.0;
  double self_embed_score = 0.0;
  double self_repetition = 0.0;
};

DiversityScores diversity(std::span<const std::string> texts, EmbeddingProvider& embedder);

struct UnitCounts {
  double mean_qa = 0.0;      // per successfully augmented QAG document
  double mean_events = 0.0;  // per successfully augmented EE document
  std::size_t qa_documents = 0;
  std::size_t event_documents = 0;
};

/// Failed and zero-unit records are left out of the denominators.
UnitCounts unit_count_stats(std::span<const GenerationRecord> records);

}  // namespace qaea::analysis
