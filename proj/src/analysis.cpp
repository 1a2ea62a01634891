#include "qaea/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include <zlib.h>

#include "qaea/error.hpp"
#include "qaea/vdb.hpp"
#include "text_util.hpp"

namespace qaea::analysis {

namespace {

constexpr std::string_view kAlphabet = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
constexpr std::size_t kMinToken = 5;
constexpr std::size_t kMaxToken = 12;

std::string random_token(std::mt19937_64& rng, std::size_t length) {
  std::uniform_int_distribution<std::size_t> pick(0, kAlphabet.size() - 1);
  std::string out;
  for (std::size_t i = 0; i < length; ++i) out += kAlphabet[pick(rng)];
  return out;
}

std::string join_lines(std::span<const std::string> texts) {
  std::string out;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (i) out += '\n';
    out += texts[i];
  }
  return out;
}

using Ngram = std::vector<std::string>;

std::map<Ngram, std::size_t> ngram_counts(const std::vector<std::string>& tokens, std::size_t n) {
  std::map<Ngram, std::size_t> out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) ++out[Ngram(tokens.begin() + i, tokens.begin() + i + n)];
  return out;
}

double bleu(const std::vector<std::string>& candidate, const std::vector<std::vector<std::string>>& references) {
  if (candidate.empty()) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto cand = ngram_counts(candidate, n);
    std::map<Ngram, std::size_t> max_ref;
    for (const auto& ref : references)
      for (const auto& [gram, count] : ngram_counts(ref, n)) max_ref[gram] = std::max(max_ref[gram], count);
    std::size_t clipped = 0, total = 0;
    for (const auto& [gram, count] : cand) {
      total += count;
      auto it = max_ref.find(gram);
      if (it != max_ref.end()) clipped += std::min(count, it->second);
    }
    if (total == 0 || clipped == 0) return 0.0;
    log_sum += 0.25 * std::log(static_cast<double>(clipped) / static_cast<double>(total));
  }
  const std::size_t c = candidate.size();
  std::size_t r = references.front().size();
  for (const auto& ref : references) {
    const auto diff = [c](std::size_t len) { return len > c ? len - c : c - len; };
    if (diff(ref.size()) < diff(r) || (diff(ref.size()) == diff(r) && ref.size() < r)) r = ref.size();
  }
  const double bp = c > r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
  return bp * std::exp(log_sum);
}

}  // namespace

NoisyText inject_noise(std::string_view text, const NoiseSpec& spec) {
  if (text.empty()) throw ArgumentError("cannot inject noise into an empty text");
  if (!(spec.percentage >= 0.0)) throw ArgumentError("noise percentage must be non-negative");

  std::size_t code_points = 0;
  std::vector<std::size_t> boundaries;
  for (std::size_t i = 0; i < text.size();) {
    const std::size_t at = i;
    if (detail::is_unicode_space(detail::next_code_point(text, i))) boundaries.push_back(at);
    ++code_points;
  }
  boundaries.push_back(text.size());

  const auto budget = static_cast<std::size_t>(std::llround(spec.percentage * static_cast<double>(code_points)));
  NoisyText out;
  if (budget == 0) {
    out.text = std::string(text);
    return out;
  }

  std::mt19937_64 rng(detail::mix64(spec.seed ^ detail::fnv1a(text)));
  if (budget == 1) {
    out.noise_tokens.push_back(random_token(rng, 1));
    out.text = std::string(text) + out.noise_tokens.back();
    return out;
  }

  // Piece sizes count the leading space.
  std::vector<std::size_t> sizes;
  std::size_t remaining = budget;
  while (remaining > kMaxToken + 1) {
    std::uniform_int_distribution<std::size_t> size(kMinToken + 1, std::min(kMaxToken + 1, remaining - kMinToken - 1));
    sizes.push_back(size(rng));
    remaining -= sizes.back();
  }
  sizes.push_back(remaining);

  std::vector<std::vector<std::string>> at_boundary(boundaries.size());
  std::uniform_int_distribution<std::size_t> where(0, boundaries.size() - 1);
  for (std::size_t s : sizes) {
    out.noise_tokens.push_back(random_token(rng, s - 1));
    at_boundary[where(rng)].push_back(out.noise_tokens.back());
  }

  std::size_t copied = 0;
  for (std::size_t b = 0; b < boundaries.size(); ++b) {
    out.text.append(text.substr(copied, boundaries[b] - copied));
    copied = boundaries[b];
    for (const auto& token : at_boundary[b]) out.text += ' ' + token;
  }
  return out;
}

double retained_noise(std::span<const std::string> generated_texts, std::span<const std::string> noise_tokens) {
  if (noise_tokens.empty()) return 0.0;
  const std::string haystack = join_lines(generated_texts);
  std::size_t found = 0;
  for (const auto& token : noise_tokens) found += !token.empty() && haystack.find(token) != std::string::npos;
  return static_cast<double>(found) / static_cast<double>(noise_tokens.size());
}

double self_bleu(std::span<const std::string> texts) {
  if (texts.size() < 2) throw ArgumentError("self-BLEU needs at least 2 texts");
  std::vector<std::vector<std::string>> tokens;
  for (const auto& t : texts) tokens.push_back(detail::tokenize(t, false));
  double sum = 0.0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::vector<std::vector<std::string>> refs;
    for (std::size_t j = 0; j < tokens.size(); ++j)
      if (j != i) refs.push_back(tokens[j]);
    sum += bleu(tokens[i], refs);
  }
  return sum / static_cast<double>(tokens.size());
}

double compression_ratio(std::span<const std::string> texts) {
  if (texts.empty()) throw ArgumentError("compression ratio of an empty set");
  const std::string joined = join_lines(texts);
  if (joined.empty()) throw ArgumentError("compression ratio of empty texts");
  uLongf size = compressBound(static_cast<uLong>(joined.size()));
  std::vector<Bytef> buffer(size);
  if (compress2(buffer.data(), &size, reinterpret_cast<const Bytef*>(joined.data()), static_cast<uLong>(joined.size()),
                Z_BEST_COMPRESSION) != Z_OK)
    throw Error("zlib compression failed");
  return static_cast<double>(joined.size()) / static_cast<double>(size);
}

double self_repetition(std::span<const std::string> texts) {
  if (texts.empty()) throw ArgumentError("self-repetition of an empty set");
  std::map<Ngram, std::size_t> texts_with;
  for (const auto& t : texts)
    for (const auto& [gram, count] : ngram_counts(detail::tokenize(t, false), 4)) ++texts_with[gram];
  if (texts_with.empty()) return 0.0;
  const auto shared = std::count_if(texts_with.begin(), texts_with.end(), [](auto& g) { return g.second > 1; });
  return static_cast<double>(shared) / static_cast<double>(texts_with.size());
}

double self_embed_score(std::span<const std::string> texts, EmbeddingProvider& embedder) {
  if (texts.size() < 2) throw ArgumentError("self-embedding score needs at least 2 texts");
  const auto embeddings = embed_texts(texts, embedder);
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < embeddings.size(); ++i)
    for (std::size_t j = i + 1; j < embeddings.size(); ++j, ++pairs) sum += cosine(embeddings[i], embeddings[j]);
  return sum / static_cast<double>(pairs);
}

DiversityScores diversity(std::span<const std::string> texts, EmbeddingProvider& embedder) {
  return {compression_ratio(texts), self_bleu(texts), self_embed_score(texts, embedder), self_repetition(texts)};
}

UnitCounts unit_count_stats(std::span<const GenerationRecord> records) {
  UnitCounts out;
  std::size_t qa_units = 0, event_units = 0;
  for (const auto& r : records) {
    if (r.failed || r.units.empty()) continue;
    if (r.task == Task::qag) {
      ++out.qa_documents;
      qa_units += r.units.size();
    } else {
      ++out.event_documents;
      event_units += r.units.size();
    }
  }
  if (out.qa_documents) out.mean_qa = static_cast<double>(qa_units) / static_cast<double>(out.qa_documents);
  if (out.event_documents)
    out.mean_events = static_cast<double>(event_units) / static_cast<double>(out.event_documents);
  return out;
}

}  // namespace qaea::analysis
