#pragma once

// Internal text helpers shared by the mocks, the hashing embedder and the
// diversity metrics.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace qaea::detail {

/// 64-bit FNV-1a, optionally chained from a previous state.
constexpr std::uint64_t fnv1a(std::string_view data, std::uint64_t state = 0xcbf29ce484222325ULL) {
  for (unsigned char c : data) {
    state ^= c;
    state *= 0x100000001b3ULL;
  }
  return state;
}

/// splitmix64 finalizer; decorrelates seeds and hashes.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Decodes one UTF-8 code point at `i`, advancing it. Malformed bytes decode
/// as themselves (one byte each).
char32_t next_code_point(std::string_view text, std::size_t& i);

bool is_unicode_space(char32_t cp);

/// CJK ideographs, kana and hangul: scripts written without spaces.
bool is_cjk(char32_t cp);

/// Lowercased tokens: whitespace-separated words, each CJK character its own
/// token. With `strip_punctuation`, ASCII punctuation is removed from word
/// edges and tokens left empty are dropped.
std::vector<std::string> tokenize(std::string_view text, bool strip_punctuation);

}  // namespace qaea::detail
