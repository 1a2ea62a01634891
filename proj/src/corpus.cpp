#include "qaea/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <random>

#include <json.hpp>

#include "qaea/error.hpp"
#include "qaea/log.hpp"

namespace qaea {

using nlohmann::json;

namespace {

template <typename Item>
const std::string& id_of(const Item& item);
template <>
const std::string& id_of(const Document& d) { return d.doc_id; }
template <>
const std::string& id_of(const Query& q) { return q.query_id; }

std::string require_string(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string())
    throw ParseError(std::string("missing string field \"") + key + "\"", line);
  return it->get<std::string>();
}

template <typename Fn>
void for_each_json_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(e.what(), number);
    }
    if (!obj.is_object()) throw ParseError("expected a JSON object", number);
    fn(obj, number);
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return in;
}

}  // namespace

template <typename Item>
void Collection<Item>::add(Item item) {
  const std::string& id = id_of(item);
  if (id.empty()) throw ValidationError("empty id");
  if (index_.count(id)) throw ValidationError("duplicate id \"" + id + "\"");
  index_.emplace(id, items_.size());
  items_.push_back(std::move(item));
}

template <typename Item>
const Item* Collection<Item>::find(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &items_[it->second];
}

template class Collection<Document>;
template class Collection<Query>;

void Qrels::add(QrelEntry entry) {
  if (entry.relevance < 0)
    throw ValidationError("negative relevance for (" + entry.query_id + ", " + entry.doc_id + ")");
  auto& grades = by_query_[entry.query_id];
  if (!grades.emplace(entry.doc_id, entry.relevance).second)
    throw ValidationError("duplicate judgment (" + entry.query_id + ", " + entry.doc_id + ")");
  entries_.push_back(std::move(entry));
}

const std::map<std::string, int>& Qrels::for_query(const std::string& query_id) const {
  static const std::map<std::string, int> empty;
  auto it = by_query_.find(query_id);
  return it == by_query_.end() ? empty : it->second;
}

int Qrels::grade(const std::string& query_id, const std::string& doc_id) const {
  const auto& grades = for_query(query_id);
  auto it = grades.find(doc_id);
  return it == grades.end() ? 0 : it->second;
}

Corpus read_corpus(std::istream& in) {
  Corpus corpus;
  for_each_json_line(in, [&](const json& obj, std::size_t line) {
    Document doc{require_string(obj, "doc_id", line), require_string(obj, "text", line), {}};
    if (doc.text.empty()) throw ValidationError("line " + std::to_string(line) + ": empty text");
    if (auto it = obj.find("metadata"); it != obj.end() && it->is_object()) {
      for (const auto& [key, value] : it->items())
        doc.metadata[key] = value.is_string() ? value.get<std::string>() : value.dump();
    }
    try {
      corpus.add(std::move(doc));
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line) + ": " + e.what());
    }
  });
  return corpus;
}

QuerySet read_queries(std::istream& in) {
  QuerySet queries;
  for_each_json_line(in, [&](const json& obj, std::size_t line) {
    Query q{require_string(obj, "query_id", line), require_string(obj, "text", line)};
    if (q.text.empty()) throw ValidationError("line " + std::to_string(line) + ": empty text");
    try {
      queries.add(std::move(q));
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line) + ": " + e.what());
    }
  });
  return queries;
}

Qrels read_qrels(std::istream& in) {
  Qrels qrels;
  for_each_json_line(in, [&](const json& obj, std::size_t line) {
    QrelEntry entry{require_string(obj, "query_id", line), require_string(obj, "doc_id", line), 0};
    auto it = obj.find("relevance");
    if (it == obj.end() || !it->is_number_integer())
      throw ValidationError("line " + std::to_string(line) + ": relevance must be an integer");
    entry.relevance = it->get<int>();
    try {
      qrels.add(std::move(entry));
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line) + ": " + e.what());
    }
  });
  return qrels;
}

Corpus load_corpus(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_corpus(in);
}

QuerySet load_queries(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_queries(in);
}

Qrels load_qrels(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_qrels(in);
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& doc : corpus) {
    json obj = {{"doc_id", doc.doc_id}, {"text", doc.text}};
    if (!doc.metadata.empty()) obj["metadata"] = doc.metadata;
    out << obj.dump() << '\n';
  }
}

void write_queries(std::ostream& out, const QuerySet& queries) {
  for (const auto& q : queries) out << json{{"query_id", q.query_id}, {"text", q.text}}.dump() << '\n';
}

void write_qrels(std::ostream& out, const Qrels& qrels) {
  for (const auto& e : qrels.entries())
    out << json{{"query_id", e.query_id}, {"doc_id", e.doc_id}, {"relevance", e.relevance}}.dump()
        << '\n';
}

std::size_t check_references(const Qrels& qrels, const Corpus& corpus, const QuerySet& queries) {
  std::size_t dangling = 0;
  for (const auto& e : qrels.entries()) {
    if (!corpus.contains(e.doc_id)) {
      ++dangling;
      log::warn("qrels.unknown_doc", {{"query_id", e.query_id}, {"doc_id", e.doc_id}});
    }
    if (!queries.contains(e.query_id)) {
      ++dangling;
      log::warn("qrels.unknown_query", {{"query_id", e.query_id}});
    }
  }
  return dangling;
}

Corpus sample_subset(const Corpus& corpus, std::size_t size, std::uint64_t seed) {
  if (size > corpus.size())
    throw ArgumentError("sample size " + std::to_string(size) + " exceeds corpus size " +
                        std::to_string(corpus.size()));
  std::vector<Document> picked;
  picked.reserve(size);
  std::mt19937_64 rng(seed);
  std::sample(corpus.begin(), corpus.end(), std::back_inserter(picked), size, rng);
  Corpus out;
  for (auto& doc : picked) out.add(std::move(doc));
  return out;
}

}  // namespace qaea
