#include "qaea/vdb.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <numeric>

#include <json.hpp>

namespace qaea {

using nlohmann::json;

namespace {

constexpr std::array<char, 8> kMagic = {'Q', 'A', 'E', 'A', 'V', 'E', 'C', '\0'};
constexpr std::uint32_t kFormatVersion = 1;

static_assert(std::endian::native == std::endian::little, "the .vec format is written in native little-endian order");
static_assert(sizeof(float) == 4);

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(const std::vector<char>& bytes, std::size_t offset) {
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

json info_to_json(const EntryInfo& e) {
  return {{"vector_id", e.vector_id},
          {"doc_id", e.doc_id},
          {"kind", to_string(e.kind)},
          {"strategy", to_string(e.strategy)},
          {"unit_index", e.unit_index ? json(*e.unit_index) : json(nullptr)}};
}

}  // namespace

VectorStore::VectorStore(std::size_t dimension) : dimension_(dimension) {}

VectorStore::VectorStore(const VectorStore& other)
    : dimension_(other.dimension_),
      rows_(other.rows_),
      norms_(other.norms_),
      info_(other.info_),
      by_id_(other.by_id_),
      sim_count_(other.sim_count_.load()) {}

VectorStore& VectorStore::operator=(const VectorStore& other) {
  if (this != &other) {
    dimension_ = other.dimension_;
    rows_ = other.rows_;
    norms_ = other.norms_;
    info_ = other.info_;
    by_id_ = other.by_id_;
    sim_count_.store(other.sim_count_.load());
  }
  return *this;
}

VectorStore::VectorStore(VectorStore&& other) noexcept
    : dimension_(other.dimension_),
      rows_(std::move(other.rows_)),
      norms_(std::move(other.norms_)),
      info_(std::move(other.info_)),
      by_id_(std::move(other.by_id_)),
      sim_count_(other.sim_count_.load()) {}

VectorStore& VectorStore::operator=(VectorStore&& other) noexcept {
  dimension_ = other.dimension_;
  rows_ = std::move(other.rows_);
  norms_ = std::move(other.norms_);
  info_ = std::move(other.info_);
  by_id_ = std::move(other.by_id_);
  sim_count_.store(other.sim_count_.load());
  return *this;
}

void VectorStore::insert(const VectorEntry& entry) {
  if (entry.vector_id.empty()) throw ValidationError("vector id is empty");
  if (by_id_.count(entry.vector_id)) throw ValidationError("duplicate vector id \"" + entry.vector_id + "\"");
  if (dimension_ == 0 && empty()) dimension_ = static_cast<std::size_t>(entry.embedding.dimension());
  if (static_cast<std::size_t>(entry.embedding.dimension()) != dimension_)
    throw ValidationError("vector \"" + entry.vector_id + "\" has dimension " +
                          std::to_string(entry.embedding.dimension()) + ", store expects " + std::to_string(dimension_));
  if (entry.kind == Kind::original && (entry.strategy != Strategy::not_applicable || entry.unit_index))
    throw ValidationError("original vector \"" + entry.vector_id + "\" cannot carry a strategy or unit index");
  if (entry.kind != Kind::original && entry.strategy == Strategy::not_applicable)
    throw ValidationError("generated vector \"" + entry.vector_id + "\" needs TRI or TMO");

  Eigen::VectorXf stored = entry.embedding.values().cast<float>();
  double norm = stored.cast<double>().norm();
  if (norm == 0.0) throw ValidationError("vector \"" + entry.vector_id + "\" is zero");

  rows_.insert(rows_.end(), stored.data(), stored.data() + stored.size());
  norms_.push_back(norm);
  by_id_.emplace(entry.vector_id, info_.size());
  info_.push_back({entry.vector_id, entry.doc_id, entry.kind, entry.strategy, entry.unit_index});
}

Eigen::Map<const Eigen::VectorXf> VectorStore::row(std::size_t i) const {
  return {rows_.data() + i * dimension_, static_cast<Eigen::Index>(dimension_)};
}

std::optional<std::size_t> VectorStore::find(const std::string& vector_id) const {
  auto it = by_id_.find(vector_id);
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

std::size_t VectorStore::max_rows_per_doc() const {
  std::unordered_map<std::string, std::size_t> counts;
  std::size_t best = 0;
  for (const auto& e : info_) best = std::max(best, ++counts[e.doc_id]);
  return best;
}

std::vector<SearchHit> VectorStore::search(const Embedding& query, std::size_t k) const {
  if (empty()) throw ArgumentError("search on an empty store");
  if (k == 0) throw ArgumentError("k must be positive");
  if (static_cast<std::size_t>(query.dimension()) != dimension_)
    throw ArgumentError("query dimension " + std::to_string(query.dimension()) + " does not match store dimension " +
                        std::to_string(dimension_));
  if (query.norm() == 0.0) throw ArgumentError("query vector is zero");

  const std::size_t n = size();
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = row(i).cast<double>().dot(query.values()) / (norms_[i] * query.norm());
    scores[i] = std::clamp(s, -1.0, 1.0);
  }
  sim_count_.fetch_add(n, std::memory_order_relaxed);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return info_[a].vector_id < info_[b].vector_id;
  };
  const std::size_t top = std::min(k, n);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(), better);

  std::vector<SearchHit> hits;
  hits.reserve(top);
  for (std::size_t r = 0; r < top; ++r) {
    const auto& e = info_[order[r]];
    hits.push_back({e.vector_id, e.doc_id, e.kind, scores[order[r]], r + 1});
  }
  return hits;
}

VectorStore compose(const std::vector<const VectorStore*>& stores) {
  VectorStore out;
  for (const auto* s : stores) {
    if (!s || s->empty()) continue;
    if (out.dimension_ == 0) out.dimension_ = s->dimension_;
    if (s->dimension_ != out.dimension_)
      throw ValidationError("cannot compose stores of dimension " + std::to_string(out.dimension_) + " and " +
                            std::to_string(s->dimension_));
    for (std::size_t i = 0; i < s->size(); ++i) {
      const auto& e = s->info_[i];
      if (out.by_id_.count(e.vector_id)) throw ValidationError("duplicate vector id \"" + e.vector_id + "\"");
      out.by_id_.emplace(e.vector_id, out.info_.size());
      out.info_.push_back(e);
      out.norms_.push_back(s->norms_[i]);
    }
    out.rows_.insert(out.rows_.end(), s->rows_.begin(), s->rows_.end());
  }
  return out;
}

std::filesystem::path meta_path(const std::filesystem::path& vec_path) {
  auto p = vec_path;
  p.replace_extension(".meta.jsonl");
  return p;
}

void persist(const VectorStore& store, const std::filesystem::path& vec_path) {
  {
    std::ofstream out(vec_path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + vec_path.string());
    out.write(kMagic.data(), kMagic.size());
    put<std::uint32_t>(out, kFormatVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(store.dimension_));
    put<std::uint64_t>(out, store.size());
    out.write(reinterpret_cast<const char*>(store.rows_.data()),
              static_cast<std::streamsize>(store.rows_.size() * sizeof(float)));
    if (!out) throw ValidationError("failed writing " + vec_path.string());
  }
  std::ofstream meta(meta_path(vec_path), std::ios::trunc);
  if (!meta) throw ValidationError("cannot write " + meta_path(vec_path).string());
  for (const auto& e : store.info_) meta << info_to_json(e).dump() << '\n';
}

VectorStore load_store(const std::filesystem::path& vec_path) {
  std::ifstream in(vec_path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + vec_path.string(), 0);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (bytes.size() < kVecHeaderBytes) throw LoadError("truncated header in " + vec_path.string(), bytes.size());
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin()))
    throw LoadError("bad magic in " + vec_path.string(), 0);
  auto version = get<std::uint32_t>(bytes, 8);
  if (version != kFormatVersion) throw LoadError("unsupported format version " + std::to_string(version), 8);
  auto dimension = get<std::uint32_t>(bytes, 12);
  auto count = get<std::uint64_t>(bytes, 16);
  if (dimension == 0 && count > 0) throw LoadError("zero dimension with rows", 12);
  const std::uint64_t payload = bytes.size() - kVecHeaderBytes;
  if (dimension != 0 && count > payload / (4ull * dimension))
    throw LoadError("truncated vector data in " + vec_path.string(), bytes.size());
  if (payload != count * dimension * 4ull)
    throw LoadError("unexpected trailing bytes in " + vec_path.string(), kVecHeaderBytes + count * dimension * 4ull);

  VectorStore store(dimension);
  store.rows_.resize(count * dimension);
  std::memcpy(store.rows_.data(), bytes.data() + kVecHeaderBytes, payload);

  std::ifstream meta(meta_path(vec_path));
  if (!meta) throw LoadError("cannot open " + meta_path(vec_path).string(), 0);
  std::string line;
  std::size_t number = 0;
  while (std::getline(meta, line)) {
    ++number;
    if (line.empty()) continue;
    EntryInfo e;
    try {
      auto obj = json::parse(line);
      e.vector_id = obj.at("vector_id").get<std::string>();
      e.doc_id = obj.at("doc_id").get<std::string>();
      e.kind = parse_kind(obj.at("kind").get<std::string>());
      e.strategy = parse_strategy(obj.at("strategy").get<std::string>());
      if (auto it = obj.find("unit_index"); it != obj.end() && !it->is_null()) e.unit_index = it->get<int>();
    } catch (const std::exception& ex) {
      throw LoadError("bad provenance line " + std::to_string(number) + ": " + ex.what(), number);
    }
    if (store.by_id_.count(e.vector_id)) throw LoadError("duplicate vector id \"" + e.vector_id + "\"", number);
    store.by_id_.emplace(e.vector_id, store.info_.size());
    store.info_.push_back(std::move(e));
  }
  if (store.info_.size() != count)
    throw LoadError("provenance has " + std::to_string(store.info_.size()) + " entries, vectors " +
                        std::to_string(count),
                    number);
  store.norms_.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    store.norms_[i] = store.row(i).cast<double>().norm();
    if (store.norms_[i] == 0.0) throw LoadError("zero vector in row " + std::to_string(i), kVecHeaderBytes + i * dimension * 4);
  }
  return store;
}

}  // namespace qaea
