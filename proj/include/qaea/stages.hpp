#pragma once

// Pipeline stages behind the CLI subcommands. Each stage reads the artifacts
// of earlier stages from config.output_dir, writes its own, and records a
// manifest.<stage>.json with the config snapshot, config hash and the SHA-256
// of every input and output file. Manifests carry no timestamps, so reruns
// with unchanged inputs and mock backends are byte-identical.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "qaea/config.hpp"
#include "qaea/eval.hpp"

namespace qaea::stages {

namespace files {
inline constexpr const char* corpus = "corpus.jsonl";
inline constexpr const char* queries = "queries.jsonl";
inline constexpr const char* qrels = "qrels.jsonl";
inline constexpr const char* generations = "generations.jsonl";
inline constexpr const char* original = "vdb_original.vec";
inline constexpr const char* query_vectors = "queries.vec";
inline constexpr const char* index = "index.vec";
inline constexpr const char* run = "run.trec";
inline constexpr const char* report = "report.json";
inline constexpr const char* per_query = "per_query.csv";
}  // namespace files

/// vdb_qa.TRI.vec and friends.
std::string component_file(Kind kind, Strategy strategy);
std::filesystem::path manifest_path(const std::filesystem::path& dir, std::string_view stage);

void ingest(const RunConfig& config);
void augment(const RunConfig& config);
void embed(const RunConfig& config);
void index(const RunConfig& config);
void retrieve(const RunConfig& config);
/// Refuses inputs whose manifests carry different config hashes unless `force`.
EvalReport eval(const RunConfig& config, bool force = false);
/// Seven scenarios for config.strategy; the table goes to `out` and ablation.<strategy>.csv.
std::vector<EvalReport> ablate(const RunConfig& config, std::ostream& out);
/// Prints pass/fail counts and the worst slack for both theorems. True when nothing failed.
bool verify_theory(std::size_t instances, std::uint64_t seed, std::ostream& out);
/// what: diversity | noise | counts. Writes <what>.csv and echoes it to `out`.
void analyze(const RunConfig& config, std::string_view what, std::ostream& out);

}  // namespace qaea::stages
