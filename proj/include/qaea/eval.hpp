#pragma once

// Retrieval evaluation over component subsets of the augmented vector store.
// Vector hits are collapsed to documents (a generated vector stands for its
// source document) before scoring against graded qrels.

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "qaea/corpus.hpp"
#include "qaea/embed.hpp"
#include "qaea/types.hpp"
#include "qaea/vdb.hpp"

namespace qaea {

struct RankedDoc {
  std::string doc_id;
  double score = 0.0;
};

/// Keeps the first (best-ranked) hit of each document, up to k documents.
std::vector<RankedDoc> collapse_to_docs(const std::vector<SearchHit>& hits, std::size_t k);

enum class Gain { exponential, linear };  // 2^rel - 1, or rel

/// Grades of the documents of one query; unlisted documents have grade 0.
using Grades = std::map<std::string, int>;

/// 0 when the query has no positive grade.
double ndcg_at_k(const std::vector<std::string>& ranked, const Grades& grades, std::size_t k,
                 Gain gain = Gain::exponential);
double mrr_at_k(const std::vector<std::string>& ranked, const Grades& grades, std::size_t k);
double recall_at_k(const std::vector<std::string>& ranked, const Grades& grades, std::size_t k);
double precision_at_k(const std::vector<std::string>& ranked, const Grades& grades, std::size_t k);

struct Metrics {
  double ndcg = 0.0;
  double mrr = 0.0;
  double recall = 0.0;
  double precision = 0.0;
};

struct ScenarioConfig {
  std::vector<Kind> components{Kind::original};
  Strategy strategy = Strategy::tmo;
  std::vector<std::size_t> k_values{1, 10};
  Gain gain = Gain::exponential;

  /// e.g. "Original+QA+Event".
  std::string name() const;
};

/// The seven non-empty subsets of {original, qa, event} in reporting order:
/// Original, QA, Event, Original+QA, Original+Event, QA+Event, Original+QA+Event.
std::vector<std::vector<Kind>> ablation_subsets();

/// Per-component stores. Generated components exist once per strategy.
struct ComponentStores {
  VectorStore original;
  std::map<Strategy, VectorStore> qa;
  std::map<Strategy, VectorStore> event;

  /// Throws ArgumentError when the component is missing.
  const VectorStore& get(Kind kind, Strategy strategy) const;
};

struct EmbeddedQuery {
  std::string query_id;
  Embedding embedding;
};

struct QueryResult {
  std::string query_id;
  /// Collapsed document ranking, up to the largest k.
  std::vector<std::string> ranking;
  std::map<std::size_t, Metrics> at_k;
  /// False when the query has no positive judgment; excluded from aggregates.
  bool judged = false;
  /// The first ranked document is relevant.
  bool top1_relevant = false;
};

struct EvalReport {
  ScenarioConfig scenario;
  std::vector<QueryResult> per_query;  // sorted by query_id
  std::map<std::size_t, Metrics> aggregate;
  std::uint64_t sim_count = 0;
  std::size_t vector_count = 0;
  std::size_t judged_queries = 0;
};

/// Evaluates queries against an already composed store. One search per query.
EvalReport evaluate_store(const ScenarioConfig& config, const VectorStore& store,
                          const std::vector<EmbeddedQuery>& queries, const Qrels& qrels);

/// Composes the selected components and evaluates them.
EvalReport run_scenario(const ScenarioConfig& config, const ComponentStores& stores,
                        const std::vector<EmbeddedQuery>& queries, const Qrels& qrels);

/// All seven component subsets for one strategy.
std::vector<EvalReport> run_ablation(const ComponentStores& stores, const std::vector<EmbeddedQuery>& queries,
                                     const Qrels& qrels, Strategy strategy,
                                     std::vector<std::size_t> k_values = {1, 10});

struct WinLoss {
  double win = 0.0;   // a right at rank 1, b not
  double loss = 0.0;  // b right at rank 1, a not
};

/// Over queries judged in both reports.
WinLoss recall1_winloss(const EvalReport& a, const EvalReport& b);

/// report.json body: scenario, aggregates, counts.
std::string report_json(const EvalReport& report);
/// per_query.csv: query_id,k,ndcg,mrr,recall,precision.
void write_per_query_csv(std::ostream& out, const EvalReport& report);
/// Ablation table: one row per scenario with NDCG at each k.
void write_ablation_table(std::ostream& out, const std::vector<EvalReport>& reports);

}  // namespace qaea
