#include "qaea/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <unordered_set>

#include <json.hpp>

#include "qaea/error.hpp"

namespace qaea {

using nlohmann::ordered_json;

namespace {

double gain_of(int grade, Gain gain) {
  if (grade <= 0) return 0.0;
  return gain == Gain::exponential ? std::exp2(static_cast<double>(grade)) - 1.0 : static_cast<double>(grade);
}

int grade_of(const Grades& grades, const std::string& doc) {
  auto it = grades.find(doc);
  return it == grades.end() ? 0 : it->second;
}

std::size_t relevant_count(const Grades& grades) {
  return static_cast<std::size_t>(std::count_if(grades.begin(), grades.end(), [](auto& g) { return g.second > 0; }));
}

std::string kind_label(Kind kind) {
  switch (kind) {
    case Kind::original: return "Original";
    case Kind::qa: return "QA";
    case Kind::event: return "Event";
  }
  return "Original";
}

}  // namespace

std::vector<RankedDoc> collapse_to_docs(const std::vector<SearchHit>& hits, std::size_t k) {
  std::vector<RankedDoc> out;
  std::unordered_set<std::string> seen;
  for (const auto& hit : hits) {
    if (out.size() >= k) break;
    if (seen.insert(hit.doc_id).second) out.push_back({hit.doc_id, hit.score});
  }
  return out;
}

double ndcg_at_k(const std::vector<std::string>& ranked, const Grades& grades, std::size_t k, Gain gain) {
  double dcg = 0.0;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i)
    dcg += gain_of(grade_of(grades, ranked[i]), gain) / std::log2(static_cast<double>(i) + 2.0);

  std::vector<int> ideal;
  for (const auto& [doc, g] : grades)
    if (g > 0) ideal.push_back(g);
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  double idcg = 0.0;
  for (std::size_t i = 0; i < std::min(k, ideal.size()); ++i)
    idcg += gain_of(ideal[i], gain) / std::log2(static_cast<double>(i) + 2.0);
  return idcg > 0.0 ? dcg / idcg : 0.0;
}

double mrr_at_k(const std::vector<std::string>& ranked, const Grades& grades, std::size_t k) {
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i)
    if (grade_of(grades, ranked[i]) > 0) return 1.0 / static_cast<double>(i + 1);
  return 0.0;
}

double recall_at_k(const std::vector<std::string>& ranked, const Grades& grades, std::size_t k) {
  const std::size_t total = relevant_count(grades);
  if (total == 0) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) hit += grade_of(grades, ranked[i]) > 0;
  return static_cast<double>(hit) / static_cast<double>(total);
}

double precision_at_k(const std::vector<std::string>& ranked, const Grades& grades, std::size_t k) {
  if (k == 0) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) hit += grade_of(grades, ranked[i]) > 0;
  return static_cast<double>(hit) / static_cast<double>(k);
}

std::string ScenarioConfig::name() const {
  std::string out;
  for (Kind kind : {Kind::original, Kind::qa, Kind::event}) {
    if (std::find(components.begin(), components.end(), kind) == components.end()) continue;
    if (!out.empty()) out += '+';
    out += kind_label(kind);
  }
  return out;
}

std::vector<std::vector<Kind>> ablation_subsets() {
  return {{Kind::original},
          {Kind::qa},
          {Kind::event},
          {Kind::original, Kind::qa},
          {Kind::original, Kind::event},
          {Kind::qa, Kind::event},
          {Kind::original, Kind::qa, Kind::event}};
}

const VectorStore& ComponentStores::get(Kind kind, Strategy strategy) const {
  if (kind == Kind::original) return original;
  const auto& table = kind == Kind::qa ? qa : event;
  auto it = table.find(strategy);
  if (it == table.end())
    throw ArgumentError("no " + std::string(to_string(kind)) + " store for strategy " +
                        std::string(to_string(strategy)));
  return it->second;
}

EvalReport evaluate_store(const ScenarioConfig& config, const VectorStore& store,
                          const std::vector<EmbeddedQuery>& queries, const Qrels& qrels) {
  if (queries.empty()) throw ArgumentError("no queries to evaluate");
  if (config.k_values.empty()) throw ArgumentError("no cutoffs to evaluate");
  if (store.empty()) throw ArgumentError("scenario " + config.name() + " has an empty store");

  EvalReport report;
  report.scenario = config;
  report.vector_count = store.size();
  const std::size_t max_k = *std::max_element(config.k_values.begin(), config.k_values.end());
  if (max_k == 0) throw ArgumentError("cutoffs must be positive");
  const std::size_t vector_k = std::min(store.size(), max_k * std::max<std::size_t>(store.max_rows_per_doc(), 1));

  const std::uint64_t count_before = store.sim_count();
  std::vector<const EmbeddedQuery*> ordered;
  for (const auto& q : queries) ordered.push_back(&q);
  std::sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) { return a->query_id < b->query_id; });

  for (const auto* q : ordered) {
    QueryResult result;
    result.query_id = q->query_id;
    for (auto& doc : collapse_to_docs(store.search(q->embedding, vector_k), max_k))
      result.ranking.push_back(std::move(doc.doc_id));
    const Grades& grades = qrels.for_query(q->query_id);
    result.judged = relevant_count(grades) > 0;
    result.top1_relevant = !result.ranking.empty() && grade_of(grades, result.ranking.front()) > 0;
    for (std::size_t k : config.k_values)
      result.at_k[k] = {ndcg_at_k(result.ranking, grades, k, config.gain), mrr_at_k(result.ranking, grades, k),
                        recall_at_k(result.ranking, grades, k), precision_at_k(result.ranking, grades, k)};
    report.per_query.push_back(std::move(result));
  }
  report.sim_count = store.sim_count() - count_before;

  for (const auto& r : report.per_query) {
    if (!r.judged) continue;
    ++report.judged_queries;
    for (const auto& [k, m] : r.at_k) {
      auto& agg = report.aggregate[k];
      agg.ndcg += m.ndcg;
      agg.mrr += m.mrr;
      agg.recall += m.recall;
      agg.precision += m.precision;
    }
  }
  for (std::size_t k : config.k_values) {
    auto& agg = report.aggregate[k];
    if (report.judged_queries == 0) continue;
    const double n = static_cast<double>(report.judged_queries);
    agg.ndcg /= n;
    agg.mrr /= n;
    agg.recall /= n;
    agg.precision /= n;
  }
  return report;
}

EvalReport run_scenario(const ScenarioConfig& config, const ComponentStores& stores,
                        const std::vector<EmbeddedQuery>& queries, const Qrels& qrels) {
  if (config.components.empty()) throw ArgumentError("scenario needs at least one component");
  std::vector<const VectorStore*> parts;
  for (Kind kind : {Kind::original, Kind::qa, Kind::event})
    if (std::find(config.components.begin(), config.components.end(), kind) != config.components.end())
      parts.push_back(&stores.get(kind, config.strategy));
  VectorStore store = compose(parts);
  return evaluate_store(config, store, queries, qrels);
}

std::vector<EvalReport> run_ablation(const ComponentStores& stores, const std::vector<EmbeddedQuery>& queries,
                                     const Qrels& qrels, Strategy strategy, std::vector<std::size_t> k_values) {
  std::vector<EvalReport> reports;
  for (auto& subset : ablation_subsets())
    reports.push_back(run_scenario({subset, strategy, k_values}, stores, queries, qrels));
  return reports;
}

WinLoss recall1_winloss(const EvalReport& a, const EvalReport& b) {
  std::map<std::string, const QueryResult*> in_b;
  for (const auto& r : b.per_query)
    if (r.judged) in_b[r.query_id] = &r;
  std::size_t total = 0, win = 0, loss = 0;
  for (const auto& ra : a.per_query) {
    auto it = in_b.find(ra.query_id);
    if (!ra.judged || it == in_b.end()) continue;
    ++total;
    bool a_ok = ra.top1_relevant, b_ok = it->second->top1_relevant;
    win += a_ok && !b_ok;
    loss += b_ok && !a_ok;
  }
  if (total == 0) return {};
  return {static_cast<double>(win) / static_cast<double>(total), static_cast<double>(loss) / static_cast<double>(total)};
}

std::string report_json(const EvalReport& report) {
  ordered_json components = ordered_json::array();
  for (Kind k : report.scenario.components) components.push_back(to_string(k));
  ordered_json aggregate = ordered_json::object();
  for (const auto& [k, m] : report.aggregate)
    aggregate["@" + std::to_string(k)] = {
        {"ndcg", m.ndcg}, {"mrr", m.mrr}, {"recall", m.recall}, {"precision", m.precision}};
  ordered_json out = {{"scenario", report.scenario.name()},
                      {"components", components},
                      {"strategy", to_string(report.scenario.strategy)},
                      {"gain", report.scenario.gain == Gain::exponential ? "exponential" : "linear"},
                      {"queries", report.per_query.size()},
                      {"judged_queries", report.judged_queries},
                      {"vector_count", report.vector_count},
                      {"sim_count", report.sim_count},
                      {"aggregate", aggregate}};
  return out.dump(2);
}

void write_per_query_csv(std::ostream& out, const EvalReport& report) {
  out << "query_id,k,ndcg,mrr,recall,precision,judged\n" << std::setprecision(10);
  for (const auto& r : report.per_query)
    for (const auto& [k, m] : r.at_k)
      out << r.query_id << ',' << k << ',' << m.ndcg << ',' << m.mrr << ',' << m.recall << ',' << m.precision << ','
          << (r.judged ? 1 : 0) << '\n';
}

void write_ablation_table(std::ostream& out, const std::vector<EvalReport>& reports) {
  out << "scenario,strategy,vectors,sim_count";
  if (!reports.empty())
    for (const auto& [k, m] : reports.front().aggregate) out << ",ndcg@" << k;
  out << '\n' << std::fixed << std::setprecision(4);
  for (const auto& r : reports) {
    out << r.scenario.name() << ',' << to_string(r.scenario.strategy) << ',' << r.vector_count << ',' << r.sim_count;
    for (const auto& [k, m] : r.aggregate) out << ',' << m.ndcg * 100.0;
    out << '\n';
  }
  out.unsetf(std::ios::fixed);
}

}  // namespace qaea
