#include "qaea/stages.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qaea/analysis.hpp"
#include "qaea/augment.hpp"
#include "qaea/corpus.hpp"
#include "qaea/error.hpp"
#include "qaea/log.hpp"
#include "qaea/organize.hpp"
#include "qaea/prompts.hpp"
#include "qaea/theory.hpp"
#include "qaea/vdb.hpp"

namespace qaea::stages {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

fs::path out_path(const RunConfig& c, const std::string& name) { return c.output_dir / name; }

// Throws with the stage that produces the missing file.
fs::path require(const RunConfig& c, const std::string& name, std::string_view producer) {
  fs::path p = out_path(c, name);
  if (!fs::exists(p))
    throw ValidationError("missing " + p.string() + "; run `qaea " + std::string(producer) + "` first");
  return p;
}

fs::path require_input(const fs::path& p, const char* what) {
  if (p.empty()) throw ValidationError("no " + std::string(what) + " path configured");
  if (!fs::exists(p)) throw ValidationError(std::string(what) + " file " + p.string() + " does not exist");
  return p;
}

void prepare_output(const RunConfig& c) {
  validate(c);
  fs::create_directories(c.output_dir);
}

std::ofstream open_out(const fs::path& p, std::ios::openmode mode = std::ios::trunc) {
  std::ofstream out(p, mode);
  if (!out) throw ValidationError("cannot write " + p.string());
  return out;
}

void write_manifest(const RunConfig& c, std::string_view stage, const std::vector<fs::path>& inputs,
                    const std::vector<fs::path>& outputs, ordered_json extra = ordered_json::object()) {
  ordered_json in = ordered_json::object(), out = ordered_json::object();
  for (const auto& p : inputs) in[p.filename().string()] = file_sha256(p);
  for (const auto& p : outputs) {
    out[p.filename().string()] = file_sha256(p);
    if (p.extension() == ".vec") out[meta_path(p).filename().string()] = file_sha256(meta_path(p));
  }
  ordered_json manifest = {{"stage", stage},
                           {"config_hash", config_hash(c)},
                           {"config", config_to_json(c)},
                           {"seed", c.seed},
                           {"versions", {{"qaea", kVersion}, {"vec_format", 1}, {"prompts", c.prompts_dir ? "custom" : PromptTemplates::builtin().version}}},
                           {"inputs", in},
                           {"outputs", out}};
  for (auto& [k, v] : extra.items()) manifest[k] = v;
  auto file = open_out(manifest_path(c.output_dir, stage));
  file << manifest.dump(2) << '\n';
  log::info("stage.done", {{"stage", std::string(stage)}, {"outputs", std::to_string(outputs.size())}});
}

std::optional<std::string> manifest_hash(const fs::path& dir, std::string_view stage) {
  std::ifstream in(manifest_path(dir, stage));
  if (!in) return std::nullopt;
  json m = json::parse(in, nullptr, false);
  if (m.is_discarded() || !m.contains("config_hash")) return std::nullopt;
  return m["config_hash"].get<std::string>();
}

std::vector<EmbeddedQuery> load_query_vectors(const fs::path& p) {
  VectorStore store = load_store(p);
  std::vector<EmbeddedQuery> out;
  for (std::size_t i = 0; i < store.size(); ++i)
    out.push_back({store.info(i).vector_id, Embedding(store.row(i).cast<double>())});
  return out;
}

ComponentStores load_components(const RunConfig& c) {
  ComponentStores stores;
  stores.original = load_store(require(c, files::original, "embed"));
  for (Strategy s : {Strategy::tri, Strategy::tmo}) {
    stores.qa.emplace(s, load_store(require(c, component_file(Kind::qa, s), "embed")));
    stores.event.emplace(s, load_store(require(c, component_file(Kind::event, s), "embed")));
  }
  return stores;
}

std::vector<GenerationRecord> load_generations(const RunConfig& c) {
  std::ifstream in(require(c, files::generations, "augment"));
  return read_generations(in, c.language);
}

AugmentOptions augment_options(const RunConfig& c, const PromptTemplates& templates) {
  AugmentOptions options;
  options.threshold = c.threshold;
  options.language = c.language;
  options.templates = &templates;
  return options;
}

PromptTemplates templates_for(const RunConfig& c) {
  return c.prompts_dir ? PromptTemplates::load(*c.prompts_dir) : PromptTemplates::builtin();
}

std::vector<std::string> unit_texts(const GenerationRecord& r) {
  std::vector<std::string> out;
  for (const auto& u : r.units) out.push_back(u.text);
  return out;
}

void emit_csv(const fs::path& p, const std::string& body, std::ostream& out) {
  auto file = open_out(p);
  file << body;
  out << body;
}

}  // namespace

std::string component_file(Kind kind, Strategy strategy) {
  if (kind == Kind::original) return files::original;
  return "vdb_" + std::string(to_string(kind)) + "." + std::string(to_string(strategy)) + ".vec";
}

fs::path manifest_path(const fs::path& dir, std::string_view stage) {
  return dir / ("manifest." + std::string(stage) + ".json");
}

void ingest(const RunConfig& c) {
  prepare_output(c);
  const auto corpus_in = require_input(c.corpus, "corpus");
  const auto queries_in = require_input(c.queries, "queries");
  const auto qrels_in = require_input(c.qrels, "qrels");
  Corpus corpus = load_corpus(corpus_in);
  QuerySet queries = load_queries(queries_in);
  Qrels qrels = load_qrels(qrels_in);
  check_references(qrels, corpus, queries);

  if (c.sample && *c.sample < corpus.size()) {
    corpus = sample_subset(corpus, *c.sample, c.seed);
    Qrels kept;
    for (const auto& e : qrels.entries())
      if (corpus.contains(e.doc_id)) kept.add(e);
    qrels = std::move(kept);
  }

  const auto corpus_out = out_path(c, files::corpus), queries_out = out_path(c, files::queries),
             qrels_out = out_path(c, files::qrels);
  {
    auto out = open_out(corpus_out);
    write_corpus(out, corpus);
    auto q = open_out(queries_out);
    write_queries(q, queries);
    auto r = open_out(qrels_out);
    write_qrels(r, qrels);
  }
  write_manifest(c, "ingest", {corpus_in, queries_in, qrels_in}, {corpus_out, queries_out, qrels_out},
                 {{"documents", corpus.size()}, {"queries", queries.size()}, {"qrels", qrels.size()}});
}

void augment(const RunConfig& c) {
  prepare_output(c);
  const auto corpus_in = require(c, files::corpus, "ingest");
  Corpus corpus = load_corpus(corpus_in);
  const PromptTemplates templates = templates_for(c);
  llm::Gateway generator = make_generator(c);
  llm::Gateway evaluator = make_evaluator(c);
  auto records = augment_corpus(corpus, c.tasks, generator, evaluator, augment_options(c, templates), c.parallelism);

  const auto out = out_path(c, files::generations);
  {
    auto file = open_out(out);
    write_generations(file, records);
  }
  std::size_t regenerated = 0, failed = 0;
  for (const auto& r : records) {
    regenerated += r.regenerated;
    failed += r.failed;
  }
  write_manifest(c, "augment", {corpus_in}, {out},
                 {{"records", records.size()}, {"regenerated", regenerated}, {"failed", failed}});
}

void embed(const RunConfig& c) {
  prepare_output(c);
  const auto corpus_in = require(c, files::corpus, "ingest");
  const auto queries_in = require(c, files::queries, "ingest");
  const auto generations_in = require(c, files::generations, "augment");
  Corpus corpus = load_corpus(corpus_in);
  QuerySet queries = load_queries(queries_in);
  auto records = load_generations(c);
  auto embedder = make_embedder(c);
  const std::size_t d = embedder->dimension();

  auto fill = [&](VectorStore& store, std::vector<VectorEntry> entries, const std::vector<std::string>& texts) {
    if (texts.empty()) return;
    auto vectors = embed_texts(texts, *embedder);
    for (std::size_t i = 0; i < entries.size(); ++i) {
      entries[i].embedding = std::move(vectors[i]);
      store.insert(entries[i]);
    }
  };

  std::vector<fs::path> outputs;
  auto save = [&](const VectorStore& store, const std::string& name) {
    outputs.push_back(out_path(c, name));
    persist(store, outputs.back());
  };

  {
    VectorStore original(d);
    std::vector<VectorEntry> entries;
    std::vector<std::string> texts;
    for (const auto& doc : corpus) {
      entries.push_back({doc.doc_id, {}, doc.doc_id, Kind::original, Strategy::not_applicable, std::nullopt});
      texts.push_back(doc.text);
    }
    fill(original, std::move(entries), texts);
    save(original, files::original);
  }

  for (Kind kind : {Kind::qa, Kind::event})
    for (Strategy strategy : {Strategy::tri, Strategy::tmo}) {
      VectorStore store(d);
      std::vector<VectorEntry> entries;
      std::vector<std::string> texts;
      for (const auto& record : records) {
        if (kind_of(record.task) != kind || record.failed || !corpus.contains(record.doc_id)) continue;
        const auto organized = organize(record, strategy);
        for (std::size_t i = 0; i < organized.texts.size(); ++i) {
          std::string id = record.doc_id + "#" + std::string(to_string(kind)) + "." + std::string(to_string(strategy));
          std::optional<int> unit;
          if (strategy == Strategy::tri) {
            id += "." + std::to_string(i);
            unit = static_cast<int>(i);
          }
          entries.push_back({id, {}, record.doc_id, kind, strategy, unit});
          texts.push_back(organized.texts[i]);
        }
      }
      fill(store, std::move(entries), texts);
      save(store, component_file(kind, strategy));
    }

  {
    VectorStore store(d);
    std::vector<VectorEntry> entries;
    std::vector<std::string> texts;
    for (const auto& q : queries) {
      entries.push_back({q.query_id, {}, q.query_id, Kind::original, Strategy::not_applicable, std::nullopt});
      texts.push_back(q.text);
    }
    fill(store, std::move(entries), texts);
    save(store, files::query_vectors);
  }
  write_manifest(c, "embed", {corpus_in, queries_in, generations_in}, outputs, {{"embedder", embedder->id()}});
}

void index(const RunConfig& c) {
  prepare_output(c);
  std::vector<fs::path> inputs;
  std::vector<VectorStore> parts;
  for (Kind kind : {Kind::original, Kind::qa, Kind::event}) {
    if (std::find(c.components.begin(), c.components.end(), kind) == c.components.end()) continue;
    inputs.push_back(require(c, component_file(kind, c.strategy), "embed"));
    parts.push_back(load_store(inputs.back()));
  }
  std::vector<const VectorStore*> pointers;
  for (const auto& p : parts) pointers.push_back(&p);
  VectorStore store = compose(pointers);
  const auto out = out_path(c, files::index);
  persist(store, out);
  ScenarioConfig scenario{c.components, c.strategy, c.k_values, c.gain};
  write_manifest(c, "index", inputs, {out},
                 {{"scenario", scenario.name()}, {"strategy", to_string(c.strategy)}, {"vectors", store.size()}});
}

void retrieve(const RunConfig& c) {
  prepare_output(c);
  const auto index_in = require(c, files::index, "index");
  const auto queries_in = require(c, files::query_vectors, "embed");
  VectorStore store = load_store(index_in);
  if (store.empty()) throw ValidationError("index is empty");
  auto queries = load_query_vectors(queries_in);
  std::sort(queries.begin(), queries.end(), [](auto& a, auto& b) { return a.query_id < b.query_id; });
  const std::size_t max_k = *std::max_element(c.k_values.begin(), c.k_values.end());
  const std::size_t vector_k = std::min(store.size(), max_k * std::max<std::size_t>(store.max_rows_per_doc(), 1));

  const auto out = out_path(c, files::run);
  {
    auto file = open_out(out);
    file << std::setprecision(9);
    for (const auto& q : queries) {
      auto ranked = collapse_to_docs(store.search(q.embedding, vector_k), max_k);
      for (std::size_t r = 0; r < ranked.size(); ++r)
        file << q.query_id << " Q0 " << ranked[r].doc_id << ' ' << r + 1 << ' ' << ranked[r].score << " qaea\n";
    }
  }
  write_manifest(c, "retrieve", {index_in, queries_in}, {out});
}

EvalReport eval(const RunConfig& c, bool force) {
  prepare_output(c);
  const auto index_in = require(c, files::index, "index");
  const auto queries_in = require(c, files::query_vectors, "embed");
  const auto qrels_in = require(c, files::qrels, "ingest");

  std::map<std::string, std::string> hashes;
  for (const char* stage : {"ingest", "augment", "embed", "index"})
    if (auto h = manifest_hash(c.output_dir, stage)) hashes[stage] = *h;
  std::set<std::string> distinct;
  for (const auto& [stage, h] : hashes) distinct.insert(h);
  if (distinct.size() > 1) {
    std::string detail;
    for (const auto& [stage, h] : hashes) detail += " " + stage + "=" + h.substr(0, 12);
    if (!force) throw ValidationError("inputs were produced by different configs:" + detail + " (rerun the stages or pass --force)");
    log::warn("eval.mixed_config", {{"hashes", detail}});
  }

  VectorStore store = load_store(index_in);
  auto queries = load_query_vectors(queries_in);
  Qrels qrels = load_qrels(qrels_in);
  ScenarioConfig scenario{c.components, c.strategy, c.k_values, c.gain};
  EvalReport report = evaluate_store(scenario, store, queries, qrels);

  const auto report_out = out_path(c, files::report), csv_out = out_path(c, files::per_query);
  {
    ordered_json body = ordered_json::parse(report_json(report));
    body["config_hash"] = distinct.size() == 1 ? *distinct.begin() : config_hash(c);
    auto file = open_out(report_out);
    file << body.dump(2) << '\n';
    auto csv = open_out(csv_out);
    write_per_query_csv(csv, report);
  }
  write_manifest(c, "eval", {index_in, queries_in, qrels_in}, {report_out, csv_out});
  return report;
}

std::vector<EvalReport> ablate(const RunConfig& c, std::ostream& out) {
  prepare_output(c);
  ComponentStores stores = load_components(c);
  const auto queries_in = require(c, files::query_vectors, "embed");
  const auto qrels_in = require(c, files::qrels, "ingest");
  auto reports = run_ablation(stores, load_query_vectors(queries_in), load_qrels(qrels_in), c.strategy, c.k_values);
  for (auto& r : reports) r.scenario.gain = c.gain;

  std::ostringstream table;
  write_ablation_table(table, reports);
  const auto csv = out_path(c, "ablation." + std::string(to_string(c.strategy)) + ".csv");
  emit_csv(csv, table.str(), out);
  std::vector<fs::path> inputs{out_path(c, files::original), queries_in, qrels_in};
  for (Kind kind : {Kind::qa, Kind::event}) inputs.push_back(out_path(c, component_file(kind, c.strategy)));
  write_manifest(c, "ablate", inputs, {csv});
  return reports;
}

bool verify_theory(std::size_t instances, std::uint64_t seed, std::ostream& out) {
  const auto t1 = theory::sweep_theorem1(instances, seed);
  const auto t2 = theory::sweep_theorem2(instances, seed ^ 0x5eed5eedULL);
  out << std::setprecision(6);
  for (auto [name, r] : {std::pair{"theorem1", t1}, std::pair{"theorem2", t2}})
    out << name << ": " << r.instances - r.violations << " pass, " << r.violations << " fail, worst slack "
        << r.worst_slack << '\n';
  return t1.violations == 0 && t2.violations == 0;
}

void analyze(const RunConfig& c, std::string_view what, std::ostream& out) {
  prepare_output(c);
  std::ostringstream csv;
  csv << std::setprecision(6);
  std::vector<fs::path> inputs;

  if (what == "counts") {
    inputs.push_back(require(c, files::generations, "augment"));
    const auto records = load_generations(c);
    const auto counts = analysis::unit_count_stats(records);
    csv << "task,documents,mean_units\n"
        << "QAG," << counts.qa_documents << ',' << counts.mean_qa << '\n'
        << "EE," << counts.event_documents << ',' << counts.mean_events << '\n';
  } else if (what == "diversity") {
    inputs.push_back(require(c, files::generations, "augment"));
    const auto records = load_generations(c);
    auto embedder = make_embedder(c);
    csv << "task,documents,compression_ratio,self_bleu,self_embed_score,self_repetition\n";
    for (Task task : {Task::qag, Task::ee}) {
      analysis::DiversityScores sum;
      std::size_t n = 0;
      for (const auto& r : records) {
        if (r.task != task || r.failed || r.units.size() < 2) continue;
        const auto s = analysis::diversity(unit_texts(r), *embedder);
        sum.compression_ratio += s.compression_ratio;
        sum.self_bleu += s.self_bleu;
        sum.self_embed_score += s.self_embed_score;
        sum.self_repetition += s.self_repetition;
        ++n;
      }
      const double d = n ? static_cast<double>(n) : 1.0;
      csv << to_string(task) << ',' << n << ',' << sum.compression_ratio / d << ',' << sum.self_bleu / d << ','
          << sum.self_embed_score / d << ',' << sum.self_repetition / d << '\n';
    }
  } else if (what == "noise") {
    inputs.push_back(require(c, files::corpus, "ingest"));
    Corpus corpus = load_corpus(inputs.back());
    const PromptTemplates templates = templates_for(c);
    llm::Gateway generator = make_generator(c);
    llm::Gateway evaluator = make_evaluator(c);
    const auto options = augment_options(c, templates);
    csv << "percentage,task,documents,retained_noise\n";
    for (double p : {0.2, 0.5, 1.0})
      for (Task task : c.tasks) {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& doc : corpus) {
          auto noisy = analysis::inject_noise(doc.text, {p, c.seed});
          auto record = augment_document({doc.doc_id, noisy.text, doc.metadata}, task, generator, evaluator, options);
          sum += analysis::retained_noise(unit_texts(record), noisy.noise_tokens);
          ++n;
        }
        csv << p << ',' << to_string(task) << ',' << n << ',' << (n ? sum / static_cast<double>(n) : 0.0) << '\n';
      }
  } else {
    throw ArgumentError("unknown analysis \"" + std::string(what) + "\" (expected diversity, noise or counts)");
  }
  const auto path = out_path(c, std::string(what) + ".csv");
  emit_csv(path, csv.str(), out);
  write_manifest(c, "analyze." + std::string(what), inputs, {path});
}

}  // namespace qaea::stages
