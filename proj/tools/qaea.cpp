// qaea: command-line driver for the augmentation and retrieval pipeline.
//
// Exit codes: 0 success, 1 validation error, 2 backend or transport error,
// 3 internal error.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qaea/config.hpp"
#include "qaea/error.hpp"
#include "qaea/log.hpp"
#include "qaea/stages.hpp"

namespace {

struct Overrides {
  std::string config_file;
  std::optional<std::string> corpus, queries, qrels, out, prompts, strategy, language, gain;
  std::optional<std::string> generator_profile, evaluator_profile;
  std::optional<int> threshold;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> parallelism, sample, dimension;
  std::vector<std::string> components, tasks;
  std::vector<std::size_t> k_values;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_file, "JSON run configuration");
  cmd->add_option("--corpus", o.corpus, "corpus.jsonl to ingest");
  cmd->add_option("--queries", o.queries, "queries.jsonl to ingest");
  cmd->add_option("--qrels", o.qrels, "qrels.jsonl to ingest");
  cmd->add_option("--out", o.out, "artifact directory");
  cmd->add_option("--prompts", o.prompts, "directory with prompt templates");
  cmd->add_option("--threshold", o.threshold, "regenerate when the score is <= this");
  cmd->add_option("--strategy", o.strategy, "TRI or TMO");
  cmd->add_option("--components", o.components, "original qa event");
  cmd->add_option("--tasks", o.tasks, "QAG EE");
  cmd->add_option("--k", o.k_values, "cutoffs");
  cmd->add_option("--gain", o.gain, "exponential or linear");
  cmd->add_option("--seed", o.seed, "seed for sampling and mocks");
  cmd->add_option("--sample", o.sample, "ingest a random subset of this size");
  cmd->add_option("--parallelism", o.parallelism, "concurrent backend calls");
  cmd->add_option("--language", o.language, "en or zh");
  cmd->add_option("--mock-profile", o.generator_profile, "mock generator profile");
  cmd->add_option("--mock-evaluator", o.evaluator_profile, "mock evaluator profile");
  cmd->add_option("--dimension", o.dimension, "hash embedder dimension");
}

qaea::RunConfig resolve(const Overrides& o) {
  qaea::RunConfig c = o.config_file.empty() ? qaea::RunConfig{} : qaea::load_config(o.config_file);
  if (o.corpus) c.corpus = *o.corpus;
  if (o.queries) c.queries = *o.queries;
  if (o.qrels) c.qrels = *o.qrels;
  if (o.out) c.output_dir = *o.out;
  if (o.prompts) c.prompts_dir = *o.prompts;
  if (o.threshold) c.threshold = *o.threshold;
  try {
    if (o.strategy) c.strategy = qaea::parse_strategy(*o.strategy);
    if (o.language) c.language = qaea::parse_language(*o.language);
    if (!o.components.empty()) {
      c.components.clear();
      for (const auto& k : o.components) c.components.push_back(qaea::parse_kind(k));
    }
    if (!o.tasks.empty()) {
      c.tasks.clear();
      for (const auto& t : o.tasks) c.tasks.push_back(qaea::parse_task(t));
    }
  } catch (const qaea::ArgumentError& e) {
    throw qaea::ValidationError(e.what());
  }
  if (o.gain) {
    if (*o.gain != "exponential" && *o.gain != "linear") throw qaea::ValidationError("unknown gain " + *o.gain);
    c.gain = *o.gain == "linear" ? qaea::Gain::linear : qaea::Gain::exponential;
  }
  if (!o.k_values.empty()) c.k_values = o.k_values;
  if (o.seed) c.seed = *o.seed;
  if (o.sample) c.sample = *o.sample;
  if (o.parallelism) c.parallelism = *o.parallelism;
  if (o.generator_profile) c.generator = {{"type", "mock"}, {"profile", *o.generator_profile}, {"seed", c.seed}};
  if (o.evaluator_profile) c.evaluator = {{"type", "mock"}, {"profile", *o.evaluator_profile}};
  if (o.dimension) c.embedder = {{"type", "hash"}, {"dimension", *o.dimension}, {"seed", 0}};
  qaea::validate(c);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"QA and event augmentation for dense retrieval"};
  app.require_subcommand(1);
  Overrides o;
  bool force = false;
  std::size_t instances = 10000;
  std::uint64_t theory_seed = 0;
  std::string analysis;

  std::vector<CLI::App*> pipeline;
  for (auto [name, help] : {std::pair{"ingest", "validate and copy corpus, queries and qrels"},
                            std::pair{"augment", "generate, score and regenerate QA pairs and events"},
                            std::pair{"embed", "embed originals, generated texts and queries"},
                            std::pair{"index", "compose the selected components into one store"},
                            std::pair{"retrieve", "write a TREC run for the queries"},
                            std::pair{"eval", "score the index against the qrels"},
                            std::pair{"ablate", "evaluate all seven component subsets"},
                            std::pair{"analyze", "diversity, noise or counts tables"}}) {
    auto* cmd = app.add_subcommand(name, help);
    add_common(cmd, o);
    pipeline.push_back(cmd);
  }
  app.get_subcommand("eval")->add_flag("--force", force, "accept inputs from different configs");
  app.get_subcommand("analyze")
      ->add_option("what", analysis, "diversity | noise | counts")
      ->required()
      ->check(CLI::IsMember({"diversity", "noise", "counts"}));
  auto* theory = app.add_subcommand("verify-theory", "Monte-Carlo check of the margin theorems");
  theory->add_option("--instances", instances, "instances per theorem");
  theory->add_option("--seed", theory_seed, "sweep seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (theory->parsed()) return qaea::stages::verify_theory(instances, theory_seed, std::cout) ? 0 : 1;
    const qaea::RunConfig config = resolve(o);
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "ingest") qaea::stages::ingest(config);
    else if (name == "augment") qaea::stages::augment(config);
    else if (name == "embed") qaea::stages::embed(config);
    else if (name == "index") qaea::stages::index(config);
    else if (name == "retrieve") qaea::stages::retrieve(config);
    else if (name == "eval") std::cout << qaea::report_json(qaea::stages::eval(config, force)) << '\n';
    else if (name == "ablate") qaea::stages::ablate(config, std::cout);
    else if (name == "analyze") qaea::stages::analyze(config, analysis, std::cout);
    return 0;
  } catch (const qaea::TransportError& e) {
    qaea::log::emit(qaea::log::Level::error, "cli.failed", {{"kind", "backend"}, {"message", e.what()}});
    return 2;
  } catch (const qaea::BackendError& e) {
    qaea::log::emit(qaea::log::Level::error, "cli.failed", {{"kind", "backend"}, {"message", e.what()}});
    return 2;
  } catch (const qaea::EmptyOutputError& e) {
    qaea::log::emit(qaea::log::Level::error, "cli.failed", {{"kind", "backend"}, {"message", e.what()}});
    return 2;
  } catch (const qaea::Error& e) {
    qaea::log::emit(qaea::log::Level::error, "cli.failed", {{"kind", "validation"}, {"message", e.what()}});
    return 1;
  } catch (const std::exception& e) {
    qaea::log::emit(qaea::log::Level::error, "cli.failed", {{"kind", "internal"}, {"message", e.what()}});
    return 3;
  }
}
