// Command-line entry point: train, eval, build-graph, inspect-paths,
// gradcheck and synth.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gain/checkpoint.h"
#include "gain/docred.h"
#include "gain/errors.h"
#include "gain/gradcheck.h"
#include "gain/graph.h"
#include "gain/metrics.h"
#include "gain/model.h"
#include "gain/synth.h"
#include "gain/trainer.h"
#include "gain/vocab.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string config;
  std::string train, dev, test;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> ablate;
  std::optional<double> threshold;
  std::string out;
  std::string checkpoint;
  std::string rel2id;
  std::string vectors;
  std::string task = "two-hop";
  std::size_t docs = 200;
  std::size_t test_docs = 50;
  std::size_t entities = 3;
  std::optional<std::size_t> epochs;
  std::string title;
};

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void EnsureOut(const Options& o) {
  if (o.out.empty()) throw gain::ArgumentError("--out is required");
  fs::create_directories(o.out);
}

void WriteManifest(const Options& o, const std::string& subcommand, const std::vector<std::string>& argv,
                   std::uint64_t seed, const json& config) {
  json m;
  m["subcommand"] = subcommand;
  m["argv"] = argv;
  m["seed"] = seed;
  m["version"] = GAIN_VERSION;
  m["config"] = config;
  WriteText(fs::path(o.out) / "manifest.json", m.dump(2) + "\n");
}

gain::Ablations ParseAblations(const std::vector<std::string>& flags, gain::Ablations base) {
  for (const auto& f : flags) {
    if (f == "hmg") base.no_hmg = true;
    else if (f == "inference") base.no_inference = true;
    else if (f == "docnode") base.no_document_node = true;
    else throw gain::ArgumentError("--ablate expects hmg, inference or docnode, got '" + f + "'");
  }
  return base;
}

gain::RunConfig LoadRunConfig(const Options& o) {
  gain::RunConfig rc;
  if (!o.config.empty()) rc = gain::RunConfig::FromFile(o.config);
  if (o.seed) rc.train.seed = *o.seed;
  if (o.epochs) rc.train.epochs = *o.epochs;
  rc.model.ablations = ParseAblations(o.ablate, rc.model.ablations);
  return rc;
}

// Whichever single data split was given, for commands that read one.
std::string OneSplit(const Options& o) {
  for (const auto* p : {&o.test, &o.dev, &o.train})
    if (!p->empty()) return *p;
  throw gain::ArgumentError("a data path is required (--train, --dev or --test)");
}

std::vector<gain::Document> LoadSplit(const std::string& path, gain::RelationMap& relations) {
  auto docs = gain::ParseCorpus(path, relations);
  for (const auto& d : docs) gain::ValidateDocument(d, relations.size());
  return docs;
}

int RunTrain(const Options& o, const std::vector<std::string>& argv) {
  EnsureOut(o);
  if (o.train.empty()) throw gain::ArgumentError("train: --train is required");
  gain::RunConfig rc = LoadRunConfig(o);

  gain::RelationMap relations;
  if (!o.rel2id.empty()) relations = gain::RelationMap::FromFile(o.rel2id);
  const auto train_docs = LoadSplit(o.train, relations);
  relations.Freeze();
  std::vector<gain::Document> dev_docs, test_docs;
  if (!o.dev.empty()) dev_docs = LoadSplit(o.dev, relations);
  if (!o.test.empty()) test_docs = LoadSplit(o.test, relations);

  const gain::Vocab vocab = gain::BuildVocab(train_docs, relations);
  rc.model.vocab_size = vocab.words.size();
  rc.model.num_entity_types = vocab.types.size();
  rc.model.num_relations = relations.size();
  rc.model.Validate();
  rc.train.Validate();
  WriteManifest(o, "train", argv, rc.train.seed, json::parse(rc.ToJson()));

  const gain::Rng root(rc.train.seed);
  gain::Rng embed_rng = root.Fork(1);
  std::optional<fs::path> vectors;
  if (!o.vectors.empty()) vectors = o.vectors;
  gain::Tensor words = gain::InitWordEmbeddings(vocab, rc.model.word_dim, embed_rng, vectors);
  gain::Rng init_rng = root.Fork(2);
  gain::GainModel model(rc.model, init_rng, words);
  std::cerr << "parameters: " << gain::ParameterCount(model.params()) << "\n";

  const auto train_prep = gain::Prepare(train_docs, vocab, rc.model);
  const auto dev_prep = gain::Prepare(dev_docs, vocab, rc.model);
  const gain::TrainSignatures signatures = gain::BuildTrainSignatures(train_docs, relations);
  std::optional<gain::FactIndex> dev_index;
  if (!dev_docs.empty()) dev_index.emplace(dev_docs, relations);

  gain::TrainResult result =
      gain::Train(model, train_prep, dev_prep, dev_index ? &*dev_index : nullptr, signatures, rc.train, &std::cerr);

  WriteText(fs::path(o.out) / "runlog.jsonl", result.log.ToJsonl());
  WriteText(fs::path(o.out) / "timings.jsonl", result.log.TimingsJsonl());
  relations.Save(fs::path(o.out) / "rel2id.txt");
  gain::Checkpoint ckpt;
  ckpt.seed = rc.train.seed;
  ckpt.metadata = gain::CheckpointMetadata(rc.model, rc.train, vocab);
  ckpt.params = result.best_params;
  gain::SaveCheckpoint(fs::path(o.out) / "checkpoint.bin", ckpt);

  if (!test_docs.empty()) {
    gain::AssignParameters(result.best_params, model.params());
    std::optional<double> threshold = o.threshold;
    if (!threshold && result.best_eval) threshold = result.log.evals[*result.best_eval].threshold;
    const auto test_prep = gain::Prepare(test_docs, vocab, rc.model);
    const gain::FactIndex test_index(test_docs, relations);
    const auto pred = gain::Predict(model, test_prep, rc.train.min_score);
    const auto report = gain::Evaluate(pred, test_index, signatures, threshold);
    WriteText(fs::path(o.out) / "test_report.txt", gain::FormatReport(report));
    gain::WritePredictions(fs::path(o.out) / "test_predictions.jsonl", pred, test_docs, relations);
    std::cout << gain::FormatReport(report);
  }
  return 0;
}

int RunEval(const Options& o, const std::vector<std::string>& argv) {
  EnsureOut(o);
  if (o.checkpoint.empty()) throw gain::ArgumentError("eval: --checkpoint is required");
  const gain::Checkpoint ckpt = gain::LoadCheckpoint(o.checkpoint);
  const gain::CheckpointInfo info = gain::ParseCheckpointMetadata(ckpt.metadata);
  gain::ModelConfig config = info.model;
  if (!o.ablate.empty()) config.ablations = gain::Ablations{};
  config.ablations = ParseAblations(o.ablate, config.ablations);
  if (!o.ablate.empty() && !(config.ablations == info.model.ablations)) {
    std::cerr << "warning: --ablate differs from the checkpoint's configuration\n";
  }

  gain::RelationMap relations = info.vocab.relations;
  relations.Freeze();
  const std::string path = !o.test.empty() ? o.test : o.dev;
  if (path.empty()) throw gain::ArgumentError("eval: --test or --dev is required");
  const auto docs = LoadSplit(path, relations);
  gain::TrainSignatures signatures;
  if (!o.train.empty()) signatures = gain::BuildTrainSignatures(LoadSplit(o.train, relations), relations);

  gain::RunConfig rc{config, info.train};
  WriteManifest(o, "eval", argv, ckpt.seed, json::parse(rc.ToJson()));

  gain::Rng init_rng(ckpt.seed);
  gain::GainModel model(config, init_rng);
  gain::AssignParameters(ckpt.params, model.params());
  const auto prep = gain::Prepare(docs, info.vocab, config);
  const gain::FactIndex index(docs, relations);
  const auto pred = gain::Predict(model, prep, info.train.min_score);
  const auto report = gain::Evaluate(pred, index, signatures, o.threshold);
  WriteText(fs::path(o.out) / "report.txt", gain::FormatReport(report));
  gain::WritePredictions(fs::path(o.out) / "predictions.jsonl", pred, docs, relations);
  std::cout << gain::FormatReport(report);
  return 0;
}

// Vocabulary of a corpus read on its own (graph commands need no training).
struct Loaded {
  gain::RelationMap relations;
  std::vector<gain::Document> docs;
  gain::Vocab vocab;
};

Loaded LoadStandalone(const Options& o) {
  Loaded l;
  if (!o.rel2id.empty()) l.relations = gain::RelationMap::FromFile(o.rel2id);
  l.docs = LoadSplit(OneSplit(o), l.relations);
  l.vocab = gain::BuildVocab(l.docs, l.relations);
  return l;
}

int RunBuildGraph(const Options& o, const std::vector<std::string>& argv) {
  EnsureOut(o);
  const gain::RunConfig rc = LoadRunConfig(o);
  WriteManifest(o, "build-graph", argv, rc.train.seed, json::parse(rc.ToJson()));
  const Loaded l = LoadStandalone(o);
  std::ofstream out(fs::path(o.out) / "graphs.txt", std::ios::binary);
  for (const auto& doc : l.docs) {
    const gain::EncodedDoc enc = gain::EncodeDocument(doc, l.vocab);
    const gain::DocGraphs g = gain::BuildDocGraphs(enc, rc.model);
    out << gain::DumpGraphs(doc.title, g.hmg, g.eg, g.paths);
  }
  std::cerr << "wrote graphs for " << l.docs.size() << " documents\n";
  return 0;
}

int RunInspectPaths(const Options& o, const std::vector<std::string>& argv) {
  EnsureOut(o);
  const gain::RunConfig rc = LoadRunConfig(o);
  WriteManifest(o, "inspect-paths", argv, rc.train.seed, json::parse(rc.ToJson()));
  const Loaded l = LoadStandalone(o);
  std::ostringstream text;
  for (const auto& doc : l.docs) {
    if (!o.title.empty() && doc.title != o.title) continue;
    const gain::EncodedDoc enc = gain::EncodeDocument(doc, l.vocab);
    const gain::DocGraphs g = gain::BuildDocGraphs(enc, rc.model);
    text << "document " << doc.title << "\n";
    auto name = [&](std::size_t e) { return std::to_string(e) + ":" + doc.entities[e].mentions.front().surface; };
    for (std::size_t h = 0; h < enc.num_entities; ++h) {
      for (std::size_t t = 0; t < enc.num_entities; ++t) {
        if (h == t || g.paths.Paths(h, t).empty()) continue;
        text << "  " << name(h) << " -> " << name(t) << " via";
        for (std::size_t m : g.paths.Paths(h, t)) text << " " << name(m);
        text << "\n";
      }
    }
  }
  WriteText(fs::path(o.out) / "paths.txt", text.str());
  std::cout << text.str();
  return 0;
}

int RunGradcheck(const Options& o, const std::vector<std::string>& argv) {
  const std::uint64_t seed = o.seed.value_or(0);
  gain::Rng rng(seed);
  gain::RandomDocOptions doc_opts;
  std::vector<gain::Document> docs;
  for (std::size_t i = 0; i < o.docs; ++i) docs.push_back(gain::RandomDocument(doc_opts, rng));
  gain::RelationMap relations;
  for (std::size_t r = 0; r < doc_opts.num_relations; ++r) relations.Resolve("R" + std::to_string(r));
  const gain::Vocab vocab = gain::BuildVocab(docs, relations);

  gain::ModelConfig config = gain::ToyConfig(vocab.words.size(), vocab.types.size(), relations.size());
  if (!o.config.empty()) {
    config = gain::RunConfig::FromFile(o.config).model;
    config.vocab_size = vocab.words.size();
    config.num_entity_types = vocab.types.size();
    config.num_relations = relations.size();
  }
  config.ablations = ParseAblations(o.ablate, config.ablations);
  if (!o.out.empty()) {
    EnsureOut(o);
    WriteManifest(o, "gradcheck", argv, seed, json::parse(config.ToJson()));
  }

  gain::Rng init_rng = rng.Fork(1);
  gain::GainModel model(config, init_rng);
  std::vector<gain::EncodedDoc> encoded;
  for (const auto& d : docs) encoded.push_back(gain::EncodeDocument(d, vocab));
  const gain::GradcheckReport r = gain::GradCheck(model, encoded);
  std::cout << "checked " << r.checked << " parameter elements\n"
            << "max relative error " << r.max_rel_error << " at " << r.worst_param << "[" << r.worst_index
            << "] (analytic " << r.worst_analytic << ", numeric " << r.worst_numeric << ")\n";
  return r.max_rel_error < 1e-4 ? 0 : 1;
}

int RunSynth(const Options& o, const std::vector<std::string>& argv) {
  EnsureOut(o);
  if (o.task != "two-hop") throw gain::ArgumentError("synth: unknown task '" + o.task + "'");
  const std::uint64_t seed = o.seed.value_or(0);
  json config = {{"task", o.task}, {"docs", o.docs}, {"test_docs", o.test_docs}, {"entities", o.entities}};
  WriteManifest(o, "synth", argv, seed, config);
  const gain::Rng root(seed);
  gain::TwoHopOptions opts;
  opts.num_entities = o.entities;
  const gain::RelationMap relations = gain::TwoHopRelations();

  gain::Rng train_rng = root.Fork(1);
  opts.num_docs = o.docs;
  gain::WriteCorpus(fs::path(o.out) / "train.json", gain::GenerateTwoHop(opts, train_rng), relations);
  gain::Rng test_rng = root.Fork(2);
  opts.num_docs = o.test_docs;
  gain::WriteCorpus(fs::path(o.out) / "test.json", gain::GenerateTwoHop(opts, test_rng), relations);
  relations.Save(fs::path(o.out) / "rel2id.txt");
  std::cerr << "wrote " << o.docs << " train and " << o.test_docs << " test documents\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Document-level relation extraction with mention and entity graphs"};
  app.require_subcommand(1);
  Options o;
  const std::vector<std::string> args(argv, argv + argc);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON config with optional 'model' and 'train' sections");
    sub->add_option("--seed", o.seed, "Random seed");
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--ablate", o.ablate, "Remove a component: hmg, inference or docnode (repeatable)")
        ->check(CLI::IsMember({"hmg", "inference", "docnode"}));
  };
  auto add_data = [&](CLI::App* sub) {
    sub->add_option("--train", o.train, "Training split (DocRED JSON)");
    sub->add_option("--dev", o.dev, "Development split");
    sub->add_option("--test", o.test, "Test split");
    sub->add_option("--rel2id", o.rel2id, "Relation id file");
  };

  auto* train = app.add_subcommand("train", "Train a model");
  add_common(train);
  add_data(train);
  train->add_option("--vectors", o.vectors, "Pretrained word vectors (text format)");
  train->add_option("--epochs", o.epochs, "Override the configured epoch count");
  train->add_option("--threshold", o.threshold, "Fixed test threshold")->check(CLI::Range(0.0, 1.0));

  auto* eval = app.add_subcommand("eval", "Score a split with a checkpoint");
  add_common(eval);
  add_data(eval);
  eval->add_option("--checkpoint", o.checkpoint, "Checkpoint file")->required();
  eval->add_option("--threshold", o.threshold, "Fixed threshold; selected on the split when absent")
      ->check(CLI::Range(0.0, 1.0));

  auto* graph = app.add_subcommand("build-graph", "Dump mention and entity graphs");
  add_common(graph);
  add_data(graph);

  auto* paths = app.add_subcommand("inspect-paths", "List two-hop paths between entities");
  add_common(paths);
  add_data(paths);
  paths->add_option("--title", o.title, "Only this document");

  auto* grad = app.add_subcommand("gradcheck", "Finite-difference gradient check on random toy documents");
  add_common(grad);
  grad->add_option("--docs", o.docs, "Number of toy documents")->default_val(5);

  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  add_common(synth);
  synth->add_option("--task", o.task, "Task name")->default_val("two-hop");
  synth->add_option("--docs", o.docs, "Training documents")->default_val(200);
  synth->add_option("--test-docs", o.test_docs, "Test documents")->default_val(50);
  synth->add_option("--entities", o.entities, "Entities per document (at least 3)")->default_val(3);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*train) return RunTrain(o, args);
    if (*eval) return RunEval(o, args);
    if (*graph) return RunBuildGraph(o, args);
    if (*paths) return RunInspectPaths(o, args);
    if (*grad) return RunGradcheck(o, args);
    if (*synth) return RunSynth(o, args);
  } catch (const gain::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const gain::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 1;
  } catch (const gain::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const gain::ArgumentError& e) {
    std::cerr << "invalid arguments: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
