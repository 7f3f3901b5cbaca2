#include "gain/model.h"

#include <cmath>
#include <limits>

#include "gain/errors.h"

namespace gain {

namespace {

constexpr std::size_t kNoRow = std::numeric_limits<std::size_t>::max();

bool EndsWith(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool StartsWith(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

std::vector<std::string> GcnEdgeTypeNames(const ModelConfig& config) {
  std::vector<std::string> names;
  if (config.ablations.no_hmg) {
    names.push_back("entity");
  } else {
    names.push_back("intra");
    names.push_back("inter");
    if (!config.ablations.no_document_node) names.push_back("document");
  }
  if (config.self_loop) names.push_back("self");
  return names;
}

std::string GcnParam(std::size_t layer, const std::string& type, const char* what) {
  return "gcn." + std::to_string(layer) + "." + type + "." + what;
}

Tensor Adjacency(std::size_t n, std::span<const Edge> edges) {
  Tensor a = Tensor::Zeros({n, n});
  auto data = a.mutable_data();
  for (const auto& [u, v] : edges) {
    data[u * n + v] = 1.0;
    data[v * n + u] = 1.0;
  }
  return a;
}

}  // namespace

DocGraphs BuildDocGraphs(const EncodedDoc& doc, const ModelConfig& config) {
  DocGraphs g;
  g.hmg = BuildMentionGraph(doc, config.ablations.no_document_node);
  g.eg = BuildEntityGraph(g.hmg);
  g.paths = EnumeratePaths(g.eg);
  return g;
}

EdgeIndex::EdgeIndex(const EntityGraph& eg) : n_(eg.num_entities), rows_(eg.num_entities * eg.num_entities, kNoRow) {
  for (const auto& [i, j] : eg.edges) {
    rows_[i * n_ + j] = directed_.size();
    directed_.emplace_back(i, j);
    rows_[j * n_ + i] = directed_.size();
    directed_.emplace_back(j, i);
  }
}

std::size_t EdgeIndex::Row(std::size_t from, std::size_t to) const {
  if (from >= n_ || to >= n_ || rows_[from * n_ + to] == kNoRow) {
    throw ArgumentError("no entity-graph edge " + std::to_string(from) + " -> " + std::to_string(to));
  }
  return rows_[from * n_ + to];
}

std::vector<std::pair<std::string, Shape>> ParameterShapes(const ModelConfig& config) {
  std::vector<std::pair<std::string, Shape>> shapes;
  shapes.push_back({"embed.word", {config.vocab_size, config.word_dim}});
  shapes.push_back({"embed.type", {config.num_entity_types, config.type_dim}});
  shapes.push_back({"embed.coref", {config.max_entities + 1, config.coref_dim}});

  const std::size_t in = config.input_dim();
  const std::size_t hidden = config.encoder_hidden;
  if (config.encoder_kind == EncoderKind::kBiLstm) {
    for (const char* dir : {"fwd", "bwd"}) {
      const std::string prefix = std::string("encoder.") + dir + ".";
      shapes.push_back({prefix + "w_ih", {in, 4 * hidden}});
      shapes.push_back({prefix + "w_hh", {hidden, 4 * hidden}});
      shapes.push_back({prefix + "bias", {4 * hidden}});
    }
  } else {
    shapes.push_back({"encoder.conv.weight", {config.conv_window * in, hidden}});
    shapes.push_back({"encoder.conv.bias", {hidden}});
  }

  const std::size_t d0 = config.encoder_dim();
  const std::size_t dg = config.gcn_hidden;
  if (d0 != dg) {
    shapes.push_back({"gcn.input_proj.weight", {d0, dg}});
    shapes.push_back({"gcn.input_proj.bias", {dg}});
  }
  for (std::size_t l = 0; l < config.gcn_layers; ++l) {
    for (const auto& type : GcnEdgeTypeNames(config)) {
      shapes.push_back({GcnParam(l, type, "weight"), {dg, dg}});
      shapes.push_back({GcnParam(l, type, "bias"), {dg}});
    }
  }

  const std::size_t de = config.resolved_edge_dim();
  if (!config.ablations.no_inference) {
    shapes.push_back({"edge.weight", {2 * config.entity_dim(), de}});
    shapes.push_back({"edge.bias", {de}});
    shapes.push_back({"path_attn.weight", {2 * config.entity_dim(), config.path_dim()}});
  }
  shapes.push_back({"classifier.hidden.weight", {config.classifier_input_dim(), config.classifier_hidden}});
  shapes.push_back({"classifier.hidden.bias", {config.classifier_hidden}});
  shapes.push_back({"classifier.out.weight", {config.classifier_hidden, config.num_relations}});
  shapes.push_back({"classifier.out.bias", {config.num_relations}});
  return shapes;
}

GainModel::GainModel(ModelConfig config, Rng& init_rng, Tensor word_embeddings) : config_(std::move(config)) {
  config_.Validate();
  for (auto& [name, shape] : ParameterShapes(config_)) {
    std::vector<double> data(NumElements(shape), 0.0);
    if (name == "embed.word" && word_embeddings.defined()) {
      if (word_embeddings.shape() != shape) {
        throw ConfigError("word embeddings have shape " + ShapeString(word_embeddings.shape()) + ", expected " +
                          ShapeString(shape));
      }
      data.assign(word_embeddings.data().begin(), word_embeddings.data().end());
    } else if (StartsWith(name, "embed.")) {
      for (double& v : data) v = init_rng.Uniform(-0.1, 0.1);
    } else if (StartsWith(name, "encoder.fwd.") || StartsWith(name, "encoder.bwd.")) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(config_.encoder_hidden));
      for (double& v : data) v = init_rng.Uniform(-bound, bound);
    } else if (!EndsWith(name, "bias")) {
      const double bound = std::sqrt(6.0 / static_cast<double>(shape[0] + shape[1]));
      for (double& v : data) v = init_rng.Uniform(-bound, bound);
    }
    params_.emplace(name, Tensor(shape, std::move(data), true));
  }
}

const Tensor& GainModel::param(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ArgumentError("model has no parameter '" + name + "'");
  return it->second;
}

EncoderOutput GainModel::Encode(Tape& tape, const EncodedDoc& doc, bool training, Rng& rng) const {
  if (doc.num_tokens() == 0) throw ArgumentError("encode: document '" + doc.title + "' has no tokens");
  for (std::size_t c : doc.coref_ids) {
    if (c > config_.max_entities) {
      throw ArgumentError("encode: document '" + doc.title + "' has more than max_entities=" +
                          std::to_string(config_.max_entities) + " entities");
    }
  }
  Tensor words = tape.EmbeddingLookup(param("embed.word"), doc.word_ids);
  Tensor types = tape.EmbeddingLookup(param("embed.type"), doc.type_ids);
  Tensor corefs = tape.EmbeddingLookup(param("embed.coref"), doc.coref_ids);
  Tensor inputs = tape.Concat({words, types, corefs}, 1);
  inputs = tape.Dropout(inputs, config_.dropout, training, rng);

  EncoderOutput out;
  out.tokens = config_.encoder_kind == EncoderKind::kBiLstm ? EncodeBiLstm(tape, inputs) : EncodeConv(tape, inputs);
  out.summary = tape.Reshape(tape.Mean(out.tokens), {1, config_.encoder_dim()});
  return out;
}

Tensor GainModel::RunLstm(Tape& tape, const Tensor& projected, const std::string& prefix, bool reverse) const {
  const std::size_t n = projected.dim(0);
  const std::size_t h = config_.encoder_hidden;
  const Tensor& w_hh = param(prefix + "w_hh");
  Tensor hidden = Tensor::Zeros({1, h});
  Tensor cell = Tensor::Zeros({1, h});
  std::vector<Tensor> outputs(n);
  for (std::size_t step = 0; step < n; ++step) {
    const std::size_t pos = reverse ? n - 1 - step : step;
    Tensor z = tape.Add(tape.Slice(projected, 0, pos, pos + 1), tape.MatMul(hidden, w_hh));
    Tensor in_gate = tape.Sigmoid(tape.Slice(z, 1, 0, h));
    Tensor forget_gate = tape.Sigmoid(tape.Slice(z, 1, h, 2 * h));
    Tensor candidate = tape.Tanh(tape.Slice(z, 1, 2 * h, 3 * h));
    Tensor out_gate = tape.Sigmoid(tape.Slice(z, 1, 3 * h, 4 * h));
    cell = tape.Add(tape.Mul(forget_gate, cell), tape.Mul(in_gate, candidate));
    hidden = tape.Mul(out_gate, tape.Tanh(cell));
    outputs[pos] = hidden;
  }
  return tape.Concat(outputs, 0);
}

Tensor GainModel::EncodeBiLstm(Tape& tape, const Tensor& inputs) const {
  Tensor fwd = RunLstm(tape, tape.Linear(inputs, param("encoder.fwd.w_ih"), param("encoder.fwd.bias")),
                       "encoder.fwd.", false);
  Tensor bwd = RunLstm(tape, tape.Linear(inputs, param("encoder.bwd.w_ih"), param("encoder.bwd.bias")),
                       "encoder.bwd.", true);
  return tape.Concat({fwd, bwd}, 1);
}

Tensor GainModel::EncodeConv(Tape& tape, const Tensor& inputs) const {
  const std::size_t n = inputs.dim(0);
  const std::size_t pad = config_.conv_window / 2;
  Tensor zeros = Tensor::Zeros({pad, inputs.dim(1)});
  Tensor padded = tape.Concat({zeros, inputs, zeros}, 0);
  std::vector<Tensor> windows;
  for (std::size_t k = 0; k < config_.conv_window; ++k) windows.push_back(tape.Slice(padded, 0, k, k + n));
  Tensor stacked = tape.Concat(windows, 1);
  return tape.Activate(config_.activation,
                       tape.Linear(stacked, param("encoder.conv.weight"), param("encoder.conv.bias")));
}

Tensor GainModel::InitNodeStates(Tape& tape, const EncoderOutput& encoded, const MentionGraph& graph) const {
  const std::size_t n_tokens = encoded.tokens.dim(0);
  const std::size_t n_mentions = graph.mentions.size();
  Tensor pool = Tensor::Zeros({n_mentions, n_tokens});
  auto w = pool.mutable_data();
  for (std::size_t i = 0; i < n_mentions; ++i) {
    const MentionSpan& m = graph.mentions[i];
    if (m.begin >= m.end || m.end > n_tokens) throw ArgumentError("init_node_states: mention span out of range");
    const double inv = 1.0 / static_cast<double>(m.end - m.begin);
    for (std::size_t j = m.begin; j < m.end; ++j) w[i * n_tokens + j] = inv;
  }
  Tensor mentions = tape.MatMul(pool, encoded.tokens);
  if (!graph.has_document_node) return mentions;
  return tape.Concat({mentions, encoded.summary}, 0);
}

Tensor GainModel::GcnForward(Tape& tape, const Tensor& h0, std::span<const EdgeTypeSpec> edge_types, bool training,
                             Rng& rng) const {
  const std::size_t n = h0.dim(0);
  Tensor x = h0;
  if (params_.contains("gcn.input_proj.weight")) {
    x = tape.Linear(h0, param("gcn.input_proj.weight"), param("gcn.input_proj.bias"));
  }
  std::vector<Tensor> adjacency;
  for (const EdgeTypeSpec& type : edge_types) {
    adjacency.push_back(type.self ? Tensor() : Adjacency(n, type.edges));
  }
  std::vector<Tensor> layers{h0};
  for (std::size_t l = 0; l < config_.gcn_layers; ++l) {
    Tensor total;
    for (std::size_t k = 0; k < edge_types.size(); ++k) {
      Tensor gathered = edge_types[k].self ? x : tape.MatMul(adjacency[k], x);
      Tensor term = tape.Linear(gathered, param(GcnParam(l, edge_types[k].name, "weight")),
                                param(GcnParam(l, edge_types[k].name, "bias")));
      total = total.defined() ? tape.Add(total, term) : term;
    }
    if (!total.defined()) total = Tensor::Zeros({n, config_.gcn_hidden});
    x = tape.Dropout(tape.Activate(config_.activation, total), config_.dropout, training, rng);
    layers.push_back(x);
  }
  return tape.Concat(layers, 1);
}

Tensor GainModel::EntityRepresentations(Tape& tape, const Tensor& node_states, const MentionGraph& graph) const {
  const std::size_t n_nodes = node_states.dim(0);
  Tensor pool = Tensor::Zeros({graph.num_entities, n_nodes});
  std::vector<std::size_t> counts(graph.num_entities, 0);
  for (const MentionSpan& m : graph.mentions) ++counts[m.entity];
  auto w = pool.mutable_data();
  for (std::size_t i = 0; i < graph.mentions.size(); ++i) {
    const std::size_t e = graph.mentions[i].entity;
    w[e * n_nodes + i] = 1.0 / static_cast<double>(counts[e]);
  }
  for (std::size_t e = 0; e < graph.num_entities; ++e) {
    if (counts[e] == 0) throw ArgumentError("entity_representations: entity " + std::to_string(e) + " has no mentions");
  }
  return tape.MatMul(pool, node_states);
}

Tensor GainModel::EdgeRepresentations(Tape& tape, const Tensor& entities, std::span<const Edge> edges) const {
  std::vector<std::size_t> src, dst;
  for (const auto& [i, j] : edges) {
    if (i == j) throw ArgumentError("edge_representation: self edge " + std::to_string(i));
    src.push_back(i);
    dst.push_back(j);
  }
  Tensor pairs = tape.Concat({tape.EmbeddingLookup(entities, src), tape.EmbeddingLookup(entities, dst)}, 1);
  return tape.Activate(config_.activation, tape.Linear(pairs, param("edge.weight"), param("edge.bias")));
}

Tensor GainModel::PathRepresentations(Tape& tape, const Tensor& edge_reps, const EdgeIndex& index, std::size_t head,
                                      std::size_t tail, std::span<const std::size_t> middles,
                                      const PathSet& paths) const {
  std::vector<std::size_t> ho, ot, to, oh;
  for (std::size_t o : middles) {
    if (!paths.Contains(head, tail, o)) {
      throw ArgumentError("path_representation: entity " + std::to_string(o) + " is not on a path " +
                          std::to_string(head) + " -> " + std::to_string(tail));
    }
    ho.push_back(index.Row(head, o));
    ot.push_back(index.Row(o, tail));
    to.push_back(index.Row(tail, o));
    oh.push_back(index.Row(o, head));
  }
  return tape.Concat({tape.EmbeddingLookup(edge_reps, ho), tape.EmbeddingLookup(edge_reps, ot),
                      tape.EmbeddingLookup(edge_reps, to), tape.EmbeddingLookup(edge_reps, oh)},
                     1);
}

Tensor GainModel::FuseProjectedPaths(Tape& tape, const Tensor& projected_query, const Tensor& path_reps) const {
  const std::size_t k = path_reps.dim(0);
  if (k == 0) return Tensor::Zeros({1, path_reps.dim(1)});
  Tensor scores = tape.Activate(config_.activation, tape.MatMul(path_reps, tape.Transpose(projected_query)));
  Tensor weights = tape.Reshape(tape.Softmax(tape.Reshape(scores, {k})), {1, k});
  return tape.MatMul(weights, path_reps);
}

Tensor GainModel::FusePaths(Tape& tape, const Tensor& head, const Tensor& tail, const Tensor& path_reps) const {
  Tensor query = tape.MatMul(tape.Concat({head, tail}, 1), param("path_attn.weight"));
  return FuseProjectedPaths(tape, query, path_reps);
}

Tensor GainModel::Classify(Tape& tape, const Tensor& heads, const Tensor& tails, const Tensor& document,
                           const Tensor& paths) const {
  std::vector<Tensor> parts{heads, tails, tape.Abs(tape.Sub(heads, tails)), tape.Mul(heads, tails)};
  if (document.defined()) parts.push_back(document);
  if (paths.defined()) parts.push_back(paths);
  Tensor features = tape.Concat(parts, 1);
  Tensor hidden = tape.Activate(
      config_.activation, tape.Linear(features, param("classifier.hidden.weight"), param("classifier.hidden.bias")));
  return tape.Sigmoid(tape.Linear(hidden, param("classifier.out.weight"), param("classifier.out.bias")));
}

ForwardOutput GainModel::Forward(Tape& tape, const EncodedDoc& doc, const DocGraphs& graphs,
                                 std::span<const std::size_t> pair_indices, bool training, Rng& rng) const {
  if (pair_indices.empty()) throw ArgumentError("forward: document '" + doc.title + "' has no candidate pairs");
  if (doc.num_relations != config_.num_relations) {
    throw ArgumentError("forward: document encoded with " + std::to_string(doc.num_relations) +
                        " relations, model has " + std::to_string(config_.num_relations));
  }
  const Ablations& ab = config_.ablations;
  EncoderOutput encoded = Encode(tape, doc, training, rng);

  Tensor entities;
  Tensor document_row;
  if (!ab.no_hmg) {
    std::vector<EdgeTypeSpec> types{{"intra", graphs.hmg.intra_entity, false},
                                    {"inter", graphs.hmg.inter_entity, false}};
    if (graphs.hmg.has_document_node) types.push_back({"document", graphs.hmg.document, false});
    if (config_.self_loop) types.push_back({"self", {}, true});
    Tensor nodes = GcnForward(tape, InitNodeStates(tape, encoded, graphs.hmg), types, training, rng);
    entities = EntityRepresentations(tape, nodes, graphs.hmg);
    if (graphs.hmg.has_document_node) {
      const std::size_t d = graphs.hmg.document_node();
      document_row = tape.Slice(nodes, 0, d, d + 1);
    }
  } else {
    std::vector<EdgeTypeSpec> types{{"entity", graphs.eg.edges, false}};
    if (config_.self_loop) types.push_back({"self", {}, true});
    Tensor initial = EntityRepresentations(tape, InitNodeStates(tape, encoded, graphs.hmg), graphs.hmg);
    entities = GcnForward(tape, initial, types, training, rng);
    if (!ab.no_document_node) document_row = encoded.summary;
  }

  std::vector<std::size_t> heads, tails;
  for (std::size_t idx : pair_indices) {
    const CandidatePair& p = doc.pairs.at(idx);
    heads.push_back(p.head);
    tails.push_back(p.tail);
  }
  Tensor head_rows = tape.EmbeddingLookup(entities, heads);
  Tensor tail_rows = tape.EmbeddingLookup(entities, tails);
  Tensor document_rows;
  if (document_row.defined()) {
    const std::vector<std::size_t> zeros(pair_indices.size(), 0);
    document_rows = tape.EmbeddingLookup(document_row, zeros);
  }

  Tensor path_rows;
  if (!ab.no_inference) {
    EdgeIndex index(graphs.eg);
    std::vector<std::size_t> with_paths;
    for (std::size_t j = 0; j < heads.size(); ++j)
      if (!graphs.paths.Paths(heads[j], tails[j]).empty()) with_paths.push_back(j);

    Tensor zero_row = Tensor::Zeros({1, config_.path_dim()});
    std::vector<Tensor> rows(heads.size(), zero_row);
    if (!with_paths.empty()) {
      Tensor edge_reps = EdgeRepresentations(tape, entities, index.directed());
      std::vector<std::size_t> qh, qt;
      for (std::size_t j : with_paths) {
        qh.push_back(heads[j]);
        qt.push_back(tails[j]);
      }
      Tensor queries = tape.MatMul(
          tape.Concat({tape.EmbeddingLookup(entities, qh), tape.EmbeddingLookup(entities, qt)}, 1),
          param("path_attn.weight"));
      for (std::size_t q = 0; q < with_paths.size(); ++q) {
        const std::size_t j = with_paths[q];
        const auto& middles = graphs.paths.Paths(heads[j], tails[j]);
        Tensor reps = PathRepresentations(tape, edge_reps, index, heads[j], tails[j], middles, graphs.paths);
        rows[j] = FuseProjectedPaths(tape, tape.Slice(queries, 0, q, q + 1), reps);
      }
    }
    path_rows = tape.Concat(rows, 0);
  }

  ForwardOutput out;
  out.pair_indices.assign(pair_indices.begin(), pair_indices.end());
  out.probs = Classify(tape, head_rows, tail_rows, document_rows, path_rows);

  const std::size_t r = config_.num_relations;
  Tensor targets = Tensor::Zeros({pair_indices.size(), r});
  auto t = targets.mutable_data();
  for (std::size_t j = 0; j < pair_indices.size(); ++j) {
    const auto& src = doc.pairs[pair_indices[j]].targets;
    std::copy(src.begin(), src.end(), t.begin() + j * r);
  }
  Tensor mask = Tensor::Full({pair_indices.size(), r}, 1.0);
  out.loss = tape.BceLoss(out.probs, targets, mask);
  return out;
}

}  // namespace gain
