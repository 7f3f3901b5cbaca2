#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gain/encoding.h"
#include "gain/graph.h"
#include "gain/model_config.h"
#include "gain/optimizer.h"
#include "gain/rng.h"
#include "gain/tape.h"

namespace gain {

// Graph structures the forward pass needs, built once per document.
struct DocGraphs {
  MentionGraph hmg;
  EntityGraph eg;
  PathSet paths;
};

DocGraphs BuildDocGraphs(const EncodedDoc& doc, const ModelConfig& config);

// One GCN edge type: undirected edges between node ids, or the self edge.
struct EdgeTypeSpec {
  std::string name;
  std::vector<Edge> edges;
  bool self = false;
};

struct EncoderOutput {
  Tensor tokens;   // [n_tokens x encoder_dim]
  Tensor summary;  // [1 x encoder_dim], mean over tokens
};

struct ForwardOutput {
  Tensor probs;  // [pairs x relations]
  Tensor loss;   // scalar mean BCE over the pair x relation grid
  std::vector<std::size_t> pair_indices;
};

// Lookup from a directed entity edge to its row in the edge table.
class EdgeIndex {
 public:
  explicit EdgeIndex(const EntityGraph& eg);
  const std::vector<Edge>& directed() const { return directed_; }
  // Throws ArgumentError for pairs that are not EG-adjacent.
  std::size_t Row(std::size_t from, std::size_t to) const;

 private:
  std::size_t n_;
  std::vector<Edge> directed_;
  std::vector<std::size_t> rows_;
};

// Parameter names and shapes implied by a config, in creation order.
std::vector<std::pair<std::string, Shape>> ParameterShapes(const ModelConfig& config);

class GainModel {
 public:
  // `word_embeddings`, when given, must be [vocab_size x word_dim]; otherwise
  // the table is drawn uniformly from [-0.1, 0.1].
  GainModel(ModelConfig config, Rng& init_rng, Tensor word_embeddings = Tensor());

  const ModelConfig& config() const { return config_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  const Tensor& param(const std::string& name) const;

  // Token states g_i from [E_w; E_t; E_c] inputs, plus the document summary.
  EncoderOutput Encode(Tape& tape, const EncodedDoc& doc, bool training, Rng& rng) const;

  // Layer-0 states: mention nodes average their span's token states; the
  // document node (last row, if present) takes the document summary.
  Tensor InitNodeStates(Tape& tape, const EncoderOutput& encoded, const MentionGraph& graph) const;

  // Typed-edge GCN. Returns [h0; h1; ...; hL] per node.
  Tensor GcnForward(Tape& tape, const Tensor& h0, std::span<const EdgeTypeSpec> edge_types, bool training,
                    Rng& rng) const;

  // Mean of each entity's mention rows of `node_states`.
  Tensor EntityRepresentations(Tape& tape, const Tensor& node_states, const MentionGraph& graph) const;

  // act(W_q [e_i; e_j] + b_q) for each directed (i, j); rows follow `edges`.
  Tensor EdgeRepresentations(Tape& tape, const Tensor& entities, std::span<const Edge> edges) const;

  // [e_ho; e_ot; e_to; e_oh] for every intermediate o of (h, t), one row each.
  // Throws ArgumentError if some o is not a two-hop intermediate of (h, t).
  Tensor PathRepresentations(Tape& tape, const Tensor& edge_reps, const EdgeIndex& index, std::size_t head,
                             std::size_t tail, std::span<const std::size_t> middles, const PathSet& paths) const;

  // Attention over paths with query [e_h; e_t] (both [1 x entity_dim]).
  Tensor FusePaths(Tape& tape, const Tensor& head, const Tensor& tail, const Tensor& path_reps) const;
  // Same, with the query already multiplied by W_l ([1 x path_dim]).
  Tensor FuseProjectedPaths(Tape& tape, const Tensor& projected_query, const Tensor& path_reps) const;

  // Pair features and two-layer scorer; returns probabilities [pairs x R].
  // `document` is [pairs x document_dim] or undefined when ablated; `paths`
  // is [pairs x path_dim] or undefined when the inference block is ablated.
  Tensor Classify(Tape& tape, const Tensor& heads, const Tensor& tails, const Tensor& document,
                  const Tensor& paths) const;

  // Full pass over the selected candidate pairs.
  ForwardOutput Forward(Tape& tape, const EncodedDoc& doc, const DocGraphs& graphs,
                        std::span<const std::size_t> pair_indices, bool training, Rng& rng) const;

 private:
  Tensor EncodeBiLstm(Tape& tape, const Tensor& inputs) const;
  Tensor EncodeConv(Tape& tape, const Tensor& inputs) const;
  Tensor RunLstm(Tape& tape, const Tensor& projected, const std::string& prefix, bool reverse) const;

  ModelConfig config_;
  ParamStore params_;
};

}  // namespace gain
