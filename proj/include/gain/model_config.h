#pragma once

#include <cstddef>
#include <filesystem>
#include <string>

#include "gain/tape.h"

namespace gain {

enum class EncoderKind { kBiLstm, kConv };

struct Ablations {
  bool no_hmg = false;
  bool no_inference = false;
  bool no_document_node = false;

  bool operator==(const Ablations&) const = default;
};

// Hyperparameters of the model. Defaults are the GloVe-setting values; the
// vocabulary-dependent sizes are filled in from the data.
struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t num_entity_types = 0;
  std::size_t num_relations = 0;
  // Coreference table holds ids 0..max_entities.
  std::size_t max_entities = 64;

  std::size_t word_dim = 100;
  std::size_t type_dim = 20;
  std::size_t coref_dim = 20;

  EncoderKind encoder_kind = EncoderKind::kBiLstm;
  std::size_t encoder_hidden = 256;
  std::size_t conv_window = 3;

  std::size_t gcn_layers = 2;
  std::size_t gcn_hidden = 512;
  // Width of directed entity-edge vectors; 0 means gcn_hidden.
  std::size_t edge_dim = 0;
  std::size_t classifier_hidden = 512;

  double dropout = 0.6;
  Activation activation = Activation::kRelu;
  bool self_loop = true;
  Ablations ablations;

  std::size_t input_dim() const { return word_dim + type_dim + coref_dim; }
  // Width of encoder states g_i and of layer-0 node states.
  std::size_t encoder_dim() const;
  std::size_t node_dim() const { return encoder_dim() + gcn_layers * gcn_hidden; }
  std::size_t entity_dim() const { return node_dim(); }
  std::size_t resolved_edge_dim() const { return edge_dim == 0 ? gcn_hidden : edge_dim; }
  std::size_t path_dim() const { return 4 * resolved_edge_dim(); }
  // 0 when the document block is ablated.
  std::size_t document_dim() const;
  std::size_t classifier_input_dim() const;

  // Throws ConfigError on non-positive sizes or out-of-range rates.
  void Validate() const;

  bool operator==(const ModelConfig&) const = default;

  // Flat JSON object keyed by field name; ablations appear as the three
  // top-level booleans no_hmg, no_inference, no_document_node.
  std::string ToJson() const;
  // Missing keys keep their defaults; unknown keys are rejected.
  static ModelConfig FromJson(const std::string& text);
  static ModelConfig FromFile(const std::filesystem::path& path);
};

}  // namespace gain
