#include "gain/model_config.h"

#include <fstream>
#include <sstream>

#include "gain/errors.h"
#include "json.hpp"

namespace gain {

using nlohmann::json;

std::size_t ModelConfig::encoder_dim() const {
  return encoder_kind == EncoderKind::kBiLstm ? 2 * encoder_hidden : encoder_hidden;
}

std::size_t ModelConfig::document_dim() const {
  if (ablations.no_document_node) return 0;
  // Without the mention graph the document vector is the raw encoder summary.
  return ablations.no_hmg ? encoder_dim() : node_dim();
}

std::size_t ModelConfig::classifier_input_dim() const {
  return 4 * entity_dim() + document_dim() + (ablations.no_inference ? 0 : path_dim());
}

void ModelConfig::Validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw ConfigError(std::string("model config: ") + name + " must be positive");
  };
  positive(vocab_size, "vocab_size");
  positive(num_entity_types, "num_entity_types");
  positive(num_relations, "num_relations");
  positive(max_entities, "max_entities");
  positive(word_dim, "word_dim");
  positive(type_dim, "type_dim");
  positive(coref_dim, "coref_dim");
  positive(encoder_hidden, "encoder_hidden");
  positive(gcn_layers, "gcn_layers");
  positive(gcn_hidden, "gcn_hidden");
  positive(classifier_hidden, "classifier_hidden");
  if (encoder_kind == EncoderKind::kConv && conv_window % 2 == 0) {
    throw ConfigError("model config: conv_window must be odd");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("model config: dropout must be in [0, 1)");
}

std::string ModelConfig::ToJson() const {
  json j;
  j["vocab_size"] = vocab_size;
  j["num_entity_types"] = num_entity_types;
  j["num_relations"] = num_relations;
  j["max_entities"] = max_entities;
  j["word_dim"] = word_dim;
  j["type_dim"] = type_dim;
  j["coref_dim"] = coref_dim;
  j["encoder_kind"] = encoder_kind == EncoderKind::kBiLstm ? "bilstm" : "conv";
  j["encoder_hidden"] = encoder_hidden;
  j["conv_window"] = conv_window;
  j["gcn_layers"] = gcn_layers;
  j["gcn_hidden"] = gcn_hidden;
  j["edge_dim"] = edge_dim;
  j["classifier_hidden"] = classifier_hidden;
  j["dropout"] = dropout;
  j["activation"] = activation == Activation::kRelu ? "relu" : "tanh";
  j["self_loop"] = self_loop;
  j["no_hmg"] = ablations.no_hmg;
  j["no_inference"] = ablations.no_inference;
  j["no_document_node"] = ablations.no_document_node;
  return j.dump(2);
}

ModelConfig ModelConfig::FromJson(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("model config: expected a flat object");
  ModelConfig c;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const json& v = it.value();
    try {
      if (key == "vocab_size") c.vocab_size = v.get<std::size_t>();
      else if (key == "num_entity_types") c.num_entity_types = v.get<std::size_t>();
      else if (key == "num_relations") c.num_relations = v.get<std::size_t>();
      else if (key == "max_entities") c.max_entities = v.get<std::size_t>();
      else if (key == "word_dim") c.word_dim = v.get<std::size_t>();
      else if (key == "type_dim") c.type_dim = v.get<std::size_t>();
      else if (key == "coref_dim") c.coref_dim = v.get<std::size_t>();
      else if (key == "encoder_hidden") c.encoder_hidden = v.get<std::size_t>();
      else if (key == "conv_window") c.conv_window = v.get<std::size_t>();
      else if (key == "gcn_layers") c.gcn_layers = v.get<std::size_t>();
      else if (key == "gcn_hidden") c.gcn_hidden = v.get<std::size_t>();
      else if (key == "edge_dim") c.edge_dim = v.get<std::size_t>();
      else if (key == "classifier_hidden") c.classifier_hidden = v.get<std::size_t>();
      else if (key == "dropout") c.dropout = v.get<double>();
      else if (key == "self_loop") c.self_loop = v.get<bool>();
      else if (key == "no_hmg") c.ablations.no_hmg = v.get<bool>();
      else if (key == "no_inference") c.ablations.no_inference = v.get<bool>();
      else if (key == "no_document_node") c.ablations.no_document_node = v.get<bool>();
      else if (key == "encoder_kind") {
        const auto s = v.get<std::string>();
        if (s == "bilstm") c.encoder_kind = EncoderKind::kBiLstm;
        else if (s == "conv") c.encoder_kind = EncoderKind::kConv;
        else throw ConfigError("model config: encoder_kind must be 'bilstm' or 'conv'");
      } else if (key == "activation") {
        const auto s = v.get<std::string>();
        if (s == "relu") c.activation = Activation::kRelu;
        else if (s == "tanh") c.activation = Activation::kTanh;
        else throw ConfigError("model config: activation must be 'relu' or 'tanh'");
      } else {
        throw ConfigError("model config: unknown key '" + key + "'");
      }
    } catch (const json::exception& e) {
      throw ConfigError("model config: bad value for '" + key + "': " + e.what());
    }
  }
  return c;
}

ModelConfig ModelConfig::FromFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return FromJson(buf.str());
}

}  // namespace gain
