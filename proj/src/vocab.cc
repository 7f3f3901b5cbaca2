#include "gain/vocab.h"

#include <fstream>
#include <sstream>

#include "gain/errors.h"
#include "json.hpp"

namespace gain {

std::size_t Vocab::WordId(const std::string& word) const {
  auto it = word_ids.find(word);
  return it == word_ids.end() ? kUnknownWord : it->second;
}

std::size_t Vocab::TypeId(const std::string& tag) const {
  auto it = type_ids.find(tag);
  return it == type_ids.end() ? kNoneType : it->second;
}

std::string Vocab::ToJson() const {
  nlohmann::json j;
  j["words"] = words;
  j["types"] = types;
  j["relations"] = relations.names();
  return j.dump();
}

Vocab Vocab::FromJson(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw LoadError(std::string("vocabulary: ") + e.what());
  }
  Vocab v;
  v.words = j.at("words").get<std::vector<std::string>>();
  for (std::size_t i = 0; i < v.words.size(); ++i) v.word_ids.emplace(v.words[i], i);
  v.types = j.at("types").get<std::vector<std::string>>();
  for (std::size_t i = 0; i < v.types.size(); ++i) v.type_ids.emplace(v.types[i], i);
  v.relations = RelationMap::FromNames(j.at("relations").get<std::vector<std::string>>());
  return v;
}

Vocab BuildVocab(const std::vector<Document>& docs, const RelationMap& relations, std::size_t min_count) {
  if (docs.empty()) throw ArgumentError("build_vocab: no documents");
  std::map<std::string, std::size_t> counts;
  std::map<std::string, std::size_t> tags;
  for (const Document& doc : docs) {
    for (const auto& sent : doc.sentences)
      for (const auto& w : sent) ++counts[w];
    for (const Entity& e : doc.entities)
      for (const Mention& m : e.mentions) tags.emplace(m.type_tag, 0);
  }
  Vocab v;
  v.words.push_back("<unk>");
  for (const auto& [word, count] : counts) {
    if (count < min_count || word == "<unk>") continue;
    v.word_ids.emplace(word, v.words.size());
    v.words.push_back(word);
  }
  v.word_ids.emplace("<unk>", Vocab::kUnknownWord);
  v.types.push_back("<none>");
  for (const auto& [tag, unused] : tags) {
    v.type_ids.emplace(tag, v.types.size());
    v.types.push_back(tag);
  }
  v.relations = relations;
  v.relations.Freeze();
  return v;
}

Tensor InitWordEmbeddings(const Vocab& vocab, std::size_t dim, Rng& rng,
                          const std::optional<std::filesystem::path>& pretrained) {
  std::vector<double> data(vocab.words.size() * dim);
  for (double& v : data) v = rng.Uniform(-0.1, 0.1);
  if (pretrained) {
    std::ifstream in(*pretrained);
    if (!in) throw ConfigError("cannot open pretrained vectors " + pretrained->string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::istringstream fields(line);
      std::string token;
      if (!(fields >> token)) continue;
      std::vector<double> values;
      double x = 0.0;
      while (fields >> x) values.push_back(x);
      if (values.size() != dim) {
        throw ConfigError(pretrained->string() + ":" + std::to_string(line_no) + ": vector has " +
                          std::to_string(values.size()) + " dimensions, config expects " + std::to_string(dim));
      }
      auto it = vocab.word_ids.find(token);
      if (it == vocab.word_ids.end()) continue;
      std::copy(values.begin(), values.end(), data.begin() + it->second * dim);
    }
  }
  return Tensor({vocab.words.size(), dim}, std::move(data), true);
}

}  // namespace gain
