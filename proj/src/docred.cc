#include "gain/docred.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "gain/errors.h"
#include "json.hpp"

namespace gain {

using nlohmann::json;

namespace {

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Field-path aware accessors so that schema errors name their location.
class Cursor {
 public:
  Cursor(const json& node, std::string title, std::string path)
      : node_(node), title_(std::move(title)), path_(std::move(path)) {}

  [[noreturn]] void Fail(const std::string& what) const {
    throw ParseError("document '" + title_ + "': " + path_ + ": " + what);
  }

  Cursor Field(const char* key) const {
    if (!node_.is_object()) Fail("expected an object");
    auto it = node_.find(key);
    if (it == node_.end()) Fail(std::string("missing field '") + key + "'");
    return Cursor(*it, title_, path_ + "." + key);
  }

  bool Has(const char* key) const { return node_.is_object() && node_.contains(key); }

  const json& Array() const {
    if (!node_.is_array()) Fail("expected an array");
    return node_;
  }

  Cursor At(std::size_t i) const { return Cursor(Array().at(i), title_, path_ + "[" + std::to_string(i) + "]"); }
  std::size_t Size() const { return Array().size(); }

  std::string String() const {
    if (!node_.is_string()) Fail("expected a string");
    return node_.get<std::string>();
  }

  std::size_t Index() const {
    if (!node_.is_number_integer() || node_.get<long long>() < 0) Fail("expected a non-negative integer");
    return node_.get<std::size_t>();
  }

  // Relation labels appear as strings ("P17") or as integer ids.
  std::string Label() const {
    if (node_.is_string()) return node_.get<std::string>();
    if (node_.is_number_integer()) return std::to_string(node_.get<long long>());
    Fail("expected a relation name");
  }

 private:
  const json& node_;
  std::string title_;
  std::string path_;
};

Document ParseDocument(const json& node, std::size_t index, RelationMap& relations) {
  std::string title = "#" + std::to_string(index);
  if (node.is_object() && node.contains("title") && node["title"].is_string()) {
    title = node["title"].get<std::string>();
  }
  Cursor doc(node, title, "[" + std::to_string(index) + "]");
  Document out;
  out.title = doc.Field("title").String();

  Cursor sents = doc.Field("sents");
  for (std::size_t s = 0; s < sents.Size(); ++s) {
    Cursor sent = sents.At(s);
    std::vector<std::string> tokens;
    for (std::size_t w = 0; w < sent.Size(); ++w) tokens.push_back(sent.At(w).String());
    out.sentences.push_back(std::move(tokens));
  }

  Cursor vertices = doc.Field("vertexSet");
  for (std::size_t e = 0; e < vertices.Size(); ++e) {
    Cursor mentions = vertices.At(e);
    Entity entity;
    for (std::size_t m = 0; m < mentions.Size(); ++m) {
      Cursor mc = mentions.At(m);
      Mention mention;
      mention.surface = mc.Field("name").String();
      mention.sent_id = mc.Field("sent_id").Index();
      Cursor pos = mc.Field("pos");
      if (pos.Size() != 2) pos.Fail("expected [start, end]");
      mention.start = pos.At(0).Index();
      mention.end = pos.At(1).Index();
      mention.type_tag = mc.Field("type").String();
      entity.mentions.push_back(std::move(mention));
    }
    out.entities.push_back(std::move(entity));
  }

  if (doc.Has("labels")) {
    Cursor labels = doc.Field("labels");
    for (std::size_t l = 0; l < labels.Size(); ++l) {
      Cursor lc = labels.At(l);
      Fact fact;
      fact.head = lc.Field("h").Index();
      fact.tail = lc.Field("t").Index();
      const std::string rel = lc.Field("r").Label();
      try {
        fact.relation = relations.Resolve(rel);
      } catch (const ValidationError& e) {
        throw ValidationError("document '" + out.title + "': labels[" + std::to_string(l) + "].r: " + e.what());
      }
      if (lc.Has("evidence")) {
        Cursor ev = lc.Field("evidence");
        for (std::size_t i = 0; i < ev.Size(); ++i) fact.evidence.push_back(ev.At(i).Index());
      }
      out.gold_facts.push_back(std::move(fact));
    }
  }
  ValidateDocument(out, relations.size());
  return out;
}

}  // namespace

RelationMap RelationMap::FromFile(const std::filesystem::path& path) {
  const std::string text = ReadFile(path);
  std::vector<std::pair<long long, std::string>> entries;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(path.string() + ": " + e.what());
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!it.value().is_number_integer()) throw ParseError(path.string() + ": id of '" + it.key() + "' is not an integer");
      entries.emplace_back(it.value().get<long long>(), it.key());
    }
  } else {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      std::istringstream fields(line);
      std::string name;
      long long id = 0;
      if (!(fields >> name >> id)) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected '<relation> <id>'");
      }
      entries.emplace_back(id, name);
    }
  }
  std::sort(entries.begin(), entries.end());
  RelationMap map;
  for (const auto& [id, name] : entries) {
    if (name == "Na" || name == "NA") continue;
    if (map.Contains(name)) throw ParseError(path.string() + ": duplicate relation '" + name + "'");
    map.Resolve(name);
  }
  map.Freeze();
  return map;
}

RelationMap RelationMap::FromNames(const std::vector<std::string>& names, bool frozen) {
  RelationMap map;
  for (const auto& n : names) map.Resolve(n);
  map.frozen_ = frozen;
  return map;
}

std::size_t RelationMap::Resolve(const std::string& name) {
  auto it = ids_.find(name);
  if (it != ids_.end()) return it->second;
  if (frozen_) throw ValidationError("unknown relation '" + name + "'");
  ids_.emplace(name, names_.size());
  names_.push_back(name);
  return names_.size() - 1;
}

std::size_t RelationMap::Id(const std::string& name) const {
  auto it = ids_.find(name);
  if (it == ids_.end()) throw ValidationError("unknown relation '" + name + "'");
  return it->second;
}

void RelationMap::Save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t i = 0; i < names_.size(); ++i) out << names_[i] << '\t' << i << '\n';
}

void ValidateDocument(const Document& doc, std::size_t num_relations) {
  auto fail = [&](const std::string& what) { throw ValidationError("document '" + doc.title + "': " + what); };
  for (std::size_t e = 0; e < doc.entities.size(); ++e) {
    const Entity& entity = doc.entities[e];
    if (entity.mentions.empty()) fail("vertexSet[" + std::to_string(e) + "] has no mentions");
    for (std::size_t m = 0; m < entity.mentions.size(); ++m) {
      const Mention& mention = entity.mentions[m];
      const std::string where = "vertexSet[" + std::to_string(e) + "][" + std::to_string(m) + "]";
      if (mention.sent_id >= doc.sentences.size()) fail(where + ".sent_id out of range");
      if (mention.start >= mention.end) fail(where + ".pos: start must be < end");
      if (mention.end > doc.sentences[mention.sent_id].size()) fail(where + ".pos: span exceeds sentence length");
    }
  }
  for (std::size_t f = 0; f < doc.gold_facts.size(); ++f) {
    const Fact& fact = doc.gold_facts[f];
    const std::string where = "labels[" + std::to_string(f) + "]";
    if (fact.head >= doc.entities.size() || fact.tail >= doc.entities.size()) fail(where + ": entity index out of range");
    if (fact.head == fact.tail) fail(where + ": head equals tail");
    if (fact.relation >= num_relations) fail(where + ": relation id out of range");
    for (std::size_t s : fact.evidence)
      if (s >= doc.sentences.size()) fail(where + ".evidence: sentence id out of range");
  }
}

std::vector<Document> ParseCorpusText(const std::string& text, RelationMap& relations) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  if (!root.is_array()) throw ParseError("corpus root must be an array of documents");
  std::vector<Document> docs;
  docs.reserve(root.size());
  for (std::size_t i = 0; i < root.size(); ++i) docs.push_back(ParseDocument(root[i], i, relations));
  return docs;
}

std::vector<Document> ParseCorpus(const std::filesystem::path& path, RelationMap& relations) {
  return ParseCorpusText(ReadFile(path), relations);
}

std::string SerializeCorpus(const std::vector<Document>& docs, const RelationMap& relations) {
  json root = json::array();
  for (const Document& doc : docs) {
    json vertex_set = json::array();
    for (const Entity& entity : doc.entities) {
      json mentions = json::array();
      for (const Mention& m : entity.mentions) {
        mentions.push_back({{"name", m.surface}, {"sent_id", m.sent_id}, {"pos", {m.start, m.end}}, {"type", m.type_tag}});
      }
      vertex_set.push_back(std::move(mentions));
    }
    json labels = json::array();
    for (const Fact& f : doc.gold_facts) {
      labels.push_back({{"h", f.head}, {"t", f.tail}, {"r", relations.Name(f.relation)}, {"evidence", f.evidence}});
    }
    root.push_back({{"title", doc.title}, {"sents", doc.sentences}, {"vertexSet", std::move(vertex_set)}, {"labels", std::move(labels)}});
  }
  return root.dump();
}

void WriteCorpus(const std::filesystem::path& path, const std::vector<Document>& docs, const RelationMap& relations) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << SerializeCorpus(docs, relations) << '\n';
}

std::vector<std::vector<std::size_t>> EntitySentenceSets(const Document& doc) {
  std::vector<std::vector<std::size_t>> sets;
  sets.reserve(doc.entities.size());
  for (const Entity& entity : doc.entities) {
    std::set<std::size_t> s;
    for (const Mention& m : entity.mentions) s.insert(m.sent_id);
    sets.emplace_back(s.begin(), s.end());
  }
  return sets;
}

}  // namespace gain
