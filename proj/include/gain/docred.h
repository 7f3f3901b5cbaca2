#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace gain {

// Token span [start, end) inside sentence `sent_id`.
struct Mention {
  std::size_t sent_id = 0;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string surface;
  std::string type_tag;

  bool operator==(const Mention&) const = default;
};

struct Entity {
  std::vector<Mention> mentions;

  bool operator==(const Entity&) const = default;
};

struct Fact {
  std::size_t head = 0;
  std::size_t tail = 0;
  std::size_t relation = 0;
  // Supporting sentence ids; carried through, never read by the model.
  std::vector<std::size_t> evidence;

  bool operator==(const Fact&) const = default;
};

struct Document {
  std::string title;
  std::vector<std::vector<std::string>> sentences;
  std::vector<Entity> entities;
  std::vector<Fact> gold_facts;

  bool operator==(const Document&) const = default;
};

// Dense relation ids. The "no relation" label some releases include ("Na")
// is never given an id: a pair without facts has an all-zero target.
class RelationMap {
 public:
  RelationMap() = default;

  // Two-column text ("name id" per line) or a JSON object {name: id}. Ids are
  // re-densified in file order of id, skipping "Na"/"NA". The result is frozen.
  static RelationMap FromFile(const std::filesystem::path& path);
  static RelationMap FromNames(const std::vector<std::string>& names, bool frozen = true);

  // Id for `name`; unknown names are added unless the map is frozen, in
  // which case ValidationError is thrown.
  std::size_t Resolve(const std::string& name);
  std::size_t Id(const std::string& name) const;
  bool Contains(const std::string& name) const { return ids_.contains(name); }
  const std::string& Name(std::size_t id) const { return names_.at(id); }
  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }

  bool frozen() const { return frozen_; }
  void Freeze() { frozen_ = true; }

  // Writes the two-column text form.
  void Save(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> names_;
  std::map<std::string, std::size_t> ids_;
  bool frozen_ = false;
};

// Parses DocRED-style JSON: an array of {title, sents, vertexSet, labels}.
// `labels` may be absent (unlabelled split). Throws ParseError with the
// document title and field path on schema problems and ValidationError on
// invariant violations.
std::vector<Document> ParseCorpusText(const std::string& text, RelationMap& relations);
std::vector<Document> ParseCorpus(const std::filesystem::path& path, RelationMap& relations);

std::string SerializeCorpus(const std::vector<Document>& docs, const RelationMap& relations);
void WriteCorpus(const std::filesystem::path& path, const std::vector<Document>& docs,
                 const RelationMap& relations);

// Checks span ranges, entity/fact invariants and relation range.
void ValidateDocument(const Document& doc, std::size_t num_relations);

// Sentence ids containing a mention of each entity, ascending.
std::vector<std::vector<std::size_t>> EntitySentenceSets(const Document& doc);

}  // namespace gain
