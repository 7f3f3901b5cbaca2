#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "gain/docred.h"
#include "gain/rng.h"
#include "gain/tensor.h"

namespace gain {

// Word, entity-type and relation id spaces. Word id 0 is the unknown word;
// type id 0 is the None type. Coreference ids need no table: they are the
// per-document entity index plus one, with 0 reserved for None.
struct Vocab {
  static constexpr std::size_t kUnknownWord = 0;
  static constexpr std::size_t kNoneType = 0;
  static constexpr std::size_t kNoneCoref = 0;

  std::vector<std::string> words;
  std::unordered_map<std::string, std::size_t> word_ids;
  std::vector<std::string> types;
  std::map<std::string, std::size_t> type_ids;
  RelationMap relations;

  std::size_t WordId(const std::string& word) const;
  // Unseen entity types fall back to None.
  std::size_t TypeId(const std::string& tag) const;

  std::string ToJson() const;
  static Vocab FromJson(const std::string& text);
};

// Words seen fewer than `min_count` times map to the unknown id.
Vocab BuildVocab(const std::vector<Document>& docs, const RelationMap& relations, std::size_t min_count = 1);

// Word embedding table [|words| x dim]. Rows found in `pretrained` (one token
// followed by `dim` floats per line) are copied; the rest are drawn uniformly
// from [-0.1, 0.1]. Throws ConfigError when the file's dimension differs.
Tensor InitWordEmbeddings(const Vocab& vocab, std::size_t dim, Rng& rng,
                          const std::optional<std::filesystem::path>& pretrained = std::nullopt);

}  // namespace gain
