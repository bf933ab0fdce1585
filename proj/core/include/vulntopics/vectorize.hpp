#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vulntopics/textprep.hpp"

namespace vt {

using TokenId = std::uint32_t;

/// Token <-> dense id bijection with document and collection frequencies.
class Dictionary {
 public:
  Dictionary() = default;

  std::size_t size() const { return tokens_.size(); }
  std::size_t num_docs() const { return num_docs_; }
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  std::optional<TokenId> id(std::string_view token) const;
  std::size_t df(TokenId id) const { return df_.at(id); }
  std::size_t cf(TokenId id) const { return cf_.at(id); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  /// Hash of the id -> token mapping. Models record it so they cannot be
  /// loaded against a different vocabulary.
  std::string hash() const;

  /// TSV: a "# num_docs=N" line, then "id<TAB>token<TAB>df<TAB>cf" rows.
  std::string to_tsv() const;
  static Dictionary from_tsv(std::string_view tsv, std::string_view source = "<dictionary>");

  /// Appends a token (used by builders and deserialization).
  TokenId add(std::string token, std::size_t df, std::size_t cf);
  void set_num_docs(std::size_t n) { num_docs_ = n; }

 private:
  std::vector<std::string> tokens_;
  std::vector<std::size_t> df_;
  std::vector<std::size_t> cf_;
  std::unordered_map<std::string, TokenId> index_;
  std::size_t num_docs_ = 0;
};

/// Ids follow first appearance across the documents. Throws DataError for an
/// empty list or when every document is empty.
Dictionary build_dictionary(std::span<const TokenizedDoc> docs);

/// Drops tokens with df < no_below or df / num_docs > no_above and
/// re-densifies ids in their previous relative order. Frequencies are kept.
/// Throws DataError when nothing survives.
Dictionary filter_extremes(const Dictionary& dict, std::size_t no_below, double no_above);

struct BowDoc {
  std::string doc_id;
  std::vector<std::pair<TokenId, std::uint32_t>> counts;  // ids strictly increasing, counts >= 1

  std::size_t total() const;
};

/// Out-of-dictionary tokens are dropped.
BowDoc doc2bow(const TokenizedDoc& doc, const Dictionary& dict);

struct TfidfDoc {
  std::string doc_id;
  std::vector<std::pair<TokenId, double>> weights;  // ids increasing, weights > 0
};

/// weight = count * log2(num_docs / df), L2-normalized per document. Terms
/// with zero weight are omitted.
std::vector<TfidfDoc> tfidf_transform(std::span<const BowDoc> bows, const Dictionary& dict);

/// One document per line: "doc_id id:count id:count ...".
std::string bow_to_text(std::span<const BowDoc> bows);
std::vector<BowDoc> bow_from_text(std::string_view text, std::string_view source = "<bow>");

}  // namespace vt
