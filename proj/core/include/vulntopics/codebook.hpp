#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vulntopics/cve.hpp"
#include "vulntopics/textprep.hpp"

namespace vt {

/// Keyword rules for one label. Each phrase is a token sequence; the rule
/// fires when at least `min_matches` distinct phrases occur in a document.
struct CodebookRule {
  TopicLabel label = TopicLabel::kOther;
  std::vector<std::vector<std::string>> phrases;
  std::size_t min_matches = 1;
};

/// Keyword codebook used to pre-label threads.
///
/// Rules file format (UTF-8 text, '#' comments):
///
///     precedence = Exploitation, Weaponization, PoC, Other
///
///     [Exploitation]
///     min_matches = 1
///     bitcoin
///     fully undetectable
///
/// `precedence` must list all four labels with Other last. Every label
/// except Other has a section; each non-blank line in a section is a
/// keyword or phrase. Keywords are normalized and lemmatized with the same
/// settings as documents, so "exploits" and "exploit" match alike.
class Codebook {
 public:
  static Codebook parse(std::string_view text, const FilterConfig& filter, const LemmaTable& lemmas,
                        std::string_view source = "<codebook>");
  static Codebook load(const std::filesystem::path& path, const FilterConfig& filter, const LemmaTable& lemmas);

  /// Labels in evaluation order; Other is always last.
  const std::vector<TopicLabel>& precedence() const { return precedence_; }
  const CodebookRule& rule(TopicLabel label) const;

  /// First label in precedence order whose rule fires; Other otherwise.
  TopicLabel classify(std::span<const std::string> tokens) const;

  /// Tokens used for keyword matching: normalized, tokenized and lemmatized
  /// text with stopwords kept so multi-word phrases stay intact.
  static std::vector<std::string> match_tokens(std::string_view text, const FilterConfig& filter,
                                               const LemmaTable& lemmas);

 private:
  std::vector<TopicLabel> precedence_;
  std::vector<CodebookRule> rules_;  // indexed by TopicLabel
};

/// Rule-based label for a merged thread.
TopicLabel label_topic(const ThreadDocument& doc, const Codebook& codebook, const FilterConfig& filter,
                       const LemmaTable& lemmas);

using LabelMap = std::map<std::string, TopicLabel>;

/// Reads "thread_id,label" rows (an optional "thread_id,label" header is
/// skipped). Throws DataError on unknown labels (listing the allowed ones),
/// duplicate thread ids, or malformed rows.
LabelMap load_labels(const std::filesystem::path& path);
LabelMap parse_labels(std::string_view csv, std::string_view source = "<labels>");

/// Applies manual labels where present and codebook labels elsewhere.
void assign_labels(std::span<ThreadDocument> docs, const Codebook& codebook, const LabelMap& manual,
                   const FilterConfig& filter, const LemmaTable& lemmas);

}  // namespace vt
