#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace vt {

/// Letter sets that survive normalization. Letters outside every configured
/// alphabet make the whole word they appear in disappear.
enum class Alphabet { kLatin, kCyrillic, kGerman };

std::optional<Alphabet> parse_alphabet(std::string_view name);
std::string_view to_string(Alphabet a);

/// Lowercases ASCII, Latin-1 and Cyrillic capitals; other code points pass
/// through unchanged.
std::string lowercase_utf8(std::string_view s);

/// Textual emoticons removed by default (lowercase).
const std::vector<std::string>& default_emoticons();

struct FilterConfig {
  std::vector<Alphabet> alphabets{Alphabet::kLatin, Alphabet::kCyrillic};
  std::unordered_set<std::string> stopwords;
  std::vector<std::string> emoticons = default_emoticons();
};

/// Lowercases entries and drops duplicates; emoticons are ordered longest
/// first so suffix stripping prefers ":-)" over ")".
FilterConfig make_filter_config(std::vector<Alphabet> alphabets, std::span<const std::string> stopwords,
                                std::span<const std::string> emoticons);

/// Lowercases and filters raw text down to alphabet letters, digits,
/// single spaces and word-internal hyphens.
///
/// Punctuation separates words; apostrophes are deleted; pictorial emoji
/// are deleted; textual emoticons are removed as whole words or trailing and
/// leading attachments ("works:)"). A word holding any other character (for
/// example "résumé" with a Latin-only alphabet) is dropped entirely.
std::string normalize(std::string_view raw, const FilterConfig& cfg);

/// Splits on ASCII spaces; never returns empty tokens.
std::vector<std::string> tokenize(std::string_view clean);

/// surface form -> lemma
using LemmaTable = std::unordered_map<std::string, std::string>;

/// Reads a two-column TSV (surface, lemma). Rejects chained entries
/// (a->b with b->c) so that lemmatization stays idempotent.
LemmaTable load_lemma_table(const std::filesystem::path& path);
LemmaTable parse_lemma_table(std::string_view tsv, std::string_view source = "<lemma table>");

/// table[token] when present, otherwise the token itself.
const std::string& lemmatize(const std::string& token, const LemmaTable& table);

struct LanguageProfile {
  std::string id;
  std::unordered_set<std::string> wordlist;
};

/// Builds a profile from raw entries (lowercased). Throws DataError if the
/// list is empty or an entry contains whitespace.
LanguageProfile make_language_profile(std::string id, std::span<const std::string> words);
LanguageProfile load_language_profile(std::string id, const std::filesystem::path& wordlist);

/// Ordered candidate languages; earlier entries win ties.
struct LanguageSet {
  std::vector<LanguageProfile> languages;
};

/// Throws DataError on an empty set or duplicate ids.
void validate(const LanguageSet& set);

/// 1 if the word is in the language's wordlist, else 0.
int indicator_language(std::string_view word, const LanguageProfile& language);

/// Fraction of tokens found in the wordlist; 0 for an empty token list.
double language_ratio(std::span<const std::string> tokens, const LanguageProfile& language);

/// Language with the highest ratio (ties go to the earlier language), or
/// nullopt ("undetermined") when no token matches any wordlist.
std::optional<std::string> detect_language(std::span<const std::string> tokens, const LanguageSet& languages);

inline constexpr std::string_view kUndetermined = "undetermined";

struct TokenizedDoc {
  std::string doc_id;
  std::vector<std::string> tokens;
};

/// normalize -> tokenize -> stopword removal -> lemmatize. Lemmas that are
/// themselves stopwords are removed as well.
TokenizedDoc preprocess_document(std::string doc_id, std::string_view raw, const FilterConfig& cfg,
                                 const LemmaTable& lemmas);

}  // namespace vt
