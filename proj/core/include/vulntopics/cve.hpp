#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vulntopics/corpus.hpp"
#include "vulntopics/textprep.hpp"

namespace vt {

/// A CVE identifier in canonical "CVE-YYYY-NNNN..." form. The sequence
/// number keeps the digits as written, including leading zeros.
class CveId {
 public:
  /// Accepts any case; the whole input must match cve-[0-9]{4}-[0-9]{4,}.
  static std::optional<CveId> parse(std::string_view text);

  int year() const { return year_; }
  const std::string& number() const { return number_; }
  std::string str() const;

  friend bool operator==(const CveId&, const CveId&) = default;
  friend auto operator<=>(const CveId& a, const CveId& b) { return a.str() <=> b.str(); }

 private:
  CveId(int year, std::string number) : year_(year), number_(std::move(number)) {}
  int year_ = 0;
  std::string number_;
};

/// Every non-overlapping, case-insensitive match of cve-[0-9]{4}-[0-9]{4,}
/// in order of first appearance, de-duplicated on canonical form.
std::vector<CveId> extract_cves(std::string_view text);

enum class TopicLabel { kPoC, kWeaponization, kExploitation, kOther };

inline constexpr TopicLabel kAllLabels[] = {TopicLabel::kPoC, TopicLabel::kWeaponization, TopicLabel::kExploitation,
                                            TopicLabel::kOther};

std::string_view to_string(TopicLabel label);
/// Case-insensitive match against the four label names.
std::optional<TopicLabel> parse_label(std::string_view text);

enum class LabelSource { kNone, kRule, kManual };
std::string_view to_string(LabelSource source);

/// One CVE-citing thread with its posts merged into a single text.
struct ThreadDocument {
  std::string thread_id;
  std::string forum_id;
  std::string board_id;
  std::string merged_text;
  std::vector<CveId> cves;  // never empty
  std::optional<TopicLabel> label;
  LabelSource label_source = LabelSource::kNone;
  std::string language;  // detected language id or "undetermined"
};

nlohmann::ordered_json to_json(const ThreadDocument& doc);
ThreadDocument thread_document_from_json(const nlohmann::json& j);

/// Joins the title and the non-empty post bodies with single newlines, in
/// post order. Returns nothing unless the title or some post cites a CVE.
/// Forum/board provenance is left for the caller to fill.
std::optional<ThreadDocument> merge_thread_posts(const Thread& thread, std::span<const Post* const> posts);

struct FilterReport {
  std::size_t threads_scanned = 0;
  std::size_t posts_scanned = 0;
  std::size_t posts_citing_cves = 0;
  std::size_t unique_cves_in_posts = 0;
  std::size_t cve_threads = 0;  // CVE-citing threads before the language gate
  std::size_t excluded_by_language = 0;
  std::size_t threads_kept = 0;
  std::size_t unique_cves_in_threads = 0;
};

nlohmann::ordered_json to_json(const FilterReport& report);
FilterReport filter_report_from_json(const nlohmann::json& j);

struct FilterResult {
  std::vector<ThreadDocument> documents;  // corpus thread order
  FilterReport report;
};

/// Merges every thread and keeps the CVE-citing ones whose detected
/// language is `target_language`. Language is detected on the normalized,
/// un-lemmatized tokens of the merged text (stopwords included).
FilterResult filter_corpus(const Corpus& corpus, const FilterConfig& filter, const LanguageSet& languages,
                           std::string_view target_language = "english");

}  // namespace vt
