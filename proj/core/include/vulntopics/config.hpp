#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vulntopics/corpus.hpp"
#include "vulntopics/lda.hpp"
#include "vulntopics/textprep.hpp"

namespace vt {

enum class NvdMode { kFixture, kLive };
std::optional<NvdMode> parse_nvd_mode(std::string_view name);
std::string_view to_string(NvdMode mode);

struct LanguageSource {
  std::string id;
  std::filesystem::path wordlist;
};

/// Fully resolved pipeline configuration. All paths are absolute.
struct PipelineConfig {
  std::filesystem::path source;  // config file, empty for in-memory configs

  std::filesystem::path corpus;
  CorpusFormat corpus_format = CorpusFormat::kJsonLines;
  double max_dangling_fraction = 0.05;

  std::vector<Alphabet> alphabets{Alphabet::kLatin, Alphabet::kCyrillic};
  std::vector<LanguageSource> languages;
  std::string target_language = "english";
  std::filesystem::path stopwords;
  std::optional<std::filesystem::path> emoticons;  // built-in list when unset
  std::filesystem::path lemmas;

  std::filesystem::path codebook;
  std::optional<std::filesystem::path> labels;

  NvdMode nvd_mode = NvdMode::kFixture;
  std::optional<std::filesystem::path> nvd_fixtures;
  std::optional<std::filesystem::path> nvd_cache;
  std::string nvd_base_url = "https://services.nvd.nist.gov/rest/json/cves/2.0";
  std::string nvd_api_key_env = "NVD_API_KEY";
  std::chrono::milliseconds nvd_min_interval{6000};

  std::size_t no_below = 1;
  double no_above = 1.0;

  LdaConfig lda;

  std::size_t top_n = 30;
  std::vector<double> lambdas{0.0, 0.6, 1.0};
  std::size_t tfidf_top_terms = 10;

  std::filesystem::path output_dir;

  /// Resolved configuration with absolute paths, as echoed by `validate`.
  nlohmann::ordered_json to_json() const;

  /// Content hash of everything that influences stage outputs. Paths are
  /// replaced by the hash of the file (or directory) they point to, so the
  /// hash does not depend on where the inputs live. The output directory
  /// and the NVD cache location are excluded.
  std::string hash() const;

  /// Re-checks ranges and that every referenced path exists.
  void validate() const;
};

/// Parses a config document. Relative paths resolve against `base_dir`;
/// unset resource paths default to the bundled resources. Throws
/// ConfigError naming the offending field for unknown keys (with the
/// nearest valid key), wrong types, out-of-range values and missing files.
PipelineConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);

/// Reads, parses and validates a config file.
PipelineConfig validate_config(const std::filesystem::path& path);

/// Directory holding the bundled wordlists, stopwords, lemmas and codebook.
std::filesystem::path resource_dir();

/// Levenshtein edit distance.
std::size_t edit_distance(std::string_view a, std::string_view b);

}  // namespace vt
