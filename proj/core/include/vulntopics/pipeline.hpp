#pragma once

#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vulntopics/config.hpp"
#include "vulntopics/corpus.hpp"
#include "vulntopics/cve.hpp"
#include "vulntopics/lda.hpp"
#include "vulntopics/nvd.hpp"
#include "vulntopics/report.hpp"
#include "vulntopics/vectorize.hpp"

namespace vt {

inline constexpr std::string_view kStatsArtifact = "corpus.stats.json";
inline constexpr std::string_view kThreadsArtifact = "threads.jsonl";
inline constexpr std::string_view kCvesArtifact = "cves.enriched.json";
inline constexpr std::string_view kModelArtifact = "model.lda";
inline constexpr std::string_view kReportJson = "report.json";
inline constexpr std::string_view kReportHtml = "report.html";

struct ThreadArtifact {
  Provenance provenance;
  FilterReport report;
  std::vector<ThreadDocument> documents;
};

struct ModelArtifact {
  Provenance provenance;
  Dictionary dictionary;
  LdaModel model;
};

/// Runs pipeline stages against one configuration. Every stage writes its
/// artifact into the output directory stamped with the config hash; stages
/// that consume an earlier artifact refuse one that is missing or was
/// produced under a different configuration.
class Pipeline {
 public:
  /// `log` receives one-line progress messages; pass nullptr for silence.
  explicit Pipeline(PipelineConfig config, std::ostream* log = nullptr);

  const PipelineConfig& config() const { return config_; }
  const Provenance& provenance() const { return provenance_; }
  std::filesystem::path artifact_path(std::string_view name) const { return config_.output_dir / name; }

  /// Loads and links the corpus; no artifact.
  Corpus ingest() const;
  CorpusStats stats() const;
  ThreadArtifact filter() const;
  std::vector<CveRecord> enrich() const;
  ModelArtifact train() const;
  nlohmann::ordered_json report() const;
  /// All stages in order.
  nlohmann::ordered_json run() const;

  ThreadArtifact read_threads() const;
  std::vector<CveRecord> read_cves() const;
  ModelArtifact read_model() const;
  nlohmann::ordered_json read_stats() const;

 private:
  void say(std::string_view message) const;
  void check(const nlohmann::json& provenance, std::string_view artifact, std::string_view producer) const;

  PipelineConfig config_;
  Provenance provenance_;
  std::ostream* log_;
};

}  // namespace vt
