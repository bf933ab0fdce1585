#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

#include "vulntopics/analytics.hpp"
#include "vulntopics/cve.hpp"
#include "vulntopics/lda.hpp"
#include "vulntopics/nvd.hpp"
#include "vulntopics/vectorize.hpp"

namespace vt {

inline constexpr int kReportSchemaVersion = 1;

std::string_view tool_version();

/// Stamped on every artifact so downstream stages can detect inputs built
/// under another configuration.
struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string tool_version;
};

nlohmann::ordered_json to_json(const Provenance& p);
Provenance provenance_from_json(const nlohmann::json& j);

struct ReportInputs {
  Provenance provenance;
  nlohmann::ordered_json corpus_stats;  // as written by the stats stage
  FilterReport filter;
  std::span<const ThreadDocument> documents;
  std::span<const CveRecord> cves;
  const LdaModel* model = nullptr;
  const Dictionary* dictionary = nullptr;
  AnalyticsOptions analytics;
  std::size_t tfidf_top_terms = 10;
};

/// Assembles report.json. Floating-point values are rounded to six decimals
/// (token shares to one) so the output is stable across platforms.
nlohmann::ordered_json build_report(const ReportInputs& in);

/// Static single-file HTML rendering of a report.json document: inline CSS
/// and SVG only, no scripts and no external references.
std::string render_html(const nlohmann::json& report);

}  // namespace vt
