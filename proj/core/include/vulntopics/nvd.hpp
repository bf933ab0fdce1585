#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "vulntopics/cve.hpp"

namespace vt {

enum class CvssVersion { kV2, kV31 };
enum class Severity { kNone, kLow, kMedium, kHigh, kCritical };

std::string_view to_string(CvssVersion v);
std::string_view to_string(Severity s);
std::optional<Severity> parse_severity(std::string_view s);

/// Standard CVSS bands.
///   v2:   LOW [0.0, 3.9], MEDIUM [4.0, 6.9], HIGH [7.0, 10.0]
///   v3.1: NONE 0.0, LOW [0.1, 3.9], MEDIUM [4.0, 6.9], HIGH [7.0, 8.9],
///         CRITICAL [9.0, 10.0]
/// Throws DataError for scores outside [0, 10].
Severity severity_for(CvssVersion version, double score);

struct CvssScore {
  double score = 0.0;
  Severity severity = Severity::kNone;
};

struct CveRecord {
  CveId cve;
  std::optional<CvssScore> cvss_v2;
  std::optional<CvssScore> cvss_v31;
  std::optional<std::string> description;
  /// The source had an entry for this CVE (it may still lack CVSS data).
  bool found = false;

  const std::optional<CvssScore>& score(CvssVersion v) const { return v == CvssVersion::kV2 ? cvss_v2 : cvss_v31; }
};

nlohmann::ordered_json to_json(const CveRecord& record);
CveRecord cve_record_from_json(const nlohmann::json& j);

/// Builds a record from an NVD API 2.0 response (or a single
/// "vulnerabilities[i]" item, or a bare "cve" object). A response without a
/// matching vulnerability yields a NOT_FOUND record. Throws DataError when
/// the record is malformed, e.g. a score outside [0, 10] or a stated
/// severity that contradicts the score.
CveRecord parse_nvd_record(const nlohmann::json& response, const CveId& cve);

/// Where raw NVD responses come from.
class NvdSource {
 public:
  virtual ~NvdSource() = default;
  /// Raw API response for one CVE, or nullopt when the source has none.
  virtual std::optional<nlohmann::json> fetch(const CveId& cve) = 0;
};

/// Offline source: a directory holding one "<CVE-ID>.json" file per CVE in
/// the NVD API 2.0 response layout.
class FixtureNvdSource : public NvdSource {
 public:
  explicit FixtureNvdSource(std::filesystem::path dir);
  std::optional<nlohmann::json> fetch(const CveId& cve) override;

 private:
  std::filesystem::path dir_;
};

struct LiveNvdOptions {
  std::string base_url = "https://services.nvd.nist.gov/rest/json/cves/2.0";
  std::filesystem::path cache_dir;
  std::optional<std::string> api_key;
  /// Minimum gap between requests. NVD allows ~5 requests per 30 s without
  /// an API key.
  std::chrono::milliseconds min_interval{6000};
  int retries = 3;
  std::chrono::milliseconds retry_backoff{2000};
  std::chrono::seconds timeout{30};
};

/// NVD REST client with an on-disk response cache keyed by CVE id. Cached
/// responses are served without touching the network. Throws NetworkError
/// once retries are exhausted.
class LiveNvdSource : public NvdSource {
 public:
  explicit LiveNvdSource(LiveNvdOptions options);
  std::optional<nlohmann::json> fetch(const CveId& cve) override;

  std::size_t requests_sent() const { return requests_; }

 private:
  LiveNvdOptions options_;
  std::chrono::steady_clock::time_point last_request_{};
  bool has_last_ = false;
  std::size_t requests_ = 0;
};

/// One record per input CVE, in input order.
std::vector<CveRecord> enrich_nvd(std::span<const CveId> cves, NvdSource& source);

struct SeverityHistogram {
  CvssVersion version = CvssVersion::kV2;
  /// Severity buckets valid for the version in ascending order, then
  /// "NOT_FOUND".
  std::vector<std::pair<std::string, std::size_t>> buckets;

  std::size_t total() const;
  std::size_t count(std::string_view bucket) const;
};

inline constexpr std::string_view kNotFoundBucket = "NOT_FOUND";

SeverityHistogram severity_histogram(std::span<const CveRecord> records, CvssVersion version);
nlohmann::ordered_json to_json(const SeverityHistogram& h);

}  // namespace vt
