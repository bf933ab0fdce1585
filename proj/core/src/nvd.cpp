#include "vulntopics/nvd.hpp"

#include <thread>

#include <httplib.h>

#include "vulntopics/errors.hpp"
#include "vulntopics/util.hpp"

namespace vt {

namespace {

using nlohmann::json;

const json* pick_metric(const json& metrics, const char* key) {
  auto it = metrics.find(key);
  if (it == metrics.end() || !it->is_array() || it->empty()) return nullptr;
  for (const auto& m : *it)
    if (m.is_object() && m.value("type", "") == "Primary") return &m;
  return &it->front();
}

CvssScore read_metric(const json& metric, CvssVersion version, const std::string& id) {
  const std::string what = "malformed NVD record for " + id + " (" + std::string(to_string(version)) + "): ";
  if (!metric.is_object()) throw DataError(what + "metric is not an object");
  auto data = metric.find("cvssData");
  if (data == metric.end() || !data->is_object()) throw DataError(what + "missing cvssData");
  auto score_it = data->find("baseScore");
  if (score_it == data->end() || !score_it->is_number()) throw DataError(what + "missing numeric baseScore");
  const double score = score_it->get<double>();
  if (!(score >= 0.0 && score <= 10.0)) throw DataError(what + "baseScore outside [0, 10]");
  CvssScore out{score, severity_for(version, score)};

  const json* stated = nullptr;
  if (auto s = data->find("baseSeverity"); s != data->end()) stated = &*s;
  if (auto s = metric.find("baseSeverity"); s != metric.end()) stated = &*s;
  if (stated) {
    if (!stated->is_string()) throw DataError(what + "baseSeverity is not a string");
    auto sev = parse_severity(stated->get<std::string>());
    if (!sev || *sev != out.severity)
      throw DataError(what + "baseSeverity \"" + stated->get<std::string>() + "\" contradicts score " +
                      std::to_string(score));
  }
  return out;
}

const json* find_cve_object(const json& response, const std::string& id) {
  if (!response.is_object()) return nullptr;
  auto matches = [&](const json& cve) {
    auto it = cve.find("id");
    if (it == cve.end() || !it->is_string()) return false;
    auto parsed = CveId::parse(it->get<std::string>());
    return parsed && parsed->str() == id;
  };
  if (auto v = response.find("vulnerabilities"); v != response.end()) {
    if (!v->is_array()) throw DataError("malformed NVD response for " + id + ": vulnerabilities is not an array");
    for (const auto& item : *v) {
      if (auto c = item.find("cve"); c != item.end() && c->is_object() && matches(*c)) return &*c;
    }
    return nullptr;
  }
  if (auto c = response.find("cve"); c != response.end() && c->is_object()) return matches(*c) ? &*c : nullptr;
  return matches(response) ? &response : nullptr;
}

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

ParsedUrl split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw NetworkError("invalid NVD base URL: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

std::string_view to_string(CvssVersion v) { return v == CvssVersion::kV2 ? "v2" : "v31"; }

std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::kNone:
      return "NONE";
    case Severity::kLow:
      return "LOW";
    case Severity::kMedium:
      return "MEDIUM";
    case Severity::kHigh:
      return "HIGH";
    case Severity::kCritical:
      return "CRITICAL";
  }
  return "?";
}

std::optional<Severity> parse_severity(std::string_view s) {
  for (auto sev : {Severity::kNone, Severity::kLow, Severity::kMedium, Severity::kHigh, Severity::kCritical})
    if (s == to_string(sev)) return sev;
  return std::nullopt;
}

Severity severity_for(CvssVersion version, double score) {
  if (!(score >= 0.0 && score <= 10.0)) throw DataError("CVSS score outside [0, 10]: " + std::to_string(score));
  // Scores carry one decimal; compare against the lower edge of each band.
  if (version == CvssVersion::kV2) {
    if (score < 4.0) return Severity::kLow;
    if (score < 7.0) return Severity::kMedium;
    return Severity::kHigh;
  }
  if (score == 0.0) return Severity::kNone;
  if (score < 4.0) return Severity::kLow;
  if (score < 7.0) return Severity::kMedium;
  if (score < 9.0) return Severity::kHigh;
  return Severity::kCritical;
}

nlohmann::ordered_json to_json(const CveRecord& r) {
  auto score = [](const std::optional<CvssScore>& s) {
    if (!s) return nlohmann::ordered_json();
    return nlohmann::ordered_json{{"score", s->score}, {"severity", std::string(to_string(s->severity))}};
  };
  nlohmann::ordered_json j;
  j["cve"] = r.cve.str();
  j["found"] = r.found;
  j["cvss_v2"] = score(r.cvss_v2);
  j["cvss_v31"] = score(r.cvss_v31);
  j["description"] = r.description ? nlohmann::ordered_json(*r.description) : nlohmann::ordered_json();
  return j;
}

CveRecord cve_record_from_json(const nlohmann::json& j) {
  try {
    auto id = CveId::parse(j.at("cve").get<std::string>());
    if (!id) throw DataError("invalid CVE id in enriched record");
    CveRecord r{*id, std::nullopt, std::nullopt, std::nullopt};
    auto read = [&](const char* key, CvssVersion v) -> std::optional<CvssScore> {
      const auto& s = j.at(key);
      if (s.is_null()) return std::nullopt;
      double score = s.at("score").get<double>();
      CvssScore out{score, severity_for(v, score)};
      if (to_string(out.severity) != s.at("severity").get<std::string>())
        throw DataError("enriched record for " + id->str() + " has inconsistent severity");
      return out;
    };
    r.cvss_v2 = read("cvss_v2", CvssVersion::kV2);
    r.cvss_v31 = read("cvss_v31", CvssVersion::kV31);
    if (!j.at("description").is_null()) r.description = j.at("description").get<std::string>();
    r.found = j.at("found").get<bool>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed enriched CVE record: ") + e.what());
  }
}

CveRecord parse_nvd_record(const nlohmann::json& response, const CveId& cve) {
  const std::string id = cve.str();
  CveRecord record{cve, std::nullopt, std::nullopt, std::nullopt};
  const json* obj = find_cve_object(response, id);
  if (!obj) return record;
  if (auto d = obj->find("descriptions"); d != obj->end() && d->is_array()) {
    for (const auto& item : *d) {
      if (item.is_object() && item.value("lang", "") == "en" && item.contains("value") && item["value"].is_string()) {
        record.description = item["value"].get<std::string>();
        break;
      }
    }
  }
  if (auto m = obj->find("metrics"); m != obj->end()) {
    if (!m->is_object()) throw DataError("malformed NVD record for " + id + ": metrics is not an object");
    if (const json* v2 = pick_metric(*m, "cvssMetricV2")) record.cvss_v2 = read_metric(*v2, CvssVersion::kV2, id);
    if (const json* v31 = pick_metric(*m, "cvssMetricV31"))
      record.cvss_v31 = read_metric(*v31, CvssVersion::kV31, id);
  }
  record.found = true;
  return record;
}

FixtureNvdSource::FixtureNvdSource(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (!std::filesystem::is_directory(dir_)) throw DataError("NVD fixture directory not found: " + dir_.string());
}

std::optional<nlohmann::json> FixtureNvdSource::fetch(const CveId& cve) {
  auto path = dir_ / (cve.str() + ".json");
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw DataError("malformed NVD fixture " + path.string() + ": " + e.what());
  }
}

LiveNvdSource::LiveNvdSource(LiveNvdOptions options) : options_(std::move(options)) {}

std::optional<nlohmann::json> LiveNvdSource::fetch(const CveId& cve) {
  const std::string id = cve.str();
  std::filesystem::path cached;
  if (!options_.cache_dir.empty()) {
    cached = options_.cache_dir / (id + ".json");
    if (std::filesystem::exists(cached)) {
      try {
        return json::parse(read_file(cached));
      } catch (const json::parse_error&) {
        std::filesystem::remove(cached);  // corrupt entry; refetch
      }
    }
  }

  const auto url = split_url(options_.base_url);
  httplib::Client client(url.origin);
  client.set_connection_timeout(options_.timeout);
  client.set_read_timeout(options_.timeout);
  httplib::Headers headers;
  if (options_.api_key) headers.emplace("apiKey", *options_.api_key);
  const std::string path = url.path + "?cveId=" + id;

  std::string last_error;
  for (int attempt = 0; attempt <= options_.retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(options_.retry_backoff * attempt);
    if (has_last_) {
      auto wait = last_request_ + options_.min_interval - std::chrono::steady_clock::now();
      if (wait > std::chrono::steady_clock::duration::zero()) std::this_thread::sleep_for(wait);
    }
    last_request_ = std::chrono::steady_clock::now();
    has_last_ = true;
    ++requests_;
    auto res = client.Get(path, headers);
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 404) return std::nullopt;
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    json body;
    try {
      body = json::parse(res->body);
    } catch (const json::parse_error& e) {
      throw DataError("malformed NVD response for " + id + ": " + e.what());
    }
    if (!cached.empty()) write_file_atomic(cached, res->body);
    return body;
  }
  throw NetworkError("NVD lookup for " + id + " failed after " + std::to_string(options_.retries + 1) +
                     " attempts: " + last_error);
}

std::vector<CveRecord> enrich_nvd(std::span<const CveId> cves, NvdSource& source) {
  std::vector<CveRecord> out;
  out.reserve(cves.size());
  for (const auto& id : cves) {
    auto response = source.fetch(id);
    out.push_back(response ? parse_nvd_record(*response, id) : CveRecord{id, std::nullopt, std::nullopt, std::nullopt});
  }
  return out;
}

std::size_t SeverityHistogram::total() const {
  std::size_t n = 0;
  for (const auto& [_, c] : buckets) n += c;
  return n;
}

std::size_t SeverityHistogram::count(std::string_view bucket) const {
  for (const auto& [name, c] : buckets)
    if (name == bucket) return c;
  return 0;
}

SeverityHistogram severity_histogram(std::span<const CveRecord> records, CvssVersion version) {
  SeverityHistogram h;
  h.version = version;
  std::vector<Severity> bands = version == CvssVersion::kV2
                                    ? std::vector<Severity>{Severity::kLow, Severity::kMedium, Severity::kHigh}
                                    : std::vector<Severity>{Severity::kNone, Severity::kLow, Severity::kMedium,
                                                            Severity::kHigh, Severity::kCritical};
  for (auto s : bands) h.buckets.emplace_back(std::string(to_string(s)), 0);
  h.buckets.emplace_back(std::string(kNotFoundBucket), 0);
  for (const auto& r : records) {
    const auto& s = r.score(version);
    if (!s) {
      ++h.buckets.back().second;
      continue;
    }
    auto idx = std::find(bands.begin(), bands.end(), s->severity) - bands.begin();
    ++h.buckets[static_cast<std::size_t>(idx)].second;
  }
  return h;
}

nlohmann::ordered_json to_json(const SeverityHistogram& h) {
  nlohmann::ordered_json buckets;
  for (const auto& [name, c] : h.buckets) buckets[name] = c;
  return {{"version", std::string(to_string(h.version))}, {"buckets", buckets}, {"total", h.total()}};
}

}  // namespace vt
