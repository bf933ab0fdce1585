#include "vulntopics/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <set>

#include "vulntopics/errors.hpp"
#include "vulntopics/util.hpp"

namespace vt {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::optional<NvdMode> parse_nvd_mode(std::string_view name) {
  if (name == "fixture") return NvdMode::kFixture;
  if (name == "live") return NvdMode::kLive;
  return std::nullopt;
}

std::string_view to_string(NvdMode mode) { return mode == NvdMode::kLive ? "live" : "fixture"; }

std::filesystem::path resource_dir() {
  if (const char* env = std::getenv("VULNTOPICS_RESOURCE_DIR"); env && *env) return env;
  return VULNTOPICS_RESOURCE_DIR;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

namespace {

// Accepted keys per section. The empty section is the top level.
const std::vector<std::pair<std::string, std::vector<std::string>>>& schema() {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> s = {
      {"", {"corpus", "textprep", "labels", "nvd", "dictionary", "lda", "report", "output_dir"}},
      {"corpus", {"path", "format", "max_dangling_fraction"}},
      {"textprep", {"alphabets", "languages", "target_language", "stopwords", "emoticons", "lemmas"}},
      {"labels", {"codebook", "manual"}},
      {"nvd", {"mode", "fixtures", "cache", "base_url", "api_key_env", "min_interval_ms"}},
      {"dictionary", {"no_below", "no_above"}},
      {"lda", {"topics", "alpha", "beta", "iterations", "burn_in", "seed", "average_samples", "fold_in_iterations"}},
      {"report", {"top_n", "lambdas", "tfidf_top_terms"}},
  };
  return s;
}

std::string join_path(const std::string& section, const std::string& key) {
  return section.empty() ? key : section + "." + key;
}

// Rejects keys not in the section's schema, suggesting the closest known key
// anywhere in the schema (same-section keys win ties).
void check_keys(const json& obj, const std::string& section) {
  const auto& sections = schema();
  auto it = std::find_if(sections.begin(), sections.end(), [&](const auto& s) { return s.first == section; });
  for (const auto& [key, _] : obj.items()) {
    if (std::find(it->second.begin(), it->second.end(), key) != it->second.end()) continue;
    std::string best;
    std::size_t best_d = std::numeric_limits<std::size_t>::max();
    auto consider = [&](const std::string& sec, const std::string& cand) {
      const std::size_t d = edit_distance(key, cand);
      if (d < best_d) {
        best_d = d;
        best = join_path(sec, cand);
      }
    };
    for (const auto& cand : it->second) consider(section, cand);
    for (const auto& [sec, keys] : sections)
      if (sec != section)
        for (const auto& cand : keys) consider(sec, cand);
    std::string msg = "unknown key";
    if (best_d <= std::max<std::size_t>(2, key.size() / 3)) msg += "; did you mean \"" + best + "\"?";
    throw ConfigError(msg, join_path(section, key));
  }
}

const json* member(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

const json& object_section(const json& doc, const char* key, const json& empty) {
  const json* v = member(doc, key);
  if (!v) return empty;
  if (!v->is_object()) throw ConfigError("expected an object", key);
  check_keys(*v, key);
  return *v;
}

std::string get_string(const json& v, const std::string& field) {
  if (!v.is_string()) throw ConfigError("expected a string", field);
  auto s = v.get<std::string>();
  if (s.empty()) throw ConfigError("must not be empty", field);
  return s;
}

double get_number(const json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError("expected a number", field);
  return v.get<double>();
}

std::uint64_t get_count(const json& v, const std::string& field) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
    throw ConfigError("expected a non-negative integer", field);
  return v.get<std::uint64_t>();
}

bool get_bool(const json& v, const std::string& field) {
  if (!v.is_boolean()) throw ConfigError("expected true or false", field);
  return v.get<bool>();
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  if (path.is_relative()) path = base / path;
  return path.lexically_normal();
}

fs::path get_path(const json& v, const std::string& field, const fs::path& base) {
  return resolve(base, get_string(v, field));
}

void require_exists(const fs::path& p, const std::string& field) {
  std::error_code ec;
  if (!fs::exists(p, ec)) throw ConfigError("file not found: " + p.string(), field);
}

std::string path_hash(const fs::path& p) {
  std::error_code ec;
  if (fs::is_directory(p, ec)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(p))
      if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    Fnv1a64 h;
    for (const auto& f : files) {
      h.update(fs::relative(f, p).generic_string());
      h.update(std::string_view("\0", 1));
      h.update(hash_hex(read_file(f)));
    }
    return "dir:" + h.hex();
  }
  return "file:" + hash_hex(read_file(p));
}

}  // namespace

PipelineConfig parse_config(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  check_keys(doc, "");
  const fs::path base = fs::absolute(base_dir).lexically_normal();
  const fs::path res = fs::absolute(resource_dir()).lexically_normal();
  const json empty = json::object();
  PipelineConfig cfg;

  // corpus: either a path string or an object.
  const json* corpus = member(doc, "corpus");
  if (!corpus) throw ConfigError("required", "corpus");
  if (corpus->is_string()) {
    cfg.corpus = get_path(*corpus, "corpus", base);
  } else if (corpus->is_object()) {
    check_keys(*corpus, "corpus");
    const json* p = member(*corpus, "path");
    if (!p) throw ConfigError("required", "corpus.path");
    cfg.corpus = get_path(*p, "corpus.path", base);
    if (const json* f = member(*corpus, "format")) {
      auto fmt = parse_corpus_format(get_string(*f, "corpus.format"));
      if (!fmt) throw ConfigError("expected \"jsonl\" or \"csv\"", "corpus.format");
      cfg.corpus_format = *fmt;
    }
    if (const json* m = member(*corpus, "max_dangling_fraction"))
      cfg.max_dangling_fraction = get_number(*m, "corpus.max_dangling_fraction");
  } else {
    throw ConfigError("expected a path or an object", "corpus");
  }

  const json& tp = object_section(doc, "textprep", empty);
  if (const json* a = member(tp, "alphabets")) {
    if (!a->is_array()) throw ConfigError("expected an array", "textprep.alphabets");
    cfg.alphabets.clear();
    for (std::size_t i = 0; i < a->size(); ++i) {
      const std::string field = "textprep.alphabets[" + std::to_string(i) + "]";
      auto alpha = parse_alphabet(get_string((*a)[i], field));
      if (!alpha) throw ConfigError("expected latin, cyrillic or german", field);
      cfg.alphabets.push_back(*alpha);
    }
  }
  if (const json* langs = member(tp, "languages")) {
    if (!langs->is_array()) throw ConfigError("expected an array", "textprep.languages");
    for (std::size_t i = 0; i < langs->size(); ++i) {
      const std::string field = "textprep.languages[" + std::to_string(i) + "]";
      const json& l = (*langs)[i];
      if (!l.is_object()) throw ConfigError("expected {\"id\": ..., \"wordlist\": ...}", field);
      for (const auto& [k, _] : l.items())
        if (k != "id" && k != "wordlist") throw ConfigError("unknown key", field + "." + k);
      if (!member(l, "id")) throw ConfigError("required", field + ".id");
      if (!member(l, "wordlist")) throw ConfigError("required", field + ".wordlist");
      cfg.languages.push_back(
          {get_string(l["id"], field + ".id"), get_path(l["wordlist"], field + ".wordlist", base)});
    }
  } else {
    cfg.languages = {{"english", res / "wordlist_english.txt"}, {"russian", res / "wordlist_russian.txt"}};
  }
  if (const json* t = member(tp, "target_language")) cfg.target_language = get_string(*t, "textprep.target_language");
  cfg.stopwords = member(tp, "stopwords") ? get_path(tp["stopwords"], "textprep.stopwords", base)
                                          : res / "stopwords_english.txt";
  if (const json* e = member(tp, "emoticons")) cfg.emoticons = get_path(*e, "textprep.emoticons", base);
  cfg.lemmas = member(tp, "lemmas") ? get_path(tp["lemmas"], "textprep.lemmas", base) : res / "lemmas_english.tsv";

  const json& lb = object_section(doc, "labels", empty);
  cfg.codebook = member(lb, "codebook") ? get_path(lb["codebook"], "labels.codebook", base) : res / "codebook.txt";
  if (const json* m = member(lb, "manual")) cfg.labels = get_path(*m, "labels.manual", base);

  const json& nvd = object_section(doc, "nvd", empty);
  if (const json* m = member(nvd, "mode")) {
    auto mode = parse_nvd_mode(get_string(*m, "nvd.mode"));
    if (!mode) throw ConfigError("expected \"fixture\" or \"live\"", "nvd.mode");
    cfg.nvd_mode = *mode;
  }
  if (const json* f = member(nvd, "fixtures")) cfg.nvd_fixtures = get_path(*f, "nvd.fixtures", base);
  if (const json* c = member(nvd, "cache")) cfg.nvd_cache = get_path(*c, "nvd.cache", base);
  if (const json* u = member(nvd, "base_url")) cfg.nvd_base_url = get_string(*u, "nvd.base_url");
  if (const json* k = member(nvd, "api_key_env")) cfg.nvd_api_key_env = get_string(*k, "nvd.api_key_env");
  if (const json* i = member(nvd, "min_interval_ms"))
    cfg.nvd_min_interval = std::chrono::milliseconds(get_count(*i, "nvd.min_interval_ms"));

  const json& dict = object_section(doc, "dictionary", empty);
  if (const json* b = member(dict, "no_below")) cfg.no_below = get_count(*b, "dictionary.no_below");
  if (const json* a = member(dict, "no_above")) cfg.no_above = get_number(*a, "dictionary.no_above");

  const json& lda = object_section(doc, "lda", empty);
  if (const json* v = member(lda, "topics")) cfg.lda.topics = get_count(*v, "lda.topics");
  if (const json* v = member(lda, "alpha")) cfg.lda.alpha = get_number(*v, "lda.alpha");
  if (const json* v = member(lda, "beta")) cfg.lda.beta = get_number(*v, "lda.beta");
  if (const json* v = member(lda, "iterations")) cfg.lda.iterations = get_count(*v, "lda.iterations");
  if (const json* v = member(lda, "burn_in")) cfg.lda.burn_in = get_count(*v, "lda.burn_in");
  if (const json* v = member(lda, "seed")) cfg.lda.seed = get_count(*v, "lda.seed");
  if (const json* v = member(lda, "average_samples")) cfg.lda.average_samples = get_bool(*v, "lda.average_samples");
  if (const json* v = member(lda, "fold_in_iterations"))
    cfg.lda.fold_in_iterations = get_count(*v, "lda.fold_in_iterations");

  const json& rep = object_section(doc, "report", empty);
  if (const json* v = member(rep, "top_n")) cfg.top_n = get_count(*v, "report.top_n");
  if (const json* v = member(rep, "lambdas")) {
    if (!v->is_array()) throw ConfigError("expected an array of numbers", "report.lambdas");
    cfg.lambdas.clear();
    for (std::size_t i = 0; i < v->size(); ++i)
      cfg.lambdas.push_back(get_number((*v)[i], "report.lambdas[" + std::to_string(i) + "]"));
  }
  if (const json* v = member(rep, "tfidf_top_terms")) cfg.tfidf_top_terms = get_count(*v, "report.tfidf_top_terms");

  cfg.output_dir = member(doc, "output_dir") ? get_path(doc["output_dir"], "output_dir", base) : base / "vulntopics-out";
  return cfg;
}

void PipelineConfig::validate() const {
  if (!(max_dangling_fraction >= 0.0 && max_dangling_fraction <= 1.0))
    throw ConfigError("must lie in [0, 1]", "corpus.max_dangling_fraction");
  if (alphabets.empty()) throw ConfigError("at least one alphabet is required", "textprep.alphabets");
  if (languages.empty()) throw ConfigError("at least one language is required", "textprep.languages");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < languages.size(); ++i) {
    const std::string field = "textprep.languages[" + std::to_string(i) + "]";
    if (!ids.insert(languages[i].id).second) throw ConfigError("duplicate language id", field + ".id");
    require_exists(languages[i].wordlist, field + ".wordlist");
  }
  if (!ids.count(target_language))
    throw ConfigError("\"" + target_language + "\" is not one of the configured languages", "textprep.target_language");
  require_exists(corpus, "corpus");
  require_exists(stopwords, "textprep.stopwords");
  if (emoticons) require_exists(*emoticons, "textprep.emoticons");
  require_exists(lemmas, "textprep.lemmas");
  require_exists(codebook, "labels.codebook");
  if (labels) require_exists(*labels, "labels.manual");
  if (nvd_fixtures) require_exists(*nvd_fixtures, "nvd.fixtures");
  if (!(no_above > 0.0 && no_above <= 1.0)) throw ConfigError("must lie in (0, 1]", "dictionary.no_above");
  lda.validate();
  if (top_n == 0) throw ConfigError("must be at least 1", "report.top_n");
  if (lambdas.empty()) throw ConfigError("at least one value is required", "report.lambdas");
  for (std::size_t i = 0; i < lambdas.size(); ++i)
    if (!(lambdas[i] >= 0.0 && lambdas[i] <= 1.0))
      throw ConfigError("value " + nlohmann::json(lambdas[i]).dump() + " outside [0, 1]",
                        "report.lambdas[" + std::to_string(i) + "]");
}

namespace {

ordered_json config_json(const PipelineConfig& c, const std::function<ordered_json(const fs::path&)>& path) {
  ordered_json langs = ordered_json::array();
  for (const auto& l : c.languages) langs.push_back({{"id", l.id}, {"wordlist", path(l.wordlist)}});
  ordered_json alphabets = ordered_json::array();
  for (auto a : c.alphabets) alphabets.push_back(std::string(to_string(a)));
  auto opt = [&](const std::optional<fs::path>& p) { return p ? path(*p) : ordered_json(nullptr); };
  return {
      {"corpus",
       {{"path", path(c.corpus)},
        {"format", c.corpus_format == CorpusFormat::kCsvBundle ? "csv" : "jsonl"},
        {"max_dangling_fraction", c.max_dangling_fraction}}},
      {"textprep",
       {{"alphabets", alphabets},
        {"languages", langs},
        {"target_language", c.target_language},
        {"stopwords", path(c.stopwords)},
        {"emoticons", opt(c.emoticons)},
        {"lemmas", path(c.lemmas)}}},
      {"labels", {{"codebook", path(c.codebook)}, {"manual", opt(c.labels)}}},
      {"nvd", {{"mode", std::string(to_string(c.nvd_mode))}, {"fixtures", opt(c.nvd_fixtures)}}},
      {"dictionary", {{"no_below", c.no_below}, {"no_above", c.no_above}}},
      {"lda", vt::to_json(c.lda)},
      {"report", {{"top_n", c.top_n}, {"lambdas", c.lambdas}, {"tfidf_top_terms", c.tfidf_top_terms}}},
  };
}

}  // namespace

ordered_json PipelineConfig::to_json() const {
  auto j = config_json(*this, [](const fs::path& p) { return ordered_json(p.string()); });
  auto& nvd = j["nvd"];
  nvd["cache"] = nvd_cache ? ordered_json(nvd_cache->string()) : ordered_json(nullptr);
  nvd["base_url"] = nvd_base_url;
  nvd["api_key_env"] = nvd_api_key_env;
  nvd["min_interval_ms"] = nvd_min_interval.count();
  j["output_dir"] = output_dir.string();
  return j;
}

std::string PipelineConfig::hash() const {
  auto j = config_json(*this, [](const fs::path& p) { return ordered_json(path_hash(p)); });
  if (nvd_mode == NvdMode::kLive) j["nvd"]["base_url"] = nvd_base_url;
  return hash_hex(j.dump());
}

PipelineConfig validate_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
  auto cfg = parse_config(doc, fs::absolute(path).parent_path());
  cfg.source = fs::absolute(path).lexically_normal();
  cfg.validate();
  return cfg;
}

}  // namespace vt
