#include "vulntopics/cve.hpp"

#include <algorithm>
#include <set>

#include "vulntopics/errors.hpp"

namespace vt {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : c; }

/// Length of the match of cve-[0-9]{4}-[0-9]{4,} anchored at `pos`, or 0.
std::size_t match_at(std::string_view s, std::size_t pos) {
  if (pos + 13 > s.size()) return 0;
  if (lower(s[pos]) != 'c' || lower(s[pos + 1]) != 'v' || lower(s[pos + 2]) != 'e' || s[pos + 3] != '-') return 0;
  for (std::size_t i = pos + 4; i < pos + 8; ++i)
    if (!is_digit(s[i])) return 0;
  if (s[pos + 8] != '-') return 0;
  std::size_t end = pos + 9;
  while (end < s.size() && is_digit(s[end])) ++end;
  return end - (pos + 9) >= 4 ? end - pos : 0;
}

void add_unique(std::vector<CveId>& out, CveId id) {
  if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(std::move(id));
}

}  // namespace

std::optional<CveId> CveId::parse(std::string_view text) {
  if (match_at(text, 0) != text.size() || text.empty()) return std::nullopt;
  int year = 0;
  for (std::size_t i = 4; i < 8; ++i) year = year * 10 + (text[i] - '0');
  return CveId(year, std::string(text.substr(9)));
}

std::string CveId::str() const {
  std::string s = "CVE-";
  std::string y = std::to_string(year_);
  s.append(4 - std::min<std::size_t>(4, y.size()), '0');
  s += y;
  s += '-';
  s += number_;
  return s;
}

std::vector<CveId> extract_cves(std::string_view text) {
  std::vector<CveId> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t len = match_at(text, pos);
    if (len == 0) {
      ++pos;
      continue;
    }
    add_unique(out, *CveId::parse(text.substr(pos, len)));
    pos += len;
  }
  return out;
}

std::string_view to_string(TopicLabel label) {
  switch (label) {
    case TopicLabel::kPoC:
      return "PoC";
    case TopicLabel::kWeaponization:
      return "Weaponization";
    case TopicLabel::kExploitation:
      return "Exploitation";
    case TopicLabel::kOther:
      return "Other";
  }
  return "?";
}

std::optional<TopicLabel> parse_label(std::string_view text) {
  auto eq = [&](std::string_view name) {
    return text.size() == name.size() &&
           std::equal(text.begin(), text.end(), name.begin(), [](char a, char b) { return lower(a) == lower(b); });
  };
  for (auto label : kAllLabels)
    if (eq(to_string(label))) return label;
  return std::nullopt;
}

std::string_view to_string(LabelSource source) {
  switch (source) {
    case LabelSource::kNone:
      return "none";
    case LabelSource::kRule:
      return "rule";
    case LabelSource::kManual:
      return "manual";
  }
  return "?";
}

nlohmann::ordered_json to_json(const ThreadDocument& doc) {
  nlohmann::ordered_json cves = nlohmann::ordered_json::array();
  for (const auto& c : doc.cves) cves.push_back(c.str());
  nlohmann::ordered_json j;
  j["thread_id"] = doc.thread_id;
  j["forum_id"] = doc.forum_id;
  j["board_id"] = doc.board_id;
  j["language"] = doc.language;
  j["cves"] = std::move(cves);
  j["label"] = doc.label ? nlohmann::ordered_json(std::string(to_string(*doc.label))) : nlohmann::ordered_json();
  j["label_source"] = std::string(to_string(doc.label_source));
  j["merged_text"] = doc.merged_text;
  return j;
}

ThreadDocument thread_document_from_json(const nlohmann::json& j) {
  try {
    ThreadDocument doc;
    doc.thread_id = j.at("thread_id").get<std::string>();
    doc.forum_id = j.at("forum_id").get<std::string>();
    doc.board_id = j.at("board_id").get<std::string>();
    doc.language = j.at("language").get<std::string>();
    doc.merged_text = j.at("merged_text").get<std::string>();
    for (const auto& c : j.at("cves")) {
      auto id = CveId::parse(c.get<std::string>());
      if (!id) throw DataError("invalid CVE id in thread document: " + c.get<std::string>());
      doc.cves.push_back(*id);
    }
    if (doc.cves.empty()) throw DataError("thread document " + doc.thread_id + " has no CVEs");
    if (!j.at("label").is_null()) {
      auto l = parse_label(j.at("label").get<std::string>());
      if (!l) throw DataError("invalid label in thread document " + doc.thread_id);
      doc.label = *l;
    }
    const auto src = j.at("label_source").get<std::string>();
    doc.label_source = src == "manual" ? LabelSource::kManual : src == "rule" ? LabelSource::kRule : LabelSource::kNone;
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed thread document: ") + e.what());
  }
}

std::optional<ThreadDocument> merge_thread_posts(const Thread& thread, std::span<const Post* const> posts) {
  ThreadDocument doc;
  doc.thread_id = thread.thread_id;
  doc.board_id = thread.board_id;
  auto append = [&](const std::string& text) {
    if (text.empty()) return;
    if (!doc.merged_text.empty()) doc.merged_text.push_back('\n');
    doc.merged_text += text;
    for (auto& id : extract_cves(text)) add_unique(doc.cves, std::move(id));
  };
  if (thread.title) append(*thread.title);
  for (const Post* p : posts)
    if (p->body) append(*p->body);
  if (doc.cves.empty()) return std::nullopt;
  return doc;
}

nlohmann::ordered_json to_json(const FilterReport& r) {
  return {{"threads_scanned", r.threads_scanned},
          {"posts_scanned", r.posts_scanned},
          {"posts_citing_cves", r.posts_citing_cves},
          {"unique_cves_in_posts", r.unique_cves_in_posts},
          {"cve_threads", r.cve_threads},
          {"excluded_by_language", r.excluded_by_language},
          {"threads_kept", r.threads_kept},
          {"unique_cves_in_threads", r.unique_cves_in_threads}};
}

FilterReport filter_report_from_json(const nlohmann::json& j) {
  try {
    FilterReport r;
    r.threads_scanned = j.at("threads_scanned").get<std::size_t>();
    r.posts_scanned = j.at("posts_scanned").get<std::size_t>();
    r.posts_citing_cves = j.at("posts_citing_cves").get<std::size_t>();
    r.unique_cves_in_posts = j.at("unique_cves_in_posts").get<std::size_t>();
    r.cve_threads = j.at("cve_threads").get<std::size_t>();
    r.excluded_by_language = j.at("excluded_by_language").get<std::size_t>();
    r.threads_kept = j.at("threads_kept").get<std::size_t>();
    r.unique_cves_in_threads = j.at("unique_cves_in_threads").get<std::size_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed filter report: ") + e.what());
  }
}

FilterResult filter_corpus(const Corpus& corpus, const FilterConfig& filter, const LanguageSet& languages,
                           std::string_view target_language) {
  FilterResult result;
  auto& rep = result.report;
  std::set<std::string> post_cves;
  std::set<std::string> thread_cves;
  for (const auto& thread : corpus.threads()) {
    ++rep.threads_scanned;
    auto posts = corpus.posts_of(thread);
    for (const Post* p : posts) {
      ++rep.posts_scanned;
      if (!p->body) continue;
      auto ids = extract_cves(*p->body);
      if (ids.empty()) continue;
      ++rep.posts_citing_cves;
      for (const auto& id : ids) post_cves.insert(id.str());
    }
    auto doc = merge_thread_posts(thread, posts);
    if (!doc) continue;
    ++rep.cve_threads;
    auto lang = detect_language(tokenize(normalize(doc->merged_text, filter)), languages);
    doc->language = lang ? *lang : std::string(kUndetermined);
    if (doc->language != target_language) {
      ++rep.excluded_by_language;
      continue;
    }
    doc->forum_id = corpus.forum_of(thread).forum_id;
    for (const auto& id : doc->cves) thread_cves.insert(id.str());
    result.documents.push_back(std::move(*doc));
  }
  rep.unique_cves_in_posts = post_cves.size();
  rep.threads_kept = result.documents.size();
  rep.unique_cves_in_threads = thread_cves.size();
  return result;
}

}  // namespace vt
