#include "vulntopics/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "vulntopics/errors.hpp"
#include "vulntopics/util.hpp"

namespace vt {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view tool_version() { return VULNTOPICS_VERSION; }

ordered_json to_json(const Provenance& p) {
  return {{"config_hash", p.config_hash}, {"seed", p.seed}, {"tool_version", p.tool_version}};
}

Provenance provenance_from_json(const json& j) {
  try {
    return {j.at("config_hash").get<std::string>(), j.at("seed").get<std::uint64_t>(),
            j.at("tool_version").get<std::string>()};
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed provenance block: ") + e.what());
  }
}

namespace {

double r6(double v) { return round_to(v, 6); }

ordered_json rounded(std::span<const double> xs, int decimals = 6) {
  ordered_json a = ordered_json::array();
  for (double x : xs) a.push_back(round_to(x, decimals));
  return a;
}

ordered_json terms_json(std::span<const TermScore> terms, const Dictionary& dict, const char* score_key) {
  ordered_json a = ordered_json::array();
  for (const auto& t : terms) a.push_back({{"term", dict.token(t.id)}, {score_key, r6(t.score)}});
  return a;
}

ordered_json cvss_json(const std::optional<CvssScore>& s) {
  if (!s) return nullptr;
  return {{"score", r6(s->score)}, {"severity", std::string(to_string(s->severity))}};
}

std::vector<BowDoc> bows_from_model(const LdaModel& model) {
  std::vector<BowDoc> bows;
  for (std::size_t d = 0; d < model.num_docs(); ++d) {
    std::map<TokenId, std::uint32_t> counts;
    for (auto w : model.words(d)) ++counts[w];
    BowDoc b{model.doc_ids()[d], {}};
    b.counts.assign(counts.begin(), counts.end());
    bows.push_back(std::move(b));
  }
  return bows;
}

}  // namespace

ordered_json build_report(const ReportInputs& in) {
  if (!in.model || !in.dictionary) throw std::invalid_argument("build_report needs a model and its dictionary");
  const LdaModel& model = *in.model;
  const Dictionary& dict = *in.dictionary;
  if (model.vocab_size() != dict.size()) throw DataError("model and dictionary disagree on vocabulary size");

  ordered_json report;
  report["schema_version"] = kReportSchemaVersion;
  report["provenance"] = to_json(in.provenance);
  report["corpus"] = in.corpus_stats;

  // Thread documents and their labels.
  std::map<std::string, std::size_t> label_counts;
  for (auto l : kAllLabels) label_counts[std::string(to_string(l))] = 0;
  std::size_t unlabeled = 0, manual = 0, rule = 0;
  LabelMap labels;
  for (const auto& d : in.documents) {
    if (d.label) {
      ++label_counts[std::string(to_string(*d.label))];
      labels.emplace(d.thread_id, *d.label);
    } else {
      ++unlabeled;
    }
    if (d.label_source == LabelSource::kManual) ++manual;
    if (d.label_source == LabelSource::kRule) ++rule;
  }
  ordered_json dist;
  for (auto l : kAllLabels) dist[std::string(to_string(l))] = label_counts[std::string(to_string(l))];
  dist["unlabeled"] = unlabeled;
  ordered_json filter = to_json(in.filter);
  filter["label_distribution"] = dist;
  filter["label_sources"] = {{"manual", manual}, {"rule", rule}};
  report["filter"] = filter;

  ordered_json records = ordered_json::array();
  for (const auto& r : in.cves)
    records.push_back(
        {{"cve", r.cve.str()}, {"found", r.found}, {"v2", cvss_json(r.cvss_v2)}, {"v31", cvss_json(r.cvss_v31)}});
  report["severity"] = {{"v2", to_json(severity_histogram(in.cves, CvssVersion::kV2))},
                        {"v31", to_json(severity_histogram(in.cves, CvssVersion::kV31))},
                        {"records", records}};

  const auto a = compute_analytics(model, in.analytics, &labels);
  const auto bows = bows_from_model(model);
  std::vector<BowDoc> nonempty;
  for (const auto& b : bows)
    if (!b.counts.empty()) nonempty.push_back(b);

  ordered_json topics;
  topics["num_topics"] = model.num_topics();
  topics["alpha"] = r6(model.alpha());
  topics["beta"] = r6(model.beta());
  topics["iterations"] = model.config().iterations;
  topics["vocab_size"] = model.vocab_size();
  topics["num_docs"] = model.num_docs();
  topics["tokens"] = model.total_tokens();
  topics["train_perplexity"] = nonempty.empty() ? ordered_json(nullptr) : ordered_json(r6(perplexity(model, nonempty)));
  topics["marginal"] = rounded(a.marginal);
  topics["token_shares"] = rounded(a.token_shares, 1);
  topics["salient_terms"] = terms_json(a.salient_terms, dict, "saliency");
  ordered_json rel = ordered_json::array();
  for (const auto& view : a.relevance) {
    ordered_json per_topic = ordered_json::array();
    for (const auto& t : view.topics) per_topic.push_back(terms_json(t, dict, "relevance"));
    rel.push_back({{"lambda", r6(view.lambda)}, {"topics", per_topic}});
  }
  topics["relevance"] = rel;
  ordered_json dm = ordered_json::array();
  for (const auto& row : a.distances) dm.push_back(rounded(row));
  topics["distances"] = dm;
  ordered_json coords = ordered_json::array();
  for (const auto& c : a.projection.coords) coords.push_back({r6(c[0]), r6(c[1])});
  topics["projection"] = {{"coords", coords}, {"radii", rounded(a.projection.radii)}};

  std::vector<std::string> warnings = model.warnings();
  if (a.projection.warning) warnings.push_back(*a.projection.warning);
  if (a.alignment) {
    const auto& al = *a.alignment;
    ordered_json mapped = ordered_json::array();
    for (const auto& l : al.topic_labels) mapped.push_back(l ? ordered_json(std::string(to_string(*l))) : ordered_json());
    ordered_json table = ordered_json::array();
    for (const auto& row : al.contingency) table.push_back(row);
    topics["alignment"] = {{"labels", {"PoC", "Weaponization", "Exploitation", "Other"}},
                           {"topic_labels", mapped},
                           {"contingency", table},
                           {"agreement", al.agreement},
                           {"labeled_docs", al.labeled_docs}};
    if (al.warning) warnings.push_back(*al.warning);
  }
  topics["warnings"] = warnings;
  report["topics"] = topics;

  ordered_json tfidf = ordered_json::array();
  for (const auto& doc : tfidf_transform(bows, dict)) {
    std::vector<TermScore> top;
    for (const auto& [id, w] : doc.weights) top.push_back({id, w});
    std::sort(top.begin(), top.end(),
              [](const TermScore& x, const TermScore& y) { return x.score != y.score ? x.score > y.score : x.id < y.id; });
    if (top.size() > in.tfidf_top_terms) top.resize(in.tfidf_top_terms);
    tfidf.push_back({{"thread_id", doc.doc_id}, {"terms", terms_json(top, dict, "weight")}});
  }
  report["tfidf"] = tfidf;
  return report;
}

// ---------------------------------------------------------------------------
// HTML

namespace {

std::string esc(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string text(const json& v) {
  if (v.is_string()) return esc(v.get<std::string>());
  if (v.is_null()) return "&ndash;";
  if (v.is_number_float()) return fmt(v.get<double>(), 4);
  return esc(v.dump());
}

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string bar_chart(const std::vector<std::pair<std::string, double>>& bars, const std::string& title, int decimals) {
  const int width = 520, row = 22, label_w = 150, pad = 30;
  const int height = pad + row * static_cast<int>(bars.size()) + 10;
  double max_v = 0.0;
  for (const auto& [_, v] : bars) max_v = std::max(max_v, v);
  std::string svg = "<svg width=\"" + std::to_string(width) + "\" height=\"" +
                    std::to_string(height) + "\" role=\"img\"><title>" + esc(title) + "</title>";
  svg += "<text x=\"4\" y=\"18\" class=\"t\">" + esc(title) + "</text>";
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const int y = pad + static_cast<int>(i) * row;
    const double w = max_v > 0 ? (width - label_w - 70) * bars[i].second / max_v : 0.0;
    svg += "<text x=\"" + std::to_string(label_w - 6) + "\" y=\"" + std::to_string(y + 15) +
           "\" text-anchor=\"end\">" + esc(bars[i].first) + "</text>";
    svg += "<rect x=\"" + std::to_string(label_w) + "\" y=\"" + std::to_string(y + 3) + "\" width=\"" + fmt(w, 2) +
           "\" height=\"" + std::to_string(row - 6) + "\" fill=\"#4c78a8\"/>";
    svg += "<text x=\"" + fmt(label_w + w + 4, 2) + "\" y=\"" + std::to_string(y + 15) + "\">" +
           fmt(bars[i].second, decimals) + "</text>";
  }
  return svg + "</svg>";
}

std::string topic_map(const json& topics) {
  const auto& coords = topics.at("projection").at("coords");
  const auto& radii = topics.at("projection").at("radii");
  const auto& shares = topics.at("token_shares");
  const int size = 420;
  const double half = size / 2.0;
  double extent = 1e-9;
  for (const auto& c : coords) extent = std::max({extent, std::abs(c[0].get<double>()), std::abs(c[1].get<double>())});
  const double scale = (half - 60) / extent;
  std::string svg = "<svg width=\"" + std::to_string(size) + "\" height=\"" +
                    std::to_string(size) + "\" role=\"img\"><title>Intertopic distance map</title>";
  svg += "<line x1=\"0\" y1=\"" + fmt(half, 1) + "\" x2=\"" + std::to_string(size) + "\" y2=\"" + fmt(half, 1) +
         "\" stroke=\"#ccc\"/>";
  svg += "<line x1=\"" + fmt(half, 1) + "\" y1=\"0\" x2=\"" + fmt(half, 1) + "\" y2=\"" + std::to_string(size) +
         "\" stroke=\"#ccc\"/>";
  for (std::size_t k = 0; k < coords.size(); ++k) {
    const double x = half + coords[k][0].get<double>() * scale;
    const double y = half - coords[k][1].get<double>() * scale;
    const double r = 8.0 + 50.0 * std::sqrt(std::max(0.0, radii[k].get<double>()));
    svg += "<circle cx=\"" + fmt(x, 2) + "\" cy=\"" + fmt(y, 2) + "\" r=\"" + fmt(r, 2) + "\" fill=\"" +
           kPalette[k % 10] + "\" fill-opacity=\"0.45\" stroke=\"" + kPalette[k % 10] + "\"/>";
    svg += "<text x=\"" + fmt(x, 2) + "\" y=\"" + fmt(y + 4, 2) + "\" text-anchor=\"middle\">" +
           std::to_string(k + 1) + " (" + fmt(shares[k].get<double>(), 1) + "%)</text>";
  }
  return svg + "</svg>";
}

}  // namespace

std::string render_html(const json& report) {
  const auto& prov = report.at("provenance");
  std::string h;
  h += "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n";
  h += "<title>vulntopics report</title>\n<style>\n";
  h += "body{font-family:sans-serif;margin:2em;max-width:1100px;color:#222}"
       "table{border-collapse:collapse;margin:0.5em 0 1.5em}"
       "td,th{border:1px solid #bbb;padding:3px 8px;text-align:right}"
       "th{background:#eee}td.l,th.l{text-align:left}"
       "svg text{font-size:12px;font-family:sans-serif}svg text.t{font-size:14px;font-weight:bold}"
       ".grid{display:flex;flex-wrap:wrap;gap:2em}\n";
  h += "</style>\n</head>\n<body>\n<h1>Vulnerability discussion topics</h1>\n";
  h += "<p>config " + text(prov.at("config_hash")) + " &middot; seed " + text(prov.at("seed")) +
       " &middot; vulntopics " + text(prov.at("tool_version")) + "</p>\n";

  // Corpus statistics
  h += "<h2>Corpus</h2>\n<table>\n<tr><th class=\"l\">Forum</th><th>Users</th><th>Boards</th><th>Threads</th>"
       "<th>Posts</th><th>Null titles</th><th>Empty posts</th><th>Null authors</th></tr>\n";
  auto stats_row = [&](const json& r, const std::string& name) {
    const auto& an = r.at("anomalies");
    h += "<tr><td class=\"l\">" + name + "</td><td>" + text(r.at("users")) + "</td><td>" + text(r.at("boards")) +
         "</td><td>" + text(r.at("threads")) + "</td><td>" + text(r.at("posts")) + "</td><td>" +
         text(an.at("null_titles")) + "</td><td>" + text(an.at("empty_posts")) + "</td><td>" +
         text(an.at("null_authors")) + "</td></tr>\n";
  };
  const auto& corpus = report.at("corpus");
  for (const auto& f : corpus.at("forums")) stats_row(f, text(f.at("name")));
  stats_row(corpus.at("total"), "<b>Total</b>");
  h += "</table>\n";

  // Filter
  const auto& filter = report.at("filter");
  h += "<h2>CVE-citing threads</h2>\n<table>\n";
  for (const auto& [k, v] : filter.items())
    if (!v.is_object()) h += "<tr><th class=\"l\">" + esc(k) + "</th><td>" + text(v) + "</td></tr>\n";
  h += "</table>\n";
  std::vector<std::pair<std::string, double>> label_bars;
  for (const auto& [k, v] : filter.at("label_distribution").items()) label_bars.emplace_back(k, v.get<double>());
  h += bar_chart(label_bars, "Threads per label", 0) + "\n";

  // Severity
  h += "<h2>CVSS severity</h2>\n<div class=\"grid\">\n";
  for (const char* v : {"v2", "v31"}) {
    std::vector<std::pair<std::string, double>> bars;
    for (const auto& [k, c] : report.at("severity").at(v).at("buckets").items()) bars.emplace_back(k, c.get<double>());
    h += bar_chart(bars, std::string("CVSS ") + (std::string(v) == "v2" ? "v2" : "v3.1"), 0) + "\n";
  }
  h += "</div>\n";

  // Topics
  const auto& topics = report.at("topics");
  h += "<h2>Topics</h2>\n<p>" + text(topics.at("num_topics")) + " topics, " + text(topics.at("vocab_size")) +
       " terms, " + text(topics.at("num_docs")) + " documents, " + text(topics.at("tokens")) +
       " tokens; training perplexity " + text(topics.at("train_perplexity")) + ".</p>\n";
  for (const auto& w : topics.at("warnings")) h += "<p><i>" + text(w) + "</i></p>\n";
  h += "<div class=\"grid\">\n" + topic_map(topics) + "\n";
  std::vector<std::pair<std::string, double>> salient;
  for (const auto& t : topics.at("salient_terms")) salient.emplace_back(t.at("term").get<std::string>(), t.at("saliency").get<double>());
  h += bar_chart(salient, "Most salient terms", 4) + "\n</div>\n";

  for (const auto& view : topics.at("relevance")) {
    h += "<h3>Most relevant terms, &lambda; = " + fmt(view.at("lambda").get<double>(), 2) + "</h3>\n<table>\n<tr>";
    const auto& per_topic = view.at("topics");
    std::size_t rows = 0;
    for (std::size_t k = 0; k < per_topic.size(); ++k) {
      h += "<th class=\"l\">Topic " + std::to_string(k + 1) + "</th>";
      rows = std::max(rows, per_topic[k].size());
    }
    h += "</tr>\n";
    for (std::size_t i = 0; i < rows; ++i) {
      h += "<tr>";
      for (const auto& terms : per_topic)
        h += "<td class=\"l\">" + (i < terms.size() ? text(terms[i].at("term")) : std::string()) + "</td>";
      h += "</tr>\n";
    }
    h += "</table>\n";
  }

  if (topics.contains("alignment")) {
    const auto& al = topics.at("alignment");
    h += "<h3>Topics against labels</h3>\n<table>\n<tr><th class=\"l\">Topic</th>";
    for (const auto& l : al.at("labels")) h += "<th>" + text(l) + "</th>";
    h += "<th class=\"l\">Assigned</th></tr>\n";
    for (std::size_t k = 0; k < al.at("contingency").size(); ++k) {
      h += "<tr><td class=\"l\">" + std::to_string(k + 1) + "</td>";
      for (const auto& c : al.at("contingency")[k]) h += "<td>" + text(c) + "</td>";
      h += "<td class=\"l\">" + text(al.at("topic_labels")[k]) + "</td></tr>\n";
    }
    h += "</table>\n<p>" + text(al.at("agreement")) + " of " + text(al.at("labeled_docs")) +
         " labeled threads fall in the topic assigned to their label.</p>\n";
  }

  h += "<h2>TF-IDF top terms</h2>\n<table>\n<tr><th class=\"l\">Thread</th><th class=\"l\">Terms</th></tr>\n";
  for (const auto& d : report.at("tfidf")) {
    std::string terms;
    for (const auto& t : d.at("terms")) {
      if (!terms.empty()) terms += ", ";
      terms += text(t.at("term")) + " (" + fmt(t.at("weight").get<double>(), 3) + ")";
    }
    h += "<tr><td class=\"l\">" + text(d.at("thread_id")) + "</td><td class=\"l\">" + terms + "</td></tr>\n";
  }
  h += "</table>\n</body>\n</html>\n";
  return h;
}

}  // namespace vt
