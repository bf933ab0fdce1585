#include "vulntopics/pipeline.hpp"

#include <cstdlib>
#include <ostream>
#include <set>
#include <sstream>

#include "vulntopics/codebook.hpp"
#include "vulntopics/errors.hpp"
#include "vulntopics/util.hpp"

namespace vt {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

struct TextResources {
  FilterConfig filter;
  LanguageSet languages;
  LemmaTable lemmas;
};

TextResources load_text_resources(const PipelineConfig& cfg) {
  TextResources r;
  const auto stopwords = read_entry_list(cfg.stopwords);
  const auto emoticons = cfg.emoticons ? read_entry_list(*cfg.emoticons) : default_emoticons();
  r.filter = make_filter_config(cfg.alphabets, stopwords, emoticons);
  for (const auto& l : cfg.languages) r.languages.languages.push_back(load_language_profile(l.id, l.wordlist));
  validate(r.languages);
  r.lemmas = load_lemma_table(cfg.lemmas);
  return r;
}

struct ArtifactInfo {
  std::string_view file;
  std::string_view name;
  std::string_view producer;
};

constexpr ArtifactInfo kStats{kStatsArtifact, "corpus-stats", "stats"};
constexpr ArtifactInfo kThreads{kThreadsArtifact, "thread-documents", "filter"};
constexpr ArtifactInfo kCves{kCvesArtifact, "enriched-cve", "enrich"};
constexpr ArtifactInfo kModel{kModelArtifact, "topic-model", "train"};

std::string read_artifact(const fs::path& path, const ArtifactInfo& info) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw MissingArtifactError(std::string(info.name), std::string(info.producer));
  return read_file(path);
}

json parse_artifact(std::string_view text, const fs::path& path) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace

Pipeline::Pipeline(PipelineConfig config, std::ostream* log) : config_(std::move(config)), log_(log) {
  provenance_ = {config_.hash(), config_.lda.seed, std::string(tool_version())};
}

void Pipeline::say(std::string_view message) const {
  if (log_) *log_ << message << '\n';
}

void Pipeline::check(const json& provenance, std::string_view artifact, std::string_view producer) const {
  const auto p = provenance_from_json(provenance);
  if (p.config_hash != provenance_.config_hash) throw StaleArtifactError(std::string(artifact), std::string(producer));
}

Corpus Pipeline::ingest() const {
  LoadOptions opts;
  opts.max_dangling_fraction = config_.max_dangling_fraction;
  auto corpus = load_corpus(config_.corpus, config_.corpus_format, opts);
  std::ostringstream msg;
  msg << "ingest: " << corpus.forums().size() << " forums, " << corpus.boards().size() << " boards, "
      << corpus.threads().size() << " threads, " << corpus.posts().size() << " posts";
  if (!corpus.dangling().empty()) msg << ", " << corpus.dangling().size() << " dangling records skipped";
  say(msg.str());
  for (const auto& d : corpus.dangling())
    say("  dangling " + d.kind + " " + d.id + " (missing parent " + d.missing_parent + ") at " + d.location);
  return corpus;
}

CorpusStats Pipeline::stats() const {
  const auto corpus = ingest();
  auto stats = corpus_stats(corpus);
  ordered_json j{{"provenance", to_json(provenance_)}, {"stats", to_json(stats)}};
  fs::create_directories(config_.output_dir);
  write_file_atomic(artifact_path(kStatsArtifact), j.dump(2) + "\n");
  say("stats: wrote " + artifact_path(kStatsArtifact).string());
  return stats;
}

ThreadArtifact Pipeline::filter() const {
  const auto corpus = ingest();
  const auto res = load_text_resources(config_);
  auto result = filter_corpus(corpus, res.filter, res.languages, config_.target_language);
  const auto codebook = Codebook::load(config_.codebook, res.filter, res.lemmas);
  const LabelMap manual = config_.labels ? load_labels(*config_.labels) : LabelMap{};
  assign_labels(result.documents, codebook, manual, res.filter, res.lemmas);

  std::string out = ordered_json{{"kind", "header"},
                                 {"provenance", to_json(provenance_)},
                                 {"filter", to_json(result.report)}}
                        .dump() +
                    "\n";
  for (const auto& d : result.documents) out += to_json(d).dump() + "\n";
  fs::create_directories(config_.output_dir);
  write_file_atomic(artifact_path(kThreadsArtifact), out);
  std::ostringstream msg;
  msg << "filter: kept " << result.report.threads_kept << " of " << result.report.threads_scanned << " threads ("
      << result.report.cve_threads << " cite CVEs, " << result.report.excluded_by_language
      << " excluded by language)";
  say(msg.str());
  return {provenance_, result.report, std::move(result.documents)};
}

ThreadArtifact Pipeline::read_threads() const {
  const auto path = artifact_path(kThreadsArtifact);
  const auto text = read_artifact(path, kThreads);
  ThreadArtifact a;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto j = parse_artifact(line, path.string() + ":" + std::to_string(line_no));
    if (!header) {
      if (j.value("kind", "") != "header") throw DataError(path.string() + ":1: missing header record");
      check(j.at("provenance"), kThreads.name, kThreads.producer);
      a.provenance = provenance_from_json(j.at("provenance"));
      a.report = filter_report_from_json(j.at("filter"));
      header = true;
      continue;
    }
    a.documents.push_back(thread_document_from_json(j));
  }
  if (!header) throw DataError(path.string() + ": empty artifact");
  return a;
}

std::vector<CveRecord> Pipeline::enrich() const {
  const auto threads = read_threads();
  std::set<CveId> unique;
  for (const auto& d : threads.documents) unique.insert(d.cves.begin(), d.cves.end());
  const std::vector<CveId> cves(unique.begin(), unique.end());

  std::vector<CveRecord> records;
  if (config_.nvd_mode == NvdMode::kFixture) {
    if (!config_.nvd_fixtures) throw ConfigError("required in fixture mode", "nvd.fixtures");
    FixtureNvdSource source(*config_.nvd_fixtures);
    records = enrich_nvd(cves, source);
  } else {
    LiveNvdOptions opts;
    opts.base_url = config_.nvd_base_url;
    opts.cache_dir = config_.nvd_cache ? *config_.nvd_cache : config_.output_dir / "nvd-cache";
    opts.min_interval = config_.nvd_min_interval;
    if (const char* key = std::getenv(config_.nvd_api_key_env.c_str()); key && *key) opts.api_key = key;
    LiveNvdSource source(opts);
    records = enrich_nvd(cves, source);
    say("enrich: " + std::to_string(source.requests_sent()) + " NVD requests");
  }
  ordered_json arr = ordered_json::array();
  for (const auto& r : records) arr.push_back(to_json(r));
  ordered_json j{{"provenance", to_json(provenance_)}, {"records", arr}};
  fs::create_directories(config_.output_dir);
  write_file_atomic(artifact_path(kCvesArtifact), j.dump(2) + "\n");
  std::size_t found = 0;
  for (const auto& r : records) found += r.found ? 1 : 0;
  say("enrich: " + std::to_string(records.size()) + " CVEs, " + std::to_string(found) + " found in NVD");
  return records;
}

std::vector<CveRecord> Pipeline::read_cves() const {
  const auto path = artifact_path(kCvesArtifact);
  const auto j = parse_artifact(read_artifact(path, kCves), path);
  check(j.at("provenance"), kCves.name, kCves.producer);
  std::vector<CveRecord> records;
  for (const auto& r : j.at("records")) records.push_back(cve_record_from_json(r));
  return records;
}

ModelArtifact Pipeline::train() const {
  const auto threads = read_threads();
  if (threads.documents.empty()) throw DataError("no thread documents to train on");
  const auto res = load_text_resources(config_);
  std::vector<TokenizedDoc> docs;
  docs.reserve(threads.documents.size());
  for (const auto& d : threads.documents)
    docs.push_back(preprocess_document(d.thread_id, d.merged_text, res.filter, res.lemmas));
  auto dict = filter_extremes(build_dictionary(docs), config_.no_below, config_.no_above);
  std::vector<BowDoc> bows;
  bows.reserve(docs.size());
  for (const auto& d : docs) bows.push_back(doc2bow(d, dict));
  auto model = train_lda(bows, dict, config_.lda);

  ordered_json tokens = ordered_json::array();
  for (TokenId id = 0; id < dict.size(); ++id) tokens.push_back({dict.token(id), dict.df(id), dict.cf(id)});
  ordered_json j{{"provenance", to_json(provenance_)},
                 {"dictionary", {{"num_docs", dict.num_docs()}, {"tokens", tokens}}},
                 {"model", model.to_json()}};
  fs::create_directories(config_.output_dir);
  write_file_atomic(artifact_path(kModelArtifact), j.dump() + "\n");
  say("train: " + std::to_string(model.num_topics()) + " topics over " + std::to_string(dict.size()) + " terms, " +
      std::to_string(model.total_tokens()) + " tokens, " + std::to_string(config_.lda.iterations) + " sweeps");
  for (const auto& w : model.warnings()) say("train: warning: " + w);
  return {provenance_, std::move(dict), std::move(model)};
}

ModelArtifact Pipeline::read_model() const {
  const auto path = artifact_path(kModelArtifact);
  const auto j = parse_artifact(read_artifact(path, kModel), path);
  check(j.at("provenance"), kModel.name, kModel.producer);
  Dictionary dict;
  try {
    const auto& d = j.at("dictionary");
    dict.set_num_docs(d.at("num_docs").get<std::size_t>());
    for (const auto& t : d.at("tokens"))
      dict.add(t.at(0).get<std::string>(), t.at(1).get<std::size_t>(), t.at(2).get<std::size_t>());
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": malformed dictionary: " + e.what());
  }
  auto model = LdaModel::from_json(j.at("model"), dict.hash());
  return {provenance_from_json(j.at("provenance")), std::move(dict), std::move(model)};
}

ordered_json Pipeline::read_stats() const {
  const auto path = artifact_path(kStatsArtifact);
  const auto j = parse_artifact(read_artifact(path, kStats), path);
  check(j.at("provenance"), kStats.name, kStats.producer);
  return j.at("stats");
}

ordered_json Pipeline::report() const {
  const auto stats = read_stats();
  const auto threads = read_threads();
  const auto cves = read_cves();
  const auto model = read_model();

  ReportInputs in;
  in.provenance = provenance_;
  in.corpus_stats = stats;
  in.filter = threads.report;
  in.documents = threads.documents;
  in.cves = cves;
  in.model = &model.model;
  in.dictionary = &model.dictionary;
  in.analytics.top_n = config_.top_n;
  in.analytics.lambdas = config_.lambdas;
  in.tfidf_top_terms = config_.tfidf_top_terms;
  auto report = build_report(in);

  fs::create_directories(config_.output_dir);
  write_file_atomic(artifact_path(kReportJson), report.dump(2) + "\n");
  write_file_atomic(artifact_path(kReportHtml), render_html(report));
  say("report: wrote " + artifact_path(kReportJson).string() + " and " + artifact_path(kReportHtml).string());
  return report;
}

ordered_json Pipeline::run() const {
  stats();
  filter();
  enrich();
  train();
  return report();
}

}  // namespace vt
