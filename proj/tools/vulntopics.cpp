// vulntopics: command-line driver for the forum CVE topic pipeline.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "vulntopics/config.hpp"
#include "vulntopics/errors.hpp"
#include "vulntopics/pipeline.hpp"

namespace {

struct GlobalOptions {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> nvd_mode;
  std::optional<std::string> nvd_cache;
  std::optional<std::string> format;
  bool quiet = false;
};

vt::PipelineConfig load(const GlobalOptions& g) {
  auto cfg = vt::validate_config(g.config);
  if (g.out) cfg.output_dir = std::filesystem::absolute(*g.out).lexically_normal();
  if (g.seed) cfg.lda.seed = *g.seed;
  if (g.nvd_mode) {
    auto mode = vt::parse_nvd_mode(*g.nvd_mode);
    if (!mode) throw vt::ConfigError("expected \"fixture\" or \"live\"", "--nvd-mode");
    cfg.nvd_mode = *mode;
  }
  if (g.nvd_cache) cfg.nvd_cache = std::filesystem::absolute(*g.nvd_cache).lexically_normal();
  if (g.format) {
    auto fmt = vt::parse_corpus_format(*g.format);
    if (!fmt) throw vt::ConfigError("expected \"jsonl\" or \"csv\"", "--format");
    cfg.corpus_format = *fmt;
  }
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mine CVE discussions in forum dumps: filter, label, topic-model and report."};
  app.set_version_flag("--version", std::string(vt::tool_version()));
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("-c,--config", g.config, "Pipeline config (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("-o,--out", g.out, "Output directory (overrides output_dir)");
  app.add_option("--seed", g.seed, "Sampler seed (overrides lda.seed)");
  app.add_option("--nvd-mode", g.nvd_mode, "fixture or live")->check(CLI::IsMember({"fixture", "live"}));
  app.add_option("--nvd-cache", g.nvd_cache, "Response cache directory for live NVD lookups");
  app.add_option("--format", g.format, "Corpus format: jsonl or csv")->check(CLI::IsMember({"jsonl", "csv"}));
  app.add_flag("-q,--quiet", g.quiet, "Only print errors");

  auto* validate = app.add_subcommand("validate", "Check the config and print it with defaults and absolute paths");
  auto* ingest = app.add_subcommand("ingest", "Load and link the corpus, report dangling records");
  auto* stats = app.add_subcommand("stats", "Per-forum statistics -> corpus.stats.json");
  auto* filter = app.add_subcommand("filter", "CVE-citing English threads with labels -> threads.jsonl");
  auto* enrich = app.add_subcommand("enrich", "CVSS data for every cited CVE -> cves.enriched.json");
  auto* train = app.add_subcommand("train", "Dictionary, BoW and LDA -> model.lda");
  auto* report = app.add_subcommand("report", "report.json and report.html from all artifacts");
  auto* run = app.add_subcommand("run", "All stages in order");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(vt::ExitCode::kConfig);
  }

  try {
    auto cfg = load(g);
    if (validate->parsed()) {
      nlohmann::ordered_json out{{"config_hash", cfg.hash()}, {"config", cfg.to_json()}};
      std::cout << out.dump(2) << '\n';
      return 0;
    }
    vt::Pipeline pipeline(std::move(cfg), g.quiet ? nullptr : &std::cout);
    if (ingest->parsed()) pipeline.ingest();
    if (stats->parsed()) pipeline.stats();
    if (filter->parsed()) pipeline.filter();
    if (enrich->parsed()) pipeline.enrich();
    if (train->parsed()) pipeline.train();
    if (report->parsed()) pipeline.report();
    if (run->parsed()) pipeline.run();
    return 0;
  } catch (const vt::Error& e) {
    std::cerr << "vulntopics: " << e.what() << '\n';
    return static_cast<int>(e.exit_code());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "vulntopics: malformed input: " << e.what() << '\n';
    return static_cast<int>(vt::ExitCode::kData);
  } catch (const std::exception& e) {
    std::cerr << "vulntopics: " << e.what() << '\n';
    return 1;
  }
}
