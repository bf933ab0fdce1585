// Acceptance checks for the nine release criteria. Prints one PASS/FAIL
// line per criterion and exits non-zero if any fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "support.hpp"
#include "vulntopics/analytics.hpp"
#include "vulntopics/corpus.hpp"
#include "vulntopics/cve.hpp"
#include "vulntopics/lda.hpp"
#include "vulntopics/nvd.hpp"
#include "vulntopics/textprep.hpp"
#include "vulntopics/vectorize.hpp"

using namespace vt;
using nlohmann::json;

namespace {

/// Collects failures for one criterion; the first few are reported.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (failures_.size() < 5) failures_.push_back(what);
    ++count_;
  }
  bool ok() const { return count_ == 0; }
  std::string summary() const {
    std::string s;
    for (const auto& f : failures_) s += (s.empty() ? "" : "; ") + f;
    if (count_ > failures_.size()) s += "; +" + std::to_string(count_ - failures_.size()) + " more";
    return s;
  }

 private:
  std::vector<std::string> failures_;
  std::size_t count_ = 0;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// 1. Language evaluator on the annotated texts.
void language_evaluator(Check& c) {
  const auto filter = test::bundled_filter();
  const auto langs = test::bundled_languages();
  c.expect(langs.languages[0].wordlist.size() >= 200, "english wordlist under 200 words");
  c.expect(langs.languages[1].wordlist.size() >= 200, "russian wordlist under 200 words");
  const auto rows = test::read_jsonl(test::fixture("language_texts.jsonl"));
  c.expect(rows.size() == 30, "fixture does not hold 30 texts");
  std::size_t correct = 0;
  for (const auto& row : rows) {
    const auto id = row.at("id").get<std::string>();
    const auto tokens = tokenize(normalize(row.at("text").get<std::string>(), filter));
    const double n = row.at("tokens").get<double>();
    c.expect(tokens.size() == row.at("tokens").get<std::size_t>(), id + ": token count");
    if (n > 0) {
      const double en = row.at("english_hits").get<double>() / n;
      const double ru = row.at("russian_hits").get<double>() / n;
      c.expect(std::abs(language_ratio(tokens, langs.languages[0]) - en) <= 1e-12, id + ": english ratio");
      c.expect(std::abs(language_ratio(tokens, langs.languages[1]) - ru) <= 1e-12, id + ": russian ratio");
    }
    const auto got = detect_language(tokens, langs).value_or(std::string(kUndetermined));
    if (got == row.at("expected").get<std::string>()) ++correct;
    else c.expect(false, id + ": detected " + got);
  }
  c.expect(correct == 30, std::to_string(correct) + "/30 detections correct");
}

// 2. CVE extraction, as written and uppercased.
void cve_extraction(Check& c) {
  const auto rows = test::read_jsonl(test::fixture("cve_posts.jsonl"));
  c.expect(rows.size() == 50, "fixture does not hold 50 posts");
  for (const auto& row : rows) {
    const auto id = row.at("id").get<std::string>();
    const auto want = row.at("cves").get<std::vector<std::string>>();
    auto text = row.at("text").get<std::string>();
    for (int pass = 0; pass < 2; ++pass) {
      std::vector<std::string> got;
      for (const auto& cve : extract_cves(text)) got.push_back(cve.str());
      c.expect(got == want, id + (pass ? " (uppercased)" : "") + ": extracted set differs");
      std::transform(text.begin(), text.end(), text.begin(), [](unsigned char ch) { return std::toupper(ch); });
    }
  }
}

// 3. Thread filtering on the mini corpus.
void thread_filtering(Check& c) {
  const auto corpus = load_corpus(test::fixture("mini_corpus.jsonl"), CorpusFormat::kJsonLines);
  const auto result = filter_corpus(corpus, test::bundled_filter(), test::bundled_languages());
  const std::map<std::string, std::set<std::string>> want{
      {"t01", {"CVE-2017-0144", "CVE-2017-0143"}},
      {"t02", {"CVE-2019-0708", "CVE-2019-1181"}},
      {"t03", {"CVE-2018-8174", "CVE-2018-4878"}},
      {"t05", {"CVE-2021-44228", "CVE-2021-45046"}},
  };
  c.expect(corpus.threads().size() == 12, "mini corpus does not hold 12 threads");
  c.expect(result.report.cve_threads == 5, "expected 5 CVE-citing threads");
  c.expect(result.report.excluded_by_language == 1, "expected 1 thread excluded by language");
  c.expect(result.documents.size() == 4, "expected 4 documents, got " + std::to_string(result.documents.size()));
  for (const auto& d : result.documents) {
    auto it = want.find(d.thread_id);
    if (it == want.end()) {
      c.expect(false, "unexpected thread " + d.thread_id);
      continue;
    }
    std::set<std::string> got;
    for (const auto& cve : d.cves) got.insert(cve.str());
    c.expect(got == it->second, d.thread_id + ": CVE union differs");
    c.expect(d.cves.size() == got.size(), d.thread_id + ": duplicate CVEs");
  }
}

// 4. Vectorization against a dense brute-force implementation.
void vectorization(Check& c) {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const auto docs = test::random_token_corpus(gen, 10, 50);
    const auto oracle = test::dense_corpus(docs);
    const auto dict = build_dictionary(docs);
    const std::string tag = "corpus " + std::to_string(trial);
    c.expect(dict.tokens() == oracle.vocab, tag + ": dictionary ids");
    if (dict.size() != oracle.vocab.size()) continue;
    for (TokenId v = 0; v < dict.size(); ++v) {
      c.expect(dict.df(v) == oracle.df[v], tag + ": df");
      c.expect(dict.cf(v) == oracle.cf[v], tag + ": cf");
    }
    std::vector<BowDoc> bows;
    for (const auto& d : docs) bows.push_back(doc2bow(d, dict));
    const auto tfidf = tfidf_transform(bows, dict);
    const auto dense_w = test::dense_tfidf(oracle);
    for (std::size_t d = 0; d < docs.size(); ++d) {
      std::vector<double> counts(dict.size(), 0.0), w(dict.size(), 0.0);
      for (auto [id, n] : bows[d].counts) counts[id] = n;
      for (auto [id, x] : tfidf[d].weights) w[id] = x;
      for (std::size_t v = 0; v < w.size(); ++v) {
        c.expect(std::abs(counts[v] - oracle.counts[d][v]) <= 1e-12, tag + ": bow");
        c.expect(std::abs(w[v] - dense_w[d][v]) <= 1e-12, tag + ": tf-idf");
      }
    }
  }
}

// 5. Gibbs sampler invariants, determinism and exact posterior.
void gibbs_sampler(Check& c) {
  std::mt19937_64 gen(77);
  std::uniform_int_distribution<TokenId> word(0, 29);
  std::vector<BowDoc> bows;
  for (int d = 0; d < 40; ++d) {
    std::map<TokenId, std::uint32_t> counts;
    for (int i = 0; i < 60; ++i) ++counts[word(gen)];
    BowDoc b{"d" + std::to_string(d), {}};
    for (auto [w, n] : counts) b.counts.emplace_back(w, n);
    bows.push_back(std::move(b));
  }
  LdaConfig cfg;
  cfg.topics = 5;
  cfg.alpha = 0.2;
  cfg.beta = 0.05;
  cfg.iterations = 150;
  cfg.burn_in = 20;
  cfg.seed = 42;

  // (a) counts recomputed from z after every sweep
  std::size_t checked = 0, bad = 0;
  train_lda(bows, 30, cfg, [&](const GibbsSampler& s) {
    ++checked;
    if (!s.counts_consistent()) ++bad;
  });
  c.expect(checked == cfg.iterations, "observer saw " + std::to_string(checked) + " sweeps");
  c.expect(bad == 0, std::to_string(bad) + " sweeps with inconsistent counts");

  // (b) byte-exact determinism
  const auto a = train_lda(bows, 30, cfg).to_json().dump();
  const auto b = train_lda(bows, 30, cfg).to_json().dump();
  c.expect(a == b, "two runs with seed 42 differ");

  // (c) empirical assignment frequencies against the enumerated posterior
  struct Tiny {
    std::vector<std::vector<TokenId>> docs;
    std::size_t vocab;
  };
  const std::vector<Tiny> cases{
      {{{0, 1}, {1, 0}}, 2},
      {{{0, 0, 1, 1}}, 2},
      {{{0}, {1}, {0, 2}}, 3},
      {{{0, 1, 2}}, 3},
  };
  constexpr int kRestarts = 20000;
  double worst = 0.0;
  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    const auto& tiny = cases[ci];
    std::vector<BowDoc> tb;
    // Enumeration below follows the token order the sampler expands BoWs into.
    for (std::size_t d = 0; d < tiny.docs.size(); ++d) {
      std::map<TokenId, std::uint32_t> counts;
      for (auto w : tiny.docs[d]) ++counts[w];
      BowDoc bow{"d" + std::to_string(d), {}};
      for (auto [w, n] : counts) bow.counts.emplace_back(w, n);
      tb.push_back(std::move(bow));
    }
    LdaConfig tc;
    tc.topics = 2;
    tc.alpha = 0.5;
    tc.beta = 0.5;
    tc.iterations = 30;
    tc.burn_in = 0;
    std::map<std::vector<int>, double> freq;
    std::vector<std::vector<TokenId>> sampled_docs;
    for (int r = 0; r < kRestarts; ++r) {
      tc.seed = static_cast<std::uint64_t>(r);
      const auto m = train_lda(tb, tiny.vocab, tc);
      if (r == 0)
        for (std::size_t d = 0; d < m.num_docs(); ++d) sampled_docs.emplace_back(m.words(d).begin(), m.words(d).end());
      std::vector<int> flat;
      for (std::size_t d = 0; d < m.num_docs(); ++d)
        for (auto z : m.assignments(d)) flat.push_back(static_cast<int>(z));
      freq[flat] += 1.0 / kRestarts;
    }
    const auto exact = test::exact_posterior(sampled_docs, 2, tiny.vocab, 0.5, 0.5);
    double tv = 0.0;
    for (const auto& [z, p] : exact) {
      auto it = freq.find(z);
      tv += std::abs(p - (it == freq.end() ? 0.0 : it->second));
    }
    for (const auto& [z, p] : freq)
      if (!exact.count(z)) tv += p;
    tv *= 0.5;
    worst = std::max(worst, tv);
    c.expect(tv < 0.05, "corpus " + std::to_string(ci) + ": total variation " + fmt(tv));
  }
  std::cout << "    worst total variation " << fmt(worst) << '\n';
}

// 6. Planted-topic recovery.
void planted_topics(Check& c) {
  constexpr std::size_t K = 4, V = 200, D = 500, N = 100, kBlock = 50;
  std::mt19937_64 gen(4242);
  std::gamma_distribution<double> gamma(0.1, 1.0);
  std::uniform_int_distribution<TokenId> in_block(0, kBlock - 1);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<BowDoc> bows;
  for (std::size_t d = 0; d < D; ++d) {
    std::array<double, K> theta{};
    double sum = 0.0;
    for (auto& t : theta) sum += (t = gamma(gen));
    if (sum == 0.0) theta[d % K] = sum = 1.0;
    std::map<TokenId, std::uint32_t> counts;
    for (std::size_t i = 0; i < N; ++i) {
      double u = unif(gen) * sum;
      std::size_t k = 0;
      while (k + 1 < K && u >= theta[k]) u -= theta[k++];
      ++counts[static_cast<TokenId>(k * kBlock + in_block(gen))];
    }
    BowDoc b{"d" + std::to_string(d), {}};
    for (auto [w, n] : counts) b.counts.emplace_back(w, n);
    bows.push_back(std::move(b));
  }

  LdaConfig cfg;
  cfg.topics = K;
  cfg.alpha = 0.1;
  cfg.beta = 0.01;
  cfg.iterations = 500;
  cfg.burn_in = 100;
  cfg.seed = 42;
  double p10 = 0.0, p200 = 0.0;
  const auto model = train_lda(bows, V, cfg, [&](const GibbsSampler& s) {
    if (s.iteration() == 10) p10 = perplexity(s.snapshot(), bows);
    if (s.iteration() == 200) p200 = perplexity(s.snapshot(), bows);
  });

  // Greedy matching on cosine similarity against the true (uniform block) rows.
  std::vector<std::vector<double>> cos(K, std::vector<double>(K));
  for (std::size_t k = 0; k < K; ++k) {
    auto row = model.phi_row(k);
    double norm = 0.0;
    for (double x : row) norm += x * x;
    for (std::size_t t = 0; t < K; ++t) {
      double dot = 0.0;
      for (std::size_t w = t * kBlock; w < (t + 1) * kBlock; ++w) dot += row[w] / std::sqrt(double(kBlock));
      cos[k][t] = dot / std::sqrt(norm);
    }
  }
  std::vector<bool> used_est(K, false), used_true(K, false);
  double total = 0.0;
  for (std::size_t step = 0; step < K; ++step) {
    double best = -1.0;
    std::size_t bk = 0, bt = 0;
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t t = 0; t < K; ++t)
        if (!used_est[k] && !used_true[t] && cos[k][t] > best) {
          best = cos[k][t];
          bk = k;
          bt = t;
        }
    used_est[bk] = used_true[bt] = true;
    total += best;
  }
  const double mean = total / K;
  c.expect(mean >= 0.9, "mean matched cosine " + fmt(mean));
  c.expect(p200 < p10, "perplexity at sweep 200 (" + fmt(p200) + ") not below sweep 10 (" + fmt(p10) + ")");
  std::cout << "    mean cosine " << fmt(mean) << ", perplexity " << fmt(p10) << " -> " << fmt(p200) << '\n';
}

// 7. Analytics oracles.
void analytics(Check& c) {
  const auto m = test::small_trained_model(3, 10, 12);
  const auto sal = saliency(m);
  const auto sal_oracle = test::saliency_oracle(m);
  for (std::size_t w = 0; w < sal.size(); ++w)
    c.expect(std::abs(sal[w] - sal_oracle[w]) <= 1e-12, "saliency of term " + std::to_string(w));
  for (double lambda : {0.0, 0.3, 0.6, 1.0}) {
    const auto got = relevance_scores(m, lambda);
    const auto want = test::relevance_oracle(m, lambda);
    for (std::size_t k = 0; k < got.size(); ++k)
      for (std::size_t w = 0; w < got[k].size(); ++w)
        c.expect(std::abs(got[k][w] - want[k][w]) <= 1e-12, "relevance at lambda " + fmt(lambda));
  }

  const auto pw = term_distribution(m);
  for (std::size_t k = 0; k < m.num_topics(); ++k) {
    std::vector<double> phi(m.phi_row(k).begin(), m.phi_row(k).end()), lift(phi.size());
    for (std::size_t w = 0; w < phi.size(); ++w) lift[w] = phi[w] / pw[w];
    auto ids = [](const std::vector<TermScore>& r) {
      std::vector<TokenId> out;
      for (const auto& t : r) out.push_back(t.id);
      return out;
    };
    c.expect(ids(relevance(m, 1.0)[k]) == ids(rank_terms(phi)), "lambda=1 order differs from phi order");
    c.expect(ids(relevance(m, 0.0)[k]) == ids(rank_terms(lift)), "lambda=0 order differs from lift order");
  }

  std::mt19937_64 gen(99);
  std::gamma_distribution<double> g(0.5);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> p(10), q(10);
    double sp = 0, sq = 0;
    for (auto& x : p) sp += (x = g(gen));
    for (auto& x : q) sq += (x = g(gen));
    for (auto& x : p) x /= sp;
    for (auto& x : q) x /= sq;
    const double pq = jensen_shannon(p, q), qp = jensen_shannon(q, p);
    c.expect(std::abs(pq - qp) <= 1e-12, "JSD not symmetric");
    c.expect(pq >= 0.0 && pq <= 1.0, "JSD outside [0, 1]");
    c.expect(jensen_shannon(p, p) == 0.0, "JSD(p, p) != 0");
  }
  const std::vector<double> half{0.5, 0.5}, point{1.0, 0.0};
  c.expect(std::abs(jensen_shannon(half, point) - 0.311278124459) <= 1e-9, "JSD([.5,.5],[1,0])");
  const auto dm = topic_distance_matrix(m);
  for (std::size_t a = 0; a < dm.size(); ++a) {
    c.expect(dm[a][a] == 0.0, "distance matrix diagonal");
    for (std::size_t b = 0; b < dm.size(); ++b) c.expect(dm[a][b] == dm[b][a], "distance matrix symmetry");
  }

  const double s = 0.5;
  const auto proj = project_topics(Matrix{{0, s, s}, {s, 0, s}, {s, s, 0}}, std::vector<double>{0.3, 0.3, 0.4});
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      const double d = std::hypot(proj.coords[i][0] - proj.coords[j][0], proj.coords[i][1] - proj.coords[j][1]);
      c.expect(std::abs(d - s) <= 1e-6, "triangle side " + fmt(d));
    }
}

// 8. CVSS histograms on the NVD fixture.
void cvss_histograms(Check& c) {
  FixtureNvdSource source(test::fixture("nvd"));
  std::vector<CveId> ids;
  const auto listed = json::parse(read_file(test::fixture("nvd_ids.json")));
  for (const auto& s : listed.at("cves"))
    ids.push_back(*CveId::parse(s.get<std::string>()));
  const auto records = enrich_nvd(ids, source);
  const auto want = json::parse(read_file(test::fixture("nvd_expected_histograms.json")));
  c.expect(records.size() == want.at("records").get<std::size_t>(), "record count");
  for (auto v : {CvssVersion::kV2, CvssVersion::kV31}) {
    const auto h = severity_histogram(records, v);
    const auto& w = want.at(std::string(to_string(v)));
    std::size_t sum = 0;
    for (const auto& [bucket, n] : h.buckets) {
      sum += n;
      c.expect(n == w.value(bucket, std::size_t{0}),
               std::string(to_string(v)) + " " + bucket + ": " + std::to_string(n));
    }
    for (const auto& [bucket, _] : w.items())
      c.expect(std::any_of(h.buckets.begin(), h.buckets.end(), [&](const auto& b) { return b.first == bucket; }),
               std::string(to_string(v)) + " lacks bucket " + bucket);
    c.expect(sum == records.size(), std::string(to_string(v)) + " buckets sum to " + std::to_string(sum));
  }
}

// 9. End-to-end run against the committed golden report.
void golden_run(Check& c) {
  const auto golden = read_file(std::filesystem::path(VT_GOLDEN_DIR) / "report.json");
  for (int run = 1; run <= 2; ++run) {
    test::TempDir out;
    const std::string cmd = std::string("\"") + VT_CLI_PATH + "\" run -q --config \"" +
                            test::fixture("pipeline.json").string() + "\" --out \"" + out.path().string() + "\"";
    const int status = std::system(cmd.c_str());
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    c.expect(code == 0, "run " + std::to_string(run) + " exited with " + std::to_string(code));
    if (code != 0) continue;
    c.expect(read_file(out / "report.json") == golden, "run " + std::to_string(run) + " differs from the golden report");
  }
}

struct Criterion {
  int number;
  const char* name;
  double limit_seconds;
  std::function<void(Check&)> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "language evaluator", 1.0, language_evaluator},
      {2, "CVE extraction", 1.0, cve_extraction},
      {3, "thread filtering", 1.0, thread_filtering},
      {4, "vectorization oracle", 10.0, vectorization},
      {5, "Gibbs sampler correctness", 60.0, gibbs_sampler},
      {6, "planted-topic recovery", 60.0, planted_topics},
      {7, "analytics oracles", 5.0, analytics},
      {8, "CVSS histograms", 1.0, cvss_histograms},
      {9, "end-to-end golden run", 30.0, golden_run},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      cr.run(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    check.expect(secs < cr.limit_seconds, "took " + fmt(secs) + " s, limit " + fmt(cr.limit_seconds) + " s");
    char line[160];
    std::snprintf(line, sizeof line, "%s  %d  %-28s %8.3f s", check.ok() ? "PASS" : "FAIL", cr.number, cr.name, secs);
    std::cout << line;
    if (!check.ok()) std::cout << "  " << check.summary();
    std::cout << std::endl;
    failed += check.ok() ? 0 : 1;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
