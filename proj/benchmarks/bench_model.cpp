#include <benchmark/benchmark.h>

#include <random>

#include "vulntopics/lda.hpp"
#include "vulntopics/vectorize.hpp"

namespace {

// Zipf-like token draws so that a few terms dominate, as in real threads.
std::vector<vt::TokenizedDoc> synthetic_docs(std::size_t docs, std::size_t len, std::size_t vocab) {
  std::mt19937_64 gen(7);
  std::vector<double> weights(vocab);
  for (std::size_t i = 0; i < vocab; ++i) weights[i] = 1.0 / static_cast<double>(i + 1);
  std::discrete_distribution<std::size_t> word(weights.begin(), weights.end());
  std::vector<vt::TokenizedDoc> out;
  for (std::size_t d = 0; d < docs; ++d) {
    vt::TokenizedDoc doc{"d" + std::to_string(d), {}};
    for (std::size_t i = 0; i < len; ++i) doc.tokens.push_back("w" + std::to_string(word(gen)));
    out.push_back(std::move(doc));
  }
  return out;
}

struct Corpus {
  vt::Dictionary dict;
  std::vector<vt::BowDoc> bows;
};

Corpus make_corpus(std::size_t docs, std::size_t len, std::size_t vocab) {
  const auto tokenized = synthetic_docs(docs, len, vocab);
  Corpus c{vt::build_dictionary(tokenized), {}};
  for (const auto& d : tokenized) c.bows.push_back(vt::doc2bow(d, c.dict));
  return c;
}

void BM_GibbsSweep(benchmark::State& state) {
  const auto corpus = make_corpus(200, 150, 2000);
  vt::LdaConfig cfg;
  cfg.topics = static_cast<std::size_t>(state.range(0));
  cfg.iterations = 2;
  cfg.burn_in = 1;
  vt::GibbsSampler sampler(corpus.bows, corpus.dict.size(), cfg);
  std::size_t tokens = 0;
  for (const auto& b : corpus.bows) tokens += b.total();
  for (auto _ : state) sampler.sweep();
  state.counters["tokens/s"] =
      benchmark::Counter(static_cast<double>(tokens * state.iterations()), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_GibbsSweep)->Arg(4)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_Tfidf(benchmark::State& state) {
  const auto corpus = make_corpus(static_cast<std::size_t>(state.range(0)), 150, 5000);
  for (auto _ : state) benchmark::DoNotOptimize(vt::tfidf_transform(corpus.bows, corpus.dict));
}
BENCHMARK(BM_Tfidf)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);

void BM_BuildDictionary(benchmark::State& state) {
  const auto docs = synthetic_docs(1000, 150, 5000);
  for (auto _ : state) benchmark::DoNotOptimize(vt::build_dictionary(docs));
}
BENCHMARK(BM_BuildDictionary)->Unit(benchmark::kMillisecond);

}  // namespace
