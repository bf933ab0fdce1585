#include <benchmark/benchmark.h>

#include <random>

#include "vulntopics/textprep.hpp"
#include "vulntopics/util.hpp"

namespace {

// A forum-like post: mixed case, punctuation, a CVE id, an emoticon and some Cyrillic.
std::string sample_post(std::size_t words, std::uint64_t seed) {
  static const char* pool[] = {"Exploit", "works", "on", "Windows", "7,", "tested", "it:)", "CVE-2017-0144",
                               "shell", "payload", "(x64)", "rdp", "сплойт", "работает", "price", "50$",
                               "don't", "buy", "FUD", "crypter!!"};
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<std::size_t> pick(0, std::size(pool) - 1);
  std::string out;
  for (std::size_t i = 0; i < words; ++i) {
    if (i) out += ' ';
    out += pool[pick(gen)];
  }
  return out;
}

vt::FilterConfig filter() {
  const std::filesystem::path res(VT_RESOURCE_DIR);
  const auto stop = vt::read_entry_list(res / "stopwords_english.txt");
  const auto emo = vt::read_entry_list(res / "emoticons.txt");
  return vt::make_filter_config({vt::Alphabet::kLatin, vt::Alphabet::kCyrillic}, stop, emo);
}

void BM_Normalize(benchmark::State& state) {
  const auto cfg = filter();
  const auto post = sample_post(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(vt::normalize(post, cfg));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * post.size()));
}
BENCHMARK(BM_Normalize)->Arg(50)->Arg(500)->Arg(5000);

void BM_NormalizeTokenize(benchmark::State& state) {
  const auto cfg = filter();
  const auto post = sample_post(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(vt::tokenize(vt::normalize(post, cfg)));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * post.size()));
}
BENCHMARK(BM_NormalizeTokenize)->Arg(500);

}  // namespace
