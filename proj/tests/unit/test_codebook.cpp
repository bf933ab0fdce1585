#include <doctest.h>

#include "support.hpp"
#include "vulntopics/codebook.hpp"
#include "vulntopics/errors.hpp"

using namespace vt;

namespace {

const char* kRules = R"(# test rules
precedence = Exploitation, Weaponization, PoC, Other

[Exploitation]
bitcoin
in the wild

[Weaponization]
min_matches = 2
exploit
source code
github

[PoC]
proof of concept
tutorial
)";

FilterConfig plain() { return make_filter_config({Alphabet::kLatin}, {}, default_emoticons()); }

TopicLabel classify(const Codebook& cb, const std::string& text, const LemmaTable& lemmas = {}) {
  return cb.classify(Codebook::match_tokens(text, plain(), lemmas));
}

}  // namespace

TEST_CASE("codebook parsing") {
  const auto cb = Codebook::parse(kRules, plain(), {});
  CHECK(cb.precedence() ==
        std::vector<TopicLabel>{TopicLabel::kExploitation, TopicLabel::kWeaponization, TopicLabel::kPoC, TopicLabel::kOther});
  CHECK(cb.rule(TopicLabel::kWeaponization).min_matches == 2);
  CHECK(cb.rule(TopicLabel::kExploitation).phrases.size() == 2);
  CHECK(cb.rule(TopicLabel::kExploitation).phrases[1] == std::vector<std::string>{"in", "the", "wild"});
}

TEST_CASE("classification follows precedence and thresholds") {
  const auto lemmas = parse_lemma_table("exploits\texploit\ntutorials\ttutorial\n");
  const auto cb = Codebook::parse(kRules, plain(), lemmas);
  CHECK(classify(cb, "A tutorial on the bug") == TopicLabel::kPoC);
  CHECK(classify(cb, "Exploit with source code, also a tutorial") == TopicLabel::kWeaponization);
  CHECK(classify(cb, "Exploit only, and a tutorial") == TopicLabel::kPoC);  // one Weaponization hit is not enough
  CHECK(classify(cb, "exploit source code, pay in Bitcoin") == TopicLabel::kExploitation);
  CHECK(classify(cb, "seen IN THE WILD") == TopicLabel::kExploitation);
  CHECK(classify(cb, "in wild the") == TopicLabel::kOther);  // phrases are contiguous
  CHECK(classify(cb, "nothing relevant") == TopicLabel::kOther);
  CHECK(classify(cb, "Exploits on GitHub", lemmas) == TopicLabel::kWeaponization);
  CHECK(classify(cb, "two tutorials", lemmas) == TopicLabel::kPoC);
  CHECK(classify(cb, "") == TopicLabel::kOther);
}

TEST_CASE("codebook errors") {
  auto bad = [](const std::string& text) { return Codebook::parse(text, plain(), {}); };
  CHECK_THROWS_WITH_AS(bad("precedence = PoC, Weaponization, Exploitation\n[PoC]\nx\n[Weaponization]\ny\n[Exploitation]\nz\n"),
                       doctest::Contains("all four"), DataError);
  CHECK_THROWS_WITH_AS(bad("precedence = Other, PoC, Weaponization, Exploitation\n[PoC]\nx\n[Weaponization]\ny\n[Exploitation]\nz\n"),
                       doctest::Contains("last"), DataError);
  CHECK_THROWS_WITH_AS(bad("[Bogus]\nx\n"), doctest::Contains("allowed"), DataError);
  CHECK_THROWS_AS(bad("keyword\n"), DataError);
  CHECK_THROWS_AS(bad("[Other]\nx\n"), DataError);
  CHECK_THROWS_AS(bad("[PoC]\nmin_matches = 0\n"), DataError);
  CHECK_THROWS_AS(bad("precedence = Exploitation, Weaponization, PoC, Other\n[PoC]\nx\n[Weaponization]\ny\n"), DataError);
}

TEST_CASE("bundled codebook loads") {
  const auto filter = test::bundled_filter();
  const auto lemmas = load_lemma_table(test::resource("lemmas_english.tsv"));
  const auto cb = Codebook::load(test::resource("codebook.txt"), filter, lemmas);
  CHECK(cb.precedence().front() == TopicLabel::kExploitation);
  CHECK(cb.classify(Codebook::match_tokens("fully undetectable crypter", filter, lemmas)) == TopicLabel::kExploitation);
  CHECK(cb.classify(Codebook::match_tokens("proof of concept here", filter, lemmas)) == TopicLabel::kPoC);
}

TEST_CASE("manual labels") {
  const auto labels = load_labels(test::fixture("labels.csv"));
  CHECK(labels.size() == 3);
  CHECK(labels.at("t01") == TopicLabel::kPoC);
  CHECK(labels.at("t03") == TopicLabel::kExploitation);
  CHECK(parse_labels("t9, weaponization\n").at("t9") == TopicLabel::kWeaponization);
  CHECK_THROWS_WITH_AS(parse_labels("t1,Nonsense\n"), doctest::Contains("allowed"), DataError);
  CHECK_THROWS_AS(parse_labels("t1,PoC\nt1,Other\n"), DataError);
  CHECK_THROWS_AS(parse_labels("t1\n"), DataError);
}

TEST_CASE("manual labels win over rules") {
  const auto cb = Codebook::parse(kRules, plain(), {});
  std::vector<ThreadDocument> docs(2);
  docs[0].thread_id = "a";
  docs[0].merged_text = "paid in bitcoin";
  docs[1].thread_id = "b";
  docs[1].merged_text = "paid in bitcoin";
  assign_labels(docs, cb, LabelMap{{"a", TopicLabel::kPoC}}, plain(), {});
  CHECK(docs[0].label == TopicLabel::kPoC);
  CHECK(docs[0].label_source == LabelSource::kManual);
  CHECK(docs[1].label == TopicLabel::kExploitation);
  CHECK(docs[1].label_source == LabelSource::kRule);
}
