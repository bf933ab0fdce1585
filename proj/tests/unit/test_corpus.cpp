#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "support.hpp"
#include "vulntopics/corpus.hpp"
#include "vulntopics/errors.hpp"

using namespace vt;
using nlohmann::json;

namespace {

// Recomputes forum statistics straight from the raw JSON-lines records.
std::map<std::string, ForumStats> raw_stats(const std::vector<json>& records) {
  std::map<std::string, ForumStats> out;
  std::map<std::string, std::string> board_forum, thread_forum;
  std::map<std::string, std::set<std::string>> users;
  for (const auto& r : records) {
    const auto kind = r.at("kind").get<std::string>();
    if (kind == "forum") {
      auto& s = out[r.at("forum_id")];
      s.forum_id = r.at("forum_id");
      s.name = r.at("name");
    } else if (kind == "board") {
      board_forum[r.at("board_id")] = r.at("forum_id");
      ++out[r.at("forum_id")].boards;
    } else if (kind == "thread") {
      const auto f = board_forum.at(r.at("board_id"));
      thread_forum[r.at("thread_id")] = f;
      ++out[f].threads;
      if (r.at("title").is_null()) ++out[f].null_titles;
    } else {
      const auto f = thread_forum.at(r.at("thread_id"));
      auto& s = out[f];
      ++s.posts;
      if (r.at("author").is_null()) ++s.null_authors;
      else users[f].insert(r.at("author").get<std::string>());
      const auto& body = r.at("body");
      if (body.is_null() || trim(body.get<std::string>()).empty()) ++s.empty_posts;
    }
  }
  for (auto& [f, s] : out) s.users = users[f].size();
  return out;
}

void check_same(const ForumStats& a, const ForumStats& b) {
  CHECK(a.forum_id == b.forum_id);
  CHECK(a.name == b.name);
  CHECK(a.users == b.users);
  CHECK(a.boards == b.boards);
  CHECK(a.threads == b.threads);
  CHECK(a.posts == b.posts);
  CHECK(a.null_titles == b.null_titles);
  CHECK(a.empty_posts == b.empty_posts);
  CHECK(a.null_authors == b.null_authors);
}

}  // namespace

TEST_CASE("timestamps") {
  using namespace std::chrono;
  const auto base = sys_days{year{2019} / 3 / 1} + hours{12};
  CHECK(parse_timestamp("2019-03-01T12:00:00Z") == base);
  CHECK(parse_timestamp("2019-03-01 12:00:00") == base);
  CHECK(parse_timestamp("2019-03-01T14:00:00.250+02:00") == base);
  CHECK(parse_timestamp("2019-03-01") == base - hours{12});
  CHECK(!parse_timestamp("2019-13-01"));
  CHECK(!parse_timestamp("yesterday"));
  CHECK(format_timestamp(base) == "2019-03-01T12:00:00Z");
}

TEST_CASE("corpus formats") {
  CHECK(parse_corpus_format("jsonl") == CorpusFormat::kJsonLines);
  CHECK(parse_corpus_format("csv") == CorpusFormat::kCsvBundle);
  CHECK(!parse_corpus_format("xml"));
}

TEST_CASE("mini corpus links and orders posts") {
  const auto c = load_corpus(test::fixture("mini_corpus.jsonl"), CorpusFormat::kJsonLines);
  CHECK(c.forums().size() == 2);
  CHECK(c.boards().size() == 3);
  CHECK(c.threads().size() == 12);
  CHECK(c.posts().size() == 40);
  CHECK(c.dangling().empty());

  const auto* t01 = c.find_thread("t01");
  REQUIRE(t01);
  CHECK(c.forum_of(*t01).forum_id == "f1");
  const auto posts = c.posts_of(*t01);
  REQUIRE(posts.size() >= 2);
  for (std::size_t i = 1; i < posts.size(); ++i)
    CHECK(std::pair(posts[i - 1]->created_at, posts[i - 1]->post_id) <= std::pair(posts[i]->created_at, posts[i]->post_id));

  const auto* t07 = c.find_thread("t07");
  REQUIRE(t07);
  CHECK(!t07->title);
  CHECK(c.find_post("nope") == nullptr);
}

TEST_CASE("csv bundle matches json lines") {
  const auto a = load_corpus(test::fixture("mini_corpus.jsonl"), CorpusFormat::kJsonLines);
  const auto b = load_corpus(test::fixture("mini_corpus_csv"), CorpusFormat::kCsvBundle);
  REQUIRE(a.threads().size() == b.threads().size());
  REQUIRE(a.posts().size() == b.posts().size());
  for (const auto& t : a.threads()) {
    const auto* u = b.find_thread(t.thread_id);
    REQUIRE(u);
    CHECK(u->title == t.title);
    CHECK(u->post_ids == t.post_ids);
  }
  for (const auto& p : a.posts()) {
    const auto* q = b.find_post(p.post_id);
    REQUIRE(q);
    CHECK(q->body == p.body);
    CHECK(q->author == p.author);
    CHECK(q->created_at == p.created_at);
  }
  CHECK(to_json(corpus_stats(a)) == to_json(corpus_stats(b)));
}

TEST_CASE("forum statistics agree with a direct count") {
  const auto records = test::read_jsonl(test::fixture("mini_corpus.jsonl"));
  const auto expected = raw_stats(records);
  const auto stats = corpus_stats(load_corpus(test::fixture("mini_corpus.jsonl"), CorpusFormat::kJsonLines));
  REQUIRE(stats.forums.size() == expected.size());
  for (const auto& row : stats.forums) check_same(row, expected.at(row.forum_id));
  CHECK(stats.forums.front().forum_id == "f1");  // more threads
  CHECK(stats.total.threads == 12);
  CHECK(stats.total.posts == 40);
  CHECK(stats.total.users == stats.forums[0].users + stats.forums[1].users);
  CHECK(stats.dangling_references == 0);

  const auto j = to_json(stats);
  CHECK(j["forums"][0]["anomalies"]["null_titles"] == 1);
  CHECK(j["total"]["boards"] == 3);
}

TEST_CASE("dangling references") {
  SUBCASE("a few are tolerated and reported") {
    const auto c = load_corpus(test::fixture("dangling_tolerable.jsonl"), CorpusFormat::kJsonLines);
    REQUIRE(c.dangling().size() == 1);
    CHECK(c.dangling()[0].kind == "post");
    CHECK(c.dangling()[0].id == "px9");
    CHECK(c.dangling()[0].missing_parent == "t404");
    CHECK(c.dangling()[0].location.find("dangling_tolerable.jsonl:") != std::string::npos);
    CHECK(corpus_stats(c).dangling_references == 1);
  }
  SUBCASE("too many abort ingestion") {
    CHECK_THROWS_AS(load_corpus(test::fixture("dangling_corpus.jsonl"), CorpusFormat::kJsonLines), DataError);
  }
  SUBCASE("threshold is configurable") {
    LoadOptions lax;
    lax.max_dangling_fraction = 0.5;
    CHECK_NOTHROW(load_corpus(test::fixture("dangling_corpus.jsonl"), CorpusFormat::kJsonLines, lax));
  }
}

TEST_CASE("bad input") {
  test::TempDir dir;
  CHECK_THROWS_AS(load_corpus(test::fixture("empty_corpus.jsonl"), CorpusFormat::kJsonLines), DataError);
  CHECK_THROWS_AS(load_corpus(dir / "absent.jsonl", CorpusFormat::kJsonLines), DataError);

  test::write_text(dir / "bad.jsonl", "{\"kind\": \"forum\", \"forum_id\": \"f1\", \"name\": \"x\"}\n{not json\n");
  try {
    load_corpus(dir / "bad.jsonl", CorpusFormat::kJsonLines);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("bad.jsonl:2") != std::string::npos);
  }

  test::write_text(dir / "dup.jsonl",
                   "{\"kind\": \"forum\", \"forum_id\": \"f1\", \"name\": \"x\"}\n"
                   "{\"kind\": \"forum\", \"forum_id\": \"f1\", \"name\": \"y\"}\n");
  CHECK_THROWS_WITH_AS(load_corpus(dir / "dup.jsonl", CorpusFormat::kJsonLines),
                       doctest::Contains("duplicate forum_id"), DataError);

  test::write_text(dir / "ts.jsonl",
                   "{\"kind\": \"forum\", \"forum_id\": \"f1\", \"name\": \"x\"}\n"
                   "{\"kind\": \"board\", \"board_id\": \"b1\", \"forum_id\": \"f1\", \"name\": \"b\"}\n"
                   "{\"kind\": \"thread\", \"thread_id\": \"t1\", \"board_id\": \"b1\", \"title\": null}\n"
                   "{\"kind\": \"post\", \"post_id\": \"p1\", \"thread_id\": \"t1\", \"author\": null, "
                   "\"created_at\": \"soon\", \"body\": null}\n");
  CHECK_THROWS_AS(load_corpus(dir / "ts.jsonl", CorpusFormat::kJsonLines), DataError);

  CHECK_THROWS_AS(load_corpus(test::fixture("mini_corpus.jsonl"), CorpusFormat::kCsvBundle), DataError);
}

TEST_CASE("csv quoting") {
  test::TempDir dir;
  std::filesystem::create_directories(dir / "b");
  test::write_text(dir / "b" / "forums.csv", "forum_id,name\nf1,\"A, \"\"quoted\"\" forum\"\n");
  test::write_text(dir / "b" / "boards.csv", "board_id,forum_id,name\nb1,f1,Board\n");
  test::write_text(dir / "b" / "threads.csv", "thread_id,board_id,title\nt1,b1,\n");
  test::write_text(dir / "b" / "posts.csv",
                   "post_id,thread_id,author,created_at,body\np1,t1,,2020-01-01T00:00:00Z,\"line one\nline two\"\n");
  const auto c = load_corpus(dir / "b", CorpusFormat::kCsvBundle);
  CHECK(c.forums()[0].name == "A, \"quoted\" forum");
  CHECK(!c.threads()[0].title);
  CHECK(!c.posts()[0].author);
  CHECK(c.posts()[0].body == "line one\nline two");
}
