#include <doctest.h>

#include "support.hpp"
#include "vulntopics/errors.hpp"
#include "vulntopics/rng.hpp"
#include "vulntopics/util.hpp"

using namespace vt;

TEST_CASE("fnv1a64 known vectors") {
  CHECK(Fnv1a64().value() == 0xcbf29ce484222325ULL);
  CHECK(Fnv1a64().update("a").value() == 0xaf63dc4c8601ec8cULL);
  CHECK(hash_hex("foobar") == "85944171f73967e8");
  CHECK(hash_hex("").size() == 16);
}

TEST_CASE("utf8 round trip and invalid bytes") {
  const std::string s = "abc \xD0\x9F\xD1\x80\xD0\xB8 \xF0\x9F\x94\xA5";  // "abc При 🔥"
  CHECK(utf8::from_u32(utf8::to_u32(s)) == s);
  CHECK(utf8::to_u32(s).size() == 9);

  std::size_t pos = 0;
  CHECK(utf8::decode("\xFF", pos) == utf8::kReplacement);
  CHECK(pos == 1);
  pos = 0;
  CHECK(utf8::decode("\xE2\x82", pos) == utf8::kReplacement);  // truncated
  CHECK(pos == 1);
  pos = 0;
  CHECK(utf8::decode("\xC0\xAF", pos) == utf8::kReplacement);  // overlong
}

TEST_CASE("entry lists skip comments and blanks") {
  test::TempDir dir;
  test::write_text(dir / "list.txt", "# header\n alpha \r\n\nbeta\n#gamma\n");
  CHECK(read_entry_list(dir / "list.txt") == std::vector<std::string>{"alpha", "beta"});
  CHECK_THROWS_AS(read_entry_list(dir / "missing.txt"), DataError);
}

TEST_CASE("atomic write replaces content") {
  test::TempDir dir;
  write_file_atomic(dir / "f.txt", "one");
  write_file_atomic(dir / "f.txt", "two");
  CHECK(read_file(dir / "f.txt") == "two");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path())) ++files;
  CHECK(files == 1);
}

TEST_CASE("round_to") {
  CHECK(round_to(0.1234567, 6) == doctest::Approx(0.123457).epsilon(1e-15));
  CHECK(round_to(58.449, 1) == doctest::Approx(58.4));
  CHECK(!std::signbit(round_to(-0.0000001, 6)));
}

TEST_CASE("rng is reproducible and uniform in [0,1)") {
  Rng a(7), b(7), c(8);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    differs |= x != c.uniform();
  }
  CHECK(differs);
  static_assert(mix_seed(1, 2) != mix_seed(2, 1));
  Rng r(3);
  for (int i = 0; i < 1000; ++i) CHECK(r.index(5) < 5);
}

TEST_CASE("error messages and exit codes") {
  ConfigError c("must lie in [0, 1]", "report.lambdas[0]");
  CHECK(std::string(c.what()) == "report.lambdas[0]: must lie in [0, 1]");
  CHECK(c.exit_code() == ExitCode::kConfig);
  MissingArtifactError m("thread-documents", "filter");
  CHECK(std::string(m.what()) == "missing thread-documents artifact; run filter first");
  CHECK(static_cast<int>(m.exit_code()) == 4);
  CHECK(static_cast<int>(DataError("x").exit_code()) == 3);
  CHECK(static_cast<int>(NetworkError("x").exit_code()) == 5);
}
