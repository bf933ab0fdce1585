#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "vulntopics/textprep.hpp"
#include "vulntopics/util.hpp"

namespace vt::test {

inline std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(VT_FIXTURE_DIR) / name; }
inline std::filesystem::path resource(const std::string& name) { return std::filesystem::path(VT_RESOURCE_DIR) / name; }

inline std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path) {
  std::vector<nlohmann::json> out;
  for (const auto& line : read_lines(path))
    if (!trim(line).empty()) out.push_back(nlohmann::json::parse(line));
  return out;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 gen{std::random_device{}()};
    path_ = std::filesystem::temp_directory_path() / ("vulntopics-test-" + std::to_string(gen()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline FilterConfig bundled_filter() {
  const auto stop = read_entry_list(resource("stopwords_english.txt"));
  const auto emo = read_entry_list(resource("emoticons.txt"));
  return make_filter_config({Alphabet::kLatin, Alphabet::kCyrillic}, stop, emo);
}

inline LanguageSet bundled_languages() {
  LanguageSet set;
  set.languages.push_back(load_language_profile("english", resource("wordlist_english.txt")));
  set.languages.push_back(load_language_profile("russian", resource("wordlist_russian.txt")));
  return set;
}

}  // namespace vt::test
