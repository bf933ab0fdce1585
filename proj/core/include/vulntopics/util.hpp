#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace vt {

/// 64-bit FNV-1a. Stable across platforms, used for content hashes in
/// artifact provenance and model/dictionary binding.
class Fnv1a64 {
 public:
  Fnv1a64& update(std::string_view bytes);
  std::uint64_t value() const { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string hash_hex(std::string_view bytes);

std::string read_file(const std::filesystem::path& path);
/// Writes through a sibling temp file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::vector<std::string> read_lines(const std::filesystem::path& path);

std::string_view trim(std::string_view s);

/// Reads a one-entry-per-line list (wordlists, stopwords, emoticons). Blank
/// lines and lines starting with '#' are skipped; entries are trimmed.
std::vector<std::string> read_entry_list(const std::filesystem::path& path);

namespace utf8 {

inline constexpr char32_t kReplacement = 0xFFFD;

/// Decodes one code point starting at `pos` and advances `pos`. Invalid
/// sequences yield U+FFFD and consume one byte.
char32_t decode(std::string_view s, std::size_t& pos);
void append(std::string& out, char32_t cp);
std::u32string to_u32(std::string_view s);
std::string from_u32(std::u32string_view s);

}  // namespace utf8

/// Rounds to a fixed number of decimals so that report values do not carry
/// the last-ulp noise of the platform's libm.
double round_to(double value, int decimals);

}  // namespace vt
