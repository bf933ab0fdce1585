#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace vt {

using Timestamp = std::chrono::sys_seconds;

/// Parses ISO-8601 date-times such as "2019-03-01T12:00:00Z",
/// "2019-03-01 12:00:00", "2019-03-01T12:00:00.250+02:00" or a bare date.
/// Fractional seconds are truncated; offsets are folded into UTC.
std::optional<Timestamp> parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp ts);

struct Forum {
  std::string forum_id;
  std::string name;
};

struct Board {
  std::string board_id;
  std::string forum_id;
  std::string name;
};

struct Thread {
  std::string thread_id;
  std::string board_id;
  std::optional<std::string> title;
  /// Ordered by (created_at, post_id) once the corpus is linked.
  std::vector<std::string> post_ids;
};

struct Post {
  std::string post_id;
  std::string thread_id;
  std::optional<std::string> author;
  Timestamp created_at{};
  std::optional<std::string> body;
};

/// A child record whose parent id does not resolve. The record is kept out of
/// the corpus and reported here instead.
struct DanglingReference {
  std::string kind;  // "board", "thread" or "post"
  std::string id;
  std::string missing_parent;
  std::string location;  // file:line of the record
};

enum class CorpusFormat { kJsonLines, kCsvBundle };

/// Accepts "jsonl"/"json-lines" and "csv"/"csv-bundle".
std::optional<CorpusFormat> parse_corpus_format(std::string_view name);

struct LoadOptions {
  /// Ingestion aborts when dangling records exceed this fraction of all
  /// records.
  double max_dangling_fraction = 0.05;
};

/// Immutable, fully linked forum -> board -> thread -> post hierarchy.
class Corpus {
 public:
  const std::vector<Forum>& forums() const { return forums_; }
  const std::vector<Board>& boards() const { return boards_; }
  const std::vector<Thread>& threads() const { return threads_; }
  const std::vector<Post>& posts() const { return posts_; }
  const std::vector<DanglingReference>& dangling() const { return dangling_; }

  const Forum* find_forum(std::string_view id) const;
  const Board* find_board(std::string_view id) const;
  const Thread* find_thread(std::string_view id) const;
  const Post* find_post(std::string_view id) const;

  /// Posts of `thread` in thread order.
  std::vector<const Post*> posts_of(const Thread& thread) const;
  /// Forum owning the thread's board.
  const Forum& forum_of(const Thread& thread) const;

  bool empty() const { return forums_.empty() && boards_.empty() && threads_.empty() && posts_.empty(); }

  /// Links raw records into a corpus. Records in input order; ids must be
  /// unique per kind. Children whose parent is missing are moved to
  /// `dangling()`; `locations` (optional, same layout as the inputs) is used
  /// to report where such records came from.
  static Corpus link(std::vector<Forum> forums, std::vector<Board> boards, std::vector<Thread> threads,
                     std::vector<Post> posts, const LoadOptions& options = {},
                     const std::unordered_map<std::string, std::string>& locations = {});

 private:
  std::vector<Forum> forums_;
  std::vector<Board> boards_;
  std::vector<Thread> threads_;
  std::vector<Post> posts_;
  std::vector<DanglingReference> dangling_;
  std::unordered_map<std::string, std::size_t> forum_index_, board_index_, thread_index_, post_index_;
};

/// Loads a forum dump. JSON-lines: one record per line tagged with
/// "kind" (forum|board|thread|post). CSV bundle: a directory holding
/// forums.csv, boards.csv, threads.csv and posts.csv with header rows.
/// Throws DataError on unreadable input, malformed records (with line
/// number), an empty dump ("no records"), or too many dangling references.
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format, const LoadOptions& options = {});

struct ForumStats {
  std::string forum_id;
  std::string name;
  std::size_t users = 0;  // distinct non-null authors
  std::size_t boards = 0;
  std::size_t threads = 0;
  std::size_t posts = 0;
  std::size_t null_titles = 0;
  std::size_t empty_posts = 0;  // null or whitespace-only body
  std::size_t null_authors = 0;
};

struct CorpusStats {
  /// Sorted by thread count descending, then forum_id.
  std::vector<ForumStats> forums;
  /// Field-wise sum of `forums`.
  ForumStats total;
  std::size_t dangling_references = 0;
};

CorpusStats corpus_stats(const Corpus& corpus);

nlohmann::ordered_json to_json(const ForumStats& row);
nlohmann::ordered_json to_json(const CorpusStats& stats);

}  // namespace vt
