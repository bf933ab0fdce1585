#include "vulntopics/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <set>
#include <unordered_set>

#include "vulntopics/errors.hpp"
#include "vulntopics/util.hpp"

namespace vt {

namespace {

using nlohmann::json;

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

std::string location_key(std::string_view kind, std::string_view id) {
  std::string k(kind);
  k += ':';
  k += id;
  return k;
}

// --- JSON-lines -------------------------------------------------------------

struct RawRecords {
  std::vector<Forum> forums;
  std::vector<Board> boards;
  std::vector<Thread> threads;
  std::vector<Post> posts;
  std::unordered_map<std::string, std::string> locations;

  std::size_t size() const { return forums.size() + boards.size() + threads.size() + posts.size(); }
};

[[noreturn]] void malformed(const std::string& where, const std::string& what) {
  throw DataError("malformed record at " + where + ": " + what);
}

std::string json_id(const json& rec, const char* key, const std::string& where) {
  auto it = rec.find(key);
  if (it == rec.end() || it->is_null()) malformed(where, std::string("missing field \"") + key + "\"");
  if (it->is_string()) {
    auto s = it->get<std::string>();
    if (s.empty()) malformed(where, std::string("empty \"") + key + "\"");
    return s;
  }
  if (it->is_number_integer()) return std::to_string(it->get<long long>());
  malformed(where, std::string("field \"") + key + "\" must be a string or integer");
}

std::optional<std::string> json_nullable_text(const json& rec, const char* key, const std::string& where) {
  auto it = rec.find(key);
  if (it == rec.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) malformed(where, std::string("field \"") + key + "\" must be a string or null");
  return it->get<std::string>();
}

std::string json_text(const json& rec, const char* key, const std::string& where) {
  auto v = json_nullable_text(rec, key, where);
  if (!v) malformed(where, std::string("missing field \"") + key + "\"");
  return *v;
}

Timestamp json_timestamp(const json& rec, const std::string& where) {
  auto text = json_text(rec, "created_at", where);
  auto ts = parse_timestamp(text);
  if (!ts) malformed(where, "invalid ISO-8601 timestamp \"" + text + "\"");
  return *ts;
}

RawRecords read_jsonl(const std::filesystem::path& path) {
  RawRecords raw;
  auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto text = trim(lines[i]);
    if (text.empty()) continue;
    const std::string where = path.filename().string() + ":" + std::to_string(i + 1);
    json rec;
    try {
      rec = json::parse(text);
    } catch (const json::parse_error& e) {
      malformed(where, e.what());
    }
    if (!rec.is_object()) malformed(where, "record is not a JSON object");
    auto kind_it = rec.find("kind");
    if (kind_it == rec.end() || !kind_it->is_string()) malformed(where, "missing \"kind\"");
    const auto kind = kind_it->get<std::string>();
    if (kind == "forum") {
      Forum f{json_id(rec, "forum_id", where), json_text(rec, "name", where)};
      raw.locations[location_key(kind, f.forum_id)] = where;
      raw.forums.push_back(std::move(f));
    } else if (kind == "board") {
      Board b{json_id(rec, "board_id", where), json_id(rec, "forum_id", where), json_text(rec, "name", where)};
      raw.locations[location_key(kind, b.board_id)] = where;
      raw.boards.push_back(std::move(b));
    } else if (kind == "thread") {
      Thread t{json_id(rec, "thread_id", where), json_id(rec, "board_id", where),
               json_nullable_text(rec, "title", where), {}};
      raw.locations[location_key(kind, t.thread_id)] = where;
      raw.threads.push_back(std::move(t));
    } else if (kind == "post") {
      Post p{json_id(rec, "post_id", where), json_id(rec, "thread_id", where),
             json_nullable_text(rec, "author", where), json_timestamp(rec, where),
             json_nullable_text(rec, "body", where)};
      raw.locations[location_key(kind, p.post_id)] = where;
      raw.posts.push_back(std::move(p));
    } else {
      malformed(where, "unknown kind \"" + kind + "\"");
    }
  }
  return raw;
}

// --- CSV bundle -------------------------------------------------------------

/// A CSV cell. Unquoted empty cells are null; a quoted "" is an empty string.
struct Cell {
  std::string text;
  bool quoted = false;
  bool is_null() const { return !quoted && text.empty(); }
};

struct CsvRow {
  std::vector<Cell> cells;
  std::size_t line = 0;
};

std::vector<CsvRow> parse_csv(std::string_view data, const std::string& name) {
  std::vector<CsvRow> rows;
  CsvRow row;
  Cell cell;
  std::size_t line = 1;
  row.line = 1;
  bool in_quotes = false;
  bool after_quote = false;
  bool row_has_content = false;
  auto end_cell = [&] {
    row.cells.push_back(std::move(cell));
    cell = Cell{};
    after_quote = false;
  };
  auto end_row = [&] {
    end_cell();
    if (row_has_content) rows.push_back(std::move(row));
    row = CsvRow{};
    row.line = line;
    row_has_content = false;
  };
  for (std::size_t i = 0; i < data.size(); ++i) {
    char c = data[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < data.size() && data[i + 1] == '"') {
          cell.text.push_back('"');
          ++i;
        } else {
          in_quotes = false;
          after_quote = true;
        }
      } else {
        if (c == '\n') ++line;
        cell.text.push_back(c);
      }
      continue;
    }
    if (c == ',') {
      row_has_content = true;
      end_cell();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < data.size() && data[i + 1] == '\n') ++i;
      ++line;
      end_row();
    } else if (c == '"') {
      if (!cell.text.empty() || after_quote)
        throw DataError("malformed record at " + name + ":" + std::to_string(line) + ": stray quote");
      in_quotes = true;
      cell.quoted = true;
      row_has_content = true;
    } else {
      if (after_quote)
        throw DataError("malformed record at " + name + ":" + std::to_string(line) +
                        ": text after closing quote");
      cell.text.push_back(c);
      row_has_content = true;
    }
  }
  if (in_quotes) throw DataError("malformed record at " + name + ":" + std::to_string(line) + ": unterminated quote");
  if (row_has_content || !cell.text.empty() || cell.quoted) {
    row_has_content = true;
    end_row();
  }
  return rows;
}

class CsvTable {
 public:
  CsvTable(const std::filesystem::path& path, std::vector<std::string> required) : name_(path.filename().string()) {
    if (!std::filesystem::exists(path)) throw DataError("cannot read file: " + path.string());
    rows_ = parse_csv(read_file(path), name_);
    if (rows_.empty()) return;
    for (std::size_t i = 0; i < rows_.front().cells.size(); ++i) columns_[std::string(trim(rows_.front().cells[i].text))] = i;
    for (const auto& col : required)
      if (!columns_.count(col)) throw DataError("malformed header in " + name_ + ": missing column \"" + col + "\"");
  }

  std::size_t size() const { return rows_.empty() ? 0 : rows_.size() - 1; }
  std::string where(std::size_t r) const { return name_ + ":" + std::to_string(rows_[r + 1].line); }

  const Cell& cell(std::size_t r, const std::string& col) const {
    const auto& row = rows_[r + 1];
    auto idx = columns_.at(col);
    if (idx >= row.cells.size()) malformed(where(r), "too few columns");
    return row.cells[idx];
  }
  void check_width(std::size_t r) const {
    if (rows_[r + 1].cells.size() != rows_.front().cells.size())
      malformed(where(r), "expected " + std::to_string(rows_.front().cells.size()) + " columns, got " +
                              std::to_string(rows_[r + 1].cells.size()));
  }
  std::string id(std::size_t r, const std::string& col) const {
    const auto& c = cell(r, col);
    if (c.text.empty()) malformed(where(r), "missing field \"" + col + "\"");
    return c.text;
  }
  std::optional<std::string> nullable(std::size_t r, const std::string& col) const {
    const auto& c = cell(r, col);
    if (c.is_null()) return std::nullopt;
    return c.text;
  }

 private:
  std::string name_;
  std::vector<CsvRow> rows_;
  std::unordered_map<std::string, std::size_t> columns_;
};

RawRecords read_csv_bundle(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw DataError("CSV bundle is not a directory: " + dir.string());
  RawRecords raw;
  CsvTable forums(dir / "forums.csv", {"forum_id", "name"});
  for (std::size_t r = 0; r < forums.size(); ++r) {
    forums.check_width(r);
    Forum f{forums.id(r, "forum_id"), forums.nullable(r, "name").value_or("")};
    raw.locations[location_key("forum", f.forum_id)] = forums.where(r);
    raw.forums.push_back(std::move(f));
  }
  CsvTable boards(dir / "boards.csv", {"board_id", "forum_id", "name"});
  for (std::size_t r = 0; r < boards.size(); ++r) {
    boards.check_width(r);
    Board b{boards.id(r, "board_id"), boards.id(r, "forum_id"), boards.nullable(r, "name").value_or("")};
    raw.locations[location_key("board", b.board_id)] = boards.where(r);
    raw.boards.push_back(std::move(b));
  }
  CsvTable threads(dir / "threads.csv", {"thread_id", "board_id", "title"});
  for (std::size_t r = 0; r < threads.size(); ++r) {
    threads.check_width(r);
    Thread t{threads.id(r, "thread_id"), threads.id(r, "board_id"), threads.nullable(r, "title"), {}};
    raw.locations[location_key("thread", t.thread_id)] = threads.where(r);
    raw.threads.push_back(std::move(t));
  }
  CsvTable posts(dir / "posts.csv", {"post_id", "thread_id", "author", "created_at", "body"});
  for (std::size_t r = 0; r < posts.size(); ++r) {
    posts.check_width(r);
    auto created = posts.id(r, "created_at");
    auto ts = parse_timestamp(created);
    if (!ts) malformed(posts.where(r), "invalid ISO-8601 timestamp \"" + created + "\"");
    Post p{posts.id(r, "post_id"), posts.id(r, "thread_id"), posts.nullable(r, "author"), *ts,
           posts.nullable(r, "body")};
    raw.locations[location_key("post", p.post_id)] = posts.where(r);
    raw.posts.push_back(std::move(p));
  }
  return raw;
}

bool is_blank(const std::optional<std::string>& s) { return !s || trim(*s).empty(); }

}  // namespace

// --- timestamps -------------------------------------------------------------

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  text = trim(text);
  // YYYY-MM-DD
  if (text.size() < 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), mo) || !parse_int(text.substr(8, 2), d))
    return std::nullopt;
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  std::string_view rest = text.substr(10);
  long offset_seconds = 0;
  if (!rest.empty()) {
    if (rest[0] != 'T' && rest[0] != 't' && rest[0] != ' ') return std::nullopt;
    rest.remove_prefix(1);
    if (rest.size() < 8 || rest[2] != ':' || rest[5] != ':') return std::nullopt;
    if (!parse_int(rest.substr(0, 2), h) || !parse_int(rest.substr(3, 2), mi) || !parse_int(rest.substr(6, 2), s))
      return std::nullopt;
    if (h > 23 || mi > 59 || s > 60) return std::nullopt;
    rest.remove_prefix(8);
    if (!rest.empty() && rest[0] == '.') {
      std::size_t i = 1;
      while (i < rest.size() && rest[i] >= '0' && rest[i] <= '9') ++i;
      if (i == 1) return std::nullopt;
      rest.remove_prefix(i);
    }
    if (rest == "Z" || rest == "z") {
      rest = {};
    } else if (!rest.empty()) {
      if ((rest[0] != '+' && rest[0] != '-') || rest.size() != 6 || rest[3] != ':') return std::nullopt;
      int oh = 0, om = 0;
      if (!parse_int(rest.substr(1, 2), oh) || !parse_int(rest.substr(4, 2), om) || oh > 23 || om > 59)
        return std::nullopt;
      offset_seconds = (rest[0] == '+' ? 1 : -1) * (oh * 3600L + om * 60L);
    }
  }
  return Timestamp{sys_days{ymd}} + hours{h} + minutes{mi} + seconds{s} - seconds{offset_seconds};
}

std::string format_timestamp(Timestamp ts) {
  using namespace std::chrono;
  auto day_point = floor<days>(ts);
  year_month_day ymd{day_point};
  hh_mm_ss hms{ts - day_point};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

std::optional<CorpusFormat> parse_corpus_format(std::string_view name) {
  if (name == "jsonl" || name == "json-lines") return CorpusFormat::kJsonLines;
  if (name == "csv" || name == "csv-bundle") return CorpusFormat::kCsvBundle;
  return std::nullopt;
}

// --- Corpus -----------------------------------------------------------------

Corpus Corpus::link(std::vector<Forum> forums, std::vector<Board> boards, std::vector<Thread> threads,
                    std::vector<Post> posts, const LoadOptions& options,
                    const std::unordered_map<std::string, std::string>& locations) {
  const std::size_t total_records = forums.size() + boards.size() + threads.size() + posts.size();
  if (total_records == 0) throw DataError("no records");

  auto where = [&](std::string_view kind, const std::string& id) {
    auto it = locations.find(location_key(kind, id));
    return it == locations.end() ? std::string(kind) + " " + id : it->second;
  };

  Corpus c;
  for (auto& f : forums) {
    if (trim(f.name).empty()) throw DataError("malformed record at " + where("forum", f.forum_id) + ": empty forum name");
    if (!c.forum_index_.emplace(f.forum_id, c.forums_.size()).second)
      throw DataError("duplicate forum_id \"" + f.forum_id + "\" at " + where("forum", f.forum_id));
    c.forums_.push_back(std::move(f));
  }
  for (auto& b : boards) {
    if (trim(b.name).empty()) throw DataError("malformed record at " + where("board", b.board_id) + ": empty board name");
    if (c.board_index_.count(b.board_id))
      throw DataError("duplicate board_id \"" + b.board_id + "\" at " + where("board", b.board_id));
    if (!c.forum_index_.count(b.forum_id)) {
      c.dangling_.push_back({"board", b.board_id, b.forum_id, where("board", b.board_id)});
      continue;
    }
    c.board_index_.emplace(b.board_id, c.boards_.size());
    c.boards_.push_back(std::move(b));
  }
  std::unordered_set<std::string> dropped_threads;
  for (auto& t : threads) {
    if (c.thread_index_.count(t.thread_id) || dropped_threads.count(t.thread_id))
      throw DataError("duplicate thread_id \"" + t.thread_id + "\" at " + where("thread", t.thread_id));
    if (!c.board_index_.count(t.board_id)) {
      c.dangling_.push_back({"thread", t.thread_id, t.board_id, where("thread", t.thread_id)});
      dropped_threads.insert(t.thread_id);
      continue;
    }
    t.post_ids.clear();
    c.thread_index_.emplace(t.thread_id, c.threads_.size());
    c.threads_.push_back(std::move(t));
  }
  std::unordered_set<std::string> dropped_posts;
  for (auto& p : posts) {
    if (c.post_index_.count(p.post_id) || dropped_posts.count(p.post_id))
      throw DataError("duplicate post_id \"" + p.post_id + "\" at " + where("post", p.post_id));
    auto it = c.thread_index_.find(p.thread_id);
    if (it == c.thread_index_.end()) {
      c.dangling_.push_back({"post", p.post_id, p.thread_id, where("post", p.post_id)});
      dropped_posts.insert(p.post_id);
      continue;
    }
    c.threads_[it->second].post_ids.push_back(p.post_id);
    c.post_index_.emplace(p.post_id, c.posts_.size());
    c.posts_.push_back(std::move(p));
  }

  const double fraction = static_cast<double>(c.dangling_.size()) / static_cast<double>(total_records);
  if (fraction > options.max_dangling_fraction) {
    throw DataError(std::to_string(c.dangling_.size()) + " dangling references out of " +
                    std::to_string(total_records) + " records exceeds the configured threshold (first: " +
                    c.dangling_.front().kind + " " + c.dangling_.front().id + " -> missing " +
                    c.dangling_.front().missing_parent + ")");
  }

  for (auto& t : c.threads_) {
    std::sort(t.post_ids.begin(), t.post_ids.end(), [&](const std::string& a, const std::string& b) {
      const Post& pa = c.posts_[c.post_index_.at(a)];
      const Post& pb = c.posts_[c.post_index_.at(b)];
      if (pa.created_at != pb.created_at) return pa.created_at < pb.created_at;
      return pa.post_id < pb.post_id;
    });
  }
  return c;
}

const Forum* Corpus::find_forum(std::string_view id) const {
  auto it = forum_index_.find(std::string(id));
  return it == forum_index_.end() ? nullptr : &forums_[it->second];
}
const Board* Corpus::find_board(std::string_view id) const {
  auto it = board_index_.find(std::string(id));
  return it == board_index_.end() ? nullptr : &boards_[it->second];
}
const Thread* Corpus::find_thread(std::string_view id) const {
  auto it = thread_index_.find(std::string(id));
  return it == thread_index_.end() ? nullptr : &threads_[it->second];
}
const Post* Corpus::find_post(std::string_view id) const {
  auto it = post_index_.find(std::string(id));
  return it == post_index_.end() ? nullptr : &posts_[it->second];
}

std::vector<const Post*> Corpus::posts_of(const Thread& thread) const {
  std::vector<const Post*> out;
  out.reserve(thread.post_ids.size());
  for (const auto& id : thread.post_ids) out.push_back(&posts_[post_index_.at(id)]);
  return out;
}

const Forum& Corpus::forum_of(const Thread& thread) const {
  const Board& b = boards_[board_index_.at(thread.board_id)];
  return forums_[forum_index_.at(b.forum_id)];
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format, const LoadOptions& options) {
  if (!std::filesystem::exists(path)) throw DataError("cannot read corpus: " + path.string() + " does not exist");
  RawRecords raw = format == CorpusFormat::kJsonLines ? read_jsonl(path) : read_csv_bundle(path);
  if (raw.size() == 0) throw DataError("no records in " + path.string());
  return Corpus::link(std::move(raw.forums), std::move(raw.boards), std::move(raw.threads), std::move(raw.posts),
                      options, raw.locations);
}

// --- statistics -------------------------------------------------------------

CorpusStats corpus_stats(const Corpus& corpus) {
  std::unordered_map<std::string, std::size_t> row_of;
  std::vector<ForumStats> rows;
  std::vector<std::set<std::string>> users;
  for (const auto& f : corpus.forums()) {
    row_of[f.forum_id] = rows.size();
    rows.push_back(ForumStats{f.forum_id, f.name});
    users.emplace_back();
  }
  for (const auto& b : corpus.boards()) ++rows[row_of.at(b.forum_id)].boards;
  for (const auto& t : corpus.threads()) {
    const auto r = row_of.at(corpus.forum_of(t).forum_id);
    auto& row = rows[r];
    ++row.threads;
    if (!t.title) ++row.null_titles;
    for (const Post* p : corpus.posts_of(t)) {
      ++row.posts;
      if (is_blank(p->body)) ++row.empty_posts;
      if (p->author)
        users[r].insert(*p->author);
      else
        ++row.null_authors;
    }
  }
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].users = users[i].size();

  CorpusStats stats;
  stats.total.forum_id = "total";
  stats.total.name = "Total";
  for (const auto& r : rows) {
    stats.total.users += r.users;
    stats.total.boards += r.boards;
    stats.total.threads += r.threads;
    stats.total.posts += r.posts;
    stats.total.null_titles += r.null_titles;
    stats.total.empty_posts += r.empty_posts;
    stats.total.null_authors += r.null_authors;
  }
  std::stable_sort(rows.begin(), rows.end(), [](const ForumStats& a, const ForumStats& b) {
    if (a.threads != b.threads) return a.threads > b.threads;
    return a.forum_id < b.forum_id;
  });
  stats.forums = std::move(rows);
  stats.dangling_references = corpus.dangling().size();
  return stats;
}

nlohmann::ordered_json to_json(const ForumStats& row) {
  return {{"forum_id", row.forum_id},
          {"name", row.name},
          {"users", row.users},
          {"boards", row.boards},
          {"threads", row.threads},
          {"posts", row.posts},
          {"anomalies",
           {{"null_titles", row.null_titles}, {"empty_posts", row.empty_posts}, {"null_authors", row.null_authors}}}};
}

nlohmann::ordered_json to_json(const CorpusStats& stats) {
  nlohmann::ordered_json forums = nlohmann::ordered_json::array();
  for (const auto& r : stats.forums) forums.push_back(to_json(r));
  return {{"forums", forums}, {"total", to_json(stats.total)}, {"dangling_references", stats.dangling_references}};
}

}  // namespace vt
