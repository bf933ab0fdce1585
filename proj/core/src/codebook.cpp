#include "vulntopics/codebook.hpp"

#include <algorithm>

#include "vulntopics/errors.hpp"
#include "vulntopics/util.hpp"

namespace vt {

namespace {

std::size_t index_of(TopicLabel l) { return static_cast<std::size_t>(l); }

bool contains_phrase(std::span<const std::string> tokens, const std::vector<std::string>& phrase) {
  if (phrase.empty() || phrase.size() > tokens.size()) return false;
  auto it = std::search(tokens.begin(), tokens.end(), phrase.begin(), phrase.end());
  return it != tokens.end();
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(pos));
      break;
    }
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return lines;
}

std::string allowed_labels() {
  std::string s;
  for (auto l : kAllLabels) {
    if (!s.empty()) s += ", ";
    s += to_string(l);
  }
  return s;
}

}  // namespace

std::vector<std::string> Codebook::match_tokens(std::string_view text, const FilterConfig& filter,
                                                const LemmaTable& lemmas) {
  auto tokens = tokenize(normalize(text, filter));
  for (auto& t : tokens) t = lemmatize(t, lemmas);
  return tokens;
}

Codebook Codebook::parse(std::string_view text, const FilterConfig& filter, const LemmaTable& lemmas,
                         std::string_view source) {
  Codebook cb;
  cb.rules_.resize(4);
  for (auto l : kAllLabels) cb.rules_[index_of(l)].label = l;
  std::vector<bool> seen(4, false);
  std::optional<TopicLabel> section;
  auto fail = [&](std::size_t line, const std::string& what) {
    throw DataError(std::string(source) + ":" + std::to_string(line) + ": " + what);
  };

  auto lines = split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::size_t line_no = n + 1;
    auto line = trim(lines[n]);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated section header");
      auto name = trim(line.substr(1, line.size() - 2));
      auto label = parse_label(name);
      if (!label) fail(line_no, "unknown label \"" + std::string(name) + "\" (allowed: " + allowed_labels() + ")");
      if (seen[index_of(*label)]) fail(line_no, "duplicate section [" + std::string(name) + "]");
      seen[index_of(*label)] = true;
      section = label;
      continue;
    }
    auto eq = line.find('=');
    if (eq != std::string_view::npos) {
      auto key = trim(line.substr(0, eq));
      auto value = trim(line.substr(eq + 1));
      if (key == "precedence" && !section) {
        std::size_t start = 0;
        while (start <= value.size()) {
          auto comma = value.find(',', start);
          auto item = trim(value.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
          auto label = parse_label(item);
          if (!label) fail(line_no, "unknown label \"" + std::string(item) + "\" in precedence (allowed: " + allowed_labels() + ")");
          if (std::find(cb.precedence_.begin(), cb.precedence_.end(), *label) != cb.precedence_.end())
            fail(line_no, "label listed twice in precedence");
          cb.precedence_.push_back(*label);
          if (comma == std::string_view::npos) break;
          start = comma + 1;
        }
        continue;
      }
      if (key == "min_matches" && section) {
        try {
          auto v = std::stoul(std::string(value));
          if (v == 0) fail(line_no, "min_matches must be at least 1");
          cb.rules_[index_of(*section)].min_matches = v;
        } catch (const std::logic_error&) {
          fail(line_no, "min_matches must be a positive integer");
        }
        continue;
      }
      fail(line_no, "unknown setting \"" + std::string(key) + "\"");
    }
    if (!section) fail(line_no, "keyword outside of a section");
    if (*section == TopicLabel::kOther) fail(line_no, "Other is the fallback label and takes no keywords");
    auto phrase = match_tokens(line, filter, lemmas);
    if (phrase.empty()) fail(line_no, "keyword \"" + std::string(line) + "\" is empty after normalization");
    auto& phrases = cb.rules_[index_of(*section)].phrases;
    if (std::find(phrases.begin(), phrases.end(), phrase) == phrases.end()) phrases.push_back(std::move(phrase));
  }

  if (cb.precedence_.size() != 4)
    throw DataError(std::string(source) + ": precedence must list all four labels (" + allowed_labels() + ")");
  if (cb.precedence_.back() != TopicLabel::kOther)
    throw DataError(std::string(source) + ": Other must come last in precedence");
  for (auto l : kAllLabels) {
    if (l == TopicLabel::kOther) continue;
    if (cb.rules_[index_of(l)].phrases.empty())
      throw DataError(std::string(source) + ": label " + std::string(to_string(l)) + " has no keywords");
  }
  return cb;
}

Codebook Codebook::load(const std::filesystem::path& path, const FilterConfig& filter, const LemmaTable& lemmas) {
  return parse(read_file(path), filter, lemmas, path.string());
}

const CodebookRule& Codebook::rule(TopicLabel label) const { return rules_.at(index_of(label)); }

TopicLabel Codebook::classify(std::span<const std::string> tokens) const {
  for (auto label : precedence_) {
    if (label == TopicLabel::kOther) break;
    const auto& r = rules_[index_of(label)];
    std::size_t hits = 0;
    for (const auto& phrase : r.phrases)
      if (contains_phrase(tokens, phrase) && ++hits >= r.min_matches) return label;
  }
  return TopicLabel::kOther;
}

TopicLabel label_topic(const ThreadDocument& doc, const Codebook& codebook, const FilterConfig& filter,
                       const LemmaTable& lemmas) {
  return codebook.classify(Codebook::match_tokens(doc.merged_text, filter, lemmas));
}

LabelMap parse_labels(std::string_view csv, std::string_view source) {
  LabelMap labels;
  auto lines = split_lines(csv);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    auto line = trim(lines[n]);
    if (line.empty() || line.front() == '#') continue;
    const std::string where = std::string(source) + ":" + std::to_string(n + 1);
    auto comma = line.find(',');
    if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos)
      throw DataError(where + ": expected \"thread_id,label\"");
    auto id = trim(line.substr(0, comma));
    auto name = trim(line.substr(comma + 1));
    if (id == "thread_id" && name == "label" && labels.empty()) continue;
    if (id.empty()) throw DataError(where + ": empty thread_id");
    auto label = parse_label(name);
    if (!label)
      throw DataError(where + ": unknown label \"" + std::string(name) + "\" (allowed: " + allowed_labels() + ")");
    if (!labels.emplace(std::string(id), *label).second)
      throw DataError(where + ": duplicate thread_id \"" + std::string(id) + "\"");
  }
  return labels;
}

LabelMap load_labels(const std::filesystem::path& path) { return parse_labels(read_file(path), path.string()); }

void assign_labels(std::span<ThreadDocument> docs, const Codebook& codebook, const LabelMap& manual,
                   const FilterConfig& filter, const LemmaTable& lemmas) {
  for (auto& doc : docs) {
    if (auto it = manual.find(doc.thread_id); it != manual.end()) {
      doc.label = it->second;
      doc.label_source = LabelSource::kManual;
    } else {
      doc.label = label_topic(doc, codebook, filter, lemmas);
      doc.label_source = LabelSource::kRule;
    }
  }
}

}  // namespace vt
