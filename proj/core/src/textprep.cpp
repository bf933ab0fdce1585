#include "vulntopics/textprep.hpp"

#include <algorithm>

#include "vulntopics/errors.hpp"
#include "vulntopics/util.hpp"

namespace vt {

namespace {

char32_t to_lower(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 32;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 0x20;  // Latin-1 capitals
  if (c >= 0x410 && c <= 0x42F) return c + 0x20;             // А..Я
  if (c >= 0x400 && c <= 0x40F) return c + 0x50;             // Ѐ..Џ (Ё)
  return c;
}

bool in_alphabet(char32_t c, Alphabet a) {
  switch (a) {
    case Alphabet::kLatin:
      return c >= U'a' && c <= U'z';
    case Alphabet::kCyrillic:
      return (c >= 0x430 && c <= 0x44F) || c == 0x451;
    case Alphabet::kGerman:
      return c == 0xE4 || c == 0xF6 || c == 0xFC || c == 0xDF;
  }
  return false;
}

bool is_space(char32_t c) {
  return c == U' ' || (c >= 0x09 && c <= 0x0D) || c == 0xA0 || (c >= 0x2000 && c <= 0x200A) || c == 0x2028 ||
         c == 0x2029 || c == 0x202F || c == 0x205F || c == 0x3000;
}

bool is_control(char32_t c) { return c < 0x20 || c == 0x7F || (c >= 0x80 && c < 0xA0); }

bool is_emoji(char32_t c) {
  return (c >= 0x1F000 && c <= 0x1FAFF) || (c >= 0x2600 && c <= 0x27BF) || (c >= 0x2300 && c <= 0x23FF) ||
         (c >= 0x2B00 && c <= 0x2BFF) || (c >= 0xFE00 && c <= 0xFE0F) || c == 0x200D || c == 0x20E3 ||
         (c >= 0xE0020 && c <= 0xE007F) || c == 0x3030 || c == 0x303D || c == 0x3297 || c == 0x3299;
}

bool is_apostrophe(char32_t c) { return c == U'\'' || c == 0x2019 || c == 0x2018 || c == 0x60; }

bool is_punctuation(char32_t c) {
  if (c < 0x80) return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
                       (c >= 0x7B && c <= 0x7E);
  return (c >= 0xA1 && c <= 0xBF) || c == 0xD7 || c == 0xF7 || (c >= 0x2010 && c <= 0x2027) ||
         (c >= 0x2030 && c <= 0x205E) || (c >= 0x3001 && c <= 0x303F) || (c >= 0xFF01 && c <= 0xFF0F) ||
         (c >= 0x2190 && c <= 0x21FF) || (c >= 0x2E00 && c <= 0x2E7F);
}

bool is_word_char(char32_t c) { return (c >= U'a' && c <= U'z') || (c >= U'0' && c <= U'9') || c == U'-'; }

/// Emoticons made of plain word characters ("xd") can only be removed as
/// whole words; only those with a symbol are stripped off word edges.
bool strippable(const std::u32string& emoticon) {
  return std::any_of(emoticon.begin(), emoticon.end(), [](char32_t c) { return !is_word_char(c); });
}

void strip_emoticon_edges(std::u32string& word, const std::vector<std::u32string>& emoticons) {
  bool changed = true;
  while (changed && !word.empty()) {
    changed = false;
    for (const auto& e : emoticons) {
      if (!strippable(e) || e.size() >= word.size()) continue;
      if (word.compare(word.size() - e.size(), e.size(), e) == 0) {
        word.resize(word.size() - e.size());
        changed = true;
        break;
      }
      if (word.compare(0, e.size(), e) == 0) {
        word.erase(0, e.size());
        changed = true;
        break;
      }
    }
  }
}

}  // namespace

std::optional<Alphabet> parse_alphabet(std::string_view name) {
  if (name == "latin") return Alphabet::kLatin;
  if (name == "cyrillic") return Alphabet::kCyrillic;
  if (name == "german") return Alphabet::kGerman;
  return std::nullopt;
}

std::string_view to_string(Alphabet a) {
  switch (a) {
    case Alphabet::kLatin:
      return "latin";
    case Alphabet::kCyrillic:
      return "cyrillic";
    case Alphabet::kGerman:
      return "german";
  }
  return "?";
}

const std::vector<std::string>& default_emoticons() {
  static const std::vector<std::string> kEmoticons = {
      ":-)", ":-(", ":-d", ":-p", ";-)", ":-/", ":'(", ":)", ":(", ":c", ":d", ":p", ";)", ":/", ":o", ":3",
      "<3",  "^^",  "^_^", "-_-", "xd",  "o_o", ":|", "=)", "=(", ":]", ":["};
  static const std::vector<std::string> kSorted = [] {
    auto v = kEmoticons;
    std::stable_sort(v.begin(), v.end(), [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
    return v;
  }();
  return kSorted;
}

std::string lowercase_utf8(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t pos = 0;
  while (pos < s.size()) utf8::append(out, to_lower(utf8::decode(s, pos)));
  return out;
}

FilterConfig make_filter_config(std::vector<Alphabet> alphabets, std::span<const std::string> stopwords,
                                std::span<const std::string> emoticons) {
  FilterConfig cfg;
  cfg.alphabets = std::move(alphabets);
  for (const auto& w : stopwords) cfg.stopwords.insert(lowercase_utf8(trim(w)));
  cfg.emoticons.clear();
  for (const auto& e : emoticons) {
    auto low = lowercase_utf8(trim(e));
    if (!low.empty() && std::find(cfg.emoticons.begin(), cfg.emoticons.end(), low) == cfg.emoticons.end())
      cfg.emoticons.push_back(std::move(low));
  }
  std::stable_sort(cfg.emoticons.begin(), cfg.emoticons.end(),
                   [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
  return cfg;
}

std::string normalize(std::string_view raw, const FilterConfig& cfg) {
  std::vector<std::u32string> emoticons;
  emoticons.reserve(cfg.emoticons.size());
  for (const auto& e : cfg.emoticons) emoticons.push_back(utf8::to_u32(e));
  auto is_emoticon = [&](const std::u32string& w) {
    return std::find(emoticons.begin(), emoticons.end(), w) != emoticons.end();
  };
  auto allowed_letter = [&](char32_t c) {
    return std::any_of(cfg.alphabets.begin(), cfg.alphabets.end(), [c](Alphabet a) { return in_alphabet(c, a); });
  };

  std::u32string text = utf8::to_u32(raw);
  for (auto& c : text) c = to_lower(c);

  std::string out;
  auto emit = [&](std::u32string& piece, bool poisoned) {
    if (!poisoned) {
      auto b = piece.find_first_not_of(U'-');
      if (b != std::u32string::npos) {
        auto e = piece.find_last_not_of(U'-');
        std::u32string core = piece.substr(b, e - b + 1);
        if (!is_emoticon(core)) {
          if (!out.empty()) out.push_back(' ');
          out += utf8::from_u32(core);
        }
      }
    }
    piece.clear();
  };

  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (is_space(text[i]) || is_control(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i]) && !is_control(text[i])) ++i;
    if (start == i) break;
    std::u32string word = text.substr(start, i - start);
    if (is_emoticon(word)) continue;
    strip_emoticon_edges(word, emoticons);

    std::u32string piece;
    bool poisoned = false;
    for (char32_t c : word) {
      if ((c >= U'0' && c <= U'9') || c == U'-' || allowed_letter(c)) {
        piece.push_back(c);
      } else if (is_emoji(c) || is_apostrophe(c)) {
        // deleted in place
      } else if (is_punctuation(c)) {
        emit(piece, poisoned);
        poisoned = false;
      } else {
        poisoned = true;
      }
    }
    emit(piece, poisoned);
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view clean) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < clean.size()) {
    while (i < clean.size() && clean[i] == ' ') ++i;
    std::size_t start = i;
    while (i < clean.size() && clean[i] != ' ') ++i;
    if (i > start) tokens.emplace_back(clean.substr(start, i - start));
  }
  return tokens;
}

LemmaTable parse_lemma_table(std::string_view tsv, std::string_view source) {
  LemmaTable table;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= tsv.size()) {
    auto nl = tsv.find('\n', pos);
    std::string_view line = tsv.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? tsv.size() + 1 : nl + 1;
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string_view::npos)
      throw DataError(std::string(source) + ":" + std::to_string(line_no) + ": expected \"surface<TAB>lemma\"");
    auto surface = lowercase_utf8(trim(line.substr(0, tab)));
    auto lemma = lowercase_utf8(trim(line.substr(tab + 1)));
    if (surface.empty() || lemma.empty())
      throw DataError(std::string(source) + ":" + std::to_string(line_no) + ": empty column");
    auto [it, inserted] = table.emplace(surface, lemma);
    if (!inserted && it->second != lemma)
      throw DataError(std::string(source) + ":" + std::to_string(line_no) + ": conflicting lemma for \"" + surface +
                      "\"");
  }
  for (const auto& [surface, lemma] : table) {
    auto it = table.find(lemma);
    if (it != table.end() && it->second != lemma)
      throw DataError(std::string(source) + ": chained lemma \"" + surface + "\" -> \"" + lemma + "\" -> \"" +
                      it->second + "\"");
  }
  return table;
}

LemmaTable load_lemma_table(const std::filesystem::path& path) {
  return parse_lemma_table(read_file(path), path.string());
}

const std::string& lemmatize(const std::string& token, const LemmaTable& table) {
  auto it = table.find(token);
  return it == table.end() ? token : it->second;
}

LanguageProfile make_language_profile(std::string id, std::span<const std::string> words) {
  LanguageProfile p{std::move(id), {}};
  for (const auto& w : words) {
    auto t = trim(w);
    if (t.empty()) continue;
    if (t.find_first_of(" \t") != std::string_view::npos)
      throw DataError("wordlist for \"" + p.id + "\" has an entry with whitespace: \"" + std::string(t) + "\"");
    p.wordlist.insert(lowercase_utf8(t));
  }
  if (p.wordlist.empty()) throw DataError("wordlist for \"" + p.id + "\" is empty");
  return p;
}

LanguageProfile load_language_profile(std::string id, const std::filesystem::path& wordlist) {
  auto entries = read_entry_list(wordlist);
  return make_language_profile(std::move(id), entries);
}

void validate(const LanguageSet& set) {
  if (set.languages.empty()) throw DataError("language set is empty");
  for (std::size_t i = 0; i < set.languages.size(); ++i)
    for (std::size_t j = i + 1; j < set.languages.size(); ++j)
      if (set.languages[i].id == set.languages[j].id)
        throw DataError("duplicate language id \"" + set.languages[i].id + "\"");
}

int indicator_language(std::string_view word, const LanguageProfile& language) {
  if (word.empty()) return 0;
  return language.wordlist.count(std::string(word)) ? 1 : 0;
}

double language_ratio(std::span<const std::string> tokens, const LanguageProfile& language) {
  if (tokens.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& t : tokens) hits += static_cast<std::size_t>(indicator_language(t, language));
  return static_cast<double>(hits) / static_cast<double>(tokens.size());
}

std::optional<std::string> detect_language(std::span<const std::string> tokens, const LanguageSet& languages) {
  const LanguageProfile* best = nullptr;
  double best_ratio = 0.0;
  for (const auto& lang : languages.languages) {
    double r = language_ratio(tokens, lang);
    if (r > best_ratio) {
      best_ratio = r;
      best = &lang;
    }
  }
  if (!best) return std::nullopt;
  return best->id;
}

TokenizedDoc preprocess_document(std::string doc_id, std::string_view raw, const FilterConfig& cfg,
                                 const LemmaTable& lemmas) {
  TokenizedDoc doc{std::move(doc_id), {}};
  for (auto& tok : tokenize(normalize(raw, cfg))) {
    if (cfg.stopwords.count(tok)) continue;
    const std::string& lemma = lemmatize(tok, lemmas);
    if (cfg.stopwords.count(lemma)) continue;
    doc.tokens.push_back(lemma);
  }
  return doc;
}

}  // namespace vt
