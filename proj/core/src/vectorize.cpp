#include "vulntopics/vectorize.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "vulntopics/errors.hpp"
#include "vulntopics/util.hpp"

namespace vt {

namespace {

template <typename T>
bool parse_number(std::string_view s, T& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

std::optional<TokenId> Dictionary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId Dictionary::add(std::string token, std::size_t df, std::size_t cf) {
  auto id = static_cast<TokenId>(tokens_.size());
  if (!index_.emplace(token, id).second) throw DataError("duplicate dictionary token \"" + token + "\"");
  tokens_.push_back(std::move(token));
  df_.push_back(df);
  cf_.push_back(cf);
  return id;
}

std::string Dictionary::hash() const {
  Fnv1a64 h;
  for (const auto& t : tokens_) {
    h.update(t);
    h.update(std::string_view("\0", 1));
  }
  return h.hex();
}

std::string Dictionary::to_tsv() const {
  std::ostringstream out;
  out << "# num_docs=" << num_docs_ << '\n';
  for (std::size_t i = 0; i < tokens_.size(); ++i) out << i << '\t' << tokens_[i] << '\t' << df_[i] << '\t' << cf_[i] << '\n';
  return out.str();
}

Dictionary Dictionary::from_tsv(std::string_view tsv, std::string_view source) {
  Dictionary d;
  bool have_header = false;
  std::size_t line_no = 0;
  for (auto line : split(tsv, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    if (line.front() == '#') {
      constexpr std::string_view key = "# num_docs=";
      std::size_t n = 0;
      if (line.substr(0, key.size()) != key || !parse_number(line.substr(key.size()), n))
        throw DataError(where + ": expected \"# num_docs=N\"");
      d.num_docs_ = n;
      have_header = true;
      continue;
    }
    auto cols = split(line, '\t');
    std::size_t id = 0, df = 0, cf = 0;
    if (cols.size() != 4 || !parse_number(cols[0], id) || cols[1].empty() || !parse_number(cols[2], df) ||
        !parse_number(cols[3], cf))
      throw DataError(where + ": expected \"id<TAB>token<TAB>df<TAB>cf\"");
    if (id != d.size()) throw DataError(where + ": ids must be dense and ascending");
    if (df > cf) throw DataError(where + ": df exceeds cf");
    d.add(std::string(cols[1]), df, cf);
  }
  if (!have_header) throw DataError(std::string(source) + ": missing \"# num_docs=N\" header");
  for (auto df : d.df_)
    if (df > d.num_docs_) throw DataError(std::string(source) + ": df exceeds num_docs");
  return d;
}

Dictionary build_dictionary(std::span<const TokenizedDoc> docs) {
  if (docs.empty()) throw DataError("cannot build a dictionary from zero documents");
  std::vector<std::string> order;
  std::unordered_map<std::string, std::pair<std::size_t, std::size_t>> freq;  // df, cf
  std::unordered_map<std::string, std::size_t> last_doc;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (const auto& tok : docs[d].tokens) {
      auto [it, inserted] = freq.try_emplace(tok, 0, 0);
      if (inserted) order.push_back(tok);
      ++it->second.second;
      auto [ld, fresh] = last_doc.try_emplace(tok, d);
      if (fresh || ld->second != d) {
        ++it->second.first;
        ld->second = d;
      }
    }
  }
  if (order.empty()) throw DataError("cannot build a dictionary: every document is empty");
  Dictionary dict;
  dict.set_num_docs(docs.size());
  for (auto& tok : order) {
    const auto [df, cf] = freq.at(tok);
    dict.add(std::move(tok), df, cf);
  }
  return dict;
}

Dictionary filter_extremes(const Dictionary& dict, std::size_t no_below, double no_above) {
  if (!(no_above >= 0.0 && no_above <= 1.0)) throw DataError("no_above must lie in [0, 1]");
  Dictionary out;
  out.set_num_docs(dict.num_docs());
  const double n = static_cast<double>(dict.num_docs());
  for (TokenId id = 0; id < dict.size(); ++id) {
    const auto df = dict.df(id);
    if (df < no_below) continue;
    if (n > 0 && static_cast<double>(df) / n > no_above) continue;
    out.add(dict.token(id), df, dict.cf(id));
  }
  if (out.size() == 0) throw DataError("dictionary filter removed the entire vocabulary");
  return out;
}

std::size_t BowDoc::total() const {
  std::size_t n = 0;
  for (const auto& [_, c] : counts) n += c;
  return n;
}

BowDoc doc2bow(const TokenizedDoc& doc, const Dictionary& dict) {
  std::map<TokenId, std::uint32_t> counts;
  for (const auto& tok : doc.tokens)
    if (auto id = dict.id(tok)) ++counts[*id];
  BowDoc bow{doc.doc_id, {}};
  bow.counts.assign(counts.begin(), counts.end());
  return bow;
}

std::vector<TfidfDoc> tfidf_transform(std::span<const BowDoc> bows, const Dictionary& dict) {
  std::vector<TfidfDoc> out;
  out.reserve(bows.size());
  const double n = static_cast<double>(dict.num_docs());
  for (const auto& bow : bows) {
    TfidfDoc doc{bow.doc_id, {}};
    double norm2 = 0.0;
    for (const auto& [id, count] : bow.counts) {
      if (id >= dict.size()) throw DataError("BoW token id " + std::to_string(id) + " outside the dictionary");
      const auto df = dict.df(id);
      if (df == 0) continue;
      const double idf = std::log2(n / static_cast<double>(df));
      const double w = static_cast<double>(count) * idf;
      if (w <= 0.0) continue;
      doc.weights.emplace_back(id, w);
      norm2 += w * w;
    }
    if (norm2 > 0.0) {
      const double norm = std::sqrt(norm2);
      for (auto& [_, w] : doc.weights) w /= norm;
    }
    out.push_back(std::move(doc));
  }
  return out;
}

std::string bow_to_text(std::span<const BowDoc> bows) {
  std::ostringstream out;
  for (const auto& b : bows) {
    out << b.doc_id;
    for (const auto& [id, c] : b.counts) out << ' ' << id << ':' << c;
    out << '\n';
  }
  return out.str();
}

std::vector<BowDoc> bow_from_text(std::string_view text, std::string_view source) {
  std::vector<BowDoc> out;
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    auto parts = split(line, ' ');
    BowDoc b{std::string(parts[0]), {}};
    if (b.doc_id.empty()) throw DataError(where + ": empty doc id");
    for (std::size_t i = 1; i < parts.size(); ++i) {
      auto colon = parts[i].find(':');
      TokenId id = 0;
      std::uint32_t c = 0;
      if (colon == std::string_view::npos || !parse_number(parts[i].substr(0, colon), id) ||
          !parse_number(parts[i].substr(colon + 1), c) || c == 0)
        throw DataError(where + ": expected id:count pairs");
      if (!b.counts.empty() && b.counts.back().first >= id) throw DataError(where + ": ids must be increasing");
      b.counts.emplace_back(id, c);
    }
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace vt
