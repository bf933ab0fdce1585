#pragma once

// Slow, direct reference implementations shared by the unit and acceptance
// tests. They deliberately avoid the library code paths they check.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "vulntopics/lda.hpp"
#include "vulntopics/textprep.hpp"

namespace vt::test {

/// Dense document-term view of a tokenized corpus.
struct DenseCorpus {
  std::vector<std::string> vocab;           // first-appearance order
  std::vector<std::vector<double>> counts;  // [doc][term]
  std::vector<std::size_t> df, cf;
};

inline DenseCorpus dense_corpus(const std::vector<TokenizedDoc>& docs) {
  DenseCorpus c;
  for (const auto& d : docs)
    for (const auto& t : d.tokens)
      if (std::find(c.vocab.begin(), c.vocab.end(), t) == c.vocab.end()) c.vocab.push_back(t);
  const std::size_t V = c.vocab.size();
  c.df.assign(V, 0);
  c.cf.assign(V, 0);
  for (const auto& d : docs) {
    std::vector<double> row(V, 0.0);
    for (const auto& t : d.tokens) row[std::find(c.vocab.begin(), c.vocab.end(), t) - c.vocab.begin()] += 1.0;
    for (std::size_t v = 0; v < V; ++v) {
      if (row[v] > 0) ++c.df[v];
      c.cf[v] += static_cast<std::size_t>(row[v]);
    }
    c.counts.push_back(std::move(row));
  }
  return c;
}

/// L2-normalized count * log2(N / df) rows.
inline std::vector<std::vector<double>> dense_tfidf(const DenseCorpus& c) {
  const double N = static_cast<double>(c.counts.size());
  std::vector<std::vector<double>> out;
  for (const auto& row : c.counts) {
    std::vector<double> w(row.size(), 0.0);
    double norm = 0.0;
    for (std::size_t v = 0; v < row.size(); ++v) {
      if (row[v] == 0.0) continue;
      w[v] = row[v] * std::log(N / static_cast<double>(c.df[v])) / std::log(2.0);
      norm += w[v] * w[v];
    }
    if (norm > 0.0)
      for (auto& x : w) x /= std::sqrt(norm);
    out.push_back(std::move(w));
  }
  return out;
}

inline std::vector<TokenizedDoc> random_token_corpus(std::mt19937_64& gen, std::size_t max_docs, std::size_t max_terms) {
  std::uniform_int_distribution<std::size_t> ndocs(1, max_docs), nterms(1, max_terms), len(0, 30);
  const std::size_t terms = nterms(gen);
  std::uniform_int_distribution<std::size_t> pick(0, terms - 1);
  std::vector<TokenizedDoc> docs(ndocs(gen));
  for (std::size_t d = 0; d < docs.size(); ++d) {
    docs[d].doc_id = "d" + std::to_string(d);
    for (std::size_t n = len(gen); n > 0; --n) docs[d].tokens.push_back("w" + std::to_string(pick(gen)));
  }
  if (std::all_of(docs.begin(), docs.end(), [](const auto& d) { return d.tokens.empty(); }))
    docs[0].tokens.push_back("w0");
  return docs;
}

/// log p(w, z) of the collapsed LDA joint (phi and theta integrated out)
/// for symmetric priors, up to terms that do not depend on z.
inline double collapsed_log_joint(const std::vector<std::vector<TokenId>>& docs, const std::vector<std::vector<int>>& z,
                                  std::size_t K, std::size_t V, double alpha, double beta) {
  std::vector<std::vector<double>> ndk(docs.size(), std::vector<double>(K, 0.0));
  std::vector<std::vector<double>> nkw(K, std::vector<double>(V, 0.0));
  std::vector<double> nk(K, 0.0);
  for (std::size_t d = 0; d < docs.size(); ++d)
    for (std::size_t i = 0; i < docs[d].size(); ++i) {
      ndk[d][z[d][i]] += 1;
      nkw[z[d][i]][docs[d][i]] += 1;
      nk[z[d][i]] += 1;
    }
  double lp = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t w = 0; w < V; ++w) lp += std::lgamma(nkw[k][w] + beta);
    lp -= std::lgamma(nk[k] + static_cast<double>(V) * beta);
  }
  for (std::size_t d = 0; d < docs.size(); ++d)
    for (std::size_t k = 0; k < K; ++k) lp += std::lgamma(ndk[d][k] + alpha);
  return lp;
}

/// Exact posterior over all K^N joint assignments, keyed by the flattened
/// assignment (document order). Only feasible for a handful of tokens.
inline std::map<std::vector<int>, double> exact_posterior(const std::vector<std::vector<TokenId>>& docs, std::size_t K,
                                                          std::size_t V, double alpha, double beta) {
  std::size_t n = 0;
  for (const auto& d : docs) n += d.size();
  std::vector<int> flat(n, 0);
  std::map<std::vector<int>, double> out;
  double total = 0.0;
  while (true) {
    std::vector<std::vector<int>> z;
    std::size_t pos = 0;
    for (const auto& d : docs) {
      z.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(pos), flat.begin() + static_cast<std::ptrdiff_t>(pos + d.size()));
      pos += d.size();
    }
    const double p = std::exp(collapsed_log_joint(docs, z, K, V, alpha, beta));
    out[flat] = p;
    total += p;
    std::size_t i = 0;
    while (i < n && ++flat[i] == static_cast<int>(K)) flat[i++] = 0;
    if (i == n) break;
  }
  for (auto& [_, p] : out) p /= total;
  return out;
}

/// Saliency written as sum_k p(k) phi_kw ln(phi_kw / p(w)), an algebraic
/// rearrangement of the p(k|w) form.
inline std::vector<double> saliency_oracle(const LdaModel& m) {
  const std::size_t K = m.num_topics(), V = m.vocab_size();
  double N = 0.0;
  for (std::size_t k = 0; k < K; ++k) N += static_cast<double>(m.topic_total(k));
  std::vector<double> pk(K), pw(V, 0.0), out(V, 0.0);
  for (std::size_t k = 0; k < K; ++k) pk[k] = static_cast<double>(m.topic_total(k)) / N;
  for (std::size_t w = 0; w < V; ++w)
    for (std::size_t k = 0; k < K; ++k) pw[w] += pk[k] * m.phi(k, static_cast<TokenId>(w));
  for (std::size_t w = 0; w < V; ++w)
    for (std::size_t k = 0; k < K; ++k) {
      const double phi = m.phi(k, static_cast<TokenId>(w));
      if (phi > 0 && pk[k] > 0) out[w] += pk[k] * phi * std::log(phi / pw[w]);
    }
  return out;
}

inline std::vector<std::vector<double>> relevance_oracle(const LdaModel& m, double lambda) {
  const std::size_t K = m.num_topics(), V = m.vocab_size();
  double N = 0.0;
  for (std::size_t k = 0; k < K; ++k) N += static_cast<double>(m.topic_total(k));
  std::vector<double> pw(V, 0.0);
  for (std::size_t w = 0; w < V; ++w)
    for (std::size_t k = 0; k < K; ++k)
      pw[w] += static_cast<double>(m.topic_total(k)) / N * m.phi(k, static_cast<TokenId>(w));
  std::vector<std::vector<double>> out(K, std::vector<double>(V));
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t w = 0; w < V; ++w) {
      const double phi = m.phi(k, static_cast<TokenId>(w));
      out[k][w] = std::log(std::pow(phi, lambda) * std::pow(phi / pw[w], 1.0 - lambda));
    }
  return out;
}

/// Model built from a small random corpus for analytics checks.
inline LdaModel small_trained_model(std::size_t K, std::size_t V, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<TokenId> word(0, static_cast<TokenId>(V - 1));
  std::vector<BowDoc> bows;
  for (int d = 0; d < 12; ++d) {
    std::map<TokenId, std::uint32_t> c;
    for (int i = 0; i < 25; ++i) ++c[word(gen)];
    BowDoc b{"d" + std::to_string(d), {}};
    for (auto [w, n] : c) b.counts.emplace_back(w, n);
    bows.push_back(std::move(b));
  }
  LdaConfig cfg;
  cfg.topics = K;
  cfg.alpha = 0.5;
  cfg.beta = 0.1;
  cfg.iterations = 60;
  cfg.burn_in = 10;
  cfg.seed = seed;
  return train_lda(bows, V, cfg);
}

}  // namespace vt::test
