#include "vulntopics/lda.hpp"

#include <cmath>
#include <numeric>

#include "vulntopics/errors.hpp"
#include "vulntopics/util.hpp"

namespace vt {

namespace {

constexpr int kModelFormatVersion = 1;
constexpr std::string_view kModelFormat = "vulntopics-lda";

void fill_estimates(const LdaModel& m, std::vector<double>& phi, std::vector<double>& theta,
                    std::span<const std::uint64_t> n_dk, std::span<const std::uint64_t> n_wk,
                    std::span<const std::uint64_t> n_k, std::size_t K, std::size_t V, std::size_t D,
                    const std::vector<std::vector<TokenId>>& words) {
  const double alpha = m.alpha();
  const double beta = m.beta();
  phi.assign(K * V, 0.0);
  theta.assign(D * K, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    const double denom = static_cast<double>(n_k[k]) + static_cast<double>(V) * beta;
    for (std::size_t w = 0; w < V; ++w) phi[k * V + w] = (static_cast<double>(n_wk[w * K + k]) + beta) / denom;
  }
  for (std::size_t d = 0; d < D; ++d) {
    const double denom = static_cast<double>(words[d].size()) + static_cast<double>(K) * alpha;
    for (std::size_t k = 0; k < K; ++k) theta[d * K + k] = (static_cast<double>(n_dk[d * K + k]) + alpha) / denom;
  }
}

}  // namespace

void LdaConfig::validate() const {
  if (topics < 1) throw ConfigError("must be at least 1", "lda.topics");
  if (!(resolved_alpha() > 0.0) || !std::isfinite(resolved_alpha())) throw ConfigError("must be > 0", "lda.alpha");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("must be > 0", "lda.beta");
  if (iterations <= burn_in) throw ConfigError("must exceed lda.burn_in", "lda.iterations");
}

nlohmann::ordered_json to_json(const LdaConfig& cfg) {
  return {{"topics", cfg.topics},
          {"alpha", cfg.resolved_alpha()},
          {"beta", cfg.beta},
          {"iterations", cfg.iterations},
          {"burn_in", cfg.burn_in},
          {"seed", cfg.seed},
          {"average_samples", cfg.average_samples},
          {"fold_in_iterations", cfg.fold_in_iterations}};
}

LdaConfig lda_config_from_json(const nlohmann::json& j) {
  LdaConfig cfg;
  cfg.topics = j.at("topics").get<std::size_t>();
  cfg.alpha = j.at("alpha").get<double>();
  cfg.beta = j.at("beta").get<double>();
  cfg.iterations = j.at("iterations").get<std::size_t>();
  cfg.burn_in = j.at("burn_in").get<std::size_t>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.average_samples = j.at("average_samples").get<bool>();
  cfg.fold_in_iterations = j.at("fold_in_iterations").get<std::size_t>();
  return cfg;
}

std::size_t LdaModel::total_tokens() const {
  return std::accumulate(n_k_.begin(), n_k_.end(), std::uint64_t{0});
}

nlohmann::ordered_json LdaModel::to_json() const {
  using oj = nlohmann::ordered_json;
  const std::size_t K = num_topics();
  oj docs = oj::array();
  for (std::size_t d = 0; d < num_docs(); ++d)
    docs.push_back(oj{{"id", doc_ids_[d]}, {"words", words_[d]}, {"z", z_[d]}});
  oj topic_word = oj::array();
  for (std::size_t k = 0; k < K; ++k) {
    std::vector<std::uint64_t> row(vocab_size_);
    for (std::size_t w = 0; w < vocab_size_; ++w) row[w] = n_wk_[w * K + k];
    topic_word.push_back(row);
  }
  oj doc_topic = oj::array();
  oj phi = oj::array();
  oj theta = oj::array();
  for (std::size_t d = 0; d < num_docs(); ++d) {
    doc_topic.push_back(std::vector<std::uint64_t>(n_dk_.begin() + d * K, n_dk_.begin() + (d + 1) * K));
    theta.push_back(std::vector<double>(theta_.begin() + d * K, theta_.begin() + (d + 1) * K));
  }
  for (std::size_t k = 0; k < K; ++k)
    phi.push_back(std::vector<double>(phi_.begin() + k * vocab_size_, phi_.begin() + (k + 1) * vocab_size_));
  oj j;
  j["format"] = kModelFormat;
  j["version"] = kModelFormatVersion;
  j["config"] = vt::to_json(config_);
  j["dictionary_hash"] = dictionary_hash_;
  j["vocab_size"] = vocab_size_;
  j["warnings"] = warnings_;
  j["docs"] = std::move(docs);
  j["topic_word_counts"] = std::move(topic_word);
  j["doc_topic_counts"] = std::move(doc_topic);
  j["topic_totals"] = n_k_;
  j["phi"] = std::move(phi);
  j["theta"] = std::move(theta);
  return j;
}

LdaModel LdaModel::from_json(const nlohmann::json& j, const std::optional<std::string>& expected_hash) {
  LdaModel m;
  try {
    if (j.at("format").get<std::string>() != kModelFormat) throw DataError("not an LDA model file");
    if (j.at("version").get<int>() != kModelFormatVersion)
      throw DataError("unsupported LDA model version " + std::to_string(j.at("version").get<int>()));
    m.config_ = lda_config_from_json(j.at("config"));
    m.config_.validate();
    m.dictionary_hash_ = j.at("dictionary_hash").get<std::string>();
    if (expected_hash && *expected_hash != m.dictionary_hash_)
      throw DataError("model was trained against dictionary " + m.dictionary_hash_ + ", not " + *expected_hash);
    m.vocab_size_ = j.at("vocab_size").get<std::size_t>();
    m.warnings_ = j.at("warnings").get<std::vector<std::string>>();
    const std::size_t K = m.config_.topics;
    const std::size_t V = m.vocab_size_;
    for (const auto& doc : j.at("docs")) {
      m.doc_ids_.push_back(doc.at("id").get<std::string>());
      m.words_.push_back(doc.at("words").get<std::vector<TokenId>>());
      m.z_.push_back(doc.at("z").get<std::vector<std::uint32_t>>());
      if (m.words_.back().size() != m.z_.back().size()) throw DataError("model document has mismatched words/z");
    }
    const std::size_t D = m.doc_ids_.size();
    m.n_dk_.assign(D * K, 0);
    m.n_wk_.assign(V * K, 0);
    m.n_k_.assign(K, 0);
    for (std::size_t d = 0; d < D; ++d) {
      for (std::size_t i = 0; i < m.words_[d].size(); ++i) {
        const auto w = m.words_[d][i];
        const auto k = m.z_[d][i];
        if (w >= V || k >= K) throw DataError("model assignment out of range");
        ++m.n_dk_[d * K + k];
        ++m.n_wk_[w * K + k];
        ++m.n_k_[k];
      }
    }
    const auto tw = j.at("topic_word_counts").get<std::vector<std::vector<std::uint64_t>>>();
    const auto dt = j.at("doc_topic_counts").get<std::vector<std::vector<std::uint64_t>>>();
    const auto tt = j.at("topic_totals").get<std::vector<std::uint64_t>>();
    bool ok = tw.size() == K && dt.size() == D && tt == m.n_k_;
    for (std::size_t k = 0; ok && k < K; ++k) {
      ok = tw[k].size() == V;
      for (std::size_t w = 0; ok && w < V; ++w) ok = tw[k][w] == m.n_wk_[w * K + k];
    }
    for (std::size_t d = 0; ok && d < D; ++d) {
      ok = dt[d].size() == K;
      for (std::size_t k = 0; ok && k < K; ++k) ok = dt[d][k] == m.n_dk_[d * K + k];
    }
    if (!ok) throw DataError("model count matrices disagree with the stored assignments");
    const auto phi = j.at("phi").get<std::vector<std::vector<double>>>();
    const auto theta = j.at("theta").get<std::vector<std::vector<double>>>();
    if (phi.size() != K || theta.size() != D) throw DataError("model phi/theta have the wrong shape");
    for (const auto& row : phi) {
      if (row.size() != V) throw DataError("model phi has the wrong shape");
      m.phi_.insert(m.phi_.end(), row.begin(), row.end());
    }
    for (const auto& row : theta) {
      if (row.size() != K) throw DataError("model theta has the wrong shape");
      m.theta_.insert(m.theta_.end(), row.begin(), row.end());
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed LDA model: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("malformed LDA model config: ") + e.what());
  }
  return m;
}

void LdaModel::save(const std::filesystem::path& path) const { write_file_atomic(path, to_json().dump() + "\n"); }

LdaModel LdaModel::load(const std::filesystem::path& path, const std::optional<std::string>& expected_hash) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("malformed LDA model " + path.string() + ": " + e.what());
  }
  return from_json(j, expected_hash);
}

// --- sampler ----------------------------------------------------------------

GibbsSampler::GibbsSampler(std::span<const BowDoc> bows, std::size_t vocab_size, LdaConfig config,
                           std::string dictionary_hash)
    : rng_(config.seed) {
  config.validate();
  if (bows.empty()) throw DataError("cannot train LDA on an empty corpus");
  if (vocab_size == 0) throw DataError("cannot train LDA with an empty vocabulary");
  auto& m = state_;
  m.config_ = config;
  m.config_.alpha = config.resolved_alpha();
  m.vocab_size_ = vocab_size;
  m.dictionary_hash_ = std::move(dictionary_hash);
  const std::size_t K = config.topics;
  const std::size_t D = bows.size();
  std::size_t total = 0;
  for (const auto& b : bows) {
    m.doc_ids_.push_back(b.doc_id);
    auto& words = m.words_.emplace_back();
    for (const auto& [id, count] : b.counts) {
      if (id >= vocab_size) throw DataError("token id " + std::to_string(id) + " outside the vocabulary");
      words.insert(words.end(), count, id);
    }
    total += words.size();
  }
  if (total == 0) throw DataError("cannot train LDA on an empty corpus (no tokens)");
  if (K > total)
    m.warnings_.push_back("topic count " + std::to_string(K) + " exceeds the " + std::to_string(total) +
                          " corpus tokens");

  m.n_dk_.assign(D * K, 0);
  m.n_wk_.assign(vocab_size * K, 0);
  m.n_k_.assign(K, 0);
  for (std::size_t d = 0; d < D; ++d) {
    auto& z = m.z_.emplace_back(m.words_[d].size());
    for (std::size_t i = 0; i < z.size(); ++i) {
      const auto k = static_cast<std::uint32_t>(rng_.index(K));
      z[i] = k;
      ++m.n_dk_[d * K + k];
      ++m.n_wk_[m.words_[d][i] * K + k];
      ++m.n_k_[k];
    }
  }
  cdf_.resize(K);
}

void GibbsSampler::sweep() {
  auto& m = state_;
  const std::size_t K = m.num_topics();
  const double alpha = m.alpha();
  const double beta = m.beta();
  const double vbeta = static_cast<double>(m.vocab_size_) * beta;
  for (std::size_t d = 0; d < m.doc_ids_.size(); ++d) {
    std::uint64_t* ndk = m.n_dk_.data() + d * K;
    auto& z = m.z_[d];
    const auto& words = m.words_[d];
    for (std::size_t i = 0; i < words.size(); ++i) {
      std::uint64_t* nwk = m.n_wk_.data() + words[i] * K;
      const std::uint32_t old = z[i];
      --ndk[old];
      --nwk[old];
      --m.n_k_[old];
      double acc = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        acc += (static_cast<double>(ndk[k]) + alpha) * (static_cast<double>(nwk[k]) + beta) /
               (static_cast<double>(m.n_k_[k]) + vbeta);
        cdf_[k] = acc;
      }
      const double u = rng_.uniform() * acc;
      std::size_t k = 0;
      while (k + 1 < K && !(u < cdf_[k])) ++k;
      z[i] = static_cast<std::uint32_t>(k);
      ++ndk[k];
      ++nwk[k];
      ++m.n_k_[k];
    }
  }
  ++iteration_;
  if (m.config_.average_samples && iteration_ > m.config_.burn_in) accumulate_average();
}

void GibbsSampler::accumulate_average() {
  const auto& m = state_;
  std::vector<double> phi, theta;
  fill_estimates(m, phi, theta, m.n_dk_, m.n_wk_, m.n_k_, m.num_topics(), m.vocab_size_,
                 m.num_docs(), m.words_);
  if (samples_ == 0) {
    phi_sum_ = std::move(phi);
    theta_sum_ = std::move(theta);
  } else {
    for (std::size_t i = 0; i < phi.size(); ++i) phi_sum_[i] += phi[i];
    for (std::size_t i = 0; i < theta.size(); ++i) theta_sum_[i] += theta[i];
  }
  ++samples_;
}

bool GibbsSampler::counts_consistent() const {
  const auto& m = state_;
  const std::size_t K = m.num_topics();
  std::vector<std::uint64_t> n_dk(m.n_dk_.size(), 0), n_wk(m.n_wk_.size(), 0), n_k(K, 0);
  for (std::size_t d = 0; d < m.num_docs(); ++d) {
    for (std::size_t i = 0; i < m.words_[d].size(); ++i) {
      const auto k = m.z_[d][i];
      if (k >= K) return false;
      ++n_dk[d * K + k];
      ++n_wk[m.words_[d][i] * K + k];
      ++n_k[k];
    }
  }
  return n_dk == m.n_dk_ && n_wk == m.n_wk_ && n_k == m.n_k_;
}

LdaModel GibbsSampler::snapshot() const {
  LdaModel m = state_;
  if (samples_ > 0) {
    m.phi_ = phi_sum_;
    m.theta_ = theta_sum_;
    for (auto& v : m.phi_) v /= static_cast<double>(samples_);
    for (auto& v : m.theta_) v /= static_cast<double>(samples_);
  } else {
    fill_estimates(m, m.phi_, m.theta_, m.n_dk_, m.n_wk_, m.n_k_, m.num_topics(), m.vocab_size_, m.num_docs(),
                   m.words_);
  }
  return m;
}

LdaModel train_lda(std::span<const BowDoc> bows, std::size_t vocab_size, const LdaConfig& config,
                   const SweepObserver& observer, std::string dictionary_hash) {
  GibbsSampler sampler(bows, vocab_size, config, std::move(dictionary_hash));
  for (std::size_t it = 0; it < config.iterations; ++it) {
    sampler.sweep();
    if (config.check_every > 0 && sampler.iteration() % config.check_every == 0 && !sampler.counts_consistent())
      throw std::logic_error("LDA count matrices diverged from assignments at sweep " +
                             std::to_string(sampler.iteration()));
    if (observer) observer(sampler);
  }
  return sampler.snapshot();
}

LdaModel train_lda(std::span<const BowDoc> bows, const Dictionary& dict, const LdaConfig& config,
                   const SweepObserver& observer) {
  return train_lda(bows, dict.size(), config, observer, dict.hash());
}

double perplexity(const LdaModel& model, std::span<const BowDoc> heldout) {
  if (heldout.empty()) throw DataError("perplexity needs at least one held-out document");
  const std::size_t K = model.num_topics();
  const std::size_t V = model.vocab_size();
  const double alpha = model.alpha();
  double log_lik = 0.0;
  std::size_t n_total = 0;
  std::vector<double> cdf(K), theta(K);
  for (std::size_t d = 0; d < heldout.size(); ++d) {
    std::vector<TokenId> words;
    for (const auto& [id, count] : heldout[d].counts) {
      if (id >= V) throw DataError("held-out token id " + std::to_string(id) + " outside the vocabulary");
      words.insert(words.end(), count, id);
    }
    if (words.empty()) throw DataError("held-out document \"" + heldout[d].doc_id + "\" has no tokens");
    Rng rng(mix_seed(model.config().seed, d));
    std::vector<std::uint32_t> z(words.size());
    std::vector<std::uint64_t> ndk(K, 0);
    for (auto& k : z) {
      k = static_cast<std::uint32_t>(rng.index(K));
      ++ndk[k];
    }
    for (std::size_t it = 0; it < model.config().fold_in_iterations; ++it) {
      for (std::size_t i = 0; i < words.size(); ++i) {
        --ndk[z[i]];
        double acc = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
          acc += (static_cast<double>(ndk[k]) + alpha) * model.phi(k, words[i]);
          cdf[k] = acc;
        }
        const double u = rng.uniform() * acc;
        std::size_t k = 0;
        while (k + 1 < K && !(u < cdf[k])) ++k;
        z[i] = static_cast<std::uint32_t>(k);
        ++ndk[k];
      }
    }
    const double denom = static_cast<double>(words.size()) + static_cast<double>(K) * alpha;
    for (std::size_t k = 0; k < K; ++k) theta[k] = (static_cast<double>(ndk[k]) + alpha) / denom;
    for (auto w : words) {
      double p = 0.0;
      for (std::size_t k = 0; k < K; ++k) p += theta[k] * model.phi(k, w);
      log_lik += std::log(p);
    }
    n_total += words.size();
  }
  return std::exp(-log_lik / static_cast<double>(n_total));
}

}  // namespace vt
