#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "vulntopics/rng.hpp"
#include "vulntopics/vectorize.hpp"

namespace vt {

struct LdaConfig {
  std::size_t topics = 4;
  /// Symmetric document-topic prior; defaults to 50 / topics.
  std::optional<double> alpha;
  double beta = 0.01;
  std::size_t iterations = 1000;
  std::size_t burn_in = 100;
  std::uint64_t seed = 42;
  /// Average phi/theta over post-burn-in sweeps instead of using the final
  /// counts.
  bool average_samples = false;
  /// Sweeps used to infer theta for held-out documents.
  std::size_t fold_in_iterations = 50;
  /// Recount and verify the count matrices every N sweeps (0 disables).
#ifdef NDEBUG
  std::size_t check_every = 0;
#else
  std::size_t check_every = 10;
#endif

  double resolved_alpha() const { return alpha ? *alpha : 50.0 / static_cast<double>(topics); }
  /// Throws ConfigError unless topics >= 1, alpha, beta > 0 and
  /// iterations > burn_in.
  void validate() const;
};

nlohmann::ordered_json to_json(const LdaConfig& cfg);
LdaConfig lda_config_from_json(const nlohmann::json& j);

/// A trained topic model: the final token assignments, their count
/// matrices, and the phi (topic-word) and theta (document-topic) estimates.
class LdaModel {
 public:
  const LdaConfig& config() const { return config_; }
  double alpha() const { return config_.resolved_alpha(); }
  double beta() const { return config_.beta; }
  std::size_t num_topics() const { return config_.topics; }
  std::size_t vocab_size() const { return vocab_size_; }
  std::size_t num_docs() const { return doc_ids_.size(); }
  std::size_t total_tokens() const;
  const std::string& dictionary_hash() const { return dictionary_hash_; }
  const std::vector<std::string>& doc_ids() const { return doc_ids_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  std::span<const TokenId> words(std::size_t doc) const { return words_.at(doc); }
  std::span<const std::uint32_t> assignments(std::size_t doc) const { return z_.at(doc); }

  std::uint64_t topic_word_count(std::size_t k, TokenId w) const { return n_wk_[w * num_topics() + k]; }
  std::uint64_t doc_topic_count(std::size_t d, std::size_t k) const { return n_dk_[d * num_topics() + k]; }
  std::uint64_t topic_total(std::size_t k) const { return n_k_[k]; }

  double phi(std::size_t k, TokenId w) const { return phi_[k * vocab_size_ + w]; }
  double theta(std::size_t d, std::size_t k) const { return theta_[d * num_topics() + k]; }
  std::span<const double> phi_row(std::size_t k) const { return {phi_.data() + k * vocab_size_, vocab_size_}; }
  std::span<const double> theta_row(std::size_t d) const { return {theta_.data() + d * num_topics(), num_topics()}; }

  /// Versioned JSON container. `from_json` rebuilds and checks the counts and
  /// refuses a model whose dictionary hash differs from `expected_hash`.
  nlohmann::ordered_json to_json() const;
  static LdaModel from_json(const nlohmann::json& j, const std::optional<std::string>& expected_hash = std::nullopt);
  void save(const std::filesystem::path& path) const;
  static LdaModel load(const std::filesystem::path& path,
                       const std::optional<std::string>& expected_hash = std::nullopt);

 private:
  friend class GibbsSampler;

  LdaConfig config_;
  std::size_t vocab_size_ = 0;
  std::string dictionary_hash_;
  std::vector<std::string> doc_ids_;
  std::vector<std::vector<TokenId>> words_;
  std::vector<std::vector<std::uint32_t>> z_;
  std::vector<std::uint64_t> n_dk_;  // D x K
  std::vector<std::uint64_t> n_wk_;  // V x K
  std::vector<std::uint64_t> n_k_;
  std::vector<double> phi_;    // K x V
  std::vector<double> theta_;  // D x K
  std::vector<std::string> warnings_;
};

/// Collapsed Gibbs sampler for LDA. Each token's topic is redrawn from
///   p(z = k | rest) ∝ (n_dk + alpha) (n_kw + beta) / (n_k + V beta)
/// with the token's own assignment removed from the counts; the draw is an
/// inverse-CDF lookup over the K cumulative weights.
class GibbsSampler {
 public:
  /// Throws DataError for an empty corpus or token ids >= vocab_size, and
  /// ConfigError for an invalid config.
  GibbsSampler(std::span<const BowDoc> bows, std::size_t vocab_size, LdaConfig config,
               std::string dictionary_hash = {});

  /// One pass over every token in document order.
  void sweep();
  std::size_t iteration() const { return iteration_; }

  /// Recounts n_dk, n_kw and n_k from the assignments and compares.
  bool counts_consistent() const;

  /// Model with phi/theta estimated from the current counts, or from the
  /// running average when averaging is enabled and past burn-in.
  LdaModel snapshot() const;

  const LdaModel& state() const { return state_; }

 private:
  void accumulate_average();

  LdaModel state_;
  Rng rng_;
  std::size_t iteration_ = 0;
  std::vector<double> cdf_;
  std::vector<double> phi_sum_, theta_sum_;
  std::size_t samples_ = 0;
};

using SweepObserver = std::function<void(const GibbsSampler&)>;

/// Runs `config.iterations` sweeps. Deterministic for a fixed seed. The
/// observer, when set, is called after every sweep.
LdaModel train_lda(std::span<const BowDoc> bows, std::size_t vocab_size, const LdaConfig& config,
                   const SweepObserver& observer = {}, std::string dictionary_hash = {});
LdaModel train_lda(std::span<const BowDoc> bows, const Dictionary& dict, const LdaConfig& config,
                   const SweepObserver& observer = {});

/// exp(-sum log p(w | d) / N) over held-out tokens, with each held-out
/// document's theta inferred by fold-in Gibbs sampling against the fixed
/// phi. Throws DataError for an empty set, an empty document, or ids
/// outside the vocabulary.
double perplexity(const LdaModel& model, std::span<const BowDoc> heldout);

}  // namespace vt
