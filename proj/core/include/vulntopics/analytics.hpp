#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vulntopics/codebook.hpp"
#include "vulntopics/lda.hpp"

namespace vt {

using Matrix = std::vector<std::vector<double>>;

struct TermScore {
  TokenId id = 0;
  double score = 0.0;
};

/// p(k) = n_k / N.
std::vector<double> marginal_topic_distribution(const LdaModel& model);

/// p(w) = sum_k p(k) phi_kw.
std::vector<double> term_distribution(const LdaModel& model);

/// saliency(w) = p(w) * sum_k p(k|w) ln(p(k|w) / p(k)), indexed by token id.
std::vector<double> saliency(const LdaModel& model);

/// Relevance of every term to every topic:
///   r(w, k | lambda) = lambda ln(phi_kw) + (1 - lambda) ln(phi_kw / p(w)).
/// Result is [topic][token id]. Throws std::invalid_argument for lambda
/// outside [0, 1].
Matrix relevance_scores(const LdaModel& model, double lambda);

/// Descending by score, ties by ascending id, truncated to `top_n`
/// (0 keeps everything).
std::vector<TermScore> rank_terms(std::span<const double> scores, std::size_t top_n = 0);

/// Per-topic rankings at `lambda`.
std::vector<std::vector<TermScore>> relevance(const LdaModel& model, double lambda, std::size_t top_n = 0);

/// Topic token shares in percent, rounded to one decimal.
std::vector<double> token_shares(const LdaModel& model);

/// Jensen-Shannon divergence with base-2 logarithms, in [0, 1].
double jensen_shannon(std::span<const double> p, std::span<const double> q);

/// K x K matrix of JSD between phi rows.
Matrix topic_distance_matrix(const LdaModel& model);

struct TopicProjection {
  std::vector<std::array<double, 2>> coords;  // centered on the origin
  std::vector<double> radii;                  // equal to the marginals
  std::optional<std::string> warning;
};

/// Classical multidimensional scaling of a distance matrix into 2-D:
/// double-centre the squared distances and keep the two leading
/// eigenpairs. Each axis is sign-fixed so its first non-negligible
/// coordinate is positive.
TopicProjection project_topics(const Matrix& distances, std::span<const double> marginals);

/// Maximum-weight one-to-one assignment of rows to columns (Hungarian
/// method). Returns the column for each row, or -1 for rows left over when
/// there are more rows than columns.
std::vector<int> max_weight_assignment(const Matrix& weights);

struct TopicAlignment {
  /// Label per topic; empty when the topic could not be matched.
  std::vector<std::optional<TopicLabel>> topic_labels;
  /// [topic][label] document counts (topic = argmax theta, lowest id on ties).
  std::vector<std::array<std::size_t, 4>> contingency;
  std::size_t agreement = 0;  // documents whose label matches their topic's
  std::size_t labeled_docs = 0;
  std::optional<std::string> warning;
};

TopicAlignment align_topics_to_labels(const LdaModel& model, const LabelMap& labels);

struct AnalyticsOptions {
  std::size_t top_n = 30;
  std::vector<double> lambdas{0.0, 0.6, 1.0};
};

struct RelevanceView {
  double lambda = 0.0;
  std::vector<std::vector<TermScore>> topics;
};

struct TopicAnalytics {
  std::vector<double> marginal;
  std::vector<double> token_shares;
  std::vector<TermScore> salient_terms;
  std::vector<RelevanceView> relevance;
  Matrix distances;
  TopicProjection projection;
  std::optional<TopicAlignment> alignment;
};

TopicAnalytics compute_analytics(const LdaModel& model, const AnalyticsOptions& options,
                                 const LabelMap* labels = nullptr);

}  // namespace vt
