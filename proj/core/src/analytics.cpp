#include "vulntopics/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

namespace vt {

std::vector<double> marginal_topic_distribution(const LdaModel& model) {
  const double total = static_cast<double>(model.total_tokens());
  std::vector<double> p(model.num_topics(), 0.0);
  for (std::size_t k = 0; k < p.size(); ++k)
    p[k] = total > 0 ? static_cast<double>(model.topic_total(k)) / total : 1.0 / static_cast<double>(p.size());
  return p;
}

std::vector<double> term_distribution(const LdaModel& model) {
  const auto pk = marginal_topic_distribution(model);
  std::vector<double> pw(model.vocab_size(), 0.0);
  for (std::size_t k = 0; k < pk.size(); ++k) {
    auto row = model.phi_row(k);
    for (std::size_t w = 0; w < pw.size(); ++w) pw[w] += pk[k] * row[w];
  }
  return pw;
}

std::vector<double> saliency(const LdaModel& model) {
  const auto pk = marginal_topic_distribution(model);
  const auto pw = term_distribution(model);
  std::vector<double> out(model.vocab_size(), 0.0);
  for (std::size_t w = 0; w < pw.size(); ++w) {
    if (pw[w] <= 0.0) continue;
    double distinctiveness = 0.0;
    for (std::size_t k = 0; k < pk.size(); ++k) {
      const double p_kw = model.phi(k, static_cast<TokenId>(w)) * pk[k] / pw[w];
      if (p_kw > 0.0 && pk[k] > 0.0) distinctiveness += p_kw * std::log(p_kw / pk[k]);
    }
    out[w] = std::max(0.0, pw[w] * distinctiveness);
  }
  return out;
}

Matrix relevance_scores(const LdaModel& model, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("relevance lambda must lie in [0, 1]");
  const auto pw = term_distribution(model);
  Matrix out(model.num_topics(), std::vector<double>(model.vocab_size()));
  for (std::size_t k = 0; k < out.size(); ++k) {
    auto row = model.phi_row(k);
    for (std::size_t w = 0; w < pw.size(); ++w) {
      const double log_phi = std::log(row[w]);
      out[k][w] = lambda * log_phi + (1.0 - lambda) * (log_phi - std::log(pw[w]));
    }
  }
  return out;
}

std::vector<TermScore> rank_terms(std::span<const double> scores, std::size_t top_n) {
  std::vector<TermScore> ranked(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) ranked[i] = {static_cast<TokenId>(i), scores[i]};
  auto cmp = [](const TermScore& a, const TermScore& b) { return a.score != b.score ? a.score > b.score : a.id < b.id; };
  if (top_n > 0 && top_n < ranked.size()) {
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(top_n), ranked.end(), cmp);
    ranked.resize(top_n);
  } else {
    std::sort(ranked.begin(), ranked.end(), cmp);
  }
  return ranked;
}

std::vector<std::vector<TermScore>> relevance(const LdaModel& model, double lambda, std::size_t top_n) {
  auto scores = relevance_scores(model, lambda);
  std::vector<std::vector<TermScore>> out;
  out.reserve(scores.size());
  for (const auto& row : scores) out.push_back(rank_terms(row, top_n));
  return out;
}

std::vector<double> token_shares(const LdaModel& model) {
  auto p = marginal_topic_distribution(model);
  for (auto& v : p) v = std::round(v * 1000.0) / 10.0;
  return p;
}

double jensen_shannon(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("jensen_shannon: distributions differ in length");
  double js = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0.0) js += 0.5 * p[i] * std::log2(p[i] / m);
    if (q[i] > 0.0) js += 0.5 * q[i] * std::log2(q[i] / m);
  }
  return std::clamp(js, 0.0, 1.0);
}

Matrix topic_distance_matrix(const LdaModel& model) {
  const std::size_t K = model.num_topics();
  Matrix d(K, std::vector<double>(K, 0.0));
  for (std::size_t a = 0; a < K; ++a)
    for (std::size_t b = a + 1; b < K; ++b) d[a][b] = d[b][a] = jensen_shannon(model.phi_row(a), model.phi_row(b));
  return d;
}

TopicProjection project_topics(const Matrix& distances, std::span<const double> marginals) {
  const std::size_t K = distances.size();
  TopicProjection out;
  out.radii.assign(marginals.begin(), marginals.end());
  if (K < 2) {
    out.coords.assign(K, {0.0, 0.0});
    out.warning = "fewer than two topics; projection degenerates to a point";
    return out;
  }
  Eigen::MatrixXd sq(K, K);
  for (std::size_t i = 0; i < K; ++i) {
    if (distances[i].size() != K) throw std::invalid_argument("project_topics: distance matrix is not square");
    for (std::size_t j = 0; j < K; ++j) sq(i, j) = distances[i][j] * distances[i][j];
  }
  const Eigen::MatrixXd centering =
      Eigen::MatrixXd::Identity(K, K) - Eigen::MatrixXd::Constant(K, K, 1.0 / static_cast<double>(K));
  const Eigen::MatrixXd gram = -0.5 * centering * sq * centering;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  const auto& values = solver.eigenvalues();  // ascending
  const auto& vectors = solver.eigenvectors();
  out.coords.assign(K, {0.0, 0.0});
  for (int axis = 0; axis < 2; ++axis) {
    const Eigen::Index col = static_cast<Eigen::Index>(K) - 1 - axis;
    const double lambda = std::max(0.0, values(col));
    Eigen::VectorXd v = vectors.col(col);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (std::abs(v(i)) > 1e-9) {
        if (v(i) < 0) v = -v;
        break;
      }
    }
    const double scale = std::sqrt(lambda);
    for (std::size_t i = 0; i < K; ++i) out.coords[i][axis] = v(static_cast<Eigen::Index>(i)) * scale;
  }
  // Remove round-off so the centroid is exactly representable as zero.
  for (int axis = 0; axis < 2; ++axis) {
    double mean = 0.0;
    for (const auto& c : out.coords) mean += c[axis];
    mean /= static_cast<double>(K);
    for (auto& c : out.coords) c[axis] -= mean;
  }
  return out;
}

std::vector<int> max_weight_assignment(const Matrix& weights) {
  const std::size_t rows = weights.size();
  const std::size_t cols = rows == 0 ? 0 : weights.front().size();
  std::vector<int> result(rows, -1);
  if (rows == 0 || cols == 0) return result;
  const std::size_t n = std::max(rows, cols);
  double max_w = 0.0;
  for (const auto& r : weights) {
    if (r.size() != cols) throw std::invalid_argument("max_weight_assignment: ragged weight matrix");
    for (double w : r) max_w = std::max(max_w, w);
  }
  // Minimise (max_w - w) over a zero-padded square matrix.
  auto cost = [&](std::size_t i, std::size_t j) {
    return (i < rows && j < cols) ? max_w - weights[i][j] : max_w;
  };
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<bool> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  for (std::size_t j = 1; j <= n; ++j) {
    const std::size_t i = p[j];
    if (i >= 1 && i <= rows && j <= cols) result[i - 1] = static_cast<int>(j - 1);
  }
  return result;
}

TopicAlignment align_topics_to_labels(const LdaModel& model, const LabelMap& labels) {
  const std::size_t K = model.num_topics();
  TopicAlignment out;
  out.contingency.assign(K, {0, 0, 0, 0});
  for (std::size_t d = 0; d < model.num_docs(); ++d) {
    auto it = labels.find(model.doc_ids()[d]);
    if (it == labels.end()) continue;
    auto row = model.theta_row(d);
    const auto k = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    ++out.contingency[k][static_cast<std::size_t>(it->second)];
    ++out.labeled_docs;
  }
  Matrix weights(K, std::vector<double>(4, 0.0));
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t l = 0; l < 4; ++l) weights[k][l] = static_cast<double>(out.contingency[k][l]);
  const auto match = max_weight_assignment(weights);
  out.topic_labels.assign(K, std::nullopt);
  for (std::size_t k = 0; k < K; ++k) {
    if (match[k] < 0) continue;
    out.topic_labels[k] = kAllLabels[match[k]];
    out.agreement += out.contingency[k][static_cast<std::size_t>(match[k])];
  }
  if (K != 4)
    out.warning = "model has " + std::to_string(K) + " topics but the codebook has 4 labels; mapping is partial";
  return out;
}

TopicAnalytics compute_analytics(const LdaModel& model, const AnalyticsOptions& options, const LabelMap* labels) {
  TopicAnalytics a;
  a.marginal = marginal_topic_distribution(model);
  a.token_shares = token_shares(model);
  a.salient_terms = rank_terms(saliency(model), options.top_n);
  for (double lambda : options.lambdas) a.relevance.push_back({lambda, relevance(model, lambda, options.top_n)});
  a.distances = topic_distance_matrix(model);
  a.projection = project_topics(a.distances, a.marginal);
  if (labels) a.alignment = align_topics_to_labels(model, *labels);
  return a;
}

}  // namespace vt
