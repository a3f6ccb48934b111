#pragma once

#include "aas/types.hpp"

#include <map>
#include <string>
#include <vector>

namespace aas
{

/// Gallery and query sets, both carrying identities. A query is "known" when
/// its identity appears in the gallery.
class RetrievalProblem
{
public:
  RetrievalProblem(EmbeddingSet gallery, EmbeddingSet query);

  const EmbeddingSet& gallery() const { return gallery_; }
  const EmbeddingSet& query() const { return query_; }
  const std::vector<bool>& known() const { return known_; }

  /// Cosine similarity of query q to every gallery item.
  const RowMatrixD& similarities() const { return sim_; }

private:
  EmbeddingSet gallery_;
  EmbeddingSet query_;
  std::vector<bool> known_;
  RowMatrixD sim_;
};

/// Per query, gallery indices by descending similarity (ties: lower index).
std::vector<std::vector<std::size_t>> rank_gallery(const RetrievalProblem& problem);

using Rankings = std::vector<std::vector<std::size_t>>;

double mean_average_precision(const RetrievalProblem& problem, const Rankings& rankings);
double mean_inp(const RetrievalProblem& problem, const Rankings& rankings);
double top_k_accuracy(const RetrievalProblem& problem, const Rankings& rankings, std::size_t k);
double baks(const RetrievalProblem& problem, const Rankings& rankings);

/// Known-vs-unknown AUC with the max gallery similarity as score.
double open_set_auc(const RetrievalProblem& problem);

/// Rank-statistic AUC: P(pos > neg) + 0.5 P(pos == neg).
double auc_from_scores(const std::vector<double>& positive, const std::vector<double>& negative);

double adjusted_rand_index(const std::vector<int>& pred, const std::vector<int>& truth);
double adjusted_rand_index(const Partition& pred, const std::vector<std::string>& identities);

/// Integer ids for string labels in first-occurrence order.
std::vector<int> encode_labels(const std::vector<std::string>& labels);

struct MetricReport
{
  double map = 0.0;
  double minp = 0.0;
  double baks = 0.0;
  double auc_roc = 0.0;
  std::map<std::size_t, double> top_k;
  bool auc_defined = false;
};

/// All metrics; auc_roc is reported only when both known and unknown queries exist.
MetricReport evaluate(const RetrievalProblem& problem);

/// JSON with keys map, minp, baks, auc_roc, top1, top3, top5, top10.
std::string to_json(const MetricReport& report);

/// Sum with pairwise reduction, fixed order.
double pairwise_sum(const std::vector<double>& values);

} // namespace aas
