#include "aas/evaluation.hpp"

#include "aas/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

namespace aas
{

namespace
{

RowMatrixD normalised_rows(const EmbeddingSet& set)
{
  RowMatrixD m = set.vectors().cast<double>();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
  {
    const double norm = m.row(i).norm();
    if (norm == 0.0)
    {
      throw ZeroVectorError("sample '" + set.ids()[static_cast<std::size_t>(i)] + "' has a zero feature vector");
    }
    m.row(i) /= norm;
  }
  return m;
}

double pairwise_sum_range(const double* v, std::size_t n)
{
  if (n <= 8)
  {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum_range(v, half) + pairwise_sum_range(v + half, n - half);
}

double mean_of(const std::vector<double>& v)
{
  return pairwise_sum(v) / static_cast<double>(v.size());
}

std::vector<std::size_t> known_queries(const RetrievalProblem& problem)
{
  std::vector<std::size_t> out;
  for (std::size_t q = 0; q < problem.known().size(); ++q)
  {
    if (problem.known()[q]) out.push_back(q);
  }
  if (out.empty())
  {
    throw NotApplicable("no known queries (every query identity is absent from the gallery)");
  }
  return out;
}

// 1-based ranks of the gallery items sharing the query's identity.
std::vector<std::size_t> positive_ranks(const RetrievalProblem& problem, const Rankings& rankings, std::size_t q)
{
  const auto& qid = (*problem.query().identities())[q];
  const auto& gid = *problem.gallery().identities();
  std::vector<std::size_t> ranks;
  const auto& order = rankings.at(q);
  for (std::size_t r = 0; r < order.size(); ++r)
  {
    if (gid[order[r]] == qid) ranks.push_back(r + 1);
  }
  if (ranks.empty())
  {
    throw NoPositives("known query '" + problem.query().ids()[q] + "' has no gallery positive");
  }
  return ranks;
}

double comb2(double x) { return x * (x - 1.0) / 2.0; }

} // namespace

double pairwise_sum(const std::vector<double>& values)
{
  return pairwise_sum_range(values.data(), values.size());
}

RetrievalProblem::RetrievalProblem(EmbeddingSet gallery, EmbeddingSet query)
    : gallery_(std::move(gallery)), query_(std::move(query))
{
  if (!gallery_.has_identities() || !query_.has_identities())
  {
    throw MissingIdentities("gallery and query sets both need identities");
  }
  if (gallery_.dim() != query_.dim())
  {
    throw ValidationError("gallery and query dimensions differ");
  }
  std::set<std::string> gallery_ids(gallery_.identities()->begin(), gallery_.identities()->end());
  known_.reserve(query_.size());
  for (const auto& id : *query_.identities()) known_.push_back(gallery_ids.count(id) != 0);
  sim_ = normalised_rows(query_) * normalised_rows(gallery_).transpose();
}

std::vector<std::vector<std::size_t>> rank_gallery(const RetrievalProblem& problem)
{
  const auto& sim = problem.similarities();
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(sim.rows()));
  for (Eigen::Index q = 0; q < sim.rows(); ++q)
  {
    auto& order = out[static_cast<std::size_t>(q)];
    order.resize(static_cast<std::size_t>(sim.cols()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
      return sim(q, static_cast<Eigen::Index>(l)) > sim(q, static_cast<Eigen::Index>(r));
    });
  }
  return out;
}

double mean_average_precision(const RetrievalProblem& problem, const Rankings& rankings)
{
  std::vector<double> aps;
  for (auto q : known_queries(problem))
  {
    const auto ranks = positive_ranks(problem, rankings, q);
    double ap = 0.0;
    for (std::size_t h = 0; h < ranks.size(); ++h)
    {
      ap += static_cast<double>(h + 1) / static_cast<double>(ranks[h]);
    }
    aps.push_back(ap / static_cast<double>(ranks.size()));
  }
  return mean_of(aps);
}

double mean_inp(const RetrievalProblem& problem, const Rankings& rankings)
{
  std::vector<double> inps;
  for (auto q : known_queries(problem))
  {
    const auto ranks = positive_ranks(problem, rankings, q);
    inps.push_back(static_cast<double>(ranks.size()) / static_cast<double>(ranks.back()));
  }
  return mean_of(inps);
}

double top_k_accuracy(const RetrievalProblem& problem, const Rankings& rankings, std::size_t k)
{
  if (k == 0)
  {
    throw ValidationError("top_k_accuracy: k must be >= 1");
  }
  std::vector<double> hits;
  for (auto q : known_queries(problem))
  {
    hits.push_back(positive_ranks(problem, rankings, q).front() <= k ? 1.0 : 0.0);
  }
  return mean_of(hits);
}

double baks(const RetrievalProblem& problem, const Rankings& rankings)
{
  std::map<std::string, std::pair<double, double>> per_identity; // correct, total
  for (auto q : known_queries(problem))
  {
    const auto& qid = (*problem.query().identities())[q];
    const auto top = rankings.at(q).front();
    auto& slot = per_identity[qid];
    slot.first += (*problem.gallery().identities())[top] == qid ? 1.0 : 0.0;
    slot.second += 1.0;
  }
  std::vector<double> acc;
  for (const auto& [_, v] : per_identity) acc.push_back(v.first / v.second);
  return mean_of(acc);
}

double auc_from_scores(const std::vector<double>& positive, const std::vector<double>& negative)
{
  if (positive.empty() || negative.empty())
  {
    throw NotApplicable("AUC needs both known and unknown queries");
  }
  // Mann-Whitney U with mid-ranks for ties.
  std::vector<std::pair<double, int>> all;
  for (double s : positive) all.emplace_back(s, 1);
  for (double s : negative) all.emplace_back(s, 0);
  std::sort(all.begin(), all.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < all.size())
  {
    std::size_t j = i;
    while (j < all.size() && all[j].first == all[i].first) ++j;
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t)
    {
      if (all[t].second == 1) rank_sum += mid;
    }
    i = j;
  }
  const double np = static_cast<double>(positive.size());
  const double nn = static_cast<double>(negative.size());
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

double open_set_auc(const RetrievalProblem& problem)
{
  const auto& sim = problem.similarities();
  std::vector<double> known, unknown;
  for (Eigen::Index q = 0; q < sim.rows(); ++q)
  {
    const double score = sim.row(q).maxCoeff();
    (problem.known()[static_cast<std::size_t>(q)] ? known : unknown).push_back(score);
  }
  return auc_from_scores(known, unknown);
}

std::vector<int> encode_labels(const std::vector<std::string>& labels)
{
  std::unordered_map<std::string, int> index;
  std::vector<int> out;
  out.reserve(labels.size());
  for (const auto& l : labels)
  {
    auto [it, _] = index.try_emplace(l, static_cast<int>(index.size()));
    out.push_back(it->second);
  }
  return out;
}

double adjusted_rand_index(const std::vector<int>& pred, const std::vector<int>& truth)
{
  if (pred.size() != truth.size())
  {
    throw ValidationError("adjusted_rand_index: labelings differ in length");
  }
  const auto n = pred.size();
  if (n < 2)
  {
    return 1.0;
  }
  std::map<std::pair<int, int>, double> table;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < n; ++i)
  {
    table[{pred[i], truth[i]}] += 1.0;
    rows[pred[i]] += 1.0;
    cols[truth[i]] += 1.0;
  }
  double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [_, c] : table) index += comb2(c);
  for (const auto& [_, c] : rows) sum_rows += comb2(c);
  for (const auto& [_, c] : cols) sum_cols += comb2(c);
  const double expected = sum_rows * sum_cols / comb2(static_cast<double>(n));
  const double maximum = 0.5 * (sum_rows + sum_cols);
  if (maximum == expected)
  {
    return 1.0;
  }
  return (index - expected) / (maximum - expected);
}

double adjusted_rand_index(const Partition& pred, const std::vector<std::string>& identities)
{
  return adjusted_rand_index(pred.labels, encode_labels(identities));
}

MetricReport evaluate(const RetrievalProblem& problem)
{
  const auto rankings = rank_gallery(problem);
  MetricReport r;
  r.map = mean_average_precision(problem, rankings);
  r.minp = mean_inp(problem, rankings);
  r.baks = baks(problem, rankings);
  for (std::size_t k : {1, 3, 5, 10}) r.top_k[k] = top_k_accuracy(problem, rankings, k);
  const bool has_known = std::find(problem.known().begin(), problem.known().end(), true) != problem.known().end();
  const bool has_unknown = std::find(problem.known().begin(), problem.known().end(), false) != problem.known().end();
  if (has_known && has_unknown)
  {
    r.auc_roc = open_set_auc(problem);
    r.auc_defined = true;
  }
  return r;
}

std::string to_json(const MetricReport& report)
{
  nlohmann::ordered_json j;
  j["map"] = report.map;
  j["minp"] = report.minp;
  j["baks"] = report.baks;
  j["auc_roc"] = report.auc_defined ? nlohmann::ordered_json(report.auc_roc) : nlohmann::ordered_json(nullptr);
  for (std::size_t k : {1, 3, 5, 10})
  {
    auto it = report.top_k.find(k);
    j["top" + std::to_string(k)] = it == report.top_k.end() ? 0.0 : it->second;
  }
  return j.dump(2) + "\n";
}

} // namespace aas
