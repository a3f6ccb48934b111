#include "aas/types.hpp"

#include "aas/errors.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace aas
{

PairKey::PairKey(std::size_t x, std::size_t y)
{
  if (x == y)
  {
    throw ValidationError("pair endpoints must differ (got " + std::to_string(x) + ")");
  }
  a_ = std::min(x, y);
  b_ = std::max(x, y);
}

EmbeddingSet::EmbeddingSet(std::vector<std::string> ids,
                           RowMatrixF vectors,
                           std::optional<std::vector<std::string>> image_uris,
                           std::optional<std::vector<std::string>> identities)
    : ids_(std::move(ids)),
      vectors_(std::move(vectors)),
      image_uris_(std::move(image_uris)),
      identities_(std::move(identities))
{
  validate();
}

void EmbeddingSet::validate() const
{
  const auto n = static_cast<std::size_t>(vectors_.rows());
  if (n == 0 || vectors_.cols() == 0)
  {
    throw ValidationError("embedding set needs n >= 1 and d >= 1");
  }
  if (ids_.size() != n)
  {
    throw ValidationError("id count " + std::to_string(ids_.size()) + " != row count " +
                          std::to_string(n));
  }
  std::unordered_set<std::string_view> seen;
  for (const auto& id : ids_)
  {
    if (!seen.insert(id).second)
    {
      throw ValidationError("duplicate sample id '" + id + "'");
    }
  }
  if (!vectors_.allFinite())
  {
    throw ValidationError("embedding matrix contains non-finite values");
  }
  if (image_uris_ && image_uris_->size() != n)
  {
    throw ValidationError("image_uris length does not match n");
  }
  if (identities_ && identities_->size() != n)
  {
    throw ValidationError("identities length does not match n");
  }
}

std::size_t EmbeddingSet::index_of(std::string_view id) const
{
  auto it = std::find(ids_.begin(), ids_.end(), id);
  if (it == ids_.end())
  {
    throw ValidationError("unknown sample id '" + std::string(id) + "'");
  }
  return static_cast<std::size_t>(it - ids_.begin());
}

EmbeddingSet EmbeddingSet::with_vectors(RowMatrixF vectors) const
{
  if (vectors.rows() != vectors_.rows() || vectors.cols() != vectors_.cols())
  {
    throw ValidationError("replacement embeddings have a different shape");
  }
  return EmbeddingSet(ids_, std::move(vectors), image_uris_, identities_);
}

Partition::Partition(std::vector<int> labels_, MethodTag method_)
    : labels(std::move(labels_)), outliers(labels.size(), false), method(method_)
{
}

Partition::Partition(std::vector<int> labels_, std::vector<bool> outliers_, MethodTag method_)
    : labels(std::move(labels_)), outliers(std::move(outliers_)), method(method_)
{
  if (outliers.size() != labels.size())
  {
    throw ValidationError("outlier flag count does not match label count");
  }
}

std::size_t Partition::num_clusters() const
{
  std::unordered_set<int> distinct(labels.begin(), labels.end());
  return distinct.size();
}

std::vector<std::vector<std::size_t>> Partition::clusters() const
{
  int max_label = -1;
  for (int l : labels)
  {
    if (l < 0)
    {
      throw ValidationError("negative cluster label");
    }
    max_label = std::max(max_label, l);
  }
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(max_label + 1));
  for (std::size_t i = 0; i < labels.size(); ++i)
  {
    out[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  return out;
}

Partition Partition::renumbered() const
{
  std::unordered_map<int, int> remap;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
  {
    auto [it, inserted] = remap.try_emplace(labels[i], static_cast<int>(remap.size()));
    out[i] = it->second;
  }
  return Partition(std::move(out), outliers, method);
}

bool same_grouping(const Partition& p, const Partition& q)
{
  if (p.size() != q.size())
  {
    return false;
  }
  return p.renumbered().labels == q.renumbered().labels;
}

std::string_view to_string(Relation r)
{
  switch (r)
  {
    case Relation::MustLink: return "ml";
    case Relation::CannotLink: return "cl";
    case Relation::Unknown: return "unknown";
  }
  return "unknown";
}

std::string_view to_string(ConstraintSource s)
{
  switch (s)
  {
    case ConstraintSource::Oracle: return "oracle";
    case ConstraintSource::Seed: return "seed";
    case ConstraintSource::Inferred: return "inferred";
  }
  return "oracle";
}

std::string_view to_string(MethodTag m)
{
  switch (m)
  {
    case MethodTag::A: return "A";
    case MethodTag::B: return "B";
    case MethodTag::Refined: return "refined";
  }
  return "refined";
}

void RunConfig::validate() const
{
  auto fail = [](const std::string& what) { throw ValidationError("invalid config: " + what); };
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) fail("epsilon must lie in [0,1]");
  if (k_max < 1) fail("k_max must be positive");
  if (!(s_min >= -1.0 && s_min <= 1.0)) fail("s_min must lie in [-1,1]");
  if (!(budget_fraction_per_cycle > 0.0 && budget_fraction_per_cycle < 1.0))
    fail("budget_fraction_per_cycle must lie in (0,1)");
  if (num_cycles < 1) fail("num_cycles must be positive");
  if (!(dbscan_eps > 0.0) || !std::isfinite(dbscan_eps)) fail("dbscan_eps must be positive");
  if (dbscan_min_samples < 1) fail("dbscan_min_samples must be positive");
  if (knn_k < 1) fail("knn_k must be positive");
  if (finch_level < 0) fail("finch_level must be non-negative");
  if (beta.size() != 3) fail("beta needs three pair-type weights");
  for (double b : beta)
  {
    if (!(b >= 0.0) || !std::isfinite(b)) fail("beta weights must be non-negative");
  }
}

} // namespace aas
