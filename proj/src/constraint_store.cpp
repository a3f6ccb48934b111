#include "aas/constraint_store.hpp"

#include "aas/errors.hpp"

#include <algorithm>

namespace aas
{

ConstraintStore::ConstraintStore(std::size_t n)
    : component_(n), members_(n), cl_adjacent_(n), live_components_(n)
{
  for (std::size_t i = 0; i < n; ++i)
  {
    component_[i] = i;
    members_[i] = {i};
  }
}

Relation ConstraintStore::relation_of(const PairKey& p) const
{
  const auto ca = component_.at(p.a());
  const auto cb = component_.at(p.b());
  if (ca == cb)
  {
    return Relation::MustLink;
  }
  if (cl_adjacent_[ca].count(cb) != 0)
  {
    return Relation::CannotLink;
  }
  return Relation::Unknown;
}

bool ConstraintStore::would_contradict(const PairKey& p, Relation rel) const
{
  const auto known = relation_of(p);
  return known != Relation::Unknown && rel != Relation::Unknown && known != rel;
}

bool ConstraintStore::components_conflict(std::size_t c1, std::size_t c2) const
{
  return cl_adjacent_[c1].count(c2) != 0;
}

void ConstraintStore::add(const Constraint& c)
{
  if (c.pair.b() >= component_.size())
  {
    throw ValidationError("constraint index " + std::to_string(c.pair.b()) + " out of range (n=" +
                          std::to_string(component_.size()) + ")");
  }
  if (c.relation == Relation::Unknown)
  {
    throw ValidationError("constraint relation must be ml or cl");
  }
  if (c.cycle < 0)
  {
    throw ValidationError("constraint cycle must be non-negative");
  }
  if (would_contradict(c.pair, c.relation))
  {
    throw ContradictionError("constraint " + std::string(to_string(c.relation)) + "(" +
                             std::to_string(c.pair.a()) + "," + std::to_string(c.pair.b()) +
                             ") contradicts existing " +
                             std::string(to_string(relation_of(c.pair))));
  }
  if (auto it = explicit_.find(c.pair); it != explicit_.end())
  {
    return;
  }

  const auto ca = component_[c.pair.a()];
  const auto cb = component_[c.pair.b()];
  if (c.relation == Relation::MustLink)
  {
    if (ca != cb)
    {
      merge(ca, cb);
    }
  }
  else
  {
    cl_adjacent_[ca].insert(cb);
    cl_adjacent_[cb].insert(ca);
  }
  explicit_.emplace(c.pair, c.relation);
  constraints_.push_back(c);
}

void ConstraintStore::merge(std::size_t c1, std::size_t c2)
{
  if (members_[c1].size() < members_[c2].size())
  {
    std::swap(c1, c2);
  }
  for (auto i : members_[c2])
  {
    component_[i] = c1;
  }
  members_[c1].insert(members_[c1].end(), members_[c2].begin(), members_[c2].end());
  std::sort(members_[c1].begin(), members_[c1].end());
  members_[c2].clear();

  for (auto other : cl_adjacent_[c2])
  {
    cl_adjacent_[other].erase(c2);
    cl_adjacent_[other].insert(c1);
    cl_adjacent_[c1].insert(other);
  }
  cl_adjacent_[c2].clear();
  --live_components_;
}

std::size_t ConstraintStore::count(Relation rel) const
{
  return static_cast<std::size_t>(std::count_if(
      constraints_.begin(), constraints_.end(), [rel](const Constraint& c) { return c.relation == rel; }));
}

std::vector<Constraint> ConstraintStore::inferred_constraints() const
{
  std::vector<Constraint> out;
  for (std::size_t c = 0; c < members_.size(); ++c)
  {
    const auto& mem = members_[c];
    for (std::size_t x = 0; x < mem.size(); ++x)
    {
      for (std::size_t y = x + 1; y < mem.size(); ++y)
      {
        PairKey p(mem[x], mem[y]);
        if (explicit_.count(p) == 0)
        {
          out.push_back({p, Relation::MustLink, ConstraintSource::Inferred, 0});
        }
      }
    }
    for (auto other : cl_adjacent_[c])
    {
      if (other < c)
      {
        continue;
      }
      for (auto u : mem)
      {
        for (auto v : members_[other])
        {
          PairKey p(u, v);
          if (explicit_.count(p) == 0)
          {
            out.push_back({p, Relation::CannotLink, ConstraintSource::Inferred, 0});
          }
        }
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const Constraint& l, const Constraint& r) { return l.pair < r.pair; });
  return out;
}

} // namespace aas
