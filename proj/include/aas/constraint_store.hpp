#pragma once

#include "aas/types.hpp"

#include <map>
#include <set>
#include <vector>

namespace aas
{

/// Accumulated must-link/cannot-link answers with their transitive closure.
///
/// Must-links are kept as an explicit component id per sample (small-to-large
/// relabelling on merge), so every const query is a plain read and concurrent
/// readers are safe. Writers need exclusive access.
class ConstraintStore
{
public:
  explicit ConstraintStore(std::size_t n = 0);

  std::size_t num_samples() const { return component_.size(); }

  /// Adds a constraint. Duplicates are idempotent; conflicts with the closure
  /// throw ContradictionError and leave the store unchanged.
  void add(const Constraint& c);

  Relation relation_of(const PairKey& p) const;

  /// True if adding `rel` on `p` would conflict with the closure.
  bool would_contradict(const PairKey& p, Relation rel) const;

  std::size_t component_of(std::size_t i) const { return component_[i]; }
  const std::vector<std::size_t>& component_members(std::size_t comp) const { return members_[comp]; }
  std::size_t num_components() const { return live_components_; }

  /// True if the two ml-components carry a cannot-link edge.
  bool components_conflict(std::size_t c1, std::size_t c2) const;
  const std::set<std::size_t>& conflicting_components(std::size_t comp) const { return cl_adjacent_[comp]; }

  const std::vector<Constraint>& constraints() const { return constraints_; }
  bool empty() const { return constraints_.empty(); }

  std::size_t count(Relation rel) const;

  /// Pairs derivable by closure that were never given explicitly, tagged
  /// source = inferred. Sorted by pair.
  std::vector<Constraint> inferred_constraints() const;

private:
  void merge(std::size_t c1, std::size_t c2);

  std::vector<std::size_t> component_;
  std::vector<std::vector<std::size_t>> members_;
  std::vector<std::set<std::size_t>> cl_adjacent_;
  std::size_t live_components_ = 0;

  std::vector<Constraint> constraints_;
  std::map<PairKey, Relation> explicit_;
};

} // namespace aas
