#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cobweb/concept_tree.hpp"
#include "cobweb/corpus.hpp"

namespace cobweb {

/// Where each training instance came from and the leaf it landed in.
/// Sentence indexes refer to the caller's (pre-shuffle) sentence vector.
struct InstanceRecord {
  std::uint32_t sentence = 0;
  std::uint32_t token = 0;
  NodeId leaf = kNoNode;
};

/// Called just before each instance is incorporated; the tree still reflects
/// the state the instance was built against. Used by the recall protocol to
/// interleave measurement with learning.
using PreIncorporateHook =
    std::function<void(ConceptTree&, std::size_t sentence, std::size_t token, const Instance&)>;

/// The leaf/path learning step: under the default absorb mode, an instance
/// whose anchor the tree already knows updates the leaf returned by its
/// anchor-restricted categorization instead of forking a new one; everything
/// else goes through the full incorporate descent.
SortOutcome incorporate_pruned(ConceptTree& tree, const Instance& x);

}  // namespace cobweb
