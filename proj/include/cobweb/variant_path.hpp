#pragma once

#include <optional>

#include "cobweb/variant_common.hpp"

namespace cobweb {

/// Expands leaf labels into chain credits: each label contributes one count
/// to its leaf and one to every ancestor up to the root, so shared ancestors
/// accumulate. The attribute's `norm` is the number of labels (tokens), which
/// is what the EC probabilities divide by. Throws integrity on a dangling id.
InstanceAttr expand_paths(const ConceptTree& tree, const std::vector<NodeId>& leaf_labels);

/// Anchor word plus a path-expanded context.
Instance encode_path(ConceptTree& tree, const std::string& anchor,
                     const std::vector<NodeId>& context_labels);

/// Same pipeline as train_leaf (three-pass anchor-restricted labeling and
/// same-anchor leaf absorption), with contexts expanded into ancestor paths
/// and partitions scored by the EC-based category utility. See also ec() and
/// path_category_utility() in counts.hpp for the stand-alone formulas.
std::vector<InstanceRecord> train_path(ConceptTree& tree, const std::vector<Sentence>& sentences,
                                       std::uint64_t shuffle_seed, int window = 4,
                                       const PreIncorporateHook& hook = {});

}  // namespace cobweb
