#pragma once

#include <optional>

#include "cobweb/variant_common.hpp"

namespace cobweb {

/// The three-pass labeling procedure. Pass 1 categorizes each token with an
/// empty context (words the tree has never seen get no label and are dropped
/// from contexts); later passes rebuild each token's context from the
/// previous pass's labels. All categorizations are non-modifying and
/// restricted to paths containing the token itself. Returns the final pass.
std::vector<std::optional<NodeId>> label_sentence(const ConceptTree& tree, const Sentence& s,
                                                  int window);

/// Every pass's labels, first to last. Exposed so tests can check that each
/// pass depends only on the one before it.
std::vector<std::vector<std::optional<NodeId>>> label_sentence_passes(const ConceptTree& tree,
                                                                      const Sentence& s,
                                                                      int window, int passes);

/// The labels inside a token's window (anchor position excluded, unlabeled
/// tokens dropped), in sentence order.
std::vector<NodeId> window_labels(const std::vector<std::optional<NodeId>>& labels, std::size_t i,
                                  int window);

/// Anchor word plus a context of leaf-concept labels.
Instance encode_leaf(ConceptTree& tree, const std::string& anchor,
                     const std::vector<NodeId>& context_labels);

/// Per sentence: label, then incorporate one instance per token. Sorting
/// that reaches a leaf with the instance's anchor updates that leaf in place
/// instead of forking, which keeps the leaf count near the vocabulary size.
std::vector<InstanceRecord> train_leaf(ConceptTree& tree, const std::vector<Sentence>& sentences,
                                       std::uint64_t shuffle_seed, int window = 4,
                                       const PreIncorporateHook& hook = {});

}  // namespace cobweb
