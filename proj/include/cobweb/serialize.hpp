#pragma once

#include <string>

#include "cobweb/concept_tree.hpp"

namespace cobweb {

/// Canonical JSON form of a tree:
///   {nodes: [{id, parent, tally, counts: {attr: {value: count}}}],
///    root, meta: {variant, rng-seed, instances-seen}}
/// Nodes are ordered by id and object keys are sorted, so exporting the same
/// tree twice yields identical bytes, and import(export(t)) re-exports
/// byte-identically. Path trees additionally carry the back-reference
/// registry and, per node, any context norms that differ from the table
/// total (chain credits vs. labeled tokens).
std::string export_tree(const ConceptTree& tree);
void export_tree_file(const ConceptTree& tree, const std::string& path);

/// Parses and validates a serialized tree. Throws Error(schema) with a
/// location hint on malformed input, and runs a full audit on the result.
ConceptTree import_tree(const std::string& json_text);
ConceptTree import_tree_file(const std::string& path);

}  // namespace cobweb
