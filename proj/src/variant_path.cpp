#include "cobweb/variant_path.hpp"

#include <map>

#include "cobweb/variant_leaf.hpp"

namespace cobweb {

InstanceAttr expand_paths(const ConceptTree& tree, const std::vector<NodeId>& leaf_labels) {
  std::map<ValueId, double> credits;
  for (NodeId label : leaf_labels) {
    if (!tree.contains(label))
      throw Error(ErrorKind::integrity, "context label cites a dead concept");
    for (NodeId n = label; n != kNoNode; n = tree.node(n).parent) credits[n] += 1.0;
  }
  InstanceAttr a;
  for (const auto& [v, c] : credits) a.values.emplace_back(v, c);
  a.norm = static_cast<double>(leaf_labels.size());
  a.finalize();
  return a;
}

Instance encode_path(ConceptTree& tree, const std::string& anchor,
                     const std::vector<NodeId>& context_labels) {
  Instance x;
  InstanceAttr& a = x.get_or_create(kAnchorAttr);
  a.values.emplace_back(tree.words().intern(anchor), 1.0);
  a.finalize();
  if (!context_labels.empty()) x.get_or_create(kContextAttr) = expand_paths(tree, context_labels);
  return x;
}

std::vector<InstanceRecord> train_path(ConceptTree& tree, const std::vector<Sentence>& sentences,
                                       std::uint64_t shuffle_seed, int window,
                                       const PreIncorporateHook& hook) {
  if (tree.variant() != Variant::path)
    throw Error(ErrorKind::config, "train_path requires a path-variant tree");
  std::vector<std::size_t> order(sentences.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(shuffle_seed);
  deterministic_shuffle(order, rng);

  std::vector<InstanceRecord> records;
  for (std::size_t si : order) {
    const Sentence& s = sentences[si];
    auto labels = label_sentence(tree, s, window);
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      // Paths are expanded against the tree as it stands right now, so the
      // credited ids always form live root-to-leaf chains.
      Instance x = encode_path(tree, s.tokens[i], window_labels(labels, i, window));
      if (hook) hook(tree, si, i, x);
      SortOutcome out = tree.incorporate(x);
      records.push_back(
          {static_cast<std::uint32_t>(si), static_cast<std::uint32_t>(i), out.final_node});
    }
  }
  return records;
}

}  // namespace cobweb
