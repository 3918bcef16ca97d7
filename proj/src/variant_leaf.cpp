#include "cobweb/variant_leaf.hpp"

#include <map>

#include "cobweb/variant_path.hpp"

namespace cobweb {

std::vector<NodeId> window_labels(const std::vector<std::optional<NodeId>>& labels, std::size_t i,
                                  int window) {
  std::vector<NodeId> out;
  const std::size_t n = labels.size();
  const std::size_t w = static_cast<std::size_t>(window);
  std::size_t lo = i >= w ? i - w : 0;
  std::size_t hi = std::min(n, i + w + 1);
  for (std::size_t j = lo; j < hi; ++j) {
    if (j != i && labels[j]) out.push_back(*labels[j]);
  }
  return out;
}

namespace {

// Context labels are concept ids, so this never touches the word interner.
void add_label_context(const ConceptTree& tree, Instance& x, const std::vector<NodeId>& labels) {
  if (labels.empty()) return;
  if (tree.variant() == Variant::path) {
    x.get_or_create(kContextAttr) = expand_paths(tree, labels);
    return;
  }
  std::map<ValueId, double> counts;
  for (NodeId l : labels) counts[l] += 1.0;
  InstanceAttr& ctx = x.get_or_create(kContextAttr);
  for (const auto& [v, c] : counts) ctx.values.emplace_back(v, c);
  ctx.finalize();
}

std::vector<std::optional<NodeId>> label_pass(const ConceptTree& tree, const Sentence& s,
                                              int window,
                                              const std::vector<std::optional<NodeId>>* prev) {
  std::vector<std::optional<NodeId>> out(s.tokens.size());
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    auto wid = tree.words().lookup(s.tokens[i]);
    if (!wid || !tree.anchor_seen(*wid)) continue;  // unseen words carry no label
    Instance x;
    InstanceAttr& a = x.get_or_create(kAnchorAttr);
    a.values.emplace_back(*wid, 1.0);
    a.finalize();
    if (prev) add_label_context(tree, x, window_labels(*prev, i, window));
    SortOutcome so = tree.categorize(x, *wid);
    if (!so.filter_exhausted) out[i] = so.final_node;
  }
  return out;
}

}  // namespace

std::vector<std::vector<std::optional<NodeId>>> label_sentence_passes(const ConceptTree& tree,
                                                                      const Sentence& s,
                                                                      int window, int passes) {
  if (passes < 1) throw Error(ErrorKind::config, "labeling needs at least one pass");
  std::vector<std::vector<std::optional<NodeId>>> all;
  all.push_back(label_pass(tree, s, window, nullptr));
  for (int p = 1; p < passes; ++p) all.push_back(label_pass(tree, s, window, &all.back()));
  return all;
}

std::vector<std::optional<NodeId>> label_sentence(const ConceptTree& tree, const Sentence& s,
                                                  int window) {
  return label_sentence_passes(tree, s, window, tree.config().label_passes).back();
}

Instance encode_leaf(ConceptTree& tree, const std::string& anchor,
                     const std::vector<NodeId>& context_labels) {
  Instance x;
  InstanceAttr& a = x.get_or_create(kAnchorAttr);
  a.values.emplace_back(tree.words().intern(anchor), 1.0);
  a.finalize();
  add_label_context(tree, x, context_labels);
  return x;
}

std::vector<InstanceRecord> train_leaf(ConceptTree& tree, const std::vector<Sentence>& sentences,
                                       std::uint64_t shuffle_seed, int window,
                                       const PreIncorporateHook& hook) {
  if (tree.variant() != Variant::leaf)
    throw Error(ErrorKind::config, "train_leaf requires a leaf-variant tree");
  std::vector<std::size_t> order(sentences.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(shuffle_seed);
  deterministic_shuffle(order, rng);

  std::vector<InstanceRecord> records;
  for (std::size_t si : order) {
    const Sentence& s = sentences[si];
    auto labels = label_sentence(tree, s, window);
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      Instance x = encode_leaf(tree, s.tokens[i], window_labels(labels, i, window));
      if (hook) hook(tree, si, i, x);
      SortOutcome out = tree.incorporate(x);
      records.push_back(
          {static_cast<std::uint32_t>(si), static_cast<std::uint32_t>(i), out.final_node});
    }
  }
  return records;
}

}  // namespace cobweb
