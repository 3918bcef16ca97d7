#include "cobweb/variant_word.hpp"

#include <map>

namespace cobweb {

Instance encode_word(ConceptTree& tree, const WindowedExample& ex) {
  Instance x;
  InstanceAttr& anchor = x.get_or_create(kAnchorAttr);
  anchor.values.emplace_back(tree.words().intern(ex.anchor), 1.0);
  anchor.finalize();

  if (!ex.context.empty()) {
    std::map<ValueId, double> counts;
    for (const auto& tok : ex.context) counts[tree.words().intern(tok)] += 1.0;
    InstanceAttr& ctx = x.get_or_create(kContextAttr);
    for (const auto& [v, c] : counts) ctx.values.emplace_back(v, c);
    ctx.finalize();
  }
  return x;
}

std::vector<InstanceRecord> train_word(ConceptTree& tree, const std::vector<Sentence>& sentences,
                                       std::uint64_t shuffle_seed, int window,
                                       const PreIncorporateHook& hook) {
  std::vector<std::size_t> order(sentences.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(shuffle_seed);
  deterministic_shuffle(order, rng);

  std::vector<InstanceRecord> records;
  for (std::size_t si : order) {
    for (const auto& ex : windows(sentences[si], window)) {
      Instance x = encode_word(tree, ex);
      if (hook) hook(tree, si, ex.position, x);
      SortOutcome out = tree.incorporate(x);
      records.push_back({static_cast<std::uint32_t>(si), static_cast<std::uint32_t>(ex.position),
                         out.final_node});
    }
  }
  return records;
}

}  // namespace cobweb
