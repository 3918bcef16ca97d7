#pragma once

#include "cobweb/variant_common.hpp"

namespace cobweb {

/// Word-variant encoding: literal anchor word plus one bag-of-words context
/// attribute holding window multiplicities. Word order inside the window is
/// discarded; an empty window yields an anchor-only instance.
Instance encode_word(ConceptTree& tree, const WindowedExample& ex);

/// Shuffles the sentences with `shuffle_seed` and incorporates every window
/// example left to right within each sentence.
std::vector<InstanceRecord> train_word(ConceptTree& tree, const std::vector<Sentence>& sentences,
                                       std::uint64_t shuffle_seed, int window = 4,
                                       const PreIncorporateHook& hook = {});

}  // namespace cobweb
