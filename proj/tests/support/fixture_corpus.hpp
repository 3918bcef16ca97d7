#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace testsup {

/// Deterministic pseudo-English corpus: topic-skewed Zipfian content words
/// interleaved with stop words and punctuation, one sentence per line.
/// Every sentence carries at least `min_content` non-stop tokens.
std::vector<std::string> experiment_corpus(std::size_t sentences, std::uint64_t seed);

/// A 1040-line raw fixture in the same style where exactly 374 lines carry
/// ten or more non-stop tokens (the rest are shorter), mirroring the shape
/// of the documented preprocessing example.
std::vector<std::string> reduction_fixture();

}  // namespace testsup
