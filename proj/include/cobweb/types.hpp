#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cobweb {

using AttrId = std::uint32_t;
using ValueId = std::uint32_t;
using NodeId = std::uint32_t;

inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

// Attribute slots every tree creates up front, in this order.
inline constexpr AttrId kAnchorAttr = 0;
inline constexpr AttrId kContextAttr = 1;

enum class ErrorKind {
  invalid_partition,
  invalid_instance,
  lookup,
  integrity,
  empty_corpus,
  undefined_input,
  schema,
  config,
  io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

/// String <-> dense id mapping. Ids are assigned in first-intern order.
class Interner {
 public:
  std::uint32_t intern(std::string_view s) {
    auto it = ids_.find(std::string(s));
    if (it != ids_.end()) return it->second;
    std::uint32_t id = static_cast<std::uint32_t>(names_.size());
    names_.emplace_back(s);
    ids_.emplace(names_.back(), id);
    return id;
  }

  std::optional<std::uint32_t> lookup(std::string_view s) const {
    auto it = ids_.find(std::string(s));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& name(std::uint32_t id) const {
    if (id >= names_.size()) throw Error(ErrorKind::lookup, "interner: unknown id");
    return names_[id];
  }

  std::size_t size() const { return names_.size(); }

 private:
  std::unordered_map<std::string, std::uint32_t> ids_;
  std::vector<std::string> names_;
};

// splitmix64; used to derive independent seeds for the different random
// streams (tree tie-breaking, shuffling, sampling, bootstrap) from one
// user-facing seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Named streams; keeping them in one place pins the derivation scheme.
enum class SeedStream : std::uint64_t {
  tree = 0,
  shuffle = 1,
  sample = 2,
  bootstrap = 3,
  run_base = 100,  // run r uses run_base + r
};

inline std::uint64_t derive_seed(std::uint64_t seed, SeedStream s) {
  return mix_seed(seed, static_cast<std::uint64_t>(s));
}

// Fisher-Yates with explicit draws so the permutation is pinned by us, not by
// the standard library's std::shuffle implementation.
template <typename T>
void deterministic_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

/// k distinct indices out of n, order-stable under a fixed seed.
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  deterministic_shuffle(idx, rng);
  if (k < n) idx.resize(k);
  return idx;
}

}  // namespace cobweb
