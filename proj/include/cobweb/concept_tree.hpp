#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cobweb/counts.hpp"
#include "cobweb/types.hpp"

namespace cobweb {

enum class Variant { word, leaf, path };

std::string variant_name(Variant v);
std::optional<Variant> variant_from_name(std::string_view s);

enum class Op { add, create, merge, split, stop };
const char* op_name(Op op);

struct SortOutcome {
  NodeId final_node = kNoNode;
  std::vector<NodeId> path;  // nodes whose counts include the instance, root first
  std::vector<Op> ops;       // operator applied at each decision step
  bool filter_exhausted = false;
};

struct ConceptNode {
  NodeId id = kNoNode;
  NodeId parent = kNoNode;
  std::vector<NodeId> children;
  double tally = 0.0;
  std::vector<std::pair<AttrId, ValueTable>> attrs;  // sorted by AttrId

  bool is_leaf() const { return children.empty(); }

  const ValueTable* find(AttrId a) const {
    for (const auto& [id_, t] : attrs)
      if (id_ == a) return &t;
    return nullptr;
  }
  ValueTable& get_or_create(AttrId a);
};

/// How the leaf/path training pipelines prune same-anchor arrivals.
/// `categorize` absorbs a known word into the leaf its anchor-restricted
/// categorization returns, so leaves track the vocabulary; `sorted` only
/// absorbs when the learning descent itself happens to reach a same-anchor
/// leaf, and lets structure operators run for every instance.
enum class AbsorbMode { categorize, sorted };

struct TreeConfig {
  int label_passes = 3;  // passes used by the leaf/path labeling procedure
  bool count_hypothetical_nodes = true;  // include simulated nodes in the path scorer's T
  AbsorbMode absorb_mode = AbsorbMode::categorize;
};

/// An incremental hierarchy of probabilistic concepts. Training is
/// single-writer and order-dependent; a tree with no active writer may be
/// read (categorize/predict) from any number of threads.
class ConceptTree {
 public:
  ConceptTree(Variant variant, std::uint64_t seed, TreeConfig config = {});

  ConceptTree(const ConceptTree&) = delete;
  ConceptTree& operator=(const ConceptTree&) = delete;
  ConceptTree(ConceptTree&&) = default;
  ConceptTree& operator=(ConceptTree&&) = default;

  Variant variant() const { return variant_; }
  std::uint64_t seed() const { return seed_; }
  const TreeConfig& config() const { return config_; }
  TreeConfig& config() { return config_; }

  Interner& words() { return words_; }
  const Interner& words() const { return words_; }
  Interner& attributes() { return attrs_; }
  const Interner& attributes() const { return attrs_; }

  bool empty() const { return root_ == kNoNode; }
  NodeId root() const { return root_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t leaf_count() const;
  double instances_seen() const { return instances_seen_; }
  bool contains(NodeId id) const { return nodes_.count(id) != 0; }
  const ConceptNode& node(NodeId id) const;
  std::vector<NodeId> node_ids_sorted() const;

  /// True when the word has ever appeared as an anchor of a trained instance.
  bool anchor_seen(ValueId word) const;

  /// Classify-and-learn descent. Adds the instance's counts along the chosen
  /// path and may restructure the hierarchy via create/merge/split.
  SortOutcome incorporate(const Instance& x);

  /// Updates an existing leaf in place: the instance's counts are added to
  /// the leaf and every ancestor, with no structural change. Used by the
  /// leaf/path same-anchor pruning.
  SortOutcome absorb_at(NodeId leaf, const Instance& x);

  /// Non-modifying descent to a terminal node, following the best child by
  /// simulated category utility. With `anchor_filter`, only children whose
  /// anchor table contains the word are candidates; if none qualifies the
  /// current node is returned with `filter_exhausted` set.
  SortOutcome categorize(const Instance& x, std::optional<ValueId> anchor_filter = {}) const;

  /// Empirical value distribution of one attribute at a node.
  std::unordered_map<ValueId, double> predict(NodeId id, AttrId attr) const;

  /// Sum of predict() masses over a set of values.
  double probability_of(NodeId id, AttrId attr, const std::vector<ValueId>& values) const;

  /// Category utility of the flat partition (parent summary vs. an explicit
  /// child-node set), under this tree's variant scorer. Used by the
  /// hierarchical-to-flat cluster extraction.
  double frontier_cu(NodeId parent, const std::vector<NodeId>& children) const;

  /// Expected-correct score of a live node under this tree's variant scorer.
  double node_ec(NodeId id, std::size_t tree_concept_count) const;

  // Structural operators. Invoked by incorporate; exposed for tests. Both
  // preserve the count-conservation invariants and fire the back-reference
  // maintenance hooks in the path variant.
  NodeId merge_children(NodeId parent, NodeId a, NodeId b);
  void split_child(NodeId parent, NodeId child);

  // Path variant bookkeeping.
  const std::unordered_map<NodeId, std::unordered_set<NodeId>>& backrefs() const {
    return backrefs_;
  }

  /// Full structural audit: parent/child consistency, count conservation,
  /// cached-scalar agreement, root tally, and (path) registry inversion.
  /// Only valid at quiescent points (between incorporate calls); throws
  /// Error(integrity) on the first violation.
  void audit() const;

  /// Referential-integrity audit only: the registry exactly inverts the
  /// context-table citation relation and no table cites a dead concept.
  /// Valid at any point, including mid-descent.
  void audit_registry() const;

  /// When set, incorporate() runs audit_registry() after every applied
  /// operator. Test use only.
  void set_audit_every_op(bool on) { audit_every_op_ = on; }

  /// Serialized form; see serialize.hpp. Exposed here so tests can assert
  /// categorize purity without including the serializer.
  std::string export_json() const;

 private:
  friend struct TreeSerializer;

  ConceptNode& node_mut(NodeId id);
  NodeId new_node();
  void free_node(NodeId id);
  NodeId make_leaf_from(const Instance& x, NodeId parent);
  void absorb(ConceptNode& n, const Instance& x);
  void copy_counts(ConceptNode& dst, const ConceptNode& src);
  bool is_exact_match(const ConceptNode& leaf, const Instance& x) const;
  bool anchor_matches(const ConceptNode& leaf, const Instance& x) const;
  void validate_instance(const Instance& x) const;

  // registry maintenance (path variant, context attribute only)
  void note_value_added(NodeId owner, AttrId attr, ValueId v);
  void note_value_removed(NodeId owner, AttrId attr, ValueId v);
  void on_delete_hook(NodeId dying);
  void on_merge_hook(NodeId a, NodeId b, NodeId merged);
  bool tracks_backrefs() const { return variant_ == Variant::path; }

  struct Decision {
    Op op;
    NodeId best = kNoNode;
    NodeId second = kNoNode;
  };
  Decision decide(const ConceptNode& n, const Instance& x);
  NodeId best_child_simulated(const ConceptNode& n, const Instance& x,
                              std::optional<ValueId> anchor_filter) const;

  Variant variant_;
  std::uint64_t seed_;
  TreeConfig config_;
  mutable std::mt19937_64 rng_;
  Interner words_;
  Interner attrs_;
  NodeId root_ = kNoNode;
  NodeId next_id_ = 0;
  double instances_seen_ = 0.0;
  std::unordered_map<NodeId, std::unique_ptr<ConceptNode>> nodes_;
  std::unordered_map<NodeId, std::unordered_set<NodeId>> backrefs_;
  bool audit_every_op_ = false;
};

}  // namespace cobweb
