#include "cobweb/concept_tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cobweb/scoring.hpp"

namespace cobweb {

namespace {

constexpr std::size_t kNoIndex = std::numeric_limits<std::size_t>::max();

bool close(double a, double b, double tol = 1e-9) {
  double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
  return std::fabs(a - b) <= tol * scale;
}

}  // namespace

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::word: return "word";
    case Variant::leaf: return "leaf";
    case Variant::path: return "path";
  }
  return "?";
}

std::optional<Variant> variant_from_name(std::string_view s) {
  if (s == "word") return Variant::word;
  if (s == "leaf") return Variant::leaf;
  if (s == "path") return Variant::path;
  return std::nullopt;
}

const char* op_name(Op op) {
  switch (op) {
    case Op::add: return "add";
    case Op::create: return "create";
    case Op::merge: return "merge";
    case Op::split: return "split";
    case Op::stop: return "stop";
  }
  return "?";
}

ValueTable& ConceptNode::get_or_create(AttrId a) {
  for (auto& [id_, t] : attrs)
    if (id_ == a) return t;
  attrs.emplace_back(a, ValueTable{});
  std::sort(attrs.begin(), attrs.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  return get_or_create(a);
}

ConceptTree::ConceptTree(Variant variant, std::uint64_t seed, TreeConfig config)
    : variant_(variant),
      seed_(seed),
      config_(config),
      rng_(derive_seed(seed, SeedStream::tree)) {
  attrs_.intern("anchor");   // kAnchorAttr
  attrs_.intern("context");  // kContextAttr
}

const ConceptNode& ConceptTree::node(NodeId id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw Error(ErrorKind::lookup, "unknown node id " + std::to_string(id));
  return *it->second;
}

ConceptNode& ConceptTree::node_mut(NodeId id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw Error(ErrorKind::lookup, "unknown node id " + std::to_string(id));
  return *it->second;
}

std::size_t ConceptTree::leaf_count() const {
  std::size_t n = 0;
  for (const auto& [id, up] : nodes_)
    if (up->is_leaf()) ++n;
  return n;
}

std::vector<NodeId> ConceptTree::node_ids_sorted() const {
  std::vector<NodeId> ids;
  ids.reserve(nodes_.size());
  for (const auto& [id, up] : nodes_) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

bool ConceptTree::anchor_seen(ValueId word) const {
  if (root_ == kNoNode) return false;
  const ValueTable* t = node(root_).find(kAnchorAttr);
  return t != nullptr && t->get(word) > 0.0;
}

NodeId ConceptTree::new_node() {
  NodeId id = next_id_++;
  auto up = std::make_unique<ConceptNode>();
  up->id = id;
  nodes_.emplace(id, std::move(up));
  return id;
}

void ConceptTree::free_node(NodeId id) { nodes_.erase(id); }

void ConceptTree::note_value_added(NodeId owner, AttrId attr, ValueId v) {
  if (tracks_backrefs() && attr == kContextAttr) backrefs_[v].insert(owner);
}

void ConceptTree::note_value_removed(NodeId owner, AttrId attr, ValueId v) {
  if (!tracks_backrefs() || attr != kContextAttr) return;
  auto it = backrefs_.find(v);
  if (it == backrefs_.end()) return;
  it->second.erase(owner);
  if (it->second.empty()) backrefs_.erase(it);
}

void ConceptTree::absorb(ConceptNode& n, const Instance& x) {
  n.tally += 1.0;
  for (const auto& [attr, ia] : x.attrs) {
    ValueTable& t = n.get_or_create(attr);
    for (const auto& [v, c] : ia.values) {
      if (t.add(v, c) > 0) note_value_added(n.id, attr, v);
    }
    t.norm += ia.norm;
  }
}

void ConceptTree::copy_counts(ConceptNode& dst, const ConceptNode& src) {
  for (const auto& [attr, table] : src.attrs) {
    ValueTable& t = dst.get_or_create(attr);
    for (const auto& [v, c] : table.counts) {
      if (t.add(v, c) > 0) note_value_added(dst.id, attr, v);
    }
    t.norm += table.norm;
  }
}

NodeId ConceptTree::make_leaf_from(const Instance& x, NodeId parent) {
  NodeId id = new_node();
  ConceptNode& n = node_mut(id);
  n.parent = parent;
  absorb(n, x);
  return id;
}

bool ConceptTree::is_exact_match(const ConceptNode& leaf, const Instance& x) const {
  // The leaf matches when it looks like `tally` copies of the instance.
  for (const auto& [attr, table] : leaf.attrs) {
    const InstanceAttr* ia = x.find(attr);
    std::size_t want = ia ? ia->values.size() : 0;
    if (table.counts.size() != want) return false;
  }
  for (const auto& [attr, ia] : x.attrs) {
    const ValueTable* t = leaf.find(attr);
    if (!t) return false;
    for (const auto& [v, c] : ia.values) {
      if (!close(t->get(v), c * leaf.tally)) return false;
    }
  }
  return true;
}

bool ConceptTree::anchor_matches(const ConceptNode& leaf, const Instance& x) const {
  const InstanceAttr* ia = x.find(kAnchorAttr);
  if (!ia || ia->values.empty()) return false;
  const ValueTable* t = leaf.find(kAnchorAttr);
  return t != nullptr && t->counts.size() == 1 && t->get(ia->values.front().first) > 0.0;
}

void ConceptTree::validate_instance(const Instance& x) const {
  if (x.attrs.empty())
    throw Error(ErrorKind::invalid_instance, "instance has no attributes");
  for (const auto& [attr, ia] : x.attrs) {
    if (ia.values.empty())
      throw Error(ErrorKind::invalid_instance, "instance attribute with no values");
    for (const auto& [v, c] : ia.values)
      if (!(c > 0.0))
        throw Error(ErrorKind::invalid_instance, "instance count must be positive");
    if (attr == kAnchorAttr) {
      if (ia.values.size() != 1 || ia.values.front().second != 1.0)
        throw Error(ErrorKind::invalid_instance,
                    "anchor attribute must hold exactly one value with count 1");
    }
  }
}

// ---------------------------------------------------------------------------
// Scoring helpers. All of these work off the cached per-attribute scalars, so
// one candidate evaluation costs O(children + |instance|) instead of a
// rescan of the count tables.

namespace {

double ec_of_node(const ConceptNode& n, bool path_rule, double tree_concepts) {
  double total = 0.0;
  bool saw_context = false;
  for (const auto& [attr, t] : n.attrs) {
    saw_context = saw_context || attr == kContextAttr;
    total += scoring::ec_term(attr, scoring::of(t), path_rule, tree_concepts);
  }
  if (path_rule && !saw_context) total += scoring::path_empty_context_term(tree_concepts);
  return total;
}

double ec_node_plus_instance(const ConceptNode* n, const Instance& x, bool path_rule,
                             double tree_concepts) {
  double total = 0.0;
  bool saw_context = false;
  std::size_t ni = 0, xi = 0;
  std::size_t nn = n ? n->attrs.size() : 0;
  while (ni < nn || xi < x.attrs.size()) {
    AttrId na = ni < nn ? n->attrs[ni].first : std::numeric_limits<AttrId>::max();
    AttrId xa = xi < x.attrs.size() ? x.attrs[xi].first : std::numeric_limits<AttrId>::max();
    AttrId at = std::min(na, xa);
    saw_context = saw_context || at == kContextAttr;
    if (na < xa) {
      total += scoring::ec_term(na, scoring::of(n->attrs[ni].second), path_rule, tree_concepts);
      ++ni;
    } else if (xa < na) {
      total += scoring::ec_term(xa, scoring::with_instance(nullptr, x.attrs[xi].second),
                                path_rule, tree_concepts);
      ++xi;
    } else {
      total += scoring::ec_term(na, scoring::with_instance(&n->attrs[ni].second, x.attrs[xi].second),
                                path_rule, tree_concepts);
      ++ni;
      ++xi;
    }
  }
  if (path_rule && !saw_context) total += scoring::path_empty_context_term(tree_concepts);
  return total;
}

double ec_merged_plus_instance(const ConceptNode& a, const ConceptNode& b, const Instance& x,
                               bool path_rule, double tree_concepts) {
  std::vector<AttrId> attrs;
  for (const auto& [id, t] : a.attrs) attrs.push_back(id);
  for (const auto& [id, t] : b.attrs) attrs.push_back(id);
  for (const auto& [id, t] : x.attrs) attrs.push_back(id);
  std::sort(attrs.begin(), attrs.end());
  attrs.erase(std::unique(attrs.begin(), attrs.end()), attrs.end());

  double total = 0.0;
  bool saw_context = false;
  for (AttrId attr : attrs) {
    saw_context = saw_context || attr == kContextAttr;
    const ValueTable* ta = a.find(attr);
    const ValueTable* tb = b.find(attr);
    scoring::AttrScalars s;
    if (ta) {
      s.total += ta->total;
      s.norm += ta->norm;
      s.sum_sq += ta->sum_sq;
      s.distinct += static_cast<double>(ta->counts.size());
    }
    if (tb) {
      s.total += tb->total;
      s.norm += tb->norm;
      s.sum_sq += tb->sum_sq;
      s.distinct += static_cast<double>(tb->counts.size());
    }
    if (ta && tb) {
      const ValueTable* small = ta->counts.size() <= tb->counts.size() ? ta : tb;
      const ValueTable* big = small == ta ? tb : ta;
      for (const auto& [v, c] : small->counts) {
        double o = big->get(v);
        if (o > 0.0) {
          s.sum_sq += 2.0 * c * o;  // (c+o)^2 = c^2 + o^2 + 2co
          s.distinct -= 1.0;
        }
      }
    }
    if (const InstanceAttr* ia = x.find(attr)) {
      for (const auto& [v, c] : ia->values) {
        double old = (ta ? ta->get(v) : 0.0) + (tb ? tb->get(v) : 0.0);
        s.sum_sq += (old + c) * (old + c) - old * old;
        if (old == 0.0) s.distinct += 1.0;
      }
      s.total += ia->total;
      s.norm += ia->norm;
    }
    total += scoring::ec_term(attr, s, path_rule, tree_concepts);
  }
  if (path_rule && !saw_context) total += scoring::path_empty_context_term(tree_concepts);
  return total;
}

}  // namespace

ConceptTree::Decision ConceptTree::decide(const ConceptNode& n, const Instance& x) {
  const bool pr = variant_ == Variant::path;
  const double t0 = static_cast<double>(nodes_.size());
  const double hyp = (pr && config_.count_hypothetical_nodes) ? 1.0 : 0.0;
  const std::size_t m = n.children.size();
  const double parent_tally = n.tally + 1.0;

  auto child = [&](std::size_t i) -> const ConceptNode& { return node(n.children[i]); };
  auto sum_children = [&](double T, std::size_t skip) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == skip) continue;
      const ConceptNode& c = child(i);
      s += c.tally * ec_of_node(c, pr, T);
    }
    return s;
  };

  // Best two children under simulated insertion.
  const double t_same = t0;
  const double parent_ec_same = ec_node_plus_instance(&n, x, pr, t_same);
  const double sum_same = sum_children(t_same, kNoIndex);
  std::size_t best_i = kNoIndex, second_i = kNoIndex;
  double best_cu = 0.0, second_cu = 0.0;
  std::uint64_t best_draw = 0, second_draw = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const ConceptNode& c = child(i);
    double base = c.tally * ec_of_node(c, pr, t_same);
    double with_x = (c.tally + 1.0) * ec_node_plus_instance(&c, x, pr, t_same);
    double cu = ((sum_same - base + with_x) / parent_tally - parent_ec_same) /
                static_cast<double>(m);
    std::uint64_t draw = rng_();
    bool beats_best = best_i == kNoIndex || cu > best_cu || (cu == best_cu && draw > best_draw);
    if (beats_best) {
      second_i = best_i;
      second_cu = best_cu;
      second_draw = best_draw;
      best_i = i;
      best_cu = cu;
      best_draw = draw;
    } else if (second_i == kNoIndex || cu > second_cu ||
               (cu == second_cu && draw > second_draw)) {
      second_i = i;
      second_cu = cu;
      second_draw = draw;
    }
  }

  struct Cand {
    Op op;
    double cu;
    std::uint64_t draw;
  };
  std::vector<Cand> cands;
  cands.push_back({Op::add, best_cu, rng_()});

  {
    const double t = t0 + hyp;
    double parent_ec = t == t_same ? parent_ec_same : ec_node_plus_instance(&n, x, pr, t);
    double s = (t == t_same ? sum_same : sum_children(t, kNoIndex)) +
               ec_node_plus_instance(nullptr, x, pr, t);
    double cu = (s / parent_tally - parent_ec) / static_cast<double>(m + 1);
    cands.push_back({Op::create, cu, rng_()});
  }

  // Merging both children of a two-child node reproduces the node itself
  // (counts are conserved), which scores 0 and would loop forever whenever
  // the other candidates are negative; so merge needs three children.
  if (m >= 3 && second_i != kNoIndex) {
    const double t = t0 + hyp;
    const ConceptNode& a = child(best_i);
    const ConceptNode& b = child(second_i);
    double parent_ec = t == t_same ? parent_ec_same : ec_node_plus_instance(&n, x, pr, t);
    double others = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == best_i || i == second_i) continue;
      const ConceptNode& c = child(i);
      others += c.tally * ec_of_node(c, pr, t);
    }
    double merged = (a.tally + b.tally + 1.0) * ec_merged_plus_instance(a, b, x, pr, t);
    double cu = ((others + merged) / parent_tally - parent_ec) / static_cast<double>(m - 1);
    cands.push_back({Op::merge, cu, rng_()});
  }

  if (best_i != kNoIndex && !child(best_i).is_leaf()) {
    const double t = t0 - hyp;
    // Split is scored on the partition as it would stand before the instance
    // is placed; the categorization step then repeats at this node.
    const ConceptNode& b = child(best_i);
    double s = sum_children(t, best_i);
    for (NodeId cid : b.children) {
      const ConceptNode& c = node(cid);
      s += c.tally * ec_of_node(c, pr, t);
    }
    double cu = (s / n.tally - ec_of_node(n, pr, t)) /
                static_cast<double>(m - 1 + b.children.size());
    cands.push_back({Op::split, cu, rng_()});
  }

  const Cand* pick = &cands.front();
  for (const Cand& c : cands) {
    if (c.cu > pick->cu || (c.cu == pick->cu && c.draw > pick->draw)) pick = &c;
  }

  Decision d;
  d.op = pick->op;
  d.best = best_i == kNoIndex ? kNoNode : n.children[best_i];
  d.second = second_i == kNoIndex ? kNoNode : n.children[second_i];
  return d;
}

namespace {

// The path variant's restructuring maintenance applies to the in-flight
// instance as well: ancestors on the sorting path have already absorbed its
// context credits, so when a cited concept is merged or deleted the pending
// instance must mirror the table edits or the counts below the current node
// would drift from the counts above it.
void instance_on_merge(Instance& x, NodeId a, NodeId b, NodeId merged) {
  InstanceAttr* ctx = nullptr;
  for (auto& [attr, iat] : x.attrs)
    if (attr == kContextAttr) ctx = &iat;
  if (!ctx) return;
  double k = 0.0;
  for (const auto& [v, c] : ctx->values)
    if (v == a || v == b) k += c;
  if (k <= 0.0) return;
  // Node ids grow monotonically, so the merged id sorts last.
  ctx->values.emplace_back(merged, k);
  ctx->total += k;
}

void instance_on_delete(Instance& x, NodeId dying) {
  for (auto& [attr, iat] : x.attrs) {
    if (attr != kContextAttr) continue;
    for (auto it = iat.values.begin(); it != iat.values.end(); ++it) {
      if (it->first == dying) {
        iat.total -= it->second;
        iat.values.erase(it);
        break;
      }
    }
  }
}

}  // namespace

SortOutcome ConceptTree::incorporate(const Instance& original) {
  validate_instance(original);
  Instance x = original;  // restructuring maintenance may edit the pending instance
  SortOutcome out;
  instances_seen_ += 1.0;

  if (root_ == kNoNode) {
    root_ = make_leaf_from(x, kNoNode);
    out.final_node = root_;
    out.path.push_back(root_);
    out.ops.push_back(Op::create);
    if (audit_every_op_) audit_registry();
    return out;
  }

  NodeId cur = root_;
  while (true) {
    ConceptNode& n = node_mut(cur);

    if (n.is_leaf()) {
      bool absorb_here =
          is_exact_match(n, x) ||
          ((variant_ == Variant::leaf || variant_ == Variant::path) && anchor_matches(n, x));
      if (absorb_here) {
        absorb(n, x);
        out.path.push_back(cur);
        out.ops.push_back(Op::stop);
        out.final_node = cur;
        if (audit_every_op_) audit_registry();
        return out;
      }
      // Fork: a fresh node takes the leaf's place and summarizes the old
      // leaf plus a new single-instance leaf.
      NodeId mid_id = new_node();
      ConceptNode& mid = node_mut(mid_id);
      ConceptNode& old_leaf = node_mut(cur);
      mid.parent = old_leaf.parent;
      copy_counts(mid, old_leaf);
      mid.tally = old_leaf.tally;
      if (old_leaf.parent == kNoNode) {
        root_ = mid_id;
      } else {
        auto& siblings = node_mut(old_leaf.parent).children;
        *std::find(siblings.begin(), siblings.end(), cur) = mid_id;
      }
      old_leaf.parent = mid_id;
      mid.children.push_back(cur);
      absorb(mid, x);
      NodeId leaf_id = make_leaf_from(x, mid_id);
      node_mut(mid_id).children.push_back(leaf_id);
      out.path.push_back(mid_id);
      out.path.push_back(leaf_id);
      out.ops.push_back(Op::create);
      out.final_node = leaf_id;
      if (audit_every_op_) audit_registry();
      return out;
    }

    Decision d = decide(n, x);
    switch (d.op) {
      case Op::add:
        absorb(n, x);
        out.path.push_back(cur);
        out.ops.push_back(Op::add);
        cur = d.best;
        break;
      case Op::create: {
        absorb(n, x);
        out.path.push_back(cur);
        out.ops.push_back(Op::create);
        NodeId leaf_id = make_leaf_from(x, cur);
        node_mut(cur).children.push_back(leaf_id);
        out.path.push_back(leaf_id);
        out.final_node = leaf_id;
        if (audit_every_op_) audit_registry();
        return out;
      }
      case Op::merge: {
        absorb(n, x);
        out.path.push_back(cur);
        out.ops.push_back(Op::merge);
        NodeId merged = merge_children(cur, d.best, d.second);
        if (tracks_backrefs()) instance_on_merge(x, d.best, d.second, merged);
        cur = merged;
        break;
      }
      case Op::split:
        out.ops.push_back(Op::split);
        split_child(cur, d.best);
        if (tracks_backrefs()) instance_on_delete(x, d.best);
        break;  // categorization repeats at the current node
      case Op::stop:
        throw Error(ErrorKind::integrity, "stop is not a learning operator");
    }
    if (audit_every_op_) audit_registry();
  }
}

SortOutcome ConceptTree::absorb_at(NodeId leaf, const Instance& x) {
  validate_instance(x);
  ConceptNode& target = node_mut(leaf);
  if (!target.is_leaf()) throw Error(ErrorKind::lookup, "absorb_at expects a leaf");
  SortOutcome out;
  out.final_node = leaf;
  std::vector<NodeId> chain;
  for (NodeId n = leaf; n != kNoNode; n = node(n).parent) chain.push_back(n);
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    absorb(node_mut(*it), x);
    out.path.push_back(*it);
    out.ops.push_back(*it == leaf ? Op::stop : Op::add);
  }
  instances_seen_ += 1.0;
  if (audit_every_op_) audit_registry();
  return out;
}

NodeId ConceptTree::best_child_simulated(const ConceptNode& n, const Instance& x,
                                         std::optional<ValueId> anchor_filter) const {
  const bool pr = variant_ == Variant::path;
  const double t = static_cast<double>(nodes_.size());
  const std::size_t m = n.children.size();
  const double parent_tally = n.tally + 1.0;
  const double parent_ec = ec_node_plus_instance(&n, x, pr, t);

  double sum = 0.0;
  for (NodeId cid : n.children) {
    const ConceptNode& c = node(cid);
    sum += c.tally * ec_of_node(c, pr, t);
  }

  NodeId best = kNoNode;
  double best_cu = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const ConceptNode& c = node(n.children[i]);
    if (anchor_filter) {
      const ValueTable* at = c.find(kAnchorAttr);
      if (!at || at->get(*anchor_filter) <= 0.0) continue;
    }
    double base = c.tally * ec_of_node(c, pr, t);
    double with_x = (c.tally + 1.0) * ec_node_plus_instance(&c, x, pr, t);
    double cu = ((sum - base + with_x) / parent_tally - parent_ec) / static_cast<double>(m);
    if (best == kNoNode || cu > best_cu) {  // ties keep the earliest child
      best = n.children[i];
      best_cu = cu;
    }
  }
  return best;
}

SortOutcome ConceptTree::categorize(const Instance& x,
                                    std::optional<ValueId> anchor_filter) const {
  validate_instance(x);
  if (root_ == kNoNode) throw Error(ErrorKind::lookup, "categorize on empty tree");
  SortOutcome out;
  NodeId cur = root_;
  if (anchor_filter) {
    const ValueTable* at = node(root_).find(kAnchorAttr);
    if (!at || at->get(*anchor_filter) <= 0.0) {
      out.final_node = cur;
      out.path.push_back(cur);
      out.ops.push_back(Op::stop);
      out.filter_exhausted = true;
      return out;
    }
  }
  while (true) {
    const ConceptNode& n = node(cur);
    out.path.push_back(cur);
    if (n.is_leaf()) {
      out.final_node = cur;
      out.ops.push_back(Op::stop);
      return out;
    }
    NodeId next = best_child_simulated(n, x, anchor_filter);
    if (next == kNoNode) {
      out.final_node = cur;
      out.ops.push_back(Op::stop);
      out.filter_exhausted = true;
      return out;
    }
    out.ops.push_back(Op::add);
    cur = next;
  }
}

std::unordered_map<ValueId, double> ConceptTree::predict(NodeId id, AttrId attr) const {
  const ConceptNode& n = node(id);
  std::unordered_map<ValueId, double> dist;
  const ValueTable* t = n.find(attr);
  if (!t || t->total <= 0.0) return dist;
  for (const auto& [v, c] : t->counts) dist.emplace(v, c / t->total);
  return dist;
}

double ConceptTree::probability_of(NodeId id, AttrId attr,
                                   const std::vector<ValueId>& values) const {
  if (values.empty()) throw Error(ErrorKind::undefined_input, "empty value set");
  const ConceptNode& n = node(id);
  const ValueTable* t = n.find(attr);
  if (!t || t->total <= 0.0) return 0.0;
  double mass = 0.0;
  for (ValueId v : values) mass += t->get(v);
  return mass / t->total;
}

double ConceptTree::frontier_cu(NodeId parent, const std::vector<NodeId>& children) const {
  if (children.empty()) throw Error(ErrorKind::invalid_partition, "partition has no children");
  const bool pr = variant_ == Variant::path;
  const double t = static_cast<double>(nodes_.size());
  const ConceptNode& p = node(parent);
  std::vector<std::pair<double, double>> kids;
  kids.reserve(children.size());
  for (NodeId cid : children) {
    const ConceptNode& c = node(cid);
    kids.emplace_back(c.tally, ec_of_node(c, pr, t));
  }
  return scoring::partition_score(p.tally, ec_of_node(p, pr, t), kids);
}

double ConceptTree::node_ec(NodeId id, std::size_t tree_concept_count) const {
  return ec_of_node(node(id), variant_ == Variant::path,
                    static_cast<double>(tree_concept_count));
}

NodeId ConceptTree::merge_children(NodeId parent, NodeId a, NodeId b) {
  if (a == b) throw Error(ErrorKind::invalid_partition, "cannot merge a child with itself");
  ConceptNode& p = node_mut(parent);
  auto ia = std::find(p.children.begin(), p.children.end(), a);
  auto ib = std::find(p.children.begin(), p.children.end(), b);
  if (ia == p.children.end() || ib == p.children.end())
    throw Error(ErrorKind::lookup, "merge operands are not children of the given parent");

  NodeId m_id = new_node();
  ConceptNode& m = node_mut(m_id);
  ConceptNode& na = node_mut(a);
  ConceptNode& nb = node_mut(b);
  m.parent = parent;
  copy_counts(m, na);
  copy_counts(m, nb);
  m.tally = na.tally + nb.tally;
  na.parent = m_id;
  nb.parent = m_id;
  m.children.push_back(a);
  m.children.push_back(b);

  auto& pc = node_mut(parent).children;
  pc.erase(std::remove(pc.begin(), pc.end(), a), pc.end());
  pc.erase(std::remove(pc.begin(), pc.end(), b), pc.end());
  pc.push_back(m_id);

  if (tracks_backrefs()) on_merge_hook(a, b, m_id);
  return m_id;
}

void ConceptTree::split_child(NodeId parent, NodeId child) {
  ConceptNode& p = node_mut(parent);
  auto it = std::find(p.children.begin(), p.children.end(), child);
  if (it == p.children.end())
    throw Error(ErrorKind::lookup, "split operand is not a child of the given parent");
  ConceptNode& c = node_mut(child);
  if (c.is_leaf()) throw Error(ErrorKind::invalid_partition, "cannot split a leaf");

  p.children.erase(it);
  for (NodeId gid : c.children) {
    node_mut(gid).parent = parent;
    p.children.push_back(gid);
  }
  c.children.clear();

  if (tracks_backrefs()) on_delete_hook(child);
  free_node(child);
}

void ConceptTree::on_delete_hook(NodeId dying) {
  // Every table that cites the dying concept drops the entry outright.
  auto it = backrefs_.find(dying);
  if (it != backrefs_.end()) {
    std::vector<NodeId> citing(it->second.begin(), it->second.end());
    for (NodeId cid : citing) {
      ConceptNode& c = node_mut(cid);
      ValueTable& ctx = c.get_or_create(kContextAttr);
      ctx.remove_value(dying);
    }
    backrefs_.erase(dying);
  }
  // And the dying concept's own citations disappear from the registry.
  const ValueTable* ctx = node(dying).find(kContextAttr);
  if (ctx) {
    for (const auto& [v, c] : ctx->counts) note_value_removed(dying, kContextAttr, v);
  }
}

void ConceptTree::on_merge_hook(NodeId a, NodeId b, NodeId merged) {
  std::unordered_set<NodeId> citing;
  if (auto it = backrefs_.find(a); it != backrefs_.end())
    citing.insert(it->second.begin(), it->second.end());
  if (auto it = backrefs_.find(b); it != backrefs_.end())
    citing.insert(it->second.begin(), it->second.end());
  for (NodeId cid : citing) {
    ConceptNode& c = node_mut(cid);
    ValueTable& ctx = c.get_or_create(kContextAttr);
    double k = ctx.get(a) + ctx.get(b);
    if (k > 0.0) {
      // The new parent sits on the chain above both merged concepts, so it
      // inherits the sum of their credits; the child entries stay.
      if (ctx.add(merged, k) > 0) note_value_added(cid, kContextAttr, merged);
    }
  }
}

void ConceptTree::audit() const {
  if (root_ == kNoNode) {
    if (!nodes_.empty()) throw Error(ErrorKind::integrity, "no root but nodes exist");
    if (instances_seen_ != 0.0) throw Error(ErrorKind::integrity, "instances seen but tree empty");
    return;
  }

  std::unordered_set<NodeId> visited;
  std::vector<NodeId> stack{root_};
  if (node(root_).parent != kNoNode) throw Error(ErrorKind::integrity, "root has a parent");
  while (!stack.empty()) {
    NodeId id = stack.back();
    stack.pop_back();
    if (!visited.insert(id).second) throw Error(ErrorKind::integrity, "cycle in tree");
    const ConceptNode& n = node(id);
    if (!(n.tally > 0.0)) throw Error(ErrorKind::integrity, "non-positive tally");

    for (const auto& [attr, t] : n.attrs) {
      double total = 0.0, sum_sq = 0.0;
      for (const auto& [v, c] : t.counts) {
        if (!(c > 0.0)) throw Error(ErrorKind::integrity, "stored count must be positive");
        total += c;
        sum_sq += c * c;
      }
      if (!close(total, t.total)) throw Error(ErrorKind::integrity, "attribute total out of sync");
      if (!close(sum_sq, t.sum_sq)) throw Error(ErrorKind::integrity, "sum of squares out of sync");
    }

    if (!n.is_leaf()) {
      double child_tally = 0.0;
      for (NodeId cid : n.children) {
        const ConceptNode& c = node(cid);
        if (c.parent != id) throw Error(ErrorKind::integrity, "child parent link broken");
        child_tally += c.tally;
        stack.push_back(cid);
      }
      if (!close(child_tally, n.tally))
        throw Error(ErrorKind::integrity, "tally != sum of child tallies");

      // Per-attribute count conservation over the children.
      std::unordered_map<AttrId, std::unordered_map<ValueId, double>> sums;
      std::unordered_map<AttrId, double> norm_sums;
      for (NodeId cid : n.children) {
        for (const auto& [attr, t] : node(cid).attrs) {
          auto& dst = sums[attr];
          for (const auto& [v, c] : t.counts) dst[v] += c;
          norm_sums[attr] += t.norm;
        }
      }
      for (const auto& [attr, want] : sums) {
        const ValueTable* t = n.find(attr);
        for (const auto& [v, c] : want) {
          double have = t ? t->get(v) : 0.0;
          if (!close(have, c))
            throw Error(ErrorKind::integrity, "value counts != sum over children");
        }
        if (t) {
          for (const auto& [v, c] : t->counts) {
            auto f = want.find(v);
            double w = f == want.end() ? 0.0 : f->second;
            if (!close(c, w))
              throw Error(ErrorKind::integrity, "parent holds counts absent from children");
          }
          if (!close(t->norm, norm_sums[attr]))
            throw Error(ErrorKind::integrity, "norm != sum of child norms");
        }
      }
      for (const auto& [attr, t] : n.attrs) {
        if (!t.counts.empty() && !sums.count(attr))
          throw Error(ErrorKind::integrity, "parent attribute missing from all children");
      }
    }
  }
  if (visited.size() != nodes_.size())
    throw Error(ErrorKind::integrity, "orphan nodes outside the tree");
  if (!close(node(root_).tally, instances_seen_))
    throw Error(ErrorKind::integrity, "root tally != instances incorporated");

  audit_registry();
}

void ConceptTree::audit_registry() const {
  if (!tracks_backrefs()) return;
  std::unordered_map<NodeId, std::unordered_set<NodeId>> inverse;
  for (const auto& [id, up] : nodes_) {
    const ValueTable* ctx = up->find(kContextAttr);
    if (!ctx) continue;
    for (const auto& [v, c] : ctx->counts) {
      if (!nodes_.count(v))
        throw Error(ErrorKind::integrity, "context table cites a deleted concept");
      inverse[v].insert(id);
    }
  }
  if (inverse.size() != backrefs_.size())
    throw Error(ErrorKind::integrity, "registry size does not match citation relation");
  for (const auto& [v, owners] : inverse) {
    auto it = backrefs_.find(v);
    if (it == backrefs_.end() || it->second != owners)
      throw Error(ErrorKind::integrity, "registry is not the inverse of the citation relation");
  }
}

}  // namespace cobweb
