#pragma once

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cobweb/types.hpp"

namespace cobweb {

/// Per-attribute value counts stored at a concept, with the running scalars
/// the category-utility math needs. `total` is always the sum of the stored
/// counts. `norm` is the probability denominator: it equals `total` except
/// for the path variant's context attribute, where it counts labeled context
/// tokens rather than chain credits.
struct ValueTable {
  std::unordered_map<ValueId, double> counts;
  double total = 0.0;
  double norm = 0.0;
  double sum_sq = 0.0;

  double get(ValueId v) const {
    auto it = counts.find(v);
    return it == counts.end() ? 0.0 : it->second;
  }

  // Returns +1 if the value was newly created, -1 if it was removed, 0 otherwise.
  int add(ValueId v, double delta) {
    auto it = counts.find(v);
    double old = it == counts.end() ? 0.0 : it->second;
    double now = old + delta;
    total += delta;
    sum_sq += now * now - old * old;
    if (now <= 0.0) {
      if (it != counts.end()) {
        counts.erase(it);
        return -1;
      }
      return 0;
    }
    if (it == counts.end()) {
      counts.emplace(v, now);
      return +1;
    }
    it->second = now;
    return 0;
  }

  // Drops a value entirely, adjusting total/sum_sq but not norm.
  // Returns the removed count (0 if absent).
  double remove_value(ValueId v) {
    auto it = counts.find(v);
    if (it == counts.end()) return 0.0;
    double c = it->second;
    total -= c;
    sum_sq -= c * c;
    counts.erase(it);
    return c;
  }

  std::size_t distinct() const { return counts.size(); }
};

/// One attribute of an instance: a small sorted (value, count) list.
/// `norm` defaults to `total`; the path encoder sets it to the number of
/// labeled context tokens instead.
struct InstanceAttr {
  std::vector<std::pair<ValueId, double>> values;  // sorted by ValueId
  double total = 0.0;
  double norm = 0.0;

  void finalize() {
    std::sort(values.begin(), values.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    total = 0.0;
    for (const auto& [v, c] : values) total += c;
    if (norm == 0.0) norm = total;
  }
};

struct Instance {
  std::vector<std::pair<AttrId, InstanceAttr>> attrs;  // sorted by AttrId

  const InstanceAttr* find(AttrId a) const {
    for (const auto& [id, attr] : attrs)
      if (id == a) return &attr;
    return nullptr;
  }

  InstanceAttr& get_or_create(AttrId a) {
    for (auto& [id, attr] : attrs)
      if (id == a) return attr;
    attrs.emplace_back(a, InstanceAttr{});
    std::sort(attrs.begin(), attrs.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    return get_or_create(a);
  }

  bool empty() const { return attrs.empty(); }
};

/// A hypothetical concept summary: what a node *would* hold. Used by the
/// stand-alone partition scoring entry points and by tests.
struct CountSummary {
  double tally = 0.0;
  Instance counts;
};

/// A parent plus a candidate decomposition into child summaries.
struct Partition {
  CountSummary parent;
  std::vector<CountSummary> children;
};

/// Expected correct guesses for a summary under the plain scoring rule:
/// sum over attributes of sum_j P(A=V_j | C)^2, with per-attribute totals
/// as denominators.
double expected_correct(const CountSummary& c);

/// Plain category utility of a partition. Throws invalid_partition when the
/// partition has no children or a non-positive parent tally.
double category_utility(const Partition& p);

/// Expected correct guesses under the path variant's rule: anchors score as
/// in `expected_correct`; each context label contributes a presence/absence
/// Bernoulli pair scaled by 1/T; labels the concept has never seen add
/// (T - #labels)/T. `tree_concept_count` is T.
double ec(const CountSummary& c, std::size_t tree_concept_count);

/// Category utility with `ec` substituted for the plain per-child score.
double path_category_utility(const Partition& p, std::size_t tree_concept_count);

}  // namespace cobweb
