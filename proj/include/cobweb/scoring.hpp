#pragma once

#include "cobweb/counts.hpp"

namespace cobweb::scoring {

// The handful of numbers the category-utility math needs per attribute.
// Everything here is maintainable in O(1) per count update, which is what
// keeps operator simulation from rescanning whole tables.
struct AttrScalars {
  double total = 0.0;
  double norm = 0.0;
  double sum_sq = 0.0;
  double distinct = 0.0;
};

inline AttrScalars of(const ValueTable& t) {
  return {t.total, t.norm, t.sum_sq, static_cast<double>(t.counts.size())};
}

inline AttrScalars of(const InstanceAttr& a) {
  AttrScalars s;
  s.total = a.total;
  s.norm = a.norm;
  s.distinct = static_cast<double>(a.values.size());
  for (const auto& [v, c] : a.values) s.sum_sq += c * c;
  return s;
}

/// Scalars of a hypothetical table equal to `t` (may be null) with the
/// instance attribute's counts added.
inline AttrScalars with_instance(const ValueTable* t, const InstanceAttr& a) {
  AttrScalars s = t ? of(*t) : AttrScalars{};
  for (const auto& [v, c] : a.values) {
    double old = t ? t->get(v) : 0.0;
    s.sum_sq += (old + c) * (old + c) - old * old;
    if (old == 0.0) s.distinct += 1.0;
  }
  s.total += a.total;
  s.norm += a.norm;
  return s;
}

/// sum_j P(A=V_j)^2 with per-attribute denominator.
inline double plain_term(const AttrScalars& s) {
  return s.norm > 0.0 ? s.sum_sq / (s.norm * s.norm) : 0.0;
}

/// The path variant's context contribution:
///   sum_L [P(L)^2 + (1-P(L))^2] / T  +  (T - #labels) / T
/// with P(L) = count_L / labeled-token-count. Expanding the sum gives the
/// closed form below, so the term never touches the table itself.
inline double path_context_term(const AttrScalars& s, double tree_concepts) {
  if (tree_concepts <= 0.0) return 0.0;
  double present = 0.0;
  if (s.norm > 0.0 && s.distinct > 0.0)
    present = 2.0 * s.sum_sq / (s.norm * s.norm) + s.distinct - 2.0 * s.total / s.norm;
  return (present + (tree_concepts - s.distinct)) / tree_concepts;
}

inline double ec_term(AttrId attr, const AttrScalars& s, bool path_context_rule,
                      double tree_concepts) {
  if (path_context_rule && attr == kContextAttr) return path_context_term(s, tree_concepts);
  return plain_term(s);
}

/// The absence term owed by a concept with no context table at all: every
/// concept in the tree is correctly guessed absent, contributing T/T = 1.
inline double path_empty_context_term(double tree_concepts) {
  return path_context_term(AttrScalars{}, tree_concepts);
}

/// (sum_k P(C_k) ec_k - ec_parent) / n.
inline double partition_score(double parent_tally, double parent_ec,
                              const std::vector<std::pair<double, double>>& child_tally_ec) {
  double s = 0.0;
  for (const auto& [tally, child_ec] : child_tally_ec) s += (tally / parent_tally) * child_ec;
  return (s - parent_ec) / static_cast<double>(child_tally_ec.size());
}

}  // namespace cobweb::scoring
