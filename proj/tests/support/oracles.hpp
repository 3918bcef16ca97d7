#pragma once

// Independent brute-force oracles for the scoring math and clustering
// metrics. These deliberately re-derive everything from raw maps with naive
// loops and share no code with the library's scoring path.

#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "cobweb/concept_tree.hpp"
#include "cobweb/counts.hpp"

namespace oracle {

using AttrMap = std::map<cobweb::AttrId, std::map<cobweb::ValueId, double>>;

struct Summary {
  double tally = 0.0;
  AttrMap counts;
  std::map<cobweb::AttrId, double> norms;  // defaults to the attribute total
};

inline Summary from_count_summary(const cobweb::CountSummary& s) {
  Summary o;
  o.tally = s.tally;
  for (const auto& [attr, ia] : s.counts.attrs) {
    for (const auto& [v, c] : ia.values) o.counts[attr][v] += c;
    o.norms[attr] = ia.norm;
  }
  return o;
}

inline double attr_total(const std::map<cobweb::ValueId, double>& m) {
  double t = 0.0;
  for (const auto& [v, c] : m) t += c;
  return t;
}

// sum_i sum_j P(A_i = V_ij)^2 with per-attribute totals.
inline double expected_correct(const Summary& s) {
  double out = 0.0;
  for (const auto& [attr, values] : s.counts) {
    double total = attr_total(values);
    if (total <= 0.0) continue;
    for (const auto& [v, c] : values) out += (c / total) * (c / total);
  }
  return out;
}

inline double category_utility(const Summary& parent, const std::vector<Summary>& children) {
  double s = 0.0;
  double parent_ec = expected_correct(parent);
  for (const auto& c : children) s += (c.tally / parent.tally) * (expected_correct(c) - parent_ec);
  return s / static_cast<double>(children.size());
}

// The path variant's expected-correct: anchors (and any non-context
// attribute) as above; context labels as presence/absence Bernoulli pairs
// over the labeled-token count, scaled by the concept count T; plus one
// absence credit for every concept the table never mentions.
inline double ec(const Summary& s, std::size_t tree_concepts) {
  double out = 0.0;
  const double T = static_cast<double>(tree_concepts);
  for (const auto& [attr, values] : s.counts) {
    if (attr == cobweb::kContextAttr) {
      auto nit = s.norms.find(attr);
      double norm = nit != s.norms.end() ? nit->second : attr_total(values);
      double present = 0.0;
      for (const auto& [v, c] : values) {
        double p = norm > 0.0 ? c / norm : 0.0;
        present += p * p + (1.0 - p) * (1.0 - p);
      }
      out += present / T + (T - static_cast<double>(values.size())) / T;
    } else {
      double total = attr_total(values);
      if (total <= 0.0) continue;
      for (const auto& [v, c] : values) out += (c / total) * (c / total);
    }
  }
  // A concept with no context table still gets full absence credit.
  if (!s.counts.count(cobweb::kContextAttr)) out += 1.0;
  return out;
}

inline double path_category_utility(const Summary& parent, const std::vector<Summary>& children,
                                    std::size_t tree_concepts) {
  double s = 0.0;
  double parent_ec = ec(parent, tree_concepts);
  for (const auto& c : children)
    s += (c.tally / parent.tally) * (ec(c, tree_concepts) - parent_ec);
  return s / static_cast<double>(children.size());
}

// Pair-counting adjusted Rand index: ARI = 2(ad - bc) / ((a+b)(b+d) + (a+c)(c+d))
// where a/b/c/d count instance pairs by same/different membership in the two
// partitions.
inline double ari_pairs(const std::vector<int>& x, const std::vector<int>& y) {
  double a = 0, b = 0, c = 0, d = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      bool sx = x[i] == x[j];
      bool sy = y[i] == y[j];
      if (sx && sy)
        a += 1;
      else if (sx && !sy)
        b += 1;
      else if (!sx && sy)
        c += 1;
      else
        d += 1;
    }
  }
  double den = (a + b) * (b + d) + (a + c) * (c + d);
  if (den == 0.0) return 0.0;
  return 2.0 * (a * d - b * c) / den;
}

// All frontier partitions of a tree: every set of nodes that covers each
// leaf exactly once. Exponential; for tiny fixtures only.
inline void enumerate_frontiers(const cobweb::ConceptTree& tree, cobweb::NodeId at,
                                std::vector<std::vector<cobweb::NodeId>>& out) {
  const auto& n = tree.node(at);
  std::vector<std::vector<cobweb::NodeId>> mine{{at}};
  if (!n.is_leaf()) {
    std::vector<std::vector<std::vector<cobweb::NodeId>>> per_child;
    for (auto cid : n.children) {
      std::vector<std::vector<cobweb::NodeId>> sub;
      enumerate_frontiers(tree, cid, sub);
      per_child.push_back(std::move(sub));
    }
    std::vector<std::vector<cobweb::NodeId>> combos{{}};
    for (const auto& options : per_child) {
      std::vector<std::vector<cobweb::NodeId>> next;
      for (const auto& base : combos) {
        for (const auto& opt : options) {
          auto merged = base;
          merged.insert(merged.end(), opt.begin(), opt.end());
          next.push_back(std::move(merged));
        }
      }
      combos = std::move(next);
    }
    for (auto& c : combos) mine.push_back(std::move(c));
  }
  out = std::move(mine);
}

}  // namespace oracle
