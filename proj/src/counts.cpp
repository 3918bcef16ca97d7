#include "cobweb/counts.hpp"

#include "cobweb/scoring.hpp"

namespace cobweb {

namespace {

double summary_ec(const CountSummary& c, bool path_rule, double tree_concepts) {
  double total = 0.0;
  bool saw_context = false;
  for (const auto& [attr, ia] : c.counts.attrs) {
    saw_context = saw_context || attr == kContextAttr;
    total += scoring::ec_term(attr, scoring::of(ia), path_rule, tree_concepts);
  }
  if (path_rule && !saw_context) total += scoring::path_empty_context_term(tree_concepts);
  return total;
}

double partition_score(const Partition& p, bool path_rule, double tree_concepts) {
  if (p.children.empty())
    throw Error(ErrorKind::invalid_partition, "partition has no children");
  if (p.parent.tally <= 0.0)
    throw Error(ErrorKind::invalid_partition, "partition parent has non-positive tally");
  std::vector<std::pair<double, double>> kids;
  kids.reserve(p.children.size());
  for (const auto& c : p.children)
    kids.emplace_back(c.tally, summary_ec(c, path_rule, tree_concepts));
  return scoring::partition_score(p.parent.tally, summary_ec(p.parent, path_rule, tree_concepts),
                                  kids);
}

}  // namespace

double expected_correct(const CountSummary& c) { return summary_ec(c, false, 0.0); }

double category_utility(const Partition& p) { return partition_score(p, false, 0.0); }

double ec(const CountSummary& c, std::size_t tree_concept_count) {
  return summary_ec(c, true, static_cast<double>(tree_concept_count));
}

double path_category_utility(const Partition& p, std::size_t tree_concept_count) {
  return partition_score(p, true, static_cast<double>(tree_concept_count));
}

}  // namespace cobweb
