#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cobweb/concept_tree.hpp"
#include "cobweb/corpus.hpp"

namespace cobweb {

struct BenchPoint {
  std::size_t n_instances = 0;
  double mean_us = 0.0;
  double median_us = 0.0;
  std::size_t nodes = 0;
  double branching = 0.0;  // mean children per internal node
  std::size_t vocab = 0;   // distinct anchor words
};

struct BenchReport {
  Variant variant;
  std::vector<BenchPoint> points;
  // Least-squares fit mean_us ~= a + b * ln(N) and its residuals.
  double fit_a = 0.0;
  double fit_b = 0.0;
  std::vector<double> residuals;
  double max_consecutive_ratio = 0.0;  // max of mean_us[i+1] / mean_us[i]
};

/// Times incorporate() per instance at each schedule point, training a fresh
/// tree per point. Only the incorporate call is inside the timed region;
/// preprocessing, labeling, and encoding are not. The corpus is cycled with
/// fresh suffixes when it is too small for the largest N.
BenchReport run_bench(Variant variant, const std::vector<Sentence>& corpus,
                      const std::vector<std::size_t>& schedule, std::uint64_t seed,
                      int window = 4);

std::string bench_report_json(const BenchReport& r);

}  // namespace cobweb
