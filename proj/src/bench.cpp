#include "cobweb/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "json.hpp"

#include "cobweb/variant_leaf.hpp"
#include "cobweb/variant_path.hpp"
#include "cobweb/variant_word.hpp"

namespace cobweb {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double micros(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::micro>(b - a).count();
}

// Repeat the corpus with per-cycle suffixes until it yields at least
// min_instances window examples; fresh suffixes keep the padded text from
// being trivially duplicated.
std::vector<Sentence> pad_corpus(const std::vector<Sentence>& corpus, std::size_t min_instances) {
  std::size_t have = 0;
  for (const auto& s : corpus) have += s.tokens.size();
  std::vector<Sentence> out = corpus;
  int cycle = 2;
  while (have < min_instances) {
    for (const auto& s : corpus) {
      Sentence c;
      c.source_index = out.size();
      for (const auto& t : s.tokens) c.tokens.push_back(t + "~" + std::to_string(cycle));
      have += c.tokens.size();
      out.push_back(std::move(c));
      if (have >= min_instances) break;
    }
    ++cycle;
  }
  return out;
}

BenchPoint measure_point(Variant variant, const std::vector<Sentence>& sentences,
                         std::size_t n_instances, std::uint64_t seed, int window) {
  ConceptTree tree(variant, seed);
  std::vector<double> times;
  times.reserve(n_instances);

  std::vector<std::size_t> order(sentences.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(derive_seed(seed, SeedStream::shuffle));
  deterministic_shuffle(order, rng);

  for (std::size_t oi = 0; oi < order.size() && times.size() < n_instances; ++oi) {
    const Sentence& s = sentences[order[oi]];
    std::vector<Instance> instances;
    if (variant == Variant::word) {
      for (const auto& ex : windows(s, window)) instances.push_back(encode_word(tree, ex));
    } else {
      auto labels = label_sentence(tree, s, window);
      for (std::size_t i = 0; i < s.tokens.size(); ++i) {
        auto ctx = window_labels(labels, i, window);
        instances.push_back(variant == Variant::leaf ? encode_leaf(tree, s.tokens[i], ctx)
                                                     : encode_path(tree, s.tokens[i], ctx));
      }
    }
    for (const auto& x : instances) {
      if (times.size() >= n_instances) break;
      auto t0 = Clock::now();
      tree.incorporate(x);
      auto t1 = Clock::now();
      times.push_back(micros(t0, t1));
    }
  }

  BenchPoint p;
  p.n_instances = times.size();
  for (double t : times) p.mean_us += t;
  p.mean_us /= static_cast<double>(times.size());
  std::sort(times.begin(), times.end());
  p.median_us = times[times.size() / 2];
  p.nodes = tree.node_count();
  std::size_t internal = 0, child_links = 0;
  for (NodeId id : tree.node_ids_sorted()) {
    const ConceptNode& n = tree.node(id);
    if (!n.is_leaf()) {
      ++internal;
      child_links += n.children.size();
    }
  }
  p.branching = internal ? static_cast<double>(child_links) / static_cast<double>(internal) : 0.0;
  const ValueTable* anchors = tree.empty() ? nullptr : tree.node(tree.root()).find(kAnchorAttr);
  p.vocab = anchors ? anchors->distinct() : 0;
  return p;
}

}  // namespace

BenchReport run_bench(Variant variant, const std::vector<Sentence>& corpus,
                      const std::vector<std::size_t>& schedule, std::uint64_t seed, int window) {
  if (schedule.size() < 3)
    throw Error(ErrorKind::config, "benchmark schedule needs at least 3 points for a fit");
  for (std::size_t i = 1; i < schedule.size(); ++i)
    if (schedule[i] <= schedule[i - 1])
      throw Error(ErrorKind::config, "benchmark schedule must be strictly increasing");

  auto padded = pad_corpus(corpus, schedule.back());

  BenchReport r;
  r.variant = variant;
  for (std::size_t n : schedule) r.points.push_back(measure_point(variant, padded, n, seed, window));

  // Least squares t = a + b ln N.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double k = static_cast<double>(r.points.size());
  for (const auto& p : r.points) {
    double x = std::log(static_cast<double>(p.n_instances));
    sx += x;
    sy += p.mean_us;
    sxx += x * x;
    sxy += x * p.mean_us;
  }
  r.fit_b = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  r.fit_a = (sy - r.fit_b * sx) / k;
  for (const auto& p : r.points) {
    double x = std::log(static_cast<double>(p.n_instances));
    r.residuals.push_back(p.mean_us - (r.fit_a + r.fit_b * x));
  }
  for (std::size_t i = 1; i < r.points.size(); ++i)
    r.max_consecutive_ratio =
        std::max(r.max_consecutive_ratio, r.points[i].mean_us / r.points[i - 1].mean_us);
  return r;
}

std::string bench_report_json(const BenchReport& r) {
  json j;
  j["variant"] = variant_name(r.variant);
  json pts = json::array();
  for (const auto& p : r.points)
    pts.push_back({{"n", p.n_instances},
                   {"mean_us", p.mean_us},
                   {"median_us", p.median_us},
                   {"nodes", p.nodes},
                   {"branching", p.branching},
                   {"vocab", p.vocab}});
  j["points"] = std::move(pts);
  j["fit"] = {{"a_us", r.fit_a}, {"b_us_per_ln_n", r.fit_b}, {"residuals_us", r.residuals}};
  j["max_consecutive_ratio"] = r.max_consecutive_ratio;
  return j.dump(2) + "\n";
}

}  // namespace cobweb
