#include "cobweb/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <map>
#include <thread>
#include <unordered_set>

#include "json.hpp"

#include "cobweb/variant_leaf.hpp"
#include "cobweb/variant_path.hpp"
#include "cobweb/variant_word.hpp"

namespace cobweb {

using nlohmann::json;

std::string synth_kind_name(SynthKind k) {
  return k == SynthKind::synonym ? "synonym" : "homonym";
}

namespace {

std::string suffixed(const std::string& w, int copy) { return w + "-" + std::to_string(copy); }

SyntheticCorpus synthesize(const std::vector<Sentence>& selected,
                           const std::vector<std::string>& targets, int copies, SynthKind kind) {
  std::unordered_set<std::string> target_set(targets.begin(), targets.end());
  SyntheticCorpus out;
  out.targets = targets;
  out.copies = copies;
  out.kind = kind;
  for (int copy = 1; copy <= copies; ++copy) {
    for (const auto& base : selected) {
      Sentence s;
      s.source_index = out.sentences.size();
      std::vector<std::string> truth;
      for (const auto& tok : base.tokens) {
        bool is_target = target_set.count(tok) != 0;
        if (kind == SynthKind::synonym) {
          if (is_target) {
            s.tokens.push_back(suffixed(tok, copy));
            truth.push_back(tok);  // label = the word the variant is based on
          } else {
            s.tokens.push_back(tok);
            truth.emplace_back();
          }
        } else {
          if (is_target) {
            s.tokens.push_back(tok);
            truth.push_back(suffixed(tok, copy));  // label = which sense/context
          } else {
            s.tokens.push_back(suffixed(tok, copy));
            truth.emplace_back();
          }
        }
      }
      out.sentences.push_back(std::move(s));
      out.truth.push_back(std::move(truth));
    }
  }
  return out;
}

std::vector<Sentence> select_sentences(const std::vector<Sentence>& base, std::size_t n_select,
                                       std::uint64_t seed) {
  if (base.size() < n_select)
    throw Error(ErrorKind::empty_corpus,
                "corpus has " + std::to_string(base.size()) + " sentences, need " +
                    std::to_string(n_select));
  std::mt19937_64 rng(derive_seed(seed, SeedStream::sample));
  auto idx = sample_indices(base.size(), n_select, rng);
  std::vector<Sentence> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(base[i]);
  return out;
}

std::vector<std::string> top_targets(const std::vector<Sentence>& sentences, std::size_t k) {
  TopWords tw = top_frequent_words(sentences, k);
  if (tw.truncated)
    throw Error(ErrorKind::empty_corpus,
                "corpus has fewer than " + std::to_string(k) + " distinct words");
  return tw.words;
}

}  // namespace

SyntheticCorpus make_synonym_corpus(const std::vector<Sentence>& base, std::size_t n_select,
                                    std::size_t top_k, int copies, std::uint64_t seed) {
  auto selected = select_sentences(base, n_select, seed);
  return synthesize(selected, top_targets(selected, top_k), copies, SynthKind::synonym);
}

SyntheticCorpus make_homonym_corpus(const std::vector<Sentence>& base, std::size_t n_select,
                                    std::size_t top_k, int copies, std::uint64_t seed) {
  auto selected = select_sentences(base, n_select, seed);
  return synthesize(selected, top_targets(selected, top_k), copies, SynthKind::homonym);
}

double ari(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size())
    throw Error(ErrorKind::undefined_input, "partitions cover different instances");
  const std::size_t n = a.size();
  if (n < 2) throw Error(ErrorKind::undefined_input, "ARI needs at least two instances");

  std::map<std::pair<int, int>, double> cells;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < n; ++i) {
    cells[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  auto choose2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0.0, row_pairs = 0.0, col_pairs = 0.0;
  for (const auto& [k, v] : cells) index += choose2(v);
  for (const auto& [k, v] : rows) row_pairs += choose2(v);
  for (const auto& [k, v] : cols) col_pairs += choose2(v);
  double total_pairs = choose2(static_cast<double>(n));
  double expected = row_pairs * col_pairs / total_pairs;
  double max_index = 0.5 * (row_pairs + col_pairs);
  if (max_index == expected) return 0.0;  // single-cluster or all-singleton degeneracies
  return (index - expected) / (max_index - expected);
}

FlatAri best_flat_ari(const ConceptTree& tree,
                      const std::vector<std::pair<NodeId, int>>& instances,
                      std::size_t max_clusters) {
  if (instances.size() < 2)
    throw Error(ErrorKind::undefined_input, "need at least two evaluable instances");
  if (tree.empty()) throw Error(ErrorKind::lookup, "tree is empty");

  std::vector<int> labels(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) labels[i] = instances[i].second;

  const ConceptNode& root = tree.node(tree.root());
  if (root.is_leaf()) return {0.0, 0};  // one cluster: chance-corrected score is 0

  // Frontier state: cluster ids are stable per frontier node; splitting a
  // node reassigns only the instances inside it.
  std::vector<NodeId> frontier = root.children;
  std::vector<int> cluster(instances.size());
  std::vector<std::vector<std::size_t>> members;

  auto locate = [&](NodeId leaf, const std::unordered_map<NodeId, int>& index) {
    NodeId n = leaf;
    while (n != kNoNode) {
      auto it = index.find(n);
      if (it != index.end()) return it->second;
      n = tree.node(n).parent;
    }
    throw Error(ErrorKind::integrity, "instance leaf not under any frontier node");
  };

  {
    std::unordered_map<NodeId, int> index;
    for (std::size_t i = 0; i < frontier.size(); ++i) index[frontier[i]] = static_cast<int>(i);
    members.resize(frontier.size());
    for (std::size_t i = 0; i < instances.size(); ++i) {
      cluster[i] = locate(instances[i].first, index);
      members[cluster[i]].push_back(i);
    }
  }

  const double total_concepts = static_cast<double>(tree.node_count());
  auto term = [&](NodeId id) {
    const ConceptNode& c = tree.node(id);
    return c.tally * tree.node_ec(id, tree.node_count());
  };

  double sum_terms = 0.0;
  for (NodeId id : frontier) sum_terms += term(id);
  const double parent_ec = tree.node_ec(tree.root(), tree.node_count());
  const double parent_tally = root.tally;
  (void)total_concepts;

  FlatAri best{ari(cluster, labels), 0};
  std::size_t step = 0;

  while (frontier.size() < max_clusters) {
    // Pick the frontier node whose replacement by its children yields the
    // highest-scoring frontier partition.
    std::size_t pick = static_cast<std::size_t>(-1);
    double pick_score = 0.0;
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      const ConceptNode& f = tree.node(frontier[i]);
      if (f.is_leaf()) continue;
      double s = sum_terms - term(frontier[i]);
      for (NodeId c : f.children) s += term(c);
      double n_children = static_cast<double>(frontier.size() - 1 + f.children.size());
      double score = (s / parent_tally - parent_ec) / n_children;
      if (pick == static_cast<std::size_t>(-1) || score > pick_score) {
        pick = i;
        pick_score = score;
      }
    }
    if (pick == static_cast<std::size_t>(-1)) break;  // frontier is all leaves

    const ConceptNode& f = tree.node(frontier[pick]);
    sum_terms -= term(frontier[pick]);
    std::vector<std::size_t> moved = std::move(members[pick]);

    // The first child reuses the old cluster slot; the rest append.
    std::unordered_map<NodeId, int> child_index;
    frontier[pick] = f.children[0];
    members[pick] = {};
    child_index[f.children[0]] = static_cast<int>(pick);
    for (std::size_t k = 1; k < f.children.size(); ++k) {
      child_index[f.children[k]] = static_cast<int>(frontier.size());
      frontier.push_back(f.children[k]);
      members.emplace_back();
    }
    for (NodeId c : f.children) sum_terms += term(c);

    for (std::size_t i : moved) {
      cluster[i] = locate(instances[i].first, child_index);
      members[cluster[i]].push_back(i);
    }

    ++step;
    double score = ari(cluster, labels);
    if (score > best.best_ari) best = {score, step};
  }
  return best;
}

BootstrapCi bootstrap_ci(const std::vector<double>& values, int resamples, std::uint64_t seed) {
  if (values.empty()) throw Error(ErrorKind::undefined_input, "bootstrap over empty sample");
  std::mt19937_64 rng(seed);
  std::vector<double> means;
  means.reserve(resamples);
  const std::size_t n = values.size();
  for (int r = 0; r < resamples; ++r) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += values[rng() % n];
    means.push_back(s / static_cast<double>(n));
  }
  std::sort(means.begin(), means.end());
  auto pick = [&](double q) {
    double pos = q * static_cast<double>(means.size() - 1);
    return means[static_cast<std::size_t>(pos + 0.5)];
  };
  return {pick(0.025), pick(0.975)};
}

std::vector<InstanceRecord> train_variant(ConceptTree& tree,
                                          const std::vector<Sentence>& sentences,
                                          std::uint64_t shuffle_seed, int window,
                                          const PreIncorporateHook& hook) {
  switch (tree.variant()) {
    case Variant::word: return train_word(tree, sentences, shuffle_seed, window, hook);
    case Variant::leaf: return train_leaf(tree, sentences, shuffle_seed, window, hook);
    case Variant::path: return train_path(tree, sentences, shuffle_seed, window, hook);
  }
  throw Error(ErrorKind::config, "unknown variant");
}

GroupingSummary run_grouping_experiment(Variant variant, SynthKind kind,
                                        const std::vector<Sentence>& base,
                                        const ExperimentParams& params, std::uint64_t seed) {
  auto one_run = [&](int r) -> GroupingRun {
    std::uint64_t run_seed =
        mix_seed(seed, static_cast<std::uint64_t>(SeedStream::run_base) + static_cast<std::uint64_t>(r));
    SyntheticCorpus synth =
        kind == SynthKind::synonym
            ? make_synonym_corpus(base, params.n_select, params.top_k, params.copies, run_seed)
            : make_homonym_corpus(base, params.n_select, params.top_k, params.copies, run_seed);

    ConceptTree tree(variant, run_seed);
    auto records = train_variant(tree, synth.sentences, derive_seed(run_seed, SeedStream::shuffle),
                                 params.window);

    std::vector<std::pair<NodeId, int>> evaluable;
    std::map<std::string, int> label_ids;
    for (const auto& rec : records) {
      const std::string& t = synth.truth[rec.sentence][rec.token];
      if (t.empty()) continue;
      auto [it, unused] = label_ids.emplace(t, static_cast<int>(label_ids.size()));
      evaluable.emplace_back(rec.leaf, it->second);
    }
    FlatAri fa = best_flat_ari(tree, evaluable,
                               std::min(params.max_clusters, evaluable.size()));
    return {run_seed, fa.best_ari, fa.splits};
  };

  GroupingSummary out;
  out.variant = variant;
  out.kind = kind;
  out.runs.resize(params.runs);

  unsigned jobs = params.jobs ? params.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(params.runs));
  if (jobs <= 1) {
    for (int r = 0; r < params.runs; ++r) out.runs[r] = one_run(r);
  } else {
    std::vector<std::future<GroupingRun>> futs;
    futs.reserve(params.runs);
    for (int r = 0; r < params.runs; ++r)
      futs.push_back(std::async(std::launch::async, one_run, r));
    for (int r = 0; r < params.runs; ++r) out.runs[r] = futs[r].get();
  }

  std::vector<double> scores;
  for (const auto& r : out.runs) scores.push_back(r.best_ari);
  out.mean = 0.0;
  for (double s : scores) out.mean += s;
  out.mean /= static_cast<double>(scores.size());
  out.ci = bootstrap_ci(scores, params.bootstrap_resamples, derive_seed(seed, SeedStream::bootstrap));
  return out;
}

RecallResult run_recall_experiment(Variant variant, const std::vector<Sentence>& base,
                                   const RecallParams& params, std::uint64_t seed) {
  std::vector<Sentence> selected(base.begin(),
                                 base.begin() + std::min(params.n_sentences, base.size()));
  auto targets = top_targets(base, params.top_k);
  SyntheticCorpus synth = synthesize(selected, targets, params.copies, SynthKind::synonym);

  ConceptTree tree(variant, seed);
  // Pre-intern the synonym sets so the measurement hook can look them up.
  std::map<std::string, std::vector<ValueId>> sets;
  for (const auto& t : targets) {
    std::vector<ValueId> ids;
    for (int c = 1; c <= params.copies; ++c) ids.push_back(tree.words().intern(suffixed(t, c)));
    sets.emplace(t, std::move(ids));
  }

  RecallResult out;
  std::map<std::string, int> seen;
  PreIncorporateHook hook = [&](ConceptTree& t, std::size_t si, std::size_t ti,
                                const Instance& x) {
    const std::string& truth = synth.truth[si][ti];
    if (truth.empty()) return;
    int exposure = seen[truth];
    double p = 0.0;
    if (!t.empty()) {
      SortOutcome so = t.categorize(x);
      p = t.probability_of(so.final_node, kAnchorAttr, sets.at(truth));
    }
    out.records.push_back(
        {seed, truth, exposure, p, synth.sentences[si].tokens[ti]});
    seen[truth] = exposure + 1;
  };
  train_variant(tree, synth.sentences, derive_seed(seed, SeedStream::shuffle), params.window,
                hook);

  // Learning curve: one bin per exposure count, bins above the 95th
  // percentile pooled into a terminal bin, bootstrap CI per bin.
  if (!out.records.empty()) {
    std::vector<int> exposures;
    exposures.reserve(out.records.size());
    for (const auto& r : out.records) exposures.push_back(r.exposure);
    std::sort(exposures.begin(), exposures.end());
    int p95 = exposures[static_cast<std::size_t>(0.95 * static_cast<double>(exposures.size() - 1))];

    std::map<int, std::vector<double>> bins;
    int max_exposure = exposures.back();
    for (const auto& r : out.records) bins[std::min(r.exposure, p95)].push_back(r.probability);
    std::uint64_t ci_seed = derive_seed(seed, SeedStream::bootstrap);
    for (auto& [e, vals] : bins) {
      CurvePoint pt;
      pt.exposure_lo = e;
      pt.exposure_hi = e == p95 ? max_exposure : e;
      pt.n = vals.size();
      for (double v : vals) pt.mean += v;
      pt.mean /= static_cast<double>(vals.size());
      BootstrapCi ci = bootstrap_ci(vals, params.bootstrap_resamples,
                                    mix_seed(ci_seed, static_cast<std::uint64_t>(e)));
      pt.lo = ci.lo;
      pt.hi = ci.hi;
      out.curve.push_back(pt);
    }
  }
  return out;
}

void write_grouping_csv(const GroupingSummary& s, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::io, "cannot write " + path);
  f << "variant,kind,run,seed,best_ari,splits\n";
  for (std::size_t i = 0; i < s.runs.size(); ++i) {
    f << variant_name(s.variant) << ',' << synth_kind_name(s.kind) << ',' << i << ','
      << s.runs[i].seed << ',' << s.runs[i].best_ari << ',' << s.runs[i].splits << '\n';
  }
}

std::string grouping_summary_json(const GroupingSummary& s) {
  json j;
  j["variant"] = variant_name(s.variant);
  j["kind"] = synth_kind_name(s.kind);
  json runs = json::array();
  for (const auto& r : s.runs)
    runs.push_back({{"seed", r.seed}, {"best_ari", r.best_ari}, {"splits", r.splits}});
  j["runs"] = std::move(runs);
  j["mean"] = s.mean;
  j["ci95"] = {s.ci.lo, s.ci.hi};
  return j.dump(2) + "\n";
}

void write_records_csv(const std::vector<EvalRecord>& records, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::io, "cannot write " + path);
  f << "seed,target,anchor,exposure,probability\n";
  for (const auto& r : records)
    f << r.seed << ',' << r.target << ',' << r.anchor << ',' << r.exposure << ','
      << r.probability << '\n';
}

void write_curve_csv(const std::vector<CurvePoint>& curve, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::io, "cannot write " + path);
  f << "exposure_lo,exposure_hi,mean,ci_lo,ci_hi,n\n";
  for (const auto& p : curve)
    f << p.exposure_lo << ',' << p.exposure_hi << ',' << p.mean << ',' << p.lo << ',' << p.hi
      << ',' << p.n << '\n';
}

std::string recall_summary_json(Variant variant, const RecallResult& r, std::uint64_t seed) {
  json j;
  j["variant"] = variant_name(variant);
  j["kind"] = "recall";
  j["seed"] = seed;
  j["records"] = r.records.size();
  json curve = json::array();
  for (const auto& p : r.curve)
    curve.push_back({{"exposure_lo", p.exposure_lo},
                     {"exposure_hi", p.exposure_hi},
                     {"mean", p.mean},
                     {"ci95", {p.lo, p.hi}},
                     {"n", p.n}});
  j["curve"] = std::move(curve);
  return j.dump(2) + "\n";
}

}  // namespace cobweb
