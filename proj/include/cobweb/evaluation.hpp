#pragma once

#include <string>
#include <vector>

#include "cobweb/concept_tree.hpp"
#include "cobweb/corpus.hpp"
#include "cobweb/variant_common.hpp"

namespace cobweb {

enum class SynthKind { synonym, homonym };
std::string synth_kind_name(SynthKind k);

/// A synthesized corpus plus per-token ground truth ("" where a token is not
/// an evaluable instance).
struct SyntheticCorpus {
  std::vector<Sentence> sentences;
  std::vector<std::vector<std::string>> truth;
  std::vector<std::string> targets;
  int copies = 0;
  SynthKind kind = SynthKind::synonym;
};

/// Randomly selects `n_select` sentences, finds the top-k words among them,
/// and emits `copies` duplicates of each sentence with every target
/// occurrence suffixed by the copy number ("door" -> "door-1" ... "door-5").
/// Ground truth for a variant-anchored token is the base word.
SyntheticCorpus make_synonym_corpus(const std::vector<Sentence>& base, std::size_t n_select,
                                    std::size_t top_k, int copies, std::uint64_t seed);

/// The inverse synthesis: targets keep their spelling while every other word
/// is suffixed by the copy number, so each target appears in `copies`
/// disjoint contexts. Ground truth for a target token is target-copy.
SyntheticCorpus make_homonym_corpus(const std::vector<Sentence>& base, std::size_t n_select,
                                    std::size_t top_k, int copies, std::uint64_t seed);

/// Hubert-Arabie adjusted Rand index between two flat partitions of the same
/// instances. Throws undefined_input on fewer than two instances. Degenerate
/// comparisons where Max == Expected score 0.
double ari(const std::vector<int>& a, const std::vector<int>& b);

struct FlatAri {
  double best_ari = 0.0;
  std::size_t splits = 0;  // number of frontier refinements at the best step
};

/// Extracts flat clusterings by successively refining a frontier that starts
/// at the root's children: each step replaces the frontier node whose
/// replacement-by-its-children scores the highest category utility (leaves
/// are ineligible), computes the ARI of the induced instance clustering
/// against the ground truth, and the maximum over all steps is returned.
/// `instances` pairs each evaluable instance's landing leaf with its label.
FlatAri best_flat_ari(const ConceptTree& tree,
                      const std::vector<std::pair<NodeId, int>>& instances,
                      std::size_t max_clusters = 512);

struct BootstrapCi {
  double lo = 0.0;
  double hi = 0.0;
};

/// Percentile bootstrap over the sample mean; 95% interval.
BootstrapCi bootstrap_ci(const std::vector<double>& values, int resamples, std::uint64_t seed);

/// Dispatches to train_word / train_leaf / train_path by tree variant.
std::vector<InstanceRecord> train_variant(ConceptTree& tree,
                                          const std::vector<Sentence>& sentences,
                                          std::uint64_t shuffle_seed, int window,
                                          const PreIncorporateHook& hook = {});

struct ExperimentParams {
  std::size_t n_select = 200;
  std::size_t top_k = 5;
  int copies = 5;
  int window = 4;
  int runs = 6;
  std::size_t max_clusters = 512;
  int bootstrap_resamples = 10000;
  unsigned jobs = 0;  // 0 = hardware concurrency
};

struct GroupingRun {
  std::uint64_t seed = 0;
  double best_ari = 0.0;
  std::size_t splits = 0;
};

struct GroupingSummary {
  Variant variant;
  SynthKind kind;
  std::vector<GroupingRun> runs;
  double mean = 0.0;
  BootstrapCi ci;
};

/// Per run: fresh sentence sample, fresh synthesis, shuffle, train, extract
/// the best flat ARI. Runs are independent and execute in parallel.
GroupingSummary run_grouping_experiment(Variant variant, SynthKind kind,
                                        const std::vector<Sentence>& base,
                                        const ExperimentParams& params, std::uint64_t seed);

struct EvalRecord {
  std::uint64_t seed = 0;
  std::string target;     // base word of the synonym set
  int exposure = 0;       // prior sightings of the set within the run
  double probability = 0.0;
  std::string anchor;     // the variant actually observed
};

struct CurvePoint {
  int exposure_lo = 0;
  int exposure_hi = 0;  // == lo except for the pooled terminal bin
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n = 0;
};

struct RecallParams {
  std::size_t n_sentences = 400;  // "first N" of the preprocessed corpus
  std::size_t top_k = 50;         // over the entire corpus
  int copies = 5;
  int window = 4;
  int bootstrap_resamples = 10000;
};

struct RecallResult {
  std::vector<EvalRecord> records;
  std::vector<CurvePoint> curve;  // one bin per exposure, tail pooled at p95
};

/// The synonym-recall protocol: synthesize a synonym corpus from the first
/// `n_sentences` sentences and the corpus-wide top-k words, shuffle, and
/// train; every variant-anchored instance is first categorized without
/// modification and the probability of its synonym set at the returned node
/// is recorded against the set's prior exposure count.
RecallResult run_recall_experiment(Variant variant, const std::vector<Sentence>& base,
                                   const RecallParams& params, std::uint64_t seed);

// Plot-ready / machine-readable outputs.
void write_grouping_csv(const GroupingSummary& s, const std::string& path);
std::string grouping_summary_json(const GroupingSummary& s);
void write_records_csv(const std::vector<EvalRecord>& records, const std::string& path);
void write_curve_csv(const std::vector<CurvePoint>& curve, const std::string& path);
std::string recall_summary_json(Variant variant, const RecallResult& r, std::uint64_t seed);

}  // namespace cobweb
