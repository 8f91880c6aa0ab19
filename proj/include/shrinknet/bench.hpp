#pragma once

// Evaluation: confusion counts and scores, partial ROC, the model-based
// simulation driver, and the random-splitting reproducibility/stability harness.

#include "shrinknet/expression.hpp"
#include "shrinknet/graph_sim.hpp"
#include "shrinknet/pipeline.hpp"
#include "shrinknet/rng.hpp"
#include "shrinknet/selection.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace shrinknet {

struct ConfusionCounts {
  Index tp = 0;
  Index fp = 0;
  Index fn = 0;
  Index tn = 0;

  Index total() const { return tp + fp + fn + tn; }
};

ConfusionCounts confusion(std::span<const Edge> selected, const GraphSpec& truth);

struct Scores {
  double tpr = 0.0;
  double fpr = 0.0;
  double precision = 0.0;
  double f_score = 0.0;
};

Scores scores(const ConfusionCounts& c);

struct RocPoint {
  double fpr;
  double tpr;
};

struct PartialRoc {
  std::vector<RocPoint> curve;  // starts at (0, 0), ends at fpr = fpr_max (or the last point below it)
  double pauc = 0.0;            // area up to fpr_max divided by fpr_max
};

/// Edges with equal kappa_bar enter the curve together (a diagonal segment).
PartialRoc partial_roc(const EdgeRanking& ranking, const GraphSpec& truth, double fpr_max = 0.2);

/// Spearman correlation with average ranks for ties.
double rank_correlation(std::span<const double> a, std::span<const double> b);

/// Disjoint row partition into sizes (n_small, n - n_small); rows keep their original order.
std::pair<ExpressionMatrix, ExpressionMatrix> random_split(const ExpressionMatrix& m, Index n_small, Rng& rng);

/// Smallest frequency threshold with q^2 / ((2 pi - 1) P) <= e_v, capped at 1.
double stability_threshold(double q, double e_v, Index pair_count);

struct StabilityReport {
  std::map<Edge, double> selection_frequency;  // edges never selected are absent (frequency 0)
  double pi_thr = 1.0;
  std::vector<Edge> stable_edges;  // sorted
  double q_hat = 0.0;
  double e_v = 30.0;
  Index resamples = 0;
};

StabilityReport stability_report(std::span<const std::vector<Edge>> selections, double e_v, Index pair_count);

enum class Method { shrinknet, noshrink };
std::string_view to_string(Method method);

/// Network inference configuration for one method (global shrinkage on or off).
NetworkConfig method_config(const NetworkConfig& base, Method method);

struct ModelSimConfig {
  std::vector<GraphKind> kinds{GraphKind::band};
  Index p = 100;
  std::vector<Index> n_list{25, 50, 100};
  int reps = 100;
  std::uint64_t seed = 1;
  double dof = 4.0;
  StructureParams structure{};
  double fpr_max = 0.2;
  std::vector<Method> methods{Method::shrinknet, Method::noshrink};
  NetworkConfig network{};
  Execution execution = Execution::parallel;  // over replicates
};

struct RepMetrics {
  GraphKind kind = GraphKind::band;
  Index n = 0;
  int rep = 0;
  Method method = Method::shrinknet;
  bool ok = false;
  std::string error;
  Index true_edges = 0;
  Index selected = 0;
  double tpr = 0.0;
  double fpr = 0.0;
  double f_score = 0.0;
  double pauc = 0.0;
  double p0_hat = 0.0;
  double prior_a = 0.0;
  double prior_b = 0.0;
  std::vector<RocPoint> roc;
};

struct Summary {
  double mean = 0.0;
  double sd = 0.0;
};

struct AggregateRow {
  GraphKind kind = GraphKind::band;
  Index n = 0;
  Method method = Method::shrinknet;
  int successes = 0;
  int failures = 0;
  Summary tpr, fpr, f_score, pauc;
};

struct ModelSimResult {
  std::vector<RepMetrics> reps;     // ordered by (kind, n, rep, method)
  std::vector<AggregateRow> table;  // ordered by (kind, n, method)
};

/// One replicate: graph, precision matrix and data from stream (seed, task), then every method.
std::vector<RepMetrics> run_model_replicate(const ModelSimConfig& config, GraphKind kind, Index n, int rep,
                                            std::uint64_t task_index);

ModelSimResult run_model_sim(const ModelSimConfig& config);

std::vector<AggregateRow> aggregate(const std::vector<RepMetrics>& reps);

struct SplitStudyConfig {
  Index n_small = 0;
  int resamples = 100;
  std::uint64_t seed = 1;
  double e_v = 30.0;
  double fpr_max = 0.2;
  bool validate_large = true;  // also fit the complement and score the small split against it
  std::vector<Method> methods{Method::shrinknet, Method::noshrink};
  NetworkConfig network{};
  Execution execution = Execution::parallel;  // over resamples
};

struct SplitMetrics {
  Method method = Method::shrinknet;
  int resample = 0;
  std::vector<Edge> small_selected;
  Index large_selected = 0;
  double tpr = 0.0;  // small-split selection against the large-split selection
  double fpr = 0.0;
  double pauc = 0.0;
  double kappa_spearman = 0.0;
  bool validated = false;
};

struct SplitStudyResult {
  std::vector<SplitMetrics> splits;  // ordered by (resample, method)
  std::vector<std::pair<Method, StabilityReport>> stability;
};

SplitStudyResult run_split_study(const ExpressionMatrix& m, const SplitStudyConfig& config);

}  // namespace shrinknet
