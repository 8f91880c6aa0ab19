#pragma once

// Edge ranking by posterior signal-to-noise, Bayes factors under the
// unit-information prior, prior null probability estimation and forward selection.

#include "shrinknet/eb_em.hpp"
#include "shrinknet/expression.hpp"
#include "shrinknet/vb.hpp"

#include <Eigen/Dense>

#include <span>
#include <utility>
#include <vector>

namespace shrinknet {

using Edge = std::pair<Index, Index>;  // (min gene, max gene)

inline Edge make_edge(Index i, Index j) { return i < j ? Edge{i, j} : Edge{j, i}; }

/// kappa(j, k) = |E beta_jk| / sd(beta_jk) from gene j's posterior; zero diagonal.
Eigen::MatrixXd kappa_scores(const SemFit& fit);

struct RankedEdge {
  Index i = 0;  // i < j
  Index j = 0;
  double kappa_bar = 0.0;
  Index rank = 0;  // 1-based
};

struct EdgeRanking {
  Index genes = 0;
  std::vector<RankedEdge> edges;  // ordered by rank

  Index size() const { return static_cast<Index>(edges.size()); }
};

/// Sort the p(p-1)/2 pairs by (kappa_jk + kappa_kj)/2 descending, ties by (i, j).
EdgeRanking rank_edges(const Eigen::MatrixXd& kappa);

/// Options for the fixed-prior sub-model fits used in Bayes factors.
struct SubmodelOptions {
  FitOptions fit{};
  double c = 1e-3;
  double d = 1e-3;
};

/// Unit-information prior: tau^-2 ~ Gamma(1/2, n/2), sigma^-2 ~ Gamma(c, d).
HyperParameters default_selection_prior(Index n, const SubmodelOptions& opts = {});

/// Lower bound of the centred sub-model y_j ~ X_covariates. Empty covariate set is intercept-only.
double submodel_lower_bound(const ExpressionMatrix& m, Index response, std::span<const Index> covariates,
                            const SubmodelOptions& opts = {});

/// log BF = L(conditioning + candidate) - L(conditioning).
double selection_log_bayes_factor(const ExpressionMatrix& m, Index response, Index candidate,
                                  std::span<const Index> conditioning, const SubmodelOptions& opts = {});
double selection_bayes_factor(const ExpressionMatrix& m, Index response, Index candidate,
                              std::span<const Index> conditioning, const SubmodelOptions& opts = {});

/// Directed Bayes factors without forward selection, per edge (rank order): {BF'(i->j), BF'(j->i)} on log scale.
std::vector<std::pair<double, double>> unselected_log_bayes_factors(const ExpressionMatrix& m,
                                                                    const EdgeRanking& ranking,
                                                                    const SubmodelOptions& opts = {},
                                                                    Execution exec = Execution::parallel);

/// Fraction of directed Bayes factors <= 1, clamped to [1/(2P), 1 - 1/(2P)].
double estimate_p0(const ExpressionMatrix& m, const EdgeRanking& ranking, const SubmodelOptions& opts = {},
                   Execution exec = Execution::parallel);

/// gamma = (1 - alpha) p0 / (alpha (1 - p0)).
double threshold_gamma(double alpha, double p0);

/// min over directions of p0 / (p0 + (1 - p0) BF), written in terms of the larger BF.
double null_probability_bound(double bf_max, double p0);

struct StopConfig {
  int patience = 100;  // 0 disables
  bool use_rmax = true;
};

struct EdgeDecision {
  bool evaluated = false;
  bool selected = false;
  double log_bf_max = 0.0;
  double bf_max = 0.0;
  double p0_bound = 1.0;
};

struct SelectionResult {
  std::vector<Edge> selected;         // in order of selection
  std::vector<EdgeDecision> decisions;  // indexed by rank - 1
  double p0_hat = 0.0;
  double gamma = 0.0;
  double alpha = 0.0;
  Index ranks_evaluated = 0;
};

SelectionResult forward_select(const ExpressionMatrix& m, const EdgeRanking& ranking, double alpha, double p0,
                               const StopConfig& stop = {}, const SubmodelOptions& opts = {});

}  // namespace shrinknet
