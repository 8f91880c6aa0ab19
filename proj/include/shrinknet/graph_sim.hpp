#pragma once

// Ground-truth networks for simulation: graph structures, precision matrices
// with the graph's zero pattern, and Gaussian data drawn from them.

#include "shrinknet/expression.hpp"
#include "shrinknet/rng.hpp"
#include "shrinknet/selection.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace shrinknet {

enum class GraphKind { band, cluster, hub, random };

std::string_view to_string(GraphKind kind);
/// Throws ConfigError naming the valid kinds.
GraphKind parse_graph_kind(std::string_view name);

struct StructureParams {
  int bandwidth = 4;
  std::vector<int> block_sizes;  // cluster/hub; empty selects the default composition
  double density = 0.096;        // random
};

/// Size-10 blocks covering half (hub) or 60% (cluster) of the nodes, the rest in size-5 blocks.
/// For p = 100 this gives five 10-stars + ten 5-stars (85 edges) and six 10-cliques + eight 5-cliques (350 edges).
std::vector<int> default_block_sizes(GraphKind kind, Index p);

struct GraphSpec {
  Index p = 0;
  GraphKind kind = GraphKind::band;
  StructureParams params;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> adjacency;

  bool has_edge(Index i, Index j) const { return adjacency(i, j); }
  Index edge_count() const;
  Index pair_count() const { return p * (p - 1) / 2; }
  double density() const { return static_cast<double>(edge_count()) / static_cast<double>(pair_count()); }
  std::vector<Edge> edges() const;
};

GraphSpec make_structure(GraphKind kind, Index p, const StructureParams& params = {}, std::uint64_t seed = 0);

/// Graph from an explicit edge list (used for benchmark sets that are not simulated).
GraphSpec graph_from_edges(Index p, const std::vector<Edge>& edges);

struct PrecisionMatrix {
  Eigen::MatrixXd omega;
};

inline constexpr double kZeroPatternTolerance = 1e-8;
inline constexpr int kMaxCompletionCycles = 10000;

/// Unconstrained Wishart(dof + p - 1, I) draw followed by iterative graph-constrained
/// completion: the result keeps the draw's covariance on edges and the diagonal and is
/// exactly zero off the graph.  Throws NumericalError if completion does not converge.
PrecisionMatrix sample_precision(const GraphSpec& g, double dof, Rng& rng);

/// Bartlett-decomposition draw from Wishart(df, I).
Eigen::MatrixXd sample_wishart_identity(Index p, double df, Rng& rng);

Eigen::MatrixXd partial_correlations(const PrecisionMatrix& omega);

/// n iid rows from N(0, omega^-1); genes g1..gp, samples s1..sn.
ExpressionMatrix sample_mvn(const PrecisionMatrix& omega, Index n, Rng& rng);

}  // namespace shrinknet
