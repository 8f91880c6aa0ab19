#pragma once

#include "shrinknet/expression.hpp"
#include "shrinknet/graph_sim.hpp"
#include "shrinknet/rng.hpp"

#include <boost/random/normal_distribution.hpp>

#include <string>

namespace fixtures {

inline Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  shrinknet::Rng rng(seed);
  boost::random::normal_distribution<double> normal;
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = normal(rng);
  return out;
}

inline shrinknet::ExpressionMatrix matrix(const Eigen::MatrixXd& values) {
  shrinknet::ExpressionMatrix m;
  m.values = values;
  for (Eigen::Index j = 0; j < values.cols(); ++j) m.gene_ids.push_back("g" + std::to_string(j));
  for (Eigen::Index i = 0; i < values.rows(); ++i) m.sample_ids.push_back("s" + std::to_string(i));
  return m;
}

/// Response = design * beta + noise, with the design columns drawn iid N(0, 1).
inline shrinknet::RegressionProblem regression(Eigen::Index n, Eigen::Index p, std::uint64_t seed,
                                               double signal = 0.5, double noise = 1.0) {
  shrinknet::RegressionProblem prob;
  prob.design = gaussian(n, p, seed);
  const Eigen::VectorXd beta = Eigen::VectorXd::Constant(p, signal);
  prob.response = prob.design * beta + noise * gaussian(n, 1, seed + 7919).col(0);
  for (Eigen::Index k = 0; k < p; ++k) prob.covariate_genes.push_back(k + 1);
  return prob;
}

/// Standardised data from a simulated structure; the truth comes back through `graph`.
inline shrinknet::ExpressionMatrix simulated(shrinknet::GraphKind kind, Eigen::Index p, Eigen::Index n,
                                             std::uint64_t seed, shrinknet::GraphSpec* graph = nullptr) {
  auto rng = shrinknet::make_stream(seed, 0);
  const auto g = shrinknet::make_structure(kind, p, {}, rng());
  const auto omega = shrinknet::sample_precision(g, 4.0, rng);
  if (graph) *graph = g;
  return shrinknet::standardize(shrinknet::sample_mvn(omega, n, rng), true);
}

inline double relative_error(double got, double want) { return std::abs(got - want) / std::max(1e-300, std::abs(want)); }

}  // namespace fixtures
