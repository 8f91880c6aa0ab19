#pragma once

// Standardise -> global-local shrinkage fit -> edge ranking -> p0 -> forward selection.

#include "shrinknet/eb_em.hpp"
#include "shrinknet/expression.hpp"
#include "shrinknet/selection.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace shrinknet {

struct NetworkConfig {
  bool scale = true;
  EmConfig em{};
  double alpha = 0.1;
  std::optional<double> p0;  // estimated when empty
  StopConfig stop{};
  SubmodelOptions submodel{};
};

struct NetworkResult {
  ExpressionMatrix data;  // standardised input
  SemFit fit;
  Eigen::MatrixXd kappa;
  EdgeRanking ranking;
  SelectionResult selection;
  std::vector<std::pair<std::string, double>> stage_ms;  // wall time per stage
};

NetworkResult infer_network(const ExpressionMatrix& raw, const NetworkConfig& config = {});

}  // namespace shrinknet
