#pragma once

// Variational EM over all p regression equations with an empirical-Bayes
// Gamma(a, b) prior shared by the local precisions tau_j^-2.

#include "shrinknet/expression.hpp"
#include "shrinknet/vb.hpp"

#include <span>
#include <vector>

namespace shrinknet {

inline constexpr double kShapeCap = 1e4;

struct GammaPrior {
  double a;
  double b;
};

/// Moments entering the M-step: sum_j E[tau_j^-2] and the mean of E[log tau_j^-2] over p equations.
struct PrecisionMoments {
  double sum_e_tau = 0.0;
  double mean_e_log_tau = 0.0;
  Index count = 0;

  static PrecisionMoments from_posteriors(double a_star, std::span<const double> b_stars);
  static PrecisionMoments from_values(std::span<const double> e_tau, std::span<const double> e_log_tau);

  /// log(mean E[tau]) - mean E[log tau]; positive by Jensen.
  double dispersion() const;
};

/// Closed-form maximiser obtained with psi(x) ~ log x - 1/(2x).
GammaPrior eb_update_approx(const PrecisionMoments& m, double a_max = kShapeCap);
GammaPrior eb_update_approx(double a_star, std::span<const double> b_stars, double a_max = kShapeCap);

/// Exact maximiser of sum_j E log Gamma(tau_j^-2; a, b): solves log a - psi(a) = dispersion.
GammaPrior eb_update_fixedpoint(const PrecisionMoments& m, double a_max = kShapeCap);
GammaPrior eb_update_fixedpoint(double a_star, std::span<const double> b_stars, double a_max = kShapeCap);

/// sum_j E_q log Gamma(tau_j^-2; a, b) expressed through the moments.
double eb_objective(const PrecisionMoments& m, double a, double b);

enum class EbUpdate { approx, exact };
enum class Execution { serial, parallel };

struct EmConfig {
  double tol = 1e-3;
  int max_iter = 1000;
  bool global_shrinkage = true;  // false: fixed Gamma(a0, b0) prior, independent per-gene fits
  EbUpdate eb = EbUpdate::approx;
  double a_max = kShapeCap;
  HyperParameters initial{};  // a0 = b0 = c = d = 0.001
  FitPath path = FitPath::automatic;
  Execution execution = Execution::parallel;

  void validate() const;
};

struct SemFit {
  std::vector<VariationalPosterior> posteriors;
  HyperParameters hyper;
  std::vector<std::vector<double>> lower_bounds;  // per gene, per iteration
  std::vector<double> mean_lower_bound;           // per EM iteration
  std::vector<GammaPrior> prior_trace;            // (a, b) used in each EM iteration
  int em_iterations = 0;
  bool converged = false;
};

/// Fit every regression equation of a (standardised) expression matrix.
SemFit fit_sem(const ExpressionMatrix& m, const EmConfig& config = {});

}  // namespace shrinknet
