#pragma once

// Mean-field variational Bayes for one Bayesian regression equation
//
//   y = X beta + eps,  eps ~ N(0, sigma^2 I_n)
//   beta ~ N(0, sigma^2 tau^2 I),  tau^-2 ~ Gamma(a, b),  sigma^-2 ~ Gamma(c, d)
//
// with q(beta) q(tau^-2) q(sigma^-2) updated by coordinate ascent.  When the
// design has at least as many columns as rows the model is refitted in the
// principal-component coordinates theta = V^T beta of the thin SVD; directions
// orthogonal to the row space keep their prior-only factor.

#include "shrinknet/expression.hpp"

#include <Eigen/Dense>

#include <limits>
#include <variant>
#include <vector>

namespace shrinknet {

struct HyperParameters {
  double a = 1e-3;
  double b = 1e-3;
  double c = 1e-3;
  double d = 1e-3;

  void validate() const;
};

inline constexpr double kRateFloor = 1e-12;

enum class FitPath { automatic, direct, reduced };

struct DenseCovariance {
  Eigen::MatrixXd sigma;
};

/// Cov(beta) = V diag(theta_var) V^T + complement_variance (I - V V^T).
struct ReducedCovariance {
  Eigen::MatrixXd right_factors;
  Eigen::VectorXd theta_var;
  double complement_variance = 0.0;
};

struct VariationalPosterior {
  Eigen::VectorXd beta_mean;
  std::variant<DenseCovariance, ReducedCovariance> beta_cov;
  Eigen::VectorXd theta_mean;  // reduced path only
  double a_star = 0.0;
  double b_star = 0.0;
  double c_star = 0.0;
  double d_star = 0.0;
  double lower_bound = -std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;  // lower bound after each sweep, when requested

  Index covariates() const { return beta_mean.size(); }
  bool reduced() const { return std::holds_alternative<ReducedCovariance>(beta_cov); }

  Eigen::VectorXd beta_variance() const;
  double covariance_trace() const;
  double log_det_covariance() const;
};

struct ExpectedMoments {
  double e_tau2inv;
  double e_log_tau2inv;
  double e_sig2inv;
  double e_beta_sq;
};

ExpectedMoments expected_moments(const VariationalPosterior& vp);

/// Sufficient statistics of one regression equation, in direct or reduced coordinates.
class LocalModel {
 public:
  LocalModel(const RegressionProblem& prob, FitPath path = FitPath::automatic);

  Index samples() const { return n_; }
  Index covariates() const { return p_; }
  bool reduced() const { return reduced_; }
  Index rank() const { return reduced_ ? static_cast<Index>(sv_sq_.size()) : p_; }

  /// q(beta) at the prior, shapes at a + p'/2 and c + (n+p')/2, rates at the given starts.
  VariationalPosterior initial_state(const HyperParameters& hp, double b_star0 = 1e-3, double d_star0 = 1e-3) const;

  /// One coordinate-ascent pass: Sigma*, beta*, d*, then (a*, b*). Lower bound is not refreshed.
  void sweep(VariationalPosterior& vp, const HyperParameters& hp) const;

  double lower_bound(const VariationalPosterior& vp, const HyperParameters& hp) const;

  /// E_q ||y - X beta||^2
  double expected_residual(const VariationalPosterior& vp) const;

 private:
  Index n_ = 0;
  Index p_ = 0;
  bool reduced_ = false;
  double yty_ = 0.0;
  // direct path
  Eigen::MatrixXd xtx_;
  Eigen::VectorXd xty_;
  // reduced path: F^T F = D^2 is diagonal
  Eigen::VectorXd sv_sq_;
  Eigen::VectorXd fty_;
  Eigen::MatrixXd right_factors_;
};

struct FitOptions {
  double tol = 1e-3;
  int max_iter = 1000;
  double b_star_init = 1e-3;
  double d_star_init = 1e-3;
  FitPath path = FitPath::automatic;
  bool record_trace = false;
};

VariationalPosterior vb_sweep(const VariationalPosterior& state, const RegressionProblem& prob,
                              const HyperParameters& hp);

/// Evidence lower bound of `state`.  Evaluates the full mean-field bound, which
/// reduces to the usual closed form once b*, d* are consistent with the other factors.
double lower_bound(const VariationalPosterior& state, const RegressionProblem& prob, const HyperParameters& hp);

VariationalPosterior fit_local(const LocalModel& model, const HyperParameters& hp, const FitOptions& opts = {});
VariationalPosterior fit_local(const RegressionProblem& prob, const HyperParameters& hp, const FitOptions& opts = {});

/// Iterate one already-initialised state to convergence (shared by fit_local and the EM warm starts).
void iterate_to_convergence(const LocalModel& model, VariationalPosterior& vp, const HyperParameters& hp,
                            const FitOptions& opts);

}  // namespace shrinknet
