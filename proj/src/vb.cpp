#include "shrinknet/vb.hpp"

#include "shrinknet/error.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <numbers>
#include <string>

namespace shrinknet {

namespace {

using boost::math::digamma;
using boost::math::lgamma;

double gamma_entropy(double shape, double rate) {
  return shape - std::log(rate) + lgamma(shape) + (1.0 - shape) * digamma(shape);
}

// E_q log Gamma(x; shape, rate) for q with the given moments of x and log x.
double gamma_cross_term(double shape, double rate, double e_x, double e_log_x) {
  return shape * std::log(rate) - lgamma(shape) + (shape - 1.0) * e_log_x - rate * e_x;
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericalError(std::string("non-finite ") + what + " in variational update");
}

}  // namespace

void HyperParameters::validate() const {
  if (!(a > 0.0 && b > 0.0 && c > 0.0 && d > 0.0) || !std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) ||
      !std::isfinite(d))
    throw ConfigError("hyperparameters a, b, c, d must be finite and strictly positive");
}

Eigen::VectorXd VariationalPosterior::beta_variance() const {
  if (const auto* dense = std::get_if<DenseCovariance>(&beta_cov)) return dense->sigma.diagonal();
  const auto& red = std::get<ReducedCovariance>(beta_cov);
  const Eigen::VectorXd row_norm_sq = red.right_factors.rowwise().squaredNorm();
  Eigen::VectorXd var = red.right_factors.cwiseAbs2() * red.theta_var;
  var.array() += red.complement_variance * (1.0 - row_norm_sq.array()).max(0.0);
  return var;
}

double VariationalPosterior::covariance_trace() const {
  if (const auto* dense = std::get_if<DenseCovariance>(&beta_cov)) return dense->sigma.trace();
  const auto& red = std::get<ReducedCovariance>(beta_cov);
  const auto trailing = static_cast<double>(beta_mean.size() - red.theta_var.size());
  return red.theta_var.sum() + trailing * red.complement_variance;
}

double VariationalPosterior::log_det_covariance() const {
  if (const auto* dense = std::get_if<DenseCovariance>(&beta_cov)) {
    if (dense->sigma.size() == 0) return 0.0;
    Eigen::LLT<Eigen::MatrixXd> llt(dense->sigma);
    if (llt.info() != Eigen::Success) throw NumericalError("posterior covariance is not positive definite");
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  }
  const auto& red = std::get<ReducedCovariance>(beta_cov);
  if ((red.theta_var.array() <= 0.0).any()) throw NumericalError("posterior covariance is not positive definite");
  const auto trailing = static_cast<double>(beta_mean.size() - red.theta_var.size());
  double ld = red.theta_var.array().log().sum();
  if (trailing > 0) {
    if (!(red.complement_variance > 0.0)) throw NumericalError("posterior covariance is not positive definite");
    ld += trailing * std::log(red.complement_variance);
  }
  return ld;
}

ExpectedMoments expected_moments(const VariationalPosterior& vp) {
  return {vp.a_star / vp.b_star, digamma(vp.a_star) - std::log(vp.b_star), vp.c_star / vp.d_star,
          vp.beta_mean.squaredNorm() + vp.covariance_trace()};
}

LocalModel::LocalModel(const RegressionProblem& prob, FitPath path)
    : n_(prob.samples()), p_(prob.covariates()), yty_(prob.response.squaredNorm()) {
  if (prob.design.rows() != n_) throw std::invalid_argument("design and response row counts differ");
  reduced_ = p_ > 0 && (path == FitPath::reduced || (path == FitPath::automatic && p_ >= n_));
  if (reduced_) {
    const ReducedProblem red = svd_reduce(prob);
    sv_sq_ = red.singular_values.cwiseAbs2();
    fty_ = red.reduced_design.transpose() * prob.response;
    right_factors_ = red.right_factors;
  } else {
    xtx_ = prob.design.transpose() * prob.design;
    xty_ = prob.design.transpose() * prob.response;
  }
}

VariationalPosterior LocalModel::initial_state(const HyperParameters& hp, double b_star0, double d_star0) const {
  VariationalPosterior vp;
  vp.a_star = hp.a + 0.5 * static_cast<double>(p_);
  vp.c_star = hp.c + 0.5 * static_cast<double>(n_ + p_);
  vp.b_star = b_star0;
  vp.d_star = d_star0;
  vp.beta_mean = Eigen::VectorXd::Zero(p_);
  const double prior_var = 1.0 / ((vp.c_star / vp.d_star) * (vp.a_star / vp.b_star));
  if (reduced_) {
    vp.theta_mean = Eigen::VectorXd::Zero(rank());
    vp.beta_cov = ReducedCovariance{right_factors_, Eigen::VectorXd::Constant(rank(), prior_var), prior_var};
  } else {
    vp.beta_cov = DenseCovariance{Eigen::MatrixXd::Identity(p_, p_) * prior_var};
  }
  return vp;
}

double LocalModel::expected_residual(const VariationalPosterior& vp) const {
  double r = yty_;
  if (p_ == 0) return r;
  if (reduced_) {
    const auto& red = std::get<ReducedCovariance>(vp.beta_cov);
    r += -2.0 * vp.theta_mean.dot(fty_) +
         sv_sq_.dot((vp.theta_mean.array().square() + red.theta_var.array()).matrix());
  } else {
    const auto& sigma = std::get<DenseCovariance>(vp.beta_cov).sigma;
    r += -2.0 * vp.beta_mean.dot(xty_) + vp.beta_mean.dot(xtx_ * vp.beta_mean) + xtx_.cwiseProduct(sigma).sum();
  }
  return std::max(r, 0.0);
}

void LocalModel::sweep(VariationalPosterior& vp, const HyperParameters& hp) const {
  const double e_tau = vp.a_star / vp.b_star;
  const double e_sig = vp.c_star / vp.d_star;

  if (p_ > 0) {
    if (reduced_) {
      const Eigen::ArrayXd denom = sv_sq_.array() + e_tau;
      vp.theta_mean = (fty_.array() / denom).matrix();
      auto& red = std::get<ReducedCovariance>(vp.beta_cov);
      red.theta_var = (1.0 / (e_sig * denom)).matrix();
      red.complement_variance = 1.0 / (e_sig * e_tau);
      vp.beta_mean = right_factors_ * vp.theta_mean;
    } else {
      Eigen::MatrixXd precision = xtx_;
      precision.diagonal().array() += e_tau;
      Eigen::LLT<Eigen::MatrixXd> llt(precision);
      if (llt.info() != Eigen::Success) throw NumericalError("X^T X + E[tau^-2] I is not positive definite");
      const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(p_, p_));
      std::get<DenseCovariance>(vp.beta_cov).sigma = inv / e_sig;
      vp.beta_mean = inv * xty_;
    }
  }

  const double e_beta_sq = vp.beta_mean.squaredNorm() + vp.covariance_trace();
  vp.d_star = std::max(hp.d + 0.5 * expected_residual(vp) + 0.5 * e_tau * e_beta_sq, kRateFloor);
  vp.c_star = hp.c + 0.5 * static_cast<double>(n_ + p_);
  const double e_sig_new = vp.c_star / vp.d_star;
  vp.a_star = hp.a + 0.5 * static_cast<double>(p_);
  vp.b_star = std::max(hp.b + 0.5 * e_sig_new * e_beta_sq, kRateFloor);

  require_finite(vp.d_star, "d*");
  require_finite(vp.b_star, "b*");
  if (!vp.beta_mean.allFinite()) throw NumericalError("non-finite posterior mean in variational update");
}

double LocalModel::lower_bound(const VariationalPosterior& vp, const HyperParameters& hp) const {
  if (vp.reduced() != reduced_ || vp.covariates() != p_)
    throw std::invalid_argument("posterior does not belong to this regression model");
  const double n = static_cast<double>(n_);
  const double p = static_cast<double>(p_);
  const double e_tau = vp.a_star / vp.b_star;
  const double e_log_tau = digamma(vp.a_star) - std::log(vp.b_star);
  const double e_sig = vp.c_star / vp.d_star;
  const double e_log_sig = digamma(vp.c_star) - std::log(vp.d_star);
  const double e_beta_sq = vp.beta_mean.squaredNorm() + vp.covariance_trace();

  double lb = -0.5 * n * std::log(2.0 * std::numbers::pi) + 0.5 * n * e_log_sig - 0.5 * e_sig * expected_residual(vp);
  lb += 0.5 * p * (e_log_sig + e_log_tau) - 0.5 * e_sig * e_tau * e_beta_sq;
  lb += gamma_cross_term(hp.a, hp.b, e_tau, e_log_tau);
  lb += gamma_cross_term(hp.c, hp.d, e_sig, e_log_sig);
  if (p_ > 0) lb += 0.5 * vp.log_det_covariance() + 0.5 * p;
  lb += gamma_entropy(vp.a_star, vp.b_star);
  lb += gamma_entropy(vp.c_star, vp.d_star);
  require_finite(lb, "lower bound");
  return lb;
}

VariationalPosterior vb_sweep(const VariationalPosterior& state, const RegressionProblem& prob,
                              const HyperParameters& hp) {
  hp.validate();
  if (!(state.b_star > 0.0 && state.d_star > 0.0)) throw std::invalid_argument("vb_sweep needs positive b*, d*");
  const LocalModel model(prob, state.reduced() ? FitPath::reduced : FitPath::direct);
  VariationalPosterior next = state;
  if (next.reduced() && std::get<ReducedCovariance>(next.beta_cov).right_factors.cols() != model.rank())
    throw std::invalid_argument("reduced state rank does not match the problem");
  model.sweep(next, hp);
  return next;
}

double lower_bound(const VariationalPosterior& state, const RegressionProblem& prob, const HyperParameters& hp) {
  hp.validate();
  const LocalModel model(prob, state.reduced() ? FitPath::reduced : FitPath::direct);
  return model.lower_bound(state, hp);
}

void iterate_to_convergence(const LocalModel& model, VariationalPosterior& vp, const HyperParameters& hp,
                            const FitOptions& opts) {
  if (!(opts.tol > 0.0)) throw ConfigError("tolerance must be positive");
  if (opts.max_iter < 2) throw ConfigError("max_iter must be at least 2");
  double previous = vp.lower_bound;
  vp.converged = false;
  for (int t = 1; t <= opts.max_iter; ++t) {
    model.sweep(vp, hp);
    vp.lower_bound = model.lower_bound(vp, hp);
    vp.iterations = t;
    if (opts.record_trace) vp.trace.push_back(vp.lower_bound);
    if (t >= 2 && std::abs(vp.lower_bound - previous) < opts.tol) {
      vp.converged = true;
      break;
    }
    previous = vp.lower_bound;
  }
}

VariationalPosterior fit_local(const LocalModel& model, const HyperParameters& hp, const FitOptions& opts) {
  hp.validate();
  VariationalPosterior vp = model.initial_state(hp, opts.b_star_init, opts.d_star_init);
  iterate_to_convergence(model, vp, hp, opts);
  return vp;
}

VariationalPosterior fit_local(const RegressionProblem& prob, const HyperParameters& hp, const FitOptions& opts) {
  return fit_local(LocalModel(prob, opts.path), hp, opts);
}

}  // namespace shrinknet
