#include "shrinknet/eb_em.hpp"

#include "shrinknet/error.hpp"
#include "detail/parallel_for.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <utility>

namespace shrinknet {

namespace {

constexpr double kDegenerateDispersion = 1e-8;

template <typename Body>
void for_each_gene(Index p, Execution exec, const std::vector<std::string>& gene_ids, Body&& body) {
  detail::parallel_for(p, exec, std::forward<Body>(body),
                       [&](Index j) { return "gene '" + gene_ids[static_cast<std::size_t>(j)] + "'"; });
}

}  // namespace

PrecisionMoments PrecisionMoments::from_posteriors(double a_star, std::span<const double> b_stars) {
  if (b_stars.size() < 2) throw std::invalid_argument("empirical Bayes update needs at least 2 equations");
  PrecisionMoments m;
  m.count = static_cast<Index>(b_stars.size());
  const double psi = boost::math::digamma(a_star);
  double sum_log = 0.0;
  for (const double b : b_stars) {
    if (!(b > 0.0)) throw std::invalid_argument("b* values must be positive");
    m.sum_e_tau += a_star / b;
    sum_log += psi - std::log(b);
  }
  m.mean_e_log_tau = sum_log / static_cast<double>(m.count);
  return m;
}

PrecisionMoments PrecisionMoments::from_values(std::span<const double> e_tau, std::span<const double> e_log_tau) {
  if (e_tau.size() != e_log_tau.size() || e_tau.size() < 2)
    throw std::invalid_argument("moment vectors must have equal length >= 2");
  PrecisionMoments m;
  m.count = static_cast<Index>(e_tau.size());
  double sum_log = 0.0;
  for (std::size_t j = 0; j < e_tau.size(); ++j) {
    m.sum_e_tau += e_tau[j];
    sum_log += e_log_tau[j];
  }
  m.mean_e_log_tau = sum_log / static_cast<double>(m.count);
  return m;
}

double PrecisionMoments::dispersion() const {
  return std::log(sum_e_tau) - mean_e_log_tau - std::log(static_cast<double>(count));
}

double eb_objective(const PrecisionMoments& m, double a, double b) {
  const double p = static_cast<double>(m.count);
  return p * (a * std::log(b) - boost::math::lgamma(a)) + (a - 1.0) * p * m.mean_e_log_tau - b * m.sum_e_tau;
}

GammaPrior eb_update_approx(const PrecisionMoments& m, double a_max) {
  const double disp = m.dispersion();
  const double a = disp <= kDegenerateDispersion ? a_max : std::min(0.5 / disp, a_max);
  return {a, a * static_cast<double>(m.count) / m.sum_e_tau};
}

GammaPrior eb_update_approx(double a_star, std::span<const double> b_stars, double a_max) {
  return eb_update_approx(PrecisionMoments::from_posteriors(a_star, b_stars), a_max);
}

GammaPrior eb_update_fixedpoint(const PrecisionMoments& m, double a_max) {
  // Stationarity: b = a p / sum E[tau], and log a - psi(a) = dispersion.  The left side
  // decreases monotonically from +inf to 0, so bisection in log a is safe.
  const double disp = m.dispersion();
  const auto gap = [disp](double log_a) {
    const double a = std::exp(log_a);
    return std::log(a) - boost::math::digamma(a) - disp;
  };
  double a = a_max;
  if (disp > kDegenerateDispersion && gap(std::log(a_max)) < 0.0) {
    double lo = std::log(1e-12);
    double hi = std::log(a_max);
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (gap(mid) > 0.0) lo = mid;
      else hi = mid;
    }
    a = std::exp(0.5 * (lo + hi));
  }
  return {a, a * static_cast<double>(m.count) / m.sum_e_tau};
}

GammaPrior eb_update_fixedpoint(double a_star, std::span<const double> b_stars, double a_max) {
  return eb_update_fixedpoint(PrecisionMoments::from_posteriors(a_star, b_stars), a_max);
}

void EmConfig::validate() const {
  if (!(tol > 0.0)) throw ConfigError("EM tolerance must be positive");
  if (max_iter < 2) throw ConfigError("EM max_iter must be at least 2");
  if (!(a_max > 0.0)) throw ConfigError("a_max must be positive");
  initial.validate();
}

SemFit fit_sem(const ExpressionMatrix& m, const EmConfig& config) {
  config.validate();
  validate(m);
  const Index p = m.genes();
  const auto np = static_cast<std::size_t>(p);

  std::vector<LocalModel> models;
  models.reserve(np);
  for (Index j = 0; j < p; ++j) models.emplace_back(build_problem(m, j), config.path);

  SemFit fit;
  fit.posteriors.resize(np);
  fit.lower_bounds.assign(np, {});

  if (!config.global_shrinkage) {
    FitOptions opts;
    opts.tol = config.tol;
    opts.max_iter = config.max_iter;
    opts.path = config.path;
    opts.record_trace = true;
    for_each_gene(p, config.execution, m.gene_ids, [&](Index j) {
      auto& vp = fit.posteriors[static_cast<std::size_t>(j)];
      vp = fit_local(models[static_cast<std::size_t>(j)], config.initial, opts);
      fit.lower_bounds[static_cast<std::size_t>(j)] = vp.trace;
    });
    fit.hyper = config.initial;
    fit.converged = true;
    for (const auto& vp : fit.posteriors) {
      fit.em_iterations = std::max(fit.em_iterations, vp.iterations);
      fit.converged = fit.converged && vp.converged;
    }
    for (int t = 0; t < fit.em_iterations; ++t) {
      double sum = 0.0;
      for (const auto& trace : fit.lower_bounds)
        sum += trace[std::min<std::size_t>(static_cast<std::size_t>(t), trace.size() - 1)];
      fit.mean_lower_bound.push_back(sum / static_cast<double>(p));
    }
    fit.prior_trace.push_back({config.initial.a, config.initial.b});
    return fit;
  }

  HyperParameters hp = config.initial;
  for (std::size_t j = 0; j < np; ++j) {
    auto& vp = fit.posteriors[j];
    vp = models[j].initial_state(hp);
    vp.a_star = hp.a;  // a*(0) = a(0) before the first q(tau) update
  }

  std::vector<double> previous(np, 0.0);
  std::vector<double> b_stars(np);
  for (int t = 1; t <= config.max_iter; ++t) {
    // E-step: one coordinate-ascent pass per equation under the current (a, b).
    for_each_gene(p, config.execution, m.gene_ids, [&](Index j) {
      const auto& model = models[static_cast<std::size_t>(j)];
      auto& vp = fit.posteriors[static_cast<std::size_t>(j)];
      model.sweep(vp, hp);
      vp.lower_bound = model.lower_bound(vp, hp);
      vp.iterations = t;
    });

    double max_change = 0.0;
    double sum = 0.0;
    for (std::size_t j = 0; j < np; ++j) {
      const double lb = fit.posteriors[j].lower_bound;
      fit.lower_bounds[j].push_back(lb);
      max_change = std::max(max_change, std::abs(lb - previous[j]));
      previous[j] = lb;
      sum += lb;
    }
    fit.mean_lower_bound.push_back(sum / static_cast<double>(p));
    fit.prior_trace.push_back({hp.a, hp.b});
    fit.em_iterations = t;

    if (t >= 2 && max_change < config.tol) {
      fit.converged = true;
      break;
    }
    if (t == config.max_iter) break;

    // M-step
    for (std::size_t j = 0; j < np; ++j) b_stars[j] = fit.posteriors[j].b_star;
    const auto moments = PrecisionMoments::from_posteriors(fit.posteriors.front().a_star, b_stars);
    const GammaPrior next = config.eb == EbUpdate::exact ? eb_update_fixedpoint(moments, config.a_max)
                                                         : eb_update_approx(moments, config.a_max);
    hp.a = next.a;
    hp.b = next.b;
  }

  for (auto& vp : fit.posteriors) vp.converged = fit.converged;
  fit.hyper = hp;
  return fit;
}

}  // namespace shrinknet
