#include "shrinknet/selection.hpp"

#include "detail/parallel_for.hpp"
#include "shrinknet/error.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

namespace shrinknet {

Eigen::MatrixXd kappa_scores(const SemFit& fit) {
  const auto p = static_cast<Index>(fit.posteriors.size());
  Eigen::MatrixXd kappa = Eigen::MatrixXd::Zero(p, p);
  for (Index j = 0; j < p; ++j) {
    const auto& vp = fit.posteriors[static_cast<std::size_t>(j)];
    if (vp.covariates() != p - 1) throw std::invalid_argument("posterior size does not match the gene count");
    const Eigen::VectorXd var = vp.beta_variance();
    for (Index c = 0; c < p - 1; ++c) {
      const Index k = c < j ? c : c + 1;
      if (!(var(c) > 0.0))
        throw NumericalError("zero posterior variance for coefficient (" + std::to_string(j) + ", " +
                             std::to_string(k) + ")");
      kappa(j, k) = std::abs(vp.beta_mean(c)) / std::sqrt(var(c));
    }
  }
  return kappa;
}

EdgeRanking rank_edges(const Eigen::MatrixXd& kappa) {
  if (kappa.rows() != kappa.cols()) throw std::invalid_argument("kappa matrix must be square");
  const Index p = kappa.rows();
  EdgeRanking ranking;
  ranking.genes = p;
  ranking.edges.reserve(static_cast<std::size_t>(p * (p - 1) / 2));
  for (Index i = 0; i < p; ++i) {
    for (Index j = i + 1; j < p; ++j) {
      if (kappa(i, j) < 0.0 || kappa(j, i) < 0.0 || !std::isfinite(kappa(i, j)) || !std::isfinite(kappa(j, i)))
        throw std::invalid_argument("kappa scores must be finite and non-negative");
      ranking.edges.push_back({i, j, 0.5 * (kappa(i, j) + kappa(j, i)), 0});
    }
  }
  std::sort(ranking.edges.begin(), ranking.edges.end(), [](const RankedEdge& x, const RankedEdge& y) {
    if (x.kappa_bar != y.kappa_bar) return x.kappa_bar > y.kappa_bar;
    if (x.i != y.i) return x.i < y.i;
    return x.j < y.j;
  });
  for (std::size_t r = 0; r < ranking.edges.size(); ++r) ranking.edges[r].rank = static_cast<Index>(r + 1);
  return ranking;
}

HyperParameters default_selection_prior(Index n, const SubmodelOptions& opts) {
  return {0.5, 0.5 * static_cast<double>(n), opts.c, opts.d};
}

double submodel_lower_bound(const ExpressionMatrix& m, Index response, std::span<const Index> covariates,
                            const SubmodelOptions& opts) {
  const RegressionProblem prob = build_subproblem(m, response, covariates, true);
  const HyperParameters hp = default_selection_prior(m.samples(), opts);
  if (covariates.empty()) {
    // Intercept-only model: the marginal likelihood is available exactly.
    const double n = static_cast<double>(prob.samples());
    const double c_star = hp.c + 0.5 * n;
    const double d_star = hp.d + 0.5 * prob.response.squaredNorm();
    return -0.5 * n * std::log(2.0 * std::numbers::pi) + hp.c * std::log(hp.d) - boost::math::lgamma(hp.c) -
           c_star * std::log(d_star) + boost::math::lgamma(c_star);
  }
  return fit_local(prob, hp, opts.fit).lower_bound;
}

double selection_log_bayes_factor(const ExpressionMatrix& m, Index response, Index candidate,
                                  std::span<const Index> conditioning, const SubmodelOptions& opts) {
  if (candidate == response) throw std::invalid_argument("candidate gene equals the response gene");
  if (std::find(conditioning.begin(), conditioning.end(), candidate) != conditioning.end())
    throw std::invalid_argument("candidate gene already in the conditioning set: null and alternative coincide");
  if (std::find(conditioning.begin(), conditioning.end(), response) != conditioning.end())
    throw std::invalid_argument("response gene in the conditioning set");
  std::vector<Index> alternative(conditioning.begin(), conditioning.end());
  alternative.push_back(candidate);
  return submodel_lower_bound(m, response, alternative, opts) - submodel_lower_bound(m, response, conditioning, opts);
}

double selection_bayes_factor(const ExpressionMatrix& m, Index response, Index candidate,
                              std::span<const Index> conditioning, const SubmodelOptions& opts) {
  return std::exp(selection_log_bayes_factor(m, response, candidate, conditioning, opts));
}

std::vector<std::pair<double, double>> unselected_log_bayes_factors(const ExpressionMatrix& m,
                                                                    const EdgeRanking& ranking,
                                                                    const SubmodelOptions& opts, Execution exec) {
  const Index p = ranking.genes;
  if (p != m.genes()) throw std::invalid_argument("ranking and expression matrix disagree on gene count");
  std::vector<std::pair<double, double>> log_bf(ranking.edges.size());

  // Along the ranking, node j's conditioning set only ever grows by its next
  // partner, so each alternative model is the next null model for that node.
  std::vector<std::vector<std::size_t>> incident(static_cast<std::size_t>(p));
  for (std::size_t e = 0; e < ranking.edges.size(); ++e) {
    incident[static_cast<std::size_t>(ranking.edges[e].i)].push_back(e);
    incident[static_cast<std::size_t>(ranking.edges[e].j)].push_back(e);
  }

  detail::parallel_for(
      p, exec,
      [&](Index node) {
        std::vector<Index> covariates;
        double previous = submodel_lower_bound(m, node, covariates, opts);
        for (const std::size_t e : incident[static_cast<std::size_t>(node)]) {
          const auto& edge = ranking.edges[e];
          const bool forward = edge.i == node;
          covariates.push_back(forward ? edge.j : edge.i);
          const double current = submodel_lower_bound(m, node, covariates, opts);
          (forward ? log_bf[e].first : log_bf[e].second) = current - previous;
          previous = current;
        }
      },
      [&](Index node) { return "Bayes factors for gene '" + m.gene_ids[static_cast<std::size_t>(node)] + "'"; });
  return log_bf;
}

double estimate_p0(const ExpressionMatrix& m, const EdgeRanking& ranking, const SubmodelOptions& opts,
                   Execution exec) {
  if (ranking.edges.empty()) throw std::invalid_argument("estimate_p0 needs a non-empty ranking");
  const auto log_bf = unselected_log_bayes_factors(m, ranking, opts, exec);
  std::size_t nulls = 0;
  for (const auto& [forward, backward] : log_bf) nulls += (forward <= 0.0) + (backward <= 0.0);
  const double twice_p = 2.0 * static_cast<double>(log_bf.size());
  const double lo = 1.0 / twice_p;
  return std::clamp(static_cast<double>(nulls) / twice_p, lo, 1.0 - lo);
}

double threshold_gamma(double alpha, double p0) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (!(p0 > 0.0 && p0 < 1.0)) throw ConfigError("p0 must lie in (0, 1)");
  return (1.0 - alpha) * p0 / (alpha * (1.0 - p0));
}

double null_probability_bound(double bf_max, double p0) {
  if (std::isinf(bf_max)) return 0.0;
  return p0 / (p0 + (1.0 - p0) * bf_max);
}

SelectionResult forward_select(const ExpressionMatrix& m, const EdgeRanking& ranking, double alpha, double p0,
                               const StopConfig& stop, const SubmodelOptions& opts) {
  SelectionResult result;
  result.alpha = alpha;
  result.p0_hat = p0;
  result.gamma = threshold_gamma(alpha, p0);
  if (ranking.genes != m.genes()) throw std::invalid_argument("ranking and expression matrix disagree on gene count");
  const Index total = ranking.size();
  result.decisions.assign(static_cast<std::size_t>(total), {});
  const auto r_max = static_cast<Index>(std::ceil((1.0 - p0) * static_cast<double>(total)));

  const auto np = static_cast<std::size_t>(m.genes());
  std::vector<std::vector<Index>> partners(np);
  std::vector<std::optional<double>> null_bound(np);
  int misses = 0;

  for (Index r = 1; r <= total; ++r) {
    if (stop.use_rmax && r > r_max) break;
    if (stop.patience > 0 && misses >= stop.patience) break;
    const auto& edge = ranking.edges[static_cast<std::size_t>(r - 1)];
    const Index resp[2] = {edge.i, edge.j};
    const Index cand[2] = {edge.j, edge.i};
    double alt_bound[2] = {0.0, 0.0};
    double log_bf[2] = {0.0, 0.0};

    std::vector<std::exception_ptr> failures(2);
#pragma omp parallel for schedule(static) num_threads(2)
    for (int dir = 0; dir < 2; ++dir) {
      try {
        const auto node = static_cast<std::size_t>(resp[dir]);
        const double null_lb =
            null_bound[node] ? *null_bound[node] : submodel_lower_bound(m, resp[dir], partners[node], opts);
        std::vector<Index> alternative = partners[node];
        alternative.push_back(cand[dir]);
        alt_bound[dir] = submodel_lower_bound(m, resp[dir], alternative, opts);
        log_bf[dir] = alt_bound[dir] - null_lb;
        null_bound[node] = null_lb;
      } catch (...) {
        failures[static_cast<std::size_t>(dir)] = std::current_exception();
      }
    }
    for (const auto& f : failures) {
      if (!f) continue;
      try {
        std::rethrow_exception(f);
      } catch (const NumericalError& e) {
        throw NumericalError("edge (" + m.gene_ids[static_cast<std::size_t>(edge.i)] + ", " +
                             m.gene_ids[static_cast<std::size_t>(edge.j)] + ") at rank " + std::to_string(r) +
                             ": " + e.what());
      }
    }

    auto& decision = result.decisions[static_cast<std::size_t>(r - 1)];
    decision.evaluated = true;
    decision.log_bf_max = std::max(log_bf[0], log_bf[1]);
    decision.bf_max = std::exp(decision.log_bf_max);
    decision.p0_bound = null_probability_bound(decision.bf_max, p0);
    if ((decision.bf_max >= result.gamma) != (decision.p0_bound <= alpha))
      throw std::logic_error("Bayes factor threshold and null-probability bound disagree at rank " +
                             std::to_string(r));
    decision.selected = decision.bf_max > result.gamma;
    result.ranks_evaluated = r;

    if (decision.selected) {
      misses = 0;
      for (int dir = 0; dir < 2; ++dir) {
        const auto node = static_cast<std::size_t>(resp[dir]);
        partners[node].push_back(cand[dir]);
        null_bound[node] = alt_bound[dir];
      }
      result.selected.push_back({edge.i, edge.j});
    } else {
      ++misses;
    }
  }
  return result;
}

}  // namespace shrinknet
