#include "shrinknet/pipeline.hpp"

#include <chrono>

namespace shrinknet {

NetworkResult infer_network(const ExpressionMatrix& raw, const NetworkConfig& config) {
  NetworkResult out;
  auto mark = std::chrono::steady_clock::now();
  const auto lap = [&](const char* stage) {
    const auto now = std::chrono::steady_clock::now();
    out.stage_ms.emplace_back(stage, std::chrono::duration<double, std::milli>(now - mark).count());
    mark = now;
  };
  out.data = standardize(raw, config.scale);
  lap("standardize");
  out.fit = fit_sem(out.data, config.em);
  lap("fit_sem");
  out.kappa = kappa_scores(out.fit);
  out.ranking = rank_edges(out.kappa);
  lap("rank");
  const double p0 = config.p0 ? *config.p0 : estimate_p0(out.data, out.ranking, config.submodel, config.em.execution);
  lap("estimate_p0");
  out.selection = forward_select(out.data, out.ranking, config.alpha, p0, config.stop, config.submodel);
  lap("forward_select");
  return out;
}

}  // namespace shrinknet
