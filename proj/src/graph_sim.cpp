#include "shrinknet/graph_sim.hpp"

#include "shrinknet/error.hpp"

#include <boost/random/chi_squared_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include <cmath>
#include <numeric>

namespace shrinknet {

std::string_view to_string(GraphKind kind) {
  switch (kind) {
    case GraphKind::band: return "band";
    case GraphKind::cluster: return "cluster";
    case GraphKind::hub: return "hub";
    case GraphKind::random: return "random";
  }
  return "unknown";
}

GraphKind parse_graph_kind(std::string_view name) {
  if (name == "band") return GraphKind::band;
  if (name == "cluster") return GraphKind::cluster;
  if (name == "hub") return GraphKind::hub;
  if (name == "random") return GraphKind::random;
  throw ConfigError("unknown graph kind '" + std::string(name) + "' (valid kinds: band, cluster, hub, random)");
}

std::vector<int> default_block_sizes(GraphKind kind, Index p) {
  if (kind != GraphKind::hub && kind != GraphKind::cluster)
    throw std::invalid_argument("block sizes only apply to hub and cluster graphs");
  const double large_share = kind == GraphKind::hub ? 0.5 : 0.6;
  const auto n_large = static_cast<int>(std::floor(static_cast<double>(p) * large_share / 10.0));
  auto rest = static_cast<int>(p) - 10 * n_large;
  std::vector<int> sizes(static_cast<std::size_t>(n_large), 10);
  for (; rest >= 5; rest -= 5) sizes.push_back(5);
  if (rest >= 2) sizes.push_back(rest);
  else if (rest == 1) sizes.back() += 1;
  return sizes;
}

Index GraphSpec::edge_count() const {
  Index count = 0;
  for (Index i = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j) count += adjacency(i, j) ? 1 : 0;
  return count;
}

std::vector<Edge> GraphSpec::edges() const {
  std::vector<Edge> out;
  for (Index i = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j)
      if (adjacency(i, j)) out.emplace_back(i, j);
  return out;
}

GraphSpec make_structure(GraphKind kind, Index p, const StructureParams& params, std::uint64_t seed) {
  if (p < 2) throw ConfigError("graph needs at least 2 nodes");
  GraphSpec g;
  g.p = p;
  g.kind = kind;
  g.params = params;
  g.adjacency.setConstant(p, p, false);
  const auto connect = [&g](Index i, Index j) {
    g.adjacency(i, j) = true;
    g.adjacency(j, i) = true;
  };

  switch (kind) {
    case GraphKind::band: {
      if (params.bandwidth < 1) throw ConfigError("bandwidth must be at least 1");
      for (Index i = 0; i < p; ++i)
        for (Index j = i + 1; j < p && j - i <= params.bandwidth; ++j) connect(i, j);
      break;
    }
    case GraphKind::cluster:
    case GraphKind::hub: {
      if (g.params.block_sizes.empty()) g.params.block_sizes = default_block_sizes(kind, p);
      const auto& sizes = g.params.block_sizes;
      const long total = std::accumulate(sizes.begin(), sizes.end(), 0L);
      for (const int s : sizes)
        if (s < 1) throw ConfigError("block sizes must be positive");
      if (total != p)
        throw ConfigError("block sizes sum to " + std::to_string(total) + " but p = " + std::to_string(p));
      Index start = 0;
      for (const int s : sizes) {
        for (Index i = start; i < start + s; ++i) {
          if (kind == GraphKind::hub) {
            if (i != start) connect(start, i);
          } else {
            for (Index j = i + 1; j < start + s; ++j) connect(i, j);
          }
        }
        start += s;
      }
      break;
    }
    case GraphKind::random: {
      if (!(params.density >= 0.0 && params.density <= 1.0)) throw ConfigError("density must lie in [0, 1]");
      Rng rng(seed);
      boost::random::uniform_01<double> unif;
      for (Index i = 0; i < p; ++i)
        for (Index j = i + 1; j < p; ++j)
          if (unif(rng) < params.density) connect(i, j);
      break;
    }
  }
  return g;
}

GraphSpec graph_from_edges(Index p, const std::vector<Edge>& edges) {
  GraphSpec g;
  g.p = p;
  g.kind = GraphKind::random;
  g.adjacency.setConstant(p, p, false);
  for (const auto& [i, j] : edges) {
    if (i == j || i < 0 || j < 0 || i >= p || j >= p) throw std::invalid_argument("invalid edge in edge list");
    g.adjacency(i, j) = true;
    g.adjacency(j, i) = true;
  }
  return g;
}

Eigen::MatrixXd sample_wishart_identity(Index p, double df, Rng& rng) {
  if (!(df > static_cast<double>(p - 1))) throw ConfigError("Wishart degrees of freedom must exceed p - 1");
  boost::random::normal_distribution<double> normal;
  Eigen::MatrixXd bartlett = Eigen::MatrixXd::Zero(p, p);
  for (Index i = 0; i < p; ++i) {
    boost::random::chi_squared_distribution<double> chi(df - static_cast<double>(i));
    bartlett(i, i) = std::sqrt(chi(rng));
    for (Index j = 0; j < i; ++j) bartlett(i, j) = normal(rng);
  }
  return bartlett * bartlett.transpose();
}

PrecisionMatrix sample_precision(const GraphSpec& g, double dof, Rng& rng) {
  if (!(dof > 2.0)) throw ConfigError("G-Wishart degrees of freedom must exceed 2");
  const Index p = g.p;
  const Eigen::MatrixXd draw = sample_wishart_identity(p, dof + static_cast<double>(p) - 1.0, rng);
  const Eigen::MatrixXd target = draw.llt().solve(Eigen::MatrixXd::Identity(p, p));

  std::vector<std::vector<Index>> neighbours(static_cast<std::size_t>(p));
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < p; ++j)
      if (j != i && g.has_edge(i, j)) neighbours[static_cast<std::size_t>(i)].push_back(j);

  // Cyclic per-node regression: W_{-i,i} = W_{-i,N(i)} W_{N(i),N(i)}^{-1} target_{N(i),i}.
  Eigen::MatrixXd w = target;
  const double scale = target.cwiseAbs().maxCoeff();
  bool converged = false;
  for (int cycle = 0; cycle < kMaxCompletionCycles && !converged; ++cycle) {
    const Eigen::MatrixXd previous = w;
    for (Index i = 0; i < p; ++i) {
      const auto& nb = neighbours[static_cast<std::size_t>(i)];
      Eigen::VectorXd column = Eigen::VectorXd::Zero(p);
      if (!nb.empty()) {
        const auto k = static_cast<Index>(nb.size());
        Eigen::MatrixXd w_nn(k, k);
        Eigen::VectorXd t_n(k);
        for (Index a = 0; a < k; ++a) {
          t_n(a) = target(nb[static_cast<std::size_t>(a)], i);
          for (Index b = 0; b < k; ++b) w_nn(a, b) = w(nb[static_cast<std::size_t>(a)], nb[static_cast<std::size_t>(b)]);
        }
        const Eigen::VectorXd coef = w_nn.llt().solve(t_n);
        for (Index a = 0; a < k; ++a) column += w.col(nb[static_cast<std::size_t>(a)]) * coef(a);
      }
      for (Index j = 0; j < p; ++j) {
        if (j == i) continue;
        w(i, j) = column(j);
        w(j, i) = column(j);
      }
    }
    converged = (w - previous).cwiseAbs().maxCoeff() <= 1e-12 * scale;
  }

  Eigen::MatrixXd omega = w.llt().solve(Eigen::MatrixXd::Identity(p, p));
  omega = (0.5 * (omega + omega.transpose())).eval();
  const double off_pattern = [&] {
    double worst = 0.0;
    for (Index i = 0; i < p; ++i)
      for (Index j = 0; j < p; ++j)
        if (i != j && !g.has_edge(i, j)) worst = std::max(worst, std::abs(omega(i, j)));
    return worst;
  }();
  if (!converged || off_pattern > kZeroPatternTolerance)
    throw NumericalError("graph-constrained completion did not converge");
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < p; ++j)
      if (i != j && !g.has_edge(i, j)) omega(i, j) = 0.0;
  if (omega.llt().info() != Eigen::Success) throw NumericalError("completed precision matrix is not positive definite");
  return {omega};
}

Eigen::MatrixXd partial_correlations(const PrecisionMatrix& omega) {
  const Eigen::VectorXd inv_sd = omega.omega.diagonal().cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd rho = -(inv_sd.asDiagonal() * omega.omega * inv_sd.asDiagonal());
  rho.diagonal().setOnes();
  return rho;
}

ExpressionMatrix sample_mvn(const PrecisionMatrix& omega, Index n, Rng& rng) {
  if (n < 1) throw ConfigError("sample size must be at least 1");
  const Index p = omega.omega.rows();
  Eigen::LLT<Eigen::MatrixXd> llt(omega.omega);
  if (llt.info() != Eigen::Success) throw NumericalError("precision matrix is not positive definite");
  boost::random::normal_distribution<double> normal;
  Eigen::MatrixXd z(p, n);
  for (Index s = 0; s < n; ++s)
    for (Index j = 0; j < p; ++j) z(j, s) = normal(rng);
  // Omega = L L^T, so x = L^{-T} z has covariance Omega^{-1}.
  const Eigen::MatrixXd x = llt.matrixU().solve(z);

  ExpressionMatrix m;
  m.values = x.transpose();
  for (Index j = 0; j < p; ++j) m.gene_ids.push_back("g" + std::to_string(j + 1));
  for (Index s = 0; s < n; ++s) m.sample_ids.push_back("s" + std::to_string(s + 1));
  return m;
}

}  // namespace shrinknet
