#include "shrinknet/bench.hpp"

#include "detail/parallel_for.hpp"
#include "shrinknet/error.hpp"

#include <boost/random/uniform_int_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace shrinknet {

namespace {

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

Summary summarize(const std::vector<double>& xs) {
  Summary s;
  if (xs.empty()) return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (const double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

std::vector<double> average_ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

// kappa_bar indexed by the lexicographic pair order (0,1), (0,2), ..., (p-2,p-1).
std::vector<double> kappa_bar_by_pair(const EdgeRanking& ranking) {
  const Index p = ranking.genes;
  std::vector<double> out(ranking.edges.size());
  for (const auto& e : ranking.edges) {
    const Index idx = e.i * p - e.i * (e.i + 1) / 2 + (e.j - e.i - 1);
    out[static_cast<std::size_t>(idx)] = e.kappa_bar;
  }
  return out;
}

ExpressionMatrix take_rows(const ExpressionMatrix& m, const std::vector<Index>& rows) {
  ExpressionMatrix out;
  out.gene_ids = m.gene_ids;
  out.values.resize(static_cast<Index>(rows.size()), m.genes());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.values.row(static_cast<Index>(r)) = m.values.row(rows[r]);
    out.sample_ids.push_back(m.sample_ids[static_cast<std::size_t>(rows[r])]);
  }
  return out;
}

}  // namespace

ConfusionCounts confusion(std::span<const Edge> selected, const GraphSpec& truth) {
  std::set<Edge> chosen;
  for (const auto& [i, j] : selected) {
    if (i < 0 || j < 0 || i >= truth.p || j >= truth.p || i == j)
      throw std::invalid_argument("selected edge outside the graph");
    chosen.insert(make_edge(i, j));
  }
  ConfusionCounts c;
  for (Index i = 0; i < truth.p; ++i) {
    for (Index j = i + 1; j < truth.p; ++j) {
      const bool sel = chosen.count({i, j}) > 0;
      const bool real = truth.has_edge(i, j);
      if (sel && real) ++c.tp;
      else if (sel) ++c.fp;
      else if (real) ++c.fn;
      else ++c.tn;
    }
  }
  return c;
}

Scores scores(const ConfusionCounts& c) {
  Scores s;
  s.tpr = safe_ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fn));
  s.fpr = safe_ratio(static_cast<double>(c.fp), static_cast<double>(c.fp + c.tn));
  s.precision = safe_ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fp));
  s.f_score = safe_ratio(2.0 * s.precision * s.tpr, s.precision + s.tpr);
  return s;
}

PartialRoc partial_roc(const EdgeRanking& ranking, const GraphSpec& truth, double fpr_max) {
  if (!(fpr_max > 0.0 && fpr_max <= 1.0)) throw ConfigError("fpr_max must lie in (0, 1]");
  if (ranking.genes != truth.p) throw std::invalid_argument("ranking and truth disagree on gene count");
  const Index positives = truth.edge_count();
  const Index negatives = truth.pair_count() - positives;
  if (positives == 0 || negatives == 0) throw ValidationError("ROC undefined: truth has no edges or no non-edges");

  PartialRoc roc;
  roc.curve.push_back({0.0, 0.0});
  Index tp = 0;
  Index fp = 0;
  double area = 0.0;
  const auto& edges = ranking.edges;
  for (std::size_t start = 0; start < edges.size();) {
    std::size_t end = start;
    while (end < edges.size() && edges[end].kappa_bar == edges[start].kappa_bar) {
      (truth.has_edge(edges[end].i, edges[end].j) ? tp : fp) += 1;
      ++end;
    }
    start = end;
    const RocPoint prev = roc.curve.back();
    RocPoint next{static_cast<double>(fp) / static_cast<double>(negatives),
                  static_cast<double>(tp) / static_cast<double>(positives)};
    if (next.fpr > fpr_max) {
      const double t = (fpr_max - prev.fpr) / (next.fpr - prev.fpr);
      next = {fpr_max, prev.tpr + t * (next.tpr - prev.tpr)};
    }
    area += 0.5 * (next.fpr - prev.fpr) * (prev.tpr + next.tpr);
    roc.curve.push_back(next);
    if (next.fpr >= fpr_max) break;
  }
  roc.pauc = area / fpr_max;
  return roc;
}

double rank_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("rank correlation needs equal lengths >= 2");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double mean = 0.5 * static_cast<double>(a.size() + 1);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - mean) * (rb[i] - mean);
    saa += (ra[i] - mean) * (ra[i] - mean);
    sbb += (rb[i] - mean) * (rb[i] - mean);
  }
  if (saa == 0.0 || sbb == 0.0) throw NumericalError("rank correlation undefined for constant input");
  return sab / std::sqrt(saa * sbb);
}

std::pair<ExpressionMatrix, ExpressionMatrix> random_split(const ExpressionMatrix& m, Index n_small, Rng& rng) {
  const Index n = m.samples();
  if (n_small < 2 || n_small > n - 2)
    throw ConfigError("n_small must lie in [2, n - 2] (n = " + std::to_string(n) + ")");
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index i = n - 1; i > 0; --i) {
    boost::random::uniform_int_distribution<Index> pick(0, i);
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(pick(rng))]);
  }
  std::vector<Index> small(perm.begin(), perm.begin() + n_small);
  std::vector<Index> large(perm.begin() + n_small, perm.end());
  std::sort(small.begin(), small.end());
  std::sort(large.begin(), large.end());
  return {take_rows(m, small), take_rows(m, large)};
}

double stability_threshold(double q, double e_v, Index pair_count) {
  if (!(q >= 0.0) || !(e_v > 0.0) || pair_count < 1) throw ConfigError("stability threshold needs q >= 0, e_v > 0, P >= 1");
  const double pi = std::min(1.0, 0.5 * (q * q / (e_v * static_cast<double>(pair_count)) + 1.0));
  if (!(pi > 0.5)) throw ConfigError("stability bound is vacuous: q must be positive");
  return pi;
}

StabilityReport stability_report(std::span<const std::vector<Edge>> selections, double e_v, Index pair_count) {
  if (selections.size() < 2) throw ConfigError("stability report needs at least 2 resamples");
  StabilityReport report;
  report.e_v = e_v;
  report.resamples = static_cast<Index>(selections.size());
  double total = 0.0;
  for (const auto& sel : selections) {
    const std::set<Edge> unique(sel.begin(), sel.end());
    total += static_cast<double>(unique.size());
    for (const auto& e : unique) report.selection_frequency[e] += 1.0;
  }
  const double b = static_cast<double>(selections.size());
  for (auto& [edge, freq] : report.selection_frequency) freq /= b;
  report.q_hat = total / b;
  report.pi_thr = stability_threshold(report.q_hat, e_v, pair_count);
  for (const auto& [edge, freq] : report.selection_frequency)
    if (freq >= report.pi_thr) report.stable_edges.push_back(edge);
  return report;
}

std::string_view to_string(Method method) { return method == Method::shrinknet ? "ShrinkNet" : "NoShrink"; }

NetworkConfig method_config(const NetworkConfig& base, Method method) {
  NetworkConfig cfg = base;
  cfg.em.global_shrinkage = method == Method::shrinknet;
  return cfg;
}

std::vector<RepMetrics> run_model_replicate(const ModelSimConfig& config, GraphKind kind, Index n, int rep,
                                            std::uint64_t task_index) {
  std::vector<RepMetrics> out;
  for (const Method method : config.methods) {
    RepMetrics row;
    row.kind = kind;
    row.n = n;
    row.rep = rep;
    row.method = method;
    out.push_back(row);
  }
  try {
    Rng rng = make_stream(config.seed, task_index);
    const GraphSpec truth = make_structure(kind, config.p, config.structure, rng());
    PrecisionMatrix omega;
    for (int attempt = 0;; ++attempt) {
      try {
        omega = sample_precision(truth, config.dof, rng);
        break;
      } catch (const NumericalError&) {
        if (attempt >= 9) throw;
      }
    }
    const ExpressionMatrix data = sample_mvn(omega, n, rng);
    for (auto& row : out) {
      row.true_edges = truth.edge_count();
      try {
        NetworkConfig cfg = method_config(config.network, row.method);
        if (config.execution == Execution::parallel) cfg.em.execution = Execution::serial;
        const NetworkResult res = infer_network(data, cfg);
        const Scores s = scores(confusion(res.selection.selected, truth));
        row.selected = static_cast<Index>(res.selection.selected.size());
        row.tpr = s.tpr;
        row.fpr = s.fpr;
        row.f_score = s.f_score;
        PartialRoc roc = partial_roc(res.ranking, truth, config.fpr_max);
        row.pauc = roc.pauc;
        row.roc = std::move(roc.curve);
        row.p0_hat = res.selection.p0_hat;
        row.prior_a = res.fit.hyper.a;
        row.prior_b = res.fit.hyper.b;
        row.ok = true;
      } catch (const Error& e) {
        row.error = e.what();
      }
    }
  } catch (const Error& e) {
    for (auto& row : out) row.error = e.what();
  }
  return out;
}

std::vector<AggregateRow> aggregate(const std::vector<RepMetrics>& reps) {
  std::vector<AggregateRow> table;
  std::vector<std::vector<const RepMetrics*>> groups;
  for (const auto& r : reps) {
    auto it = std::find_if(table.begin(), table.end(), [&](const AggregateRow& a) {
      return a.kind == r.kind && a.n == r.n && a.method == r.method;
    });
    if (it == table.end()) {
      AggregateRow row;
      row.kind = r.kind;
      row.n = r.n;
      row.method = r.method;
      table.push_back(row);
      groups.emplace_back();
      it = table.end() - 1;
    }
    groups[static_cast<std::size_t>(it - table.begin())].push_back(&r);
  }
  for (std::size_t g = 0; g < table.size(); ++g) {
    std::vector<double> tpr, fpr, f, pauc;
    for (const auto* r : groups[g]) {
      if (!r->ok) {
        ++table[g].failures;
        continue;
      }
      ++table[g].successes;
      tpr.push_back(r->tpr);
      fpr.push_back(r->fpr);
      f.push_back(r->f_score);
      pauc.push_back(r->pauc);
    }
    table[g].tpr = summarize(tpr);
    table[g].fpr = summarize(fpr);
    table[g].f_score = summarize(f);
    table[g].pauc = summarize(pauc);
  }
  std::stable_sort(table.begin(), table.end(), [](const AggregateRow& a, const AggregateRow& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.n != b.n) return a.n < b.n;
    return a.method < b.method;
  });
  return table;
}

ModelSimResult run_model_sim(const ModelSimConfig& config) {
  if (config.kinds.empty() || config.n_list.empty() || config.reps < 1 || config.methods.empty())
    throw ConfigError("simulation needs at least one kind, sample size, replicate and method");
  if (config.p < 2) throw ConfigError("simulation needs p >= 2");
  struct Task {
    GraphKind kind;
    Index n;
    int rep;
  };
  std::vector<Task> tasks;
  for (const auto kind : config.kinds)
    for (const auto n : config.n_list)
      for (int rep = 0; rep < config.reps; ++rep) tasks.push_back({kind, n, rep});

  std::vector<std::vector<RepMetrics>> results(tasks.size());
  detail::parallel_for(
      static_cast<Index>(tasks.size()), config.execution,
      [&](Index t) {
        const auto& task = tasks[static_cast<std::size_t>(t)];
        results[static_cast<std::size_t>(t)] =
            run_model_replicate(config, task.kind, task.n, task.rep, static_cast<std::uint64_t>(t));
      },
      [](Index t) { return "replicate task " + std::to_string(t); });

  ModelSimResult out;
  for (auto& r : results) out.reps.insert(out.reps.end(), r.begin(), r.end());
  out.table = aggregate(out.reps);
  return out;
}

SplitStudyResult run_split_study(const ExpressionMatrix& m, const SplitStudyConfig& config) {
  if (config.resamples < 2) throw ConfigError("split study needs at least 2 resamples");
  if (config.methods.empty()) throw ConfigError("split study needs at least one method");
  validate(m);
  const auto methods = config.methods.size();
  std::vector<SplitMetrics> splits(static_cast<std::size_t>(config.resamples) * methods);

  detail::parallel_for(
      config.resamples, config.execution,
      [&](Index b) {
        Rng rng = make_stream(config.seed, static_cast<std::uint64_t>(b));
        const auto [small, large] = random_split(m, config.n_small, rng);
        for (std::size_t k = 0; k < methods; ++k) {
          auto& row = splits[static_cast<std::size_t>(b) * methods + k];
          row.method = config.methods[k];
          row.resample = static_cast<int>(b);
          NetworkConfig cfg = method_config(config.network, row.method);
          if (config.execution == Execution::parallel) cfg.em.execution = Execution::serial;
          const NetworkResult res_small = infer_network(small, cfg);
          row.small_selected = res_small.selection.selected;
          std::sort(row.small_selected.begin(), row.small_selected.end());
          if (!config.validate_large) continue;
          const NetworkResult res_large = infer_network(large, cfg);
          const GraphSpec benchmark = graph_from_edges(m.genes(), res_large.selection.selected);
          row.large_selected = static_cast<Index>(res_large.selection.selected.size());
          const Scores s = scores(confusion(row.small_selected, benchmark));
          row.tpr = s.tpr;
          row.fpr = s.fpr;
          const auto ka = kappa_bar_by_pair(res_small.ranking);
          const auto kb = kappa_bar_by_pair(res_large.ranking);
          row.kappa_spearman = rank_correlation(ka, kb);
          const Index positives = benchmark.edge_count();
          if (positives > 0 && positives < benchmark.pair_count()) {
            row.pauc = partial_roc(res_small.ranking, benchmark, config.fpr_max).pauc;
            row.validated = true;
          }
        }
      },
      [](Index b) { return "resample " + std::to_string(b); });

  SplitStudyResult out;
  out.splits = std::move(splits);
  const Index pairs = m.genes() * (m.genes() - 1) / 2;
  for (std::size_t k = 0; k < methods; ++k) {
    std::vector<std::vector<Edge>> selections;
    for (std::size_t b = 0; b < static_cast<std::size_t>(config.resamples); ++b)
      selections.push_back(out.splits[b * methods + k].small_selected);
    out.stability.emplace_back(config.methods[k], stability_report(selections, config.e_v, pairs));
  }
  return out;
}

}  // namespace shrinknet
