#include <doctest.h>

#include "fixtures.hpp"
#include "shrinknet/bench.hpp"
#include "shrinknet/error.hpp"

#include <boost/random/uniform_int_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

using namespace shrinknet;

namespace {

// Ranking that lists pairs in the given order with strictly decreasing scores.
EdgeRanking ranking_in_order(Index p, const std::vector<Edge>& order) {
  EdgeRanking r;
  r.genes = p;
  for (std::size_t k = 0; k < order.size(); ++k)
    r.edges.push_back({order[k].first, order[k].second, static_cast<double>(order.size() - k), static_cast<Index>(k + 1)});
  return r;
}

std::vector<Edge> all_pairs(Index p) {
  std::vector<Edge> out;
  for (Index i = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j) out.push_back({i, j});
  return out;
}

// Area under the TPR step function up to fpr_max, walking one pair at a time.
double staircase_pauc(const std::vector<Edge>& order, const GraphSpec& truth, double fpr_max) {
  const double pos = static_cast<double>(truth.edge_count());
  const double neg = static_cast<double>(truth.pair_count()) - pos;
  double tp = 0.0, fp = 0.0, area = 0.0;
  for (const auto& [i, j] : order) {
    if (truth.has_edge(i, j)) {
      tp += 1.0;
      continue;
    }
    const double width = std::min((fp + 1.0) / neg, fpr_max) - std::min(fp / neg, fpr_max);
    area += width * tp / pos;
    fp += 1.0;
  }
  return area / fpr_max;
}

}  // namespace

TEST_CASE("confusion counts over unordered pairs") {
  const auto truth = graph_from_edges(4, {{0, 1}});
  const std::vector<Edge> sel{{0, 1}, {2, 3}};
  const auto c = confusion(sel, truth);
  CHECK(c.tp == 1);
  CHECK(c.fp == 1);
  CHECK(c.fn == 0);
  CHECK(c.tn == 4);
  CHECK(c.total() == 6);

  const auto exact = confusion(truth.edges(), truth);
  CHECK(exact.fp == 0);
  CHECK(exact.fn == 0);
  const auto none = confusion({}, truth);
  CHECK(none.tp == 0);
  CHECK(none.fp == 0);
  CHECK(none.fn == 1);

  const std::vector<Edge> reversed_dup{{1, 0}, {0, 1}};
  CHECK(confusion(reversed_dup, truth).tp == 1);
  const std::vector<Edge> bad{{0, 9}};
  CHECK_THROWS_AS(confusion(bad, truth), std::invalid_argument);
}

TEST_CASE("scores") {
  auto s = scores({10, 0, 10, 50});
  CHECK(s.precision == 1.0);
  CHECK(s.tpr == 0.5);
  CHECK(s.fpr == 0.0);
  CHECK(s.f_score == doctest::Approx(2.0 / 3.0));
  s = scores({0, 0, 0, 7});
  CHECK(s.precision == 0.0);
  CHECK(s.tpr == 0.0);
  CHECK(s.f_score == 0.0);
  s = scores({5, 0, 0, 5});
  CHECK(s.f_score == 1.0);
  s = scores({2, 3, 2, 3});
  CHECK(s.fpr == doctest::Approx(0.5));
}

TEST_CASE("partial ROC of perfect, reversed and tied rankings") {
  const auto truth = make_structure(GraphKind::band, 10, StructureParams{1, {}, 0.0});
  std::vector<Edge> order = all_pairs(10);
  std::stable_partition(order.begin(), order.end(), [&](const Edge& e) { return truth.has_edge(e.first, e.second); });
  const auto perfect = partial_roc(ranking_in_order(10, order), truth);
  CHECK(perfect.pauc == doctest::Approx(1.0).epsilon(1e-14));
  std::reverse(order.begin(), order.end());
  CHECK(partial_roc(ranking_in_order(10, order), truth).pauc == 0.0);

  auto tied = ranking_in_order(10, order);
  for (auto& e : tied.edges) e.kappa_bar = 1.0;
  const auto diag = partial_roc(tied, truth, 0.2);
  CHECK(diag.pauc == doctest::Approx(0.1).epsilon(1e-12));
  REQUIRE(diag.curve.size() == 2);
  CHECK(diag.curve.back().fpr == 0.2);

  CHECK_THROWS_AS(partial_roc(tied, make_structure(GraphKind::random, 10, StructureParams{4, {}, 0.0})), ValidationError);
  CHECK_THROWS_AS(partial_roc(tied, truth, 0.0), ConfigError);
}

TEST_CASE("partial ROC matches a pair-by-pair staircase") {
  const auto truth = make_structure(GraphKind::band, 12, StructureParams{2, {}, 0.0});
  auto order = all_pairs(12);
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::shuffle(order.begin(), order.end(), rng);
    for (const double fpr_max : {0.05, 0.2, 1.0}) {
      const auto roc = partial_roc(ranking_in_order(12, order), truth, fpr_max);
      CHECK(roc.pauc == doctest::Approx(staircase_pauc(order, truth, fpr_max)).epsilon(1e-12));
      for (std::size_t k = 1; k < roc.curve.size(); ++k) {
        CHECK(roc.curve[k].fpr >= roc.curve[k - 1].fpr);
        CHECK(roc.curve[k].tpr >= roc.curve[k - 1].tpr);
      }
    }
  }
}

TEST_CASE("random rankings score about half of fpr_max") {
  const auto truth = make_structure(GraphKind::band, 30, {});
  auto order = all_pairs(30);
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    const double pauc = partial_roc(ranking_in_order(30, order), truth, 0.2).pauc;
    CHECK(pauc >= 0.0);
    CHECK(pauc <= 1.0);
    total += pauc;
  }
  CHECK(std::abs(total / 200.0 - 0.1) < 0.03);
}

TEST_CASE("Spearman correlation") {
  const std::vector<double> a{1, 2, 3, 4};
  const std::vector<double> rev{4, 3, 2, 1};
  CHECK(rank_correlation(a, a) == doctest::Approx(1.0));
  CHECK(rank_correlation(a, rev) == doctest::Approx(-1.0));
  CHECK(rank_correlation(std::vector<double>{1, 2, 3}, std::vector<double>{3, 1, 2}) == doctest::Approx(-0.5));
  // Average ranks for ties: x ranks (1.5, 1.5, 3), y ranks (1, 2, 3).
  const double want = (1.5 * 1 + 1.5 * 2 + 3 * 3 - 3 * 4.0) / std::sqrt((1.5 * 1.5 * 2 + 9 - 12.0) * (14 - 12.0));
  CHECK(rank_correlation(std::vector<double>{5, 5, 9}, std::vector<double>{1, 2, 3}) == doctest::Approx(want));
  CHECK_THROWS_AS(rank_correlation(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}), NumericalError);
  CHECK_THROWS_AS(rank_correlation(std::vector<double>{1}, std::vector<double>{2}), std::invalid_argument);
}

TEST_CASE("random split") {
  auto m = fixtures::matrix(fixtures::gaussian(10, 3, 4));
  Rng rng(5);
  const auto [small, large] = random_split(m, 4, rng);
  CHECK(small.samples() == 4);
  CHECK(large.samples() == 6);
  std::vector<std::string> rows = small.sample_ids;
  rows.insert(rows.end(), large.sample_ids.begin(), large.sample_ids.end());
  std::sort(rows.begin(), rows.end());
  std::vector<std::string> want = m.sample_ids;
  std::sort(want.begin(), want.end());
  CHECK(rows == want);
  for (Index r = 0; r < small.samples(); ++r) {
    const auto at = std::find(m.sample_ids.begin(), m.sample_ids.end(), small.sample_ids[static_cast<std::size_t>(r)]);
    CHECK(small.values.row(r) == m.values.row(at - m.sample_ids.begin()));
  }
  const auto position = [&](const std::string& id) { return std::find(m.sample_ids.begin(), m.sample_ids.end(), id) - m.sample_ids.begin(); };
  CHECK(std::is_sorted(large.sample_ids.begin(), large.sample_ids.end(),
                       [&](const auto& x, const auto& y) { return position(x) < position(y); }));

  Rng again(5);
  CHECK(random_split(m, 4, again).first.sample_ids == small.sample_ids);
  CHECK_THROWS_AS(random_split(m, 9, rng), ConfigError);
  CHECK_THROWS_AS(random_split(m, 1, rng), ConfigError);
}

TEST_CASE("stability threshold") {
  CHECK(stability_threshold(std::sqrt(30.0 * 100.0), 30.0, 100) == doctest::Approx(1.0));
  CHECK(stability_threshold(1e6, 30.0, 100) == 1.0);
  const double pi = stability_threshold(62.5, 30.0, 3081);
  CHECK(pi == doctest::Approx(0.521131).epsilon(1e-6));
  // Re-substituting recovers the target.
  CHECK(62.5 * 62.5 / ((2.0 * pi - 1.0) * 3081.0) == doctest::Approx(30.0).epsilon(1e-12));
  CHECK_THROWS_AS(stability_threshold(0.0, 30.0, 100), ConfigError);
  double previous = 0.5;
  for (const double q : {5.0, 10.0, 20.0, 40.0}) {
    const double t = stability_threshold(q, 30.0, 500);
    CHECK(t >= previous);
    previous = t;
  }
  previous = 1.0;
  for (const double e_v : {1.0, 5.0, 30.0, 100.0}) {
    const double t = stability_threshold(20.0, e_v, 500);
    CHECK(t <= previous);
    previous = t;
  }
}

TEST_CASE("stability report") {
  const std::vector<std::vector<Edge>> selections{{{0, 1}, {2, 3}}, {{0, 1}}, {{0, 1}, {1, 2}}, {{0, 1}, {2, 3}}};
  const auto r = stability_report(selections, 1.0, 6);
  CHECK(r.resamples == 4);
  CHECK(r.q_hat == doctest::Approx(1.75));
  CHECK(r.selection_frequency.at({0, 1}) == 1.0);
  CHECK(r.selection_frequency.at({2, 3}) == 0.5);
  CHECK(r.pi_thr == doctest::Approx(std::min(1.0, 0.5 * (1.75 * 1.75 / 6.0 + 1.0))));
  CHECK(r.stable_edges == std::vector<Edge>{{0, 1}});

  const auto none = stability_report(std::vector<std::vector<Edge>>{{{0, 1}}, {{1, 2}}, {{2, 3}}}, 0.01, 6);
  CHECK(none.stable_edges.empty());
  CHECK_THROWS_AS(stability_report(std::vector<std::vector<Edge>>{{{0, 1}}}, 1.0, 6), ConfigError);
}

TEST_CASE("method configurations") {
  const NetworkConfig base;
  CHECK(method_config(base, Method::shrinknet).em.global_shrinkage);
  CHECK_FALSE(method_config(base, Method::noshrink).em.global_shrinkage);
  CHECK(to_string(Method::noshrink) == "NoShrink");
}

TEST_CASE("model simulation plumbing and aggregation") {
  ModelSimConfig config;
  config.p = 20;
  config.n_list = {100};
  config.reps = 3;
  config.seed = 9;
  const auto result = run_model_sim(config);
  REQUIRE(result.reps.size() == 6);
  for (const auto& rep : result.reps) {
    CHECK(rep.ok);
    CHECK(rep.true_edges == 70);
    CHECK(rep.pauc >= 0.0);
    CHECK(rep.pauc <= 1.0);
    CHECK_FALSE(rep.roc.empty());
  }
  CHECK(result.reps[0].method == Method::shrinknet);
  CHECK(result.reps[1].method == Method::noshrink);
  REQUIRE(result.table.size() == 2);
  for (const auto& row : result.table) {
    CHECK(row.successes == 3);
    CHECK(row.failures == 0);
    double sum = 0.0;
    for (const auto& rep : result.reps)
      if (rep.method == row.method) sum += rep.pauc;
    CHECK(std::abs(row.pauc.mean - sum / 3.0) <= 1e-12);
  }

  config.execution = Execution::serial;
  const auto serial = run_model_sim(config);
  for (std::size_t k = 0; k < result.reps.size(); ++k) {
    CHECK(serial.reps[k].pauc == result.reps[k].pauc);
    CHECK(serial.reps[k].selected == result.reps[k].selected);
    CHECK(serial.reps[k].prior_a == result.reps[k].prior_a);
  }
}

TEST_CASE("aggregation skips failed replicates") {
  std::vector<RepMetrics> reps(3);
  reps[0].ok = true;
  reps[0].pauc = 0.2;
  reps[1].ok = true;
  reps[1].pauc = 0.4;
  reps[2].ok = false;
  reps[2].pauc = 99.0;
  const auto table = aggregate(reps);
  REQUIRE(table.size() == 1);
  CHECK(table[0].successes == 2);
  CHECK(table[0].failures == 1);
  CHECK(table[0].pauc.mean == doctest::Approx(0.3));
  CHECK(table[0].pauc.sd == doctest::Approx(std::sqrt(0.02)));
}

TEST_CASE("split study is reproducible") {
  const auto m = fixtures::simulated(GraphKind::band, 10, 60, 10);
  SplitStudyConfig config;
  config.n_small = 20;
  config.resamples = 4;
  config.seed = 3;
  config.e_v = 2.0;
  const auto a = run_split_study(m, config);
  REQUIRE(a.splits.size() == 8);
  REQUIRE(a.stability.size() == 2);
  for (const auto& s : a.splits) {
    CHECK(s.kappa_spearman >= -1.0);
    CHECK(s.kappa_spearman <= 1.0);
  }
  config.execution = Execution::serial;
  const auto b = run_split_study(m, config);
  for (std::size_t k = 0; k < a.splits.size(); ++k) {
    CHECK(a.splits[k].small_selected == b.splits[k].small_selected);
    CHECK(a.splits[k].kappa_spearman == b.splits[k].kappa_spearman);
  }
  for (std::size_t k = 0; k < a.stability.size(); ++k) {
    CHECK(a.stability[k].second.stable_edges == b.stability[k].second.stable_edges);
    CHECK(a.stability[k].second.pi_thr == b.stability[k].second.pi_thr);
  }
}
