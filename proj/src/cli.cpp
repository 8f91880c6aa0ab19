#include "shrinknet/cli.hpp"

#include "shrinknet/bench.hpp"
#include "shrinknet/error.hpp"
#include "shrinknet/graph_sim.hpp"
#include "shrinknet/pipeline.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>
#include <omp.h>
#include <openssl/evp.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace shrinknet {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string num(double x) { return std::isfinite(x) ? fmt::format("{}", x) : "NA"; }

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open input file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string bytes = buffer.str();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw InputError("cannot hash '" + path.string() + "'");
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

class Timings {
 public:
  template <typename F>
  auto time(const std::string& stage, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      add(stage, start);
    } else {
      auto result = f();
      add(stage, start);
      return result;
    }
  }
  void record(const std::string& stage, double ms) { ms_[stage] = std::round(ms * 1000.0) / 1000.0; }
  const json& to_json() const { return ms_; }

 private:
  void add(const std::string& stage, std::chrono::steady_clock::time_point start) {
    record(stage, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
  }
  json ms_ = json::object();
};

class OutputDir {
 public:
  explicit OutputDir(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw InputError("cannot create output directory '" + dir_.string() + "'");
  }

  template <typename Writer>
  void write(const std::string& name, std::string_view format, Writer&& writer) {
    const fs::path path = dir_ / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    writer(out);
    out.flush();
    if (!out) throw InputError("write failed for '" + path.string() + "'");
    files_[name] = format;
  }

  void write_json(const std::string& name, std::string_view format, const json& doc) {
    write(name, format, [&](std::ostream& out) { out << doc.dump(2) << '\n'; });
  }

  const json& files() const { return files_; }

 private:
  fs::path dir_;
  json files_ = json::object();
};

struct RunContext {
  std::string command;
  std::vector<std::string> arguments;
  int threads = 1;
  std::ostream* log = nullptr;
  bool quiet = false;

  template <typename... Args>
  void info(fmt::format_string<Args...> f, Args&&... args) const {
    if (!quiet) *log << "[shrinknet] " << fmt::format(f, std::forward<Args>(args)...) << '\n';
  }
};

void write_manifest(OutputDir& out, const RunContext& ctx, const json& config, std::optional<std::uint64_t> seed,
                    const json& inputs, Timings& timings) {
  json m;
  m["format_version"] = kFormatVersion;
  m["tool"] = "shrinknet";
  m["version"] = std::string(kVersion);
  m["command"] = ctx.command;
  m["arguments"] = ctx.arguments;
  m["seed"] = seed ? json(*seed) : json(nullptr);
  m["seed_derivation"] = "stream k uses mt19937_64 seeded with splitmix64(seed + (k + 1) * 0x9E3779B97F4A7C15)";
  m["threads"] = ctx.threads;
  m["config"] = config;
  m["inputs"] = inputs;
  json outputs = out.files();
  outputs["manifest.json"] = "json/v1";
  m["outputs"] = outputs;
  m["timings_ms"] = timings.to_json();
  out.write_json("manifest.json", "json/v1", m);
}

int resolve_threads(const CLI::Option* flag, int requested) {
  int n = 0;
  if (flag->count() > 0) {
    n = requested;
  } else if (const char* env = std::getenv("SHRINKNET_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1 || v > 4096) throw ConfigError(fmt::format("SHRINKNET_THREADS must be a positive integer, got '{}'", env));
    n = static_cast<int>(v);
  } else {
    n = omp_get_max_threads();
  }
  if (n < 1) throw ConfigError("--threads must be at least 1");
  omp_set_num_threads(n);
  return n;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    if (item.empty()) throw ConfigError("empty entry in list '" + s + "'");
    out.push_back(item);
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

std::vector<Method> parse_methods(const std::string& s) {
  std::vector<Method> out;
  for (const auto& name : split_list(s)) {
    if (name == "shrinknet") out.push_back(Method::shrinknet);
    else if (name == "noshrink") out.push_back(Method::noshrink);
    else throw ConfigError("unknown method '" + name + "' (valid methods: shrinknet, noshrink)");
  }
  return out;
}

std::string methods_string(const std::vector<Method>& methods) {
  std::string s;
  for (const auto m : methods) s += (s.empty() ? "" : ",") + std::string(m == Method::shrinknet ? "shrinknet" : "noshrink");
  return s;
}

struct NetworkFlags {
  bool no_scale = false;
  double tol = 1e-3;
  int max_iter = 1000;
  std::string eb = "approx";
  double alpha = 0.1;
  double p0 = 0.0;
  CLI::Option* p0_flag = nullptr;
  int patience = 100;
  bool no_rmax = false;

  void add(CLI::App* cmd) {
    cmd->add_flag("--no-scale", no_scale, "Center genes without scaling to unit variance");
    cmd->add_option("--tol", tol, "Convergence tolerance on the lower bound")->capture_default_str();
    cmd->add_option("--max-iter", max_iter, "Maximum variational iterations")->capture_default_str();
    cmd->add_option("--eb", eb, "Empirical-Bayes M-step: approx or exact")
        ->check(CLI::IsMember({"approx", "exact"}))
        ->capture_default_str();
    cmd->add_option("--alpha", alpha, "Edge-wise null-probability level")->capture_default_str();
    p0_flag = cmd->add_option("--p0", p0, "Fix the prior null proportion instead of estimating it");
    cmd->add_option("--patience", patience, "Stop after this many consecutive rejections (0 disables)")
        ->capture_default_str();
    cmd->add_flag("--no-rmax", no_rmax, "Do not stop at rank ceil((1 - p0) P)");
  }

  NetworkConfig build(Execution exec) const {
    NetworkConfig cfg;
    cfg.scale = !no_scale;
    cfg.em.tol = tol;
    cfg.em.max_iter = max_iter;
    cfg.em.eb = eb == "exact" ? EbUpdate::exact : EbUpdate::approx;
    cfg.em.execution = exec;
    cfg.submodel.fit.tol = tol;
    cfg.submodel.fit.max_iter = max_iter;
    cfg.alpha = alpha;
    if (p0_flag->count() > 0) {
      if (!(p0 > 0.0 && p0 < 1.0)) throw ConfigError("--p0 must lie in (0, 1)");
      cfg.p0 = p0;
    }
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("--alpha must lie in (0, 1)");
    if (patience < 0) throw ConfigError("--patience must be non-negative");
    cfg.stop.patience = patience;
    cfg.stop.use_rmax = !no_rmax;
    cfg.em.validate();
    return cfg;
  }

  json snapshot() const {
    json j;
    j["scale"] = !no_scale;
    j["tol"] = tol;
    j["max_iter"] = max_iter;
    j["eb"] = eb;
    j["alpha"] = alpha;
    j["p0"] = p0_flag->count() > 0 ? json(p0) : json("estimated");
    j["patience"] = patience;
    j["rmax_stop"] = !no_rmax;
    return j;
  }
};

struct InputFlags {
  std::string path;
  bool transpose = false;
  std::string format = "auto";

  void add(CLI::App* cmd) {
    cmd->add_option("input", path, "Expression matrix (CSV or TSV; rows are samples unless --transpose)")->required();
    cmd->add_flag("--transpose", transpose, "Input rows are genes and columns are samples");
    cmd->add_option("--format", format, "Input format: auto, csv or tsv")
        ->check(CLI::IsMember({"auto", "csv", "tsv"}))
        ->capture_default_str();
  }

  ExpressionMatrix load() const {
    const TableFormat fmt = format == "auto" ? format_from_path(path) : (format == "tsv" ? TableFormat::tsv : TableFormat::csv);
    return load_expression_matrix(path, fmt, transpose);
  }

  json digest() const {
    json j = json::array();
    j.push_back({{"path", path}, {"sha256", sha256_file(path)}, {"transpose", transpose}, {"format", format}});
    return j;
  }
};

// ---- infer -----------------------------------------------------------------

struct InferArgs {
  InputFlags input;
  NetworkFlags network;
  bool no_global = false;
  std::string out;
};

int cmd_infer(const InferArgs& args, RunContext& ctx) {
  Timings timings;
  const json inputs = args.input.digest();
  NetworkConfig cfg = args.network.build(Execution::parallel);
  cfg.em.global_shrinkage = !args.no_global;
  const ExpressionMatrix raw = timings.time("load", [&] { return args.input.load(); });
  ctx.info("loaded {} samples x {} genes from {}", raw.samples(), raw.genes(), args.input.path);
  OutputDir out(args.out);

  const NetworkResult res = infer_network(raw, cfg);
  for (const auto& [stage, ms] : res.stage_ms) timings.record(stage, ms);
  ctx.info("prior a = {}, b = {}; p0 = {}; {} edges selected", res.fit.hyper.a, res.fit.hyper.b,
           res.selection.p0_hat, res.selection.selected.size());

  timings.time("write", [&] {
    const auto& genes = raw.gene_ids;
    out.write("edges.tsv", "tsv/v1", [&](std::ostream& os) {
      os << "gene_a\tgene_b\trank\tkappa_bar\tbf_max\tp0_bound\tselected\n";
      for (std::size_t r = 0; r < res.ranking.edges.size(); ++r) {
        const auto& e = res.ranking.edges[r];
        const auto& d = res.selection.decisions[r];
        fmt::print(os, "{}\t{}\t{}\t{}\t{}\t{}\t{}\n", genes[static_cast<std::size_t>(e.i)],
                   genes[static_cast<std::size_t>(e.j)], e.rank, num(e.kappa_bar),
                   d.evaluated ? num(d.bf_max) : "NA", d.evaluated ? num(d.p0_bound) : "NA", d.selected ? 1 : 0);
      }
    });

    json fit;
    fit["global_shrinkage"] = cfg.em.global_shrinkage;
    fit["a"] = res.fit.hyper.a;
    fit["b"] = res.fit.hyper.b;
    fit["c"] = res.fit.hyper.c;
    fit["d"] = res.fit.hyper.d;
    fit["em_iterations"] = res.fit.em_iterations;
    fit["converged"] = res.fit.converged;
    fit["mean_lower_bound"] = res.fit.mean_lower_bound.empty() ? 0.0 : res.fit.mean_lower_bound.back();
    json per_gene = json::array();
    for (std::size_t j = 0; j < res.fit.posteriors.size(); ++j) {
      const auto& vp = res.fit.posteriors[j];
      per_gene.push_back({{"gene", genes[j]},
                          {"lower_bound", vp.lower_bound},
                          {"iterations", vp.iterations},
                          {"a_star", vp.a_star},
                          {"b_star", vp.b_star},
                          {"c_star", vp.c_star},
                          {"d_star", vp.d_star}});
    }
    fit["genes"] = per_gene;
    json sel;
    sel["alpha"] = res.selection.alpha;
    sel["p0"] = res.selection.p0_hat;
    sel["p0_estimated"] = !cfg.p0.has_value();
    sel["gamma"] = res.selection.gamma;
    sel["ranks_evaluated"] = res.selection.ranks_evaluated;
    sel["selected"] = res.selection.selected.size();
    fit["selection"] = sel;
    out.write_json("fit.json", "json/v1", fit);
  });

  json config;
  config["input"] = args.input.path;
  config["transpose"] = args.input.transpose;
  config["format"] = args.input.format;
  config["global_shrinkage"] = !args.no_global;
  config["network"] = args.network.snapshot();
  write_manifest(out, ctx, config, std::nullopt, inputs, timings);
  return 0;
}

// ---- simulate --------------------------------------------------------------

struct StructureFlags {
  int bandwidth = 4;
  std::string blocks;
  double density = 0.096;

  void add(CLI::App* cmd) {
    cmd->add_option("--bandwidth", bandwidth, "Band graph bandwidth")->capture_default_str();
    cmd->add_option("--blocks", blocks, "Comma-separated block sizes for hub/cluster graphs");
    cmd->add_option("--density", density, "Edge probability for random graphs")->capture_default_str();
  }

  StructureParams build() const {
    StructureParams params;
    params.bandwidth = bandwidth;
    params.density = density;
    if (!blocks.empty())
      for (const auto& s : split_list(blocks)) {
        try {
          params.block_sizes.push_back(std::stoi(s));
        } catch (const std::exception&) {
          throw ConfigError("invalid block size '" + s + "'");
        }
      }
    return params;
  }

  json snapshot(const StructureParams& resolved) const {
    return {{"bandwidth", resolved.bandwidth}, {"block_sizes", resolved.block_sizes}, {"density", resolved.density}};
  }
};

struct SimulateArgs {
  std::string kind = "band";
  Index p = 100;
  Index n = 100;
  std::uint64_t seed = 1;
  double dof = 4.0;
  StructureFlags structure;
  std::string out;
};

int cmd_simulate(const SimulateArgs& args, RunContext& ctx) {
  Timings timings;
  const GraphKind kind = parse_graph_kind(args.kind);
  if (args.p < 2) throw ConfigError("--p must be at least 2");
  if (args.n < 1) throw ConfigError("--n must be at least 1");
  Rng rng = make_stream(args.seed, 0);
  const GraphSpec graph =
      timings.time("structure", [&] { return make_structure(kind, args.p, args.structure.build(), rng()); });
  const PrecisionMatrix omega = timings.time("precision", [&] { return sample_precision(graph, args.dof, rng); });
  const ExpressionMatrix data = timings.time("sample", [&] { return sample_mvn(omega, args.n, rng); });
  ctx.info("{} graph: {} edges (density {})", args.kind, graph.edge_count(), graph.density());

  OutputDir out(args.out);
  timings.time("write", [&] {
    out.write("precision.csv", "csv/v1", [&](std::ostream& os) {
      os << "gene";
      for (const auto& g : data.gene_ids) os << ',' << g;
      os << '\n';
      for (Index i = 0; i < args.p; ++i) {
        os << data.gene_ids[static_cast<std::size_t>(i)];
        for (Index j = 0; j < args.p; ++j) os << ',' << num(omega.omega(i, j));
        os << '\n';
      }
    });
    out.write("edges.tsv", "tsv/v1", [&](std::ostream& os) {
      os << "gene_a\tgene_b\n";
      for (const auto& [i, j] : graph.edges())
        os << data.gene_ids[static_cast<std::size_t>(i)] << '\t' << data.gene_ids[static_cast<std::size_t>(j)] << '\n';
    });
    out.write("data.csv", "csv/v1", [&](std::ostream& os) { write_expression_matrix(os, data, ','); });
  });

  json config;
  config["kind"] = std::string(to_string(kind));
  config["p"] = args.p;
  config["n"] = args.n;
  config["dof"] = args.dof;
  config["structure"] = args.structure.snapshot(graph.params);
  config["edge_count"] = graph.edge_count();
  config["density"] = graph.density();
  write_manifest(out, ctx, config, args.seed, json::array(), timings);
  return 0;
}

// ---- benchmark -------------------------------------------------------------

struct BenchmarkArgs {
  std::string kinds = "band";
  Index p = 100;
  std::string n_list = "25,50,100";
  int reps = 100;
  std::uint64_t seed = 1;
  double dof = 4.0;
  double fpr_max = 0.2;
  std::string methods = "shrinknet,noshrink";
  bool roc = false;
  StructureFlags structure;
  NetworkFlags network;
  std::string out;
};

int cmd_benchmark(const BenchmarkArgs& args, RunContext& ctx) {
  Timings timings;
  ModelSimConfig cfg;
  cfg.kinds.clear();
  for (const auto& k : split_list(args.kinds)) cfg.kinds.push_back(parse_graph_kind(k));
  cfg.n_list.clear();
  for (const auto& s : split_list(args.n_list)) {
    try {
      cfg.n_list.push_back(std::stol(s));
    } catch (const std::exception&) {
      throw ConfigError("invalid sample size '" + s + "'");
    }
    if (cfg.n_list.back() < 3) throw ConfigError("sample sizes must be at least 3");
  }
  cfg.p = args.p;
  cfg.reps = args.reps;
  cfg.seed = args.seed;
  cfg.dof = args.dof;
  cfg.fpr_max = args.fpr_max;
  cfg.methods = parse_methods(args.methods);
  cfg.structure = args.structure.build();
  cfg.network = args.network.build(Execution::serial);
  cfg.execution = Execution::parallel;
  if (!(cfg.fpr_max > 0.0 && cfg.fpr_max <= 1.0)) throw ConfigError("--fpr-max must lie in (0, 1]");

  ctx.info("benchmark: {} kinds x {} sample sizes x {} replicates x {} methods", cfg.kinds.size(), cfg.n_list.size(),
           cfg.reps, cfg.methods.size());
  const ModelSimResult res = timings.time("simulate", [&] { return run_model_sim(cfg); });

  OutputDir out(args.out);
  timings.time("write", [&] {
    out.write("metrics.csv", "csv/v1", [&](std::ostream& os) {
      os << "kind,n,rep,method,ok,true_edges,selected,tpr,fpr,f_score,pauc,p0_hat,prior_a,prior_b,error\n";
      for (const auto& r : res.reps) {
        std::string error = r.error;
        std::replace(error.begin(), error.end(), ',', ';');
        std::replace(error.begin(), error.end(), '\n', ' ');
        fmt::print(os, "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", to_string(r.kind), r.n, r.rep,
                   to_string(r.method), r.ok ? 1 : 0, r.true_edges, r.selected, num(r.tpr), num(r.fpr),
                   num(r.f_score), num(r.pauc), num(r.p0_hat), num(r.prior_a), num(r.prior_b), error);
      }
    });
    json table = json::array();
    for (const auto& row : res.table) {
      const auto summary = [](const Summary& s) { return json{{"mean", s.mean}, {"sd", s.sd}}; };
      table.push_back({{"kind", std::string(to_string(row.kind))},
                       {"n", row.n},
                       {"method", std::string(to_string(row.method))},
                       {"successes", row.successes},
                       {"failures", row.failures},
                       {"tpr", summary(row.tpr)},
                       {"fpr", summary(row.fpr)},
                       {"f_score", summary(row.f_score)},
                       {"pauc", summary(row.pauc)}});
    }
    out.write_json("summary.json", "json/v1", json{{"fpr_max", cfg.fpr_max}, {"rows", table}});
    if (args.roc) {
      out.write("roc.csv", "csv/v1", [&](std::ostream& os) {
        os << "kind,n,rep,method,point,fpr,tpr\n";
        for (const auto& r : res.reps)
          for (std::size_t k = 0; k < r.roc.size(); ++k)
            fmt::print(os, "{},{},{},{},{},{},{}\n", to_string(r.kind), r.n, r.rep, to_string(r.method), k,
                       num(r.roc[k].fpr), num(r.roc[k].tpr));
      });
    }
  });

  json config;
  config["kinds"] = args.kinds;
  config["p"] = args.p;
  config["n"] = args.n_list;
  config["reps"] = args.reps;
  config["dof"] = args.dof;
  config["fpr_max"] = args.fpr_max;
  config["methods"] = methods_string(cfg.methods);
  config["structure"] = args.structure.snapshot(cfg.structure);
  config["network"] = args.network.snapshot();
  write_manifest(out, ctx, config, args.seed, json::array(), timings);
  return 0;
}

// ---- stability -------------------------------------------------------------

struct StabilityArgs {
  InputFlags input;
  NetworkFlags network;
  Index n_small = 0;
  int resamples = 100;
  double e_v = 30.0;
  std::uint64_t seed = 1;
  double fpr_max = 0.2;
  std::string methods = "shrinknet";
  bool no_validate = false;
  std::string out;
};

int cmd_stability(const StabilityArgs& args, RunContext& ctx) {
  Timings timings;
  const json inputs = args.input.digest();
  const ExpressionMatrix m = timings.time("load", [&] { return args.input.load(); });
  SplitStudyConfig cfg;
  cfg.n_small = args.n_small;
  cfg.resamples = args.resamples;
  cfg.seed = args.seed;
  cfg.e_v = args.e_v;
  cfg.fpr_max = args.fpr_max;
  cfg.validate_large = !args.no_validate;
  cfg.methods = parse_methods(args.methods);
  cfg.network = args.network.build(Execution::serial);
  cfg.execution = Execution::parallel;
  if (!(cfg.e_v > 0.0)) throw ConfigError("--e-v must be positive");

  ctx.info("stability: {} resamples of {} / {} samples", cfg.resamples, cfg.n_small, m.samples() - cfg.n_small);
  const SplitStudyResult res = timings.time("splits", [&] { return run_split_study(m, cfg); });
  const auto& genes = m.gene_ids;

  OutputDir out(args.out);
  timings.time("write", [&] {
    out.write("splits.csv", "csv/v1", [&](std::ostream& os) {
      os << "method,resample,small_selected,large_selected,tpr,fpr,pauc,kappa_spearman,validated\n";
      for (const auto& s : res.splits) {
        fmt::print(os, "{},{},{},{},{},{},{},{},{}\n", to_string(s.method), s.resample, s.small_selected.size(),
                   cfg.validate_large ? std::to_string(s.large_selected) : "NA",
                   cfg.validate_large ? num(s.tpr) : "NA", cfg.validate_large ? num(s.fpr) : "NA",
                   s.validated ? num(s.pauc) : "NA", cfg.validate_large ? num(s.kappa_spearman) : "NA",
                   s.validated ? 1 : 0);
      }
    });
    out.write("stability.tsv", "tsv/v1", [&](std::ostream& os) {
      os << "method\tgene_a\tgene_b\tfrequency\tstable\n";
      for (const auto& [method, report] : res.stability)
        for (const auto& [edge, freq] : report.selection_frequency)
          fmt::print(os, "{}\t{}\t{}\t{}\t{}\n", to_string(method), genes[static_cast<std::size_t>(edge.first)],
                     genes[static_cast<std::size_t>(edge.second)], num(freq), freq >= report.pi_thr ? 1 : 0);
    });
    json reports = json::array();
    for (const auto& [method, report] : res.stability) {
      json stable = json::array();
      for (const auto& [i, j] : report.stable_edges)
        stable.push_back({genes[static_cast<std::size_t>(i)], genes[static_cast<std::size_t>(j)]});
      reports.push_back({{"method", std::string(to_string(method))},
                         {"resamples", report.resamples},
                         {"q_hat", report.q_hat},
                         {"e_v", report.e_v},
                         {"pi_thr", report.pi_thr},
                         {"stable_edges", stable}});
    }
    out.write_json("stability.json", "json/v1", json{{"pair_count", m.genes() * (m.genes() - 1) / 2}, {"reports", reports}});
  });

  json config;
  config["input"] = args.input.path;
  config["transpose"] = args.input.transpose;
  config["format"] = args.input.format;
  config["n_small"] = args.n_small;
  config["resamples"] = args.resamples;
  config["e_v"] = args.e_v;
  config["fpr_max"] = args.fpr_max;
  config["methods"] = methods_string(cfg.methods);
  config["validate_large"] = cfg.validate_large;
  config["network"] = args.network.snapshot();
  write_manifest(out, ctx, config, args.seed, inputs, timings);
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gaussian graphical model inference with global-local shrinkage priors", "shrinknet"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  int threads = 0;
  auto* threads_flag = app.add_option("--threads", threads, "Worker threads (default: SHRINKNET_THREADS, then all cores)");
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress progress messages");

  InferArgs infer;
  auto* c_infer = app.add_subcommand("infer", "Infer a network from an expression matrix");
  infer.input.add(c_infer);
  infer.network.add(c_infer);
  c_infer->add_flag("--no-global-shrinkage", infer.no_global, "Fixed Gamma(0.001, 0.001) prior per gene (NoShrink)");
  c_infer->add_option("--out", infer.out, "Output directory")->required();

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Simulate a graph, a precision matrix and Gaussian data");
  c_sim->add_option("--kind", sim.kind, "Graph kind: band, cluster, hub or random")->capture_default_str();
  c_sim->add_option("--p", sim.p, "Number of genes")->capture_default_str();
  c_sim->add_option("--n", sim.n, "Number of samples")->capture_default_str();
  c_sim->add_option("--seed", sim.seed, "Master seed")->capture_default_str();
  c_sim->add_option("--dof", sim.dof, "G-Wishart degrees of freedom")->capture_default_str();
  sim.structure.add(c_sim);
  c_sim->add_option("--out", sim.out, "Output directory")->required();

  BenchmarkArgs bench;
  auto* c_bench = app.add_subcommand("benchmark", "Model-based simulation comparing ShrinkNet and NoShrink");
  c_bench->add_option("--kinds", bench.kinds, "Comma-separated graph kinds")->capture_default_str();
  c_bench->add_option("--p", bench.p, "Number of genes")->capture_default_str();
  c_bench->add_option("--n", bench.n_list, "Comma-separated sample sizes")->capture_default_str();
  c_bench->add_option("--reps", bench.reps, "Replicates per (kind, n)")->capture_default_str();
  c_bench->add_option("--seed", bench.seed, "Master seed")->capture_default_str();
  c_bench->add_option("--dof", bench.dof, "G-Wishart degrees of freedom")->capture_default_str();
  c_bench->add_option("--fpr-max", bench.fpr_max, "Upper FPR limit of the partial ROC")->capture_default_str();
  c_bench->add_option("--methods", bench.methods, "Comma-separated methods")->capture_default_str();
  c_bench->add_flag("--roc", bench.roc, "Also write ROC curve points");
  bench.structure.add(c_bench);
  bench.network.add(c_bench);
  c_bench->add_option("--out", bench.out, "Output directory")->required();

  StabilityArgs stab;
  auto* c_stab = app.add_subcommand("stability", "Random-splitting reproducibility and stability selection");
  stab.input.add(c_stab);
  stab.network.add(c_stab);
  c_stab->add_option("--n-small", stab.n_small, "Samples in the small split")->required();
  c_stab->add_option("--resamples", stab.resamples, "Number of random splits")->capture_default_str();
  c_stab->add_option("--e-v", stab.e_v, "Tolerated expected number of false selections")->capture_default_str();
  c_stab->add_option("--seed", stab.seed, "Master seed")->capture_default_str();
  c_stab->add_option("--fpr-max", stab.fpr_max, "Upper FPR limit of the partial ROC")->capture_default_str();
  c_stab->add_option("--methods", stab.methods, "Comma-separated methods")->capture_default_str();
  c_stab->add_flag("--no-validate", stab.no_validate, "Skip fitting the large split");
  c_stab->add_option("--out", stab.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::config);
  }

  RunContext ctx;
  ctx.log = &err;
  ctx.quiet = quiet;
  for (int i = 1; i < argc; ++i) ctx.arguments.emplace_back(argv[i]);
  try {
    ctx.threads = resolve_threads(threads_flag, threads);
    if (c_infer->parsed()) {
      ctx.command = "infer";
      return cmd_infer(infer, ctx);
    }
    if (c_sim->parsed()) {
      ctx.command = "simulate";
      return cmd_simulate(sim, ctx);
    }
    if (c_bench->parsed()) {
      ctx.command = "benchmark";
      return cmd_benchmark(bench, ctx);
    }
    ctx.command = "stability";
    return cmd_stability(stab, ctx);
  } catch (const Error& e) {
    err << "shrinknet: error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::invalid_argument& e) {
    err << "shrinknet: error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::config);
  } catch (const std::exception& e) {
    err << "shrinknet: internal error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace shrinknet
