#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "bethe/error.hpp"
#include "bethe/graph.hpp"
#include "bethe/inference.hpp"
#include "bethe/io.hpp"
#include "bethe/learnability.hpp"
#include "bethe/learning.hpp"
#include "bethe/model.hpp"
#include "bethe_cli/cli.hpp"

namespace bethe::cli {

namespace {

using nlohmann::json;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Settings {
  std::string graph;
  std::string homogeneous;
  std::string marginals;
  std::string model;
  std::string out;
  double resolution = 0.01;
  int restarts = 20;
  double damping = 0.5;
  double tol = 1e-10;
  int max_iter = 10000;
  std::uint64_t seed = 0;
  double match_tol = 0.01;
  bool exact = false;
  bool empirical = true;
  bool scan_empirical = false;
  bool exhaustive = false;
  int threads = 0;

  double step0 = 0.1;
  std::string schedule = "inv_sqrt";
  int learn_iters = 500;
  bool warm_start = true;

  double theta_resolution = 0.01;
  double mu_resolution = 0.002;
  std::vector<double> h_range{-1.0, 1.0};
  std::vector<double> j_range{0.0, 1.5};
};

struct Context {
  std::string command;
  std::string stage = "setup";
};

BPOptions bp_options(const Settings& s) {
  BPOptions bp;
  bp.max_iter = s.max_iter;
  bp.tol = s.tol;
  bp.damping = s.damping;
  bp.seed = s.seed;
  bp.validate();
  if (s.restarts < 1) throw InputError(fmt::format("--restarts must be >= 1, got {}", s.restarts));
  return bp;
}

LearnOptions learn_options(const Settings& s) {
  LearnOptions lo;
  lo.step0 = s.step0;
  if (s.schedule == "constant") {
    lo.schedule = StepSchedule::constant;
  } else if (s.schedule == "inv_sqrt") {
    lo.schedule = StepSchedule::inv_sqrt;
  } else {
    throw InputError("--schedule must be constant or inv_sqrt, got " + s.schedule);
  }
  lo.max_iter = s.learn_iters;
  lo.match_tol = s.match_tol;
  lo.bp = bp_options(s);
  lo.warm_start = s.warm_start;
  lo.restarts = s.restarts;
  lo.seed = s.seed;
  lo.validate();
  return lo;
}

ClassifyOptions classify_options(const Settings& s, bool empirical) {
  ClassifyOptions c;
  c.bp = bp_options(s);
  c.restarts = s.restarts;
  c.seed = s.seed;
  c.empirical = empirical;
  c.exhaustive = s.exhaustive;
  c.learn = learn_options(s);
  return c;
}

std::pair<double, double> parse_pair(const std::string& text, const std::string& flag) {
  auto comma = text.find(',');
  if (comma == std::string::npos) throw InputError(flag + " expects MU_V,MU_E, got '" + text + "'");
  try {
    std::size_t a = 0;
    std::size_t b = 0;
    std::string lhs = text.substr(0, comma);
    std::string rhs = text.substr(comma + 1);
    double x = std::stod(lhs, &a);
    double y = std::stod(rhs, &b);
    if (a != lhs.size() || b != rhs.size()) throw std::invalid_argument("trailing");
    return {x, y};
  } catch (const std::logic_error&) {
    throw InputError(flag + " expects MU_V,MU_E, got '" + text + "'");
  }
}

Graph require_graph(const Settings& s) {
  if (s.graph.empty()) throw InputError("--graph is required");
  return graph_from_spec(s.graph);
}

std::optional<Graph> optional_graph(const Settings& s) {
  if (s.graph.empty()) return std::nullopt;
  return graph_from_spec(s.graph);
}

struct MarginalsInput {
  Graph graph;
  MinimalMarginals mu;
  std::optional<std::pair<double, double>> homogeneous;
};

MarginalsInput load_marginals_input(const Settings& s, Context& ctx) {
  if (s.homogeneous.empty() == s.marginals.empty()) {
    throw InputError("exactly one of --homogeneous and --marginals is required");
  }
  ctx.stage = "load graph";
  std::optional<Graph> g = optional_graph(s);
  ctx.stage = "load marginals";
  if (!s.homogeneous.empty()) {
    if (!g) throw InputError("--homogeneous needs --graph");
    auto [mv, me] = parse_pair(s.homogeneous, "--homogeneous");
    MinimalMarginals mu = homogeneous_marginals(*g, mv, me);
    return {*g, std::move(mu), std::pair{mv, me}};
  }
  MarginalsFile mf = load_marginals(s.marginals, g ? &*g : nullptr);
  if (g && !(*g == mf.graph)) throw InputError("graph in " + s.marginals + " differs from --graph");
  auto hv = homogeneous_values(mf.mu);
  return {std::move(mf.graph), std::move(mf.mu), hv};
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    std::cout.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << content;
  f.close();
  if (!f) throw IoError("failed writing " + path);
}

// Fails fast before long computations.
void check_writable(const std::string& path) {
  if (path.empty() || path == "-") return;
  std::ofstream f(path, std::ios::app);
  if (!f) throw IoError("cannot open " + path + " for writing");
}

json meta_json(const Settings& s, const std::string& command) {
  json m;
  m["command"] = command;
  if (!s.graph.empty()) m["graph"] = s.graph;
  if (!s.model.empty()) m["model"] = s.model;
  if (!s.marginals.empty()) m["marginals"] = s.marginals;
  if (!s.homogeneous.empty()) m["homogeneous"] = s.homogeneous;
  m["seed"] = s.seed;
  m["restarts"] = s.restarts;
  m["damping"] = s.damping;
  m["tol"] = s.tol;
  m["max_iter"] = s.max_iter;
  m["match_tol"] = s.match_tol;
  return m;
}

Metadata csv_meta(const Settings& s, const std::string& command) {
  return {
      {"bethe", command},
      {"graph", s.graph},
      {"seed", std::to_string(s.seed)},
      {"restarts", std::to_string(s.restarts)},
      {"damping", fmt::format("{}", s.damping)},
      {"tol", fmt::format("{}", s.tol)},
      {"max_iter", std::to_string(s.max_iter)},
      {"match_tol", fmt::format("{}", s.match_tol)},
  };
}

json tables_json(const TableMarginals& mu) {
  json j;
  j["node"] = mu.node;
  j["edge"] = mu.edge;
  return j;
}

int cmd_infer(const Settings& s, Context& ctx) {
  ctx.stage = "load model";
  Graph g;
  TablePotentials theta;
  if (!s.model.empty()) {
    ModelFile mf = load_model(s.model);
    if (auto cli_graph = optional_graph(s); cli_graph && !(*cli_graph == mf.graph)) {
      throw InputError("graph in " + s.model + " differs from --graph");
    }
    g = std::move(mf.graph);
    theta = std::move(mf.theta);
  } else {
    g = require_graph(s);
    theta = TablePotentials::zeros(g);
  }
  BPOptions bp = bp_options(s);

  json report;
  report["meta"] = meta_json(s, "infer");

  ctx.stage = "bp";
  BPResult r = sum_product(theta, g, bp);
  report["bp"] = {{"converged", r.converged}, {"iterations", r.iterations}, {"residual", r.residual}};
  report["beliefs"] = tables_json(r.beliefs);

  ctx.stage = "bethe log partition";
  BetheLogPartition lz = bethe_log_partition(theta, g, bp, s.restarts, s.seed);
  report["bethe_log_partition"] = {
      {"value", lz.value}, {"approximate", lz.approximate}, {"fixed_points", lz.fixed_points}};

  if (s.exact) {
    ctx.stage = "exact inference";
    if (g.num_nodes() > kMaxExactNodes) {
      throw InputError(fmt::format("--exact supports at most {} nodes, graph has {}", kMaxExactNodes,
                                   g.num_nodes()));
    }
    ExactResult ex = exact_inference(theta, g);
    json e = tables_json(ex.marginals);
    e["log_partition"] = ex.log_partition;
    report["exact"] = e;
  }

  ctx.stage = "write report";
  write_output(s.out, report.dump(2) + "\n");
  if (!r.converged) {
    ctx.stage = "bp";
    throw ConvergenceError(fmt::format("BP did not converge in {} iterations (residual {})", r.iterations,
                                       r.residual));
  }
  return kExitOk;
}

int cmd_learn(const Settings& s, Context& ctx) {
  MarginalsInput in = load_marginals_input(s, ctx);
  ctx.stage = "options";
  LearnOptions lo = learn_options(s);
  ctx.stage = "learn";
  LearnTrace trace = learn_subgradient(in.mu, in.graph, lo);

  json report;
  report["meta"] = meta_json(s, "learn");
  report["status"] = to_string(trace.status);
  report["iterations"] = trace.records.size();
  report["final_residual"] = trace.final_residual();
  json records = json::array();
  for (const LearnRecord& rec : trace.records) {
    records.push_back({{"iteration", rec.iteration}, {"likelihood", rec.likelihood}, {"residual", rec.residual}});
  }
  report["trace"] = records;
  report["model"] = json::parse(model_to_json(in.graph, trace.theta));

  ctx.stage = "write report";
  write_output(s.out, report.dump(2) + "\n");
  return kExitOk;
}

json verdict_json(const Verdict& v) {
  json ev = json::object();
  const Evidence& e = v.evidence;
  if (e.lemma3) ev["lemma3"] = {{"unlearnable", e.lemma3->unlearnable}, {"lhs", e.lemma3->lhs}};
  if (e.lemma2) {
    ev["lemma2"] = {{"unlearnable", e.lemma2->unlearnable}, {"max_eigenvalue", e.lemma2->max_eigenvalue}};
  }
  if (e.inner) {
    ev["inner"] = {{"learnable_certificate", e.inner->learnable_certificate},
                   {"spectral_radius", e.inner->spectral_radius}};
  }
  if (e.lemma1) {
    json w = json::array();
    for (const FixedPoint& fp : e.lemma1->witnesses) w.push_back({{"free_energy", fp.free_energy}, {"run", fp.run}});
    ev["lemma1"] = {{"unlearnable", e.lemma1->unlearnable},
                    {"f_at_mu", e.lemma1->f_at_mu},
                    {"witnesses", w},
                    {"fixed_points", e.lemma1->fixed_points},
                    {"converged_runs", e.lemma1->converged_runs}};
  }
  if (e.empirical) {
    const EmpiricalEvidence& em = *e.empirical;
    ev["empirical"] = {{"failed", em.failed},
                       {"learn_status", to_string(em.learn_status)},
                       {"iterations", em.iterations},
                       {"learn_residual", em.learn_residual},
                       {"matched", em.match.matched},
                       {"residual", em.match.residual},
                       {"unique_top", em.match.unique_top},
                       {"fixed_points", em.match.fixed_points}};
  }
  return {{"verdict", to_string(v.status)}, {"evidence", ev}};
}

int cmd_classify(const Settings& s, Context& ctx) {
  MarginalsInput in = load_marginals_input(s, ctx);
  ctx.stage = "options";
  ClassifyOptions opts = classify_options(s, s.empirical);
  ctx.stage = "classify";
  Verdict v = classify(in.mu, in.graph, opts);
  json report = verdict_json(v);
  report["meta"] = meta_json(s, "classify");
  ctx.stage = "write report";
  write_output(s.out, report.dump(2) + "\n");
  return kExitOk;
}

int cmd_scan(const Settings& s, Context& ctx) {
  ctx.stage = "open output";
  check_writable(s.out);
  ctx.stage = "load graph";
  Graph g = require_graph(s);
  ctx.stage = "options";
  ScanOptions so;
  so.resolution = s.resolution;
  so.classify = classify_options(s, s.empirical);
  so.exhaustive = s.exhaustive;
  so.threads = s.threads;
  ctx.stage = "grid";
  std::vector<ScanRow> rows = scan_homogeneous(g, so);

  Metadata meta = csv_meta(s, "scan");
  meta.emplace_back("resolution", fmt::format("{}", s.resolution));
  meta.emplace_back("empirical", s.empirical ? "1" : "0");
  meta.emplace_back("exhaustive", s.exhaustive ? "1" : "0");
  std::ostringstream out;
  write_scan_csv(out, rows, meta);
  ctx.stage = "write csv";
  write_output(s.out, out.str());
  return kExitOk;
}

int cmd_figure1(const Settings& s, Context& ctx) {
  MarginalsInput in = load_marginals_input(s, ctx);
  if (!in.homogeneous) throw InputError("figure1 needs homogeneous marginals");
  ctx.stage = "open output";
  check_writable(s.out);
  ctx.stage = "options";
  Figure1Options fo;
  if (s.h_range.size() != 2 || s.j_range.size() != 2) throw InputError("--h-range and --j-range take LO,HI");
  fo.h_min = s.h_range[0];
  fo.h_max = s.h_range[1];
  fo.j_min = s.j_range[0];
  fo.j_max = s.j_range[1];
  fo.theta_resolution = s.theta_resolution;
  fo.mu_resolution = s.mu_resolution;
  auto [mv, me] = *in.homogeneous;

  ctx.stage = "figure1 search";
  Figure1Result r = figure1_search(mv, me, in.graph, fo);
  ctx.stage = "surface";
  std::vector<GridPoint> surface = homogeneous_surface(in.graph, r.h, r.J, fo.mu_resolution);

  Metadata meta{
      {"bethe", "figure1"},
      {"graph", s.graph.empty() ? s.marginals : s.graph},
      {"seed", std::to_string(s.seed)},
      {"mu_bar", fmt::format("{},{}", mv, me)},
      {"theta_resolution", fmt::format("{}", fo.theta_resolution)},
      {"mu_resolution", fmt::format("{}", fo.mu_resolution)},
      {"h_range", fmt::format("{},{}", fo.h_min, fo.h_max)},
      {"J_range", fmt::format("{},{}", fo.j_min, fo.j_max)},
      {"theta_B_h", fmt::format("{}", r.h)},
      {"theta_B_J", fmt::format("{}", r.J)},
      {"likelihood", fmt::format("{}", r.likelihood)},
      {"F_at_mu", fmt::format("{}", r.f_at_mu)},
      {"F_max", fmt::format("{}", r.f_max)},
      {"maximizers", std::to_string(r.maximizers.size())},
  };
  for (const GridPoint& p : r.maximizers) {
    meta.emplace_back("maximizer", fmt::format("{},{},{}", p.mu_v, p.mu_e, p.free_energy));
  }
  meta.emplace_back("hull_distance", fmt::format("{}", r.hull_distance));
  meta.emplace_back("hull_contains_mu", r.hull_contains_mu ? "true" : "false");

  std::ostringstream out;
  for (const auto& [k, v] : meta) out << "# " << k << '=' << v << '\n';
  out << "mu_v,mu_e,F\n";
  for (const GridPoint& p : surface) out << fmt::format("{},{},{}\n", p.mu_v, p.mu_e, p.free_energy);
  ctx.stage = "write csv";
  write_output(s.out, out.str());
  return kExitOk;
}

void add_graph_flags(CLI::App* app, Settings& s) {
  app->add_option("--graph", s.graph, "torus:RxC | cycle:N | chain:N | complete:N | file:PATH");
}

void add_marginal_flags(CLI::App* app, Settings& s) {
  app->add_option("--homogeneous", s.homogeneous, "Homogeneous marginals MU_V,MU_E");
  app->add_option("--marginals", s.marginals, "Marginals JSON file");
}

void add_bp_flags(CLI::App* app, Settings& s) {
  app->add_option("--restarts", s.restarts, "BP restarts")->capture_default_str();
  app->add_option("--damping", s.damping, "BP damping")->capture_default_str();
  app->add_option("--tol", s.tol, "BP convergence tolerance")->capture_default_str();
  app->add_option("--max-iter", s.max_iter, "BP iteration cap")->capture_default_str();
  app->add_option("--seed", s.seed, "Seed for random restarts")->capture_default_str();
}

void add_learn_flags(CLI::App* app, Settings& s) {
  app->add_option("--match-tol", s.match_tol, "Moment-matching tolerance")->capture_default_str();
  app->add_option("--step0", s.step0, "Initial subgradient step")->capture_default_str();
  app->add_option("--schedule", s.schedule, "Step schedule: constant | inv_sqrt")->capture_default_str();
  app->add_option("--learn-iters", s.learn_iters, "Subgradient iteration cap")->capture_default_str();
  app->add_flag("--warm-start,!--no-warm-start", s.warm_start, "Warm-start BP between iterations")
      ->capture_default_str();
}

void add_out_flag(CLI::App* app, Settings& s) {
  app->add_option("--out", s.out, "Output path (default stdout)");
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Bethe learnability of binary pairwise MRFs", "bethe"};
  app.set_config("--config", "", "Config file mirroring the flags (TOML/INI)");
  app.require_subcommand(1);

  Settings s;
  Context ctx;

  CLI::App* infer = app.add_subcommand("infer", "BP inference on a model");
  infer->add_option("--model", s.model, "Model JSON file");
  add_graph_flags(infer, s);
  add_bp_flags(infer, s);
  infer->add_flag("--exact", s.exact, "Also run exact enumeration");
  add_out_flag(infer, s);

  CLI::App* learn = app.add_subcommand("learn", "Subgradient Bethe-likelihood learning");
  add_graph_flags(learn, s);
  add_marginal_flags(learn, s);
  add_bp_flags(learn, s);
  add_learn_flags(learn, s);
  add_out_flag(learn, s);

  CLI::App* cls = app.add_subcommand("classify", "Learnability verdict for one marginal vector");
  add_graph_flags(cls, s);
  add_marginal_flags(cls, s);
  add_bp_flags(cls, s);
  add_learn_flags(cls, s);
  cls->add_flag("--empirical,!--no-empirical", s.empirical, "Run the learning stage when no bound decides");
  cls->add_flag("--exhaustive", s.exhaustive, "Evaluate every bound");
  add_out_flag(cls, s);

  CLI::App* scan = app.add_subcommand("scan", "Classify the homogeneous marginal grid");
  add_graph_flags(scan, s);
  scan->add_option("--resolution", s.resolution, "Grid spacing")->capture_default_str();
  add_bp_flags(scan, s);
  add_learn_flags(scan, s);
  scan->add_flag("--empirical,!--no-empirical", s.scan_empirical, "Run the learning stage on undecided points");
  scan->add_flag("--exhaustive", s.exhaustive, "Run lemma 1 on every point");
  scan->add_option("--threads", s.threads, "Worker threads (0 = hardware)")->capture_default_str();
  add_out_flag(scan, s);

  CLI::App* fig = app.add_subcommand("figure1", "Likelihood maximizer and F surface for homogeneous marginals");
  add_graph_flags(fig, s);
  add_marginal_flags(fig, s);
  add_bp_flags(fig, s);
  fig->add_option("--theta-resolution", s.theta_resolution, "Spacing of the (h, J) grid")->capture_default_str();
  fig->add_option("--mu-resolution,--resolution", s.mu_resolution, "Spacing of the F surface grid")
      ->capture_default_str();
  fig->add_option("--h-range", s.h_range, "LO,HI")->delimiter(',')->expected(2);
  fig->add_option("--j-range", s.j_range, "LO,HI")->delimiter(',')->expected(2);
  add_out_flag(fig, s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }
  if (scan->parsed()) s.empirical = s.scan_empirical;

  ctx.command = app.get_subcommands().front()->get_name();
  auto fail = [&](const std::exception& e, int code) {
    std::cerr << "bethe " << ctx.command << ": " << ctx.stage << ": " << e.what() << '\n';
    return code;
  };
  try {
    if (infer->parsed()) return cmd_infer(s, ctx);
    if (learn->parsed()) return cmd_learn(s, ctx);
    if (cls->parsed()) return cmd_classify(s, ctx);
    if (scan->parsed()) return cmd_scan(s, ctx);
    return cmd_figure1(s, ctx);
  } catch (const InputError& e) {
    return fail(e, kExitInput);
  } catch (const NumericalError& e) {
    return fail(e, kExitNumerical);
  } catch (const ConvergenceError& e) {
    return fail(e, kExitNonConvergence);
  } catch (const IoError& e) {
    return fail(e, kExitIo);
  } catch (const std::exception& e) {
    return fail(e, kExitInternal);
  }
}

}  // namespace bethe::cli
