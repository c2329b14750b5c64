#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <limits>
#include <sstream>

#include "oodlab/experiments.hpp"
#include "oodlab/parallel.hpp"

namespace oodlab::cli {

namespace fs = std::filesystem;

namespace {

struct Common {
  std::string domain = "overlap_two_atom";
  double gap_ii = 20.0;
  double gap_io = 100.0;
  std::string space = "all_tables";
  std::string alphas = "grid:101";
  std::string n_list;
  std::uint64_t seed = 1;
  std::size_t seeds = 0;
  std::string out = "oodlab_out";
  std::string config;
  int jobs = 0;
  bool paper_scale = false;
  bool desk_scale = false;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) parts.push_back(item);
  return parts;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ArgumentError("not a number: '" + s + "'");
  }
  if (used != s.size()) throw ArgumentError("not a number: '" + s + "'");
  return v;
}

/// "grid:N" or a comma list of values in [0, 1].
std::vector<double> parse_alphas(const std::string& spec) {
  if (spec.rfind("grid:", 0) == 0) return uniform_alpha_grid(static_cast<int>(parse_double(spec.substr(5))));
  std::vector<double> a;
  for (const auto& p : split(spec, ',')) a.push_back(parse_double(p));
  if (a.empty()) throw ArgumentError("empty alpha list");
  for (double v : a)
    if (!(v >= 0.0 && v <= 1.0)) throw ArgumentError("alpha values must lie in [0, 1]");
  return a;
}

std::vector<std::size_t> parse_n_list(const std::string& spec) {
  std::vector<std::size_t> n;
  for (const auto& p : split(spec, ',')) {
    const double v = parse_double(p);
    if (!(v >= 1.0) || v != std::floor(v)) throw ArgumentError("sample sizes must be positive integers");
    n.push_back(static_cast<std::size_t>(v));
  }
  if (n.empty()) throw ArgumentError("empty n list");
  return n;
}

Domain load_domain(const Common& c) {
  if (fs::exists(c.domain)) return domain_from_json(read_json_file(c.domain));
  return named_domain(c.domain, c.gap_ii, c.gap_io);
}

TableSpace load_space(const Common& c, const Domain& d) {
  if (c.space != "all_tables") throw ArgumentError("unknown space '" + c.space + "'");
  return enumerate_space(make_feature_set(d), d.k());
}

Json common_json(const Common& c) {
  return Json{{"domain", c.domain}, {"gap_ii", c.gap_ii}, {"gap_io", c.gap_io}, {"space", c.space},
              {"alphas", c.alphas}, {"n_list", c.n_list}, {"seed", c.seed},   {"seeds", c.seeds}};
}

std::vector<std::uint64_t> seed_list(const Common& c, std::size_t fallback) {
  return seed_range(c.seeds ? c.seeds : fallback, c.seed);
}

void emit(const Common& c, const std::string& command, const Json& config,
          const std::vector<std::uint64_t>& seeds,
          const std::vector<std::pair<std::string, std::string>>& files, std::ostream& out) {
  const fs::path dir(c.out);
  std::vector<std::string> names;
  for (const auto& [name, text] : files) {
    write_text_file(dir / name, text);
    names.push_back(name);
  }
  write_manifest(dir, command, config, seeds, names);
  for (const auto& n : names) out << (dir / n).string() << '\n';
}

void add_common(CLI::App* sub, Common& c, bool domain, bool sweep) {
  if (domain) {
    sub->add_option("--domain", c.domain,
                    "overlap_two_atom | separate_two_atom | benchmark | path to a domain JSON");
    sub->add_option("--gap-ii", c.gap_ii, "benchmark class spacing");
    sub->add_option("--gap-io", c.gap_io, "benchmark ID/OOD gap");
    sub->add_option("--space", c.space, "hypothesis space (all_tables)");
  }
  sub->add_option("--alphas", c.alphas, "grid:N or a comma list");
  sub->add_option("--seed", c.seed, "first seed");
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--jobs", c.jobs, "worker threads (default: logical cores)");
  if (sweep) {
    sub->add_option("--n-list", c.n_list, "comma-separated sample sizes");
    sub->add_option("--seeds", c.seeds, "number of seeds");
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"OOD detection learnability toolkit", "oodlab"};
  app.require_subcommand(1, 1);
  Common c;

  auto* gen = app.add_subcommand("gen-domain", "write a domain as JSON");
  add_common(gen, c, true, false);

  auto* eval = app.add_subcommand("eval-risk", "risk of a table hypothesis on a discrete domain");
  std::string hypothesis_path;
  add_common(eval, c, true, false);
  eval->add_option("--hypothesis", hypothesis_path, "table hypothesis JSON")->required();

  auto* inf = app.add_subcommand("inf-risk", "certified inf alpha-risk over a table space");
  add_common(inf, c, true, false);

  auto* check = app.add_subcommand("check-conditions", "linear, eps-intersection and realizability checks");
  double tol = 1e-12;
  add_common(check, c, true, false);
  check->add_option("--tol", tol, "linear condition tolerance");

  auto* runalg = app.add_subcommand("run-algorithm", "train once and report the risk pair");
  std::string algorithm = "nn_threshold";
  std::size_t n = 100;
  add_common(runalg, c, true, false);
  runalg->add_option("--algorithm", algorithm, "nn_threshold | erm | fcnn_energy");
  runalg->add_option("--n", n, "sample size");
  bool paper_scale_alg = false;
  runalg->add_flag("--paper-scale", paper_scale_alg, "full training budget for fcnn_energy");

  auto* sweep = app.add_subcommand("sweep", "convergence sweep over n and seeds");
  add_common(sweep, c, true, true);
  sweep->add_option("--algorithm", algorithm, "nn_threshold | erm");

  auto* fig = app.add_subcommand("figure1", "Bayes surrogate and FCNN/free-energy curves");
  add_common(fig, c, false, true);
  std::vector<double> fig_gaps;
  fig->add_option("--gap-io", fig_gaps, "ID/OOD gap; repeat to share training across panels");
  fig->add_option("--gap-ii", c.gap_ii, "class spacing");
  fig->add_option("--config", c.config, "JSON config; flags override its fields");
  auto* paper = fig->add_flag("--paper-scale", c.paper_scale, "n up to 25000, 20 seeds, 10000 iterations");
  fig->add_flag("--desk-scale", c.desk_scale, "n up to 2500, 5 seeds, 2000 iterations (default)")->excludes(paper);

  auto* demo = app.add_subcommand("demo", "scripted demonstrations");
  std::string demo_name;
  add_common(demo, c, false, true);
  demo->add_option("name", demo_name,
                   "impossibility_overlap | separate_learnable | finite_id_space | constrained_erm | "
                   "constrained_erm_overlap")
      ->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return kUsage;
  }

  const std::vector<double> alphas = parse_alphas(c.alphas);

  if (gen->parsed()) {
    const Domain d = load_domain(c);
    emit(c, "gen-domain", common_json(c), {}, {{"domain.json", to_json(d).dump(2) + "\n"}}, out);
    return kOk;
  }

  if (eval->parsed()) {
    const Domain d = load_domain(c);
    const TableHypothesis h = table_from_json(read_json_file(hypothesis_path));
    const RiskPair r = risk_pair_exact(h, d, Loss::zero_one(d.k()));
    CsvTable t({"alpha", "risk"});
    for (double a : alphas) t.add({format_double(a), format_double(r.at(a))});
    Json cfg = common_json(c);
    cfg["hypothesis"] = hypothesis_path;
    emit(c, "eval-risk", cfg, {}, {{"risk.csv", t.str()}}, out);
    out << "r_in=" << format_double(r.r_in) << " r_out=" << format_double(r.r_out) << '\n';
    return kOk;
  }

  if (inf->parsed()) {
    const Domain d = load_domain(c);
    const TableSpace space = load_space(c, d);
    const Loss loss = Loss::zero_one(d.k());
    const auto risks = table_risks(space, d, loss);
    CsvTable t({"alpha", "inf_risk", "argmin_count"});
    for (double a : alphas) {
      std::vector<double> v(risks.size());
      for (std::size_t i = 0; i < risks.size(); ++i) v[i] = risks[i].at(a);
      const auto cert = certify_minimum(space, v);
      t.add({format_double(a), format_double(cert.value), std::to_string(cert.argmin_indices.size())});
    }
    emit(c, "inf-risk", common_json(c), {}, {{"inf_risk.csv", t.str()}}, out);
    return kOk;
  }

  if (check->parsed()) {
    const Domain d = load_domain(c);
    const TableSpace space = load_space(c, d);
    const Loss loss = Loss::zero_one(d.k());
    const ConditionReport linear = c.alphas == "grid:101" ? check_linear(space, d, tol, loss)
                                                          : check_linear(space, d, alphas, tol, loss);
    const ConditionReport eps = check_eps_intersection_grid(space, d, default_eps_grid(), loss);
    const RealizabilityResult real = check_realizability(space, d, loss);
    Json rep{{"linear", to_json(linear)},
             {"eps_intersection", to_json(eps)},
             {"realizability", {{"holds", real.holds}, {"witness", real.witness ? to_json(*real.witness) : Json(nullptr)}}},
             {"condition3", check_condition3(loss, d.k())}};
    Json cfg = common_json(c);
    cfg["tol"] = tol;
    emit(c, "check-conditions", cfg, {}, {{"conditions.json", rep.dump(2) + "\n"}}, out);
    out << "linear condition " << (linear.holds ? "holds" : "fails");
    if (linear.violating_alpha) out << " (violating_alpha " << format_double(*linear.violating_alpha) << ")";
    out << ", max_deviation " << format_double(linear.max_deviation) << '\n';
    return linear.holds ? kOk : kConditionFailed;
  }

  if (runalg->parsed()) {
    const Domain d = load_domain(c);
    const Loss loss = Loss::zero_one(d.k());
    const LabeledSample s = sample(d.id(), n, c.seed);
    RiskPair r;
    Json cfg = common_json(c);
    cfg["algorithm"] = algorithm;
    cfg["n"] = n;
    std::vector<std::pair<std::string, std::string>> files;
    if (algorithm == "fcnn_energy") {
      PipelineConfig pc = Figure1Config::default_pipeline(paper_scale_alg ? Scale::paper : Scale::desk);
      pc.train.seed = c.seed;
      pc.split_seed = c.seed;
      const PipelineModel m = run_pipeline(pc, s, d.k());
      r = d.id().is_discrete() ? risk_pair_exact(m.hypothesis, d, loss)
                               : evaluate_risk_pair(m.hypothesis, d, loss, RiskEvaluation::grid(48));
      Json net = to_json(m.network);
      net["lambda"] = m.lambda;
      files.push_back({"network.json", net.dump() + "\n"});
    } else {
      const TableSpace space = load_space(c, d);
      TableHypothesis h = algorithm == "nn_threshold" ? nn_threshold(s, space.features())
                          : algorithm == "erm"        ? erm(space, s, loss)
                                                      : throw ArgumentError("unknown algorithm '" + algorithm + "'");
      if (h.k() != d.k()) throw ArgumentError("nn_threshold needs a k = 1 domain");
      r = risk_pair_exact(h, d, loss);
      files.push_back({"hypothesis.json", to_json(h).dump(2) + "\n"});
    }
    CsvTable t({"alpha", "risk"});
    for (double a : alphas) t.add({format_double(a), format_double(r.at(a))});
    files.push_back({"risk.csv", t.str()});
    emit(c, "run-algorithm", cfg, {c.seed}, files, out);
    out << "r_in=" << format_double(r.r_in) << " r_out=" << format_double(r.r_out) << '\n';
    return kOk;
  }

  if (sweep->parsed()) {
    const Domain d = load_domain(c);
    const TableSpace space = load_space(c, d);
    const Loss loss = Loss::zero_one(d.k());
    Algorithm alg;
    if (algorithm == "nn_threshold") {
      if (d.k() != 1) throw ArgumentError("nn_threshold needs a k = 1 domain");
      alg = [f = space.features()](const LabeledSample& s) -> Hypothesis { return nn_threshold(s, f); };
    } else if (algorithm == "erm") {
      alg = [space, loss](const LabeledSample& s) -> Hypothesis { return erm(space, s, loss); };
    } else {
      throw ArgumentError("unknown algorithm '" + algorithm + "'");
    }
    const auto ns = parse_n_list(c.n_list.empty() ? "10,50,200" : c.n_list);
    const auto seeds = seed_list(c, 20);
    const auto rep = convergence_sweep(alg, d, ns, seeds, alphas, loss, RiskEvaluation::exact(), c.jobs);
    CsvTable t({"n", "alpha", "mean", "std"});
    for (const auto& row : rep.rows)
      for (const auto& r : row.risk.rows)
        t.add({std::to_string(row.n), format_double(r.alpha), format_double(r.mean), format_double(r.std)});
    Json cfg = common_json(c);
    cfg["algorithm"] = algorithm;
    emit(c, "sweep", cfg, seeds, {{"convergence.csv", t.str()}}, out);
    return kOk;
  }

  if (fig->parsed()) {
    Figure1Config cfg = Figure1Config::for_scale(c.paper_scale ? Scale::paper : Scale::desk, c.gap_io);
    if (!c.config.empty()) cfg.merge(read_json_file(c.config));
    if (fig_gaps.empty()) fig_gaps.push_back(cfg.gap_io);
    cfg.gap_io = fig_gaps.front();
    if (fig->count("--gap-ii")) cfg.gap_ii = c.gap_ii;
    if (fig->count("--alphas")) cfg.alphas = alphas;
    if (!c.n_list.empty()) cfg.n_list = parse_n_list(c.n_list);
    if (c.seeds || fig->count("--seed")) cfg.seeds = seed_list(c, cfg.seeds.size());
    cfg.jobs = c.jobs;
    if (c.paper_scale) err << "warning: paper scale trains large networks and may take hours\n";
    const auto panels = figure1_panels(cfg, fig_gaps);
    std::vector<std::pair<std::string, std::string>> files;
    for (const auto& res : panels) {
      Json summary = Json::array();
      for (const auto& dc : res.dashed)
        summary.push_back({{"curve_id", dc.curve_id},
                           {"n", dc.n},
                           {"mean_r_in", dc.risk.mean_r_in},
                           {"mean_r_out", dc.risk.mean_r_out},
                           {"max_abs_deviation_from_bayes", max_deviation(dc, res.bayes)}});
      Json report{{"solid_line", std::string(kBayesCurveId) +
                                     ": pointwise Bayes alpha-risk, a surrogate for the infimum over the network family"},
                  {"gap_io", res.config.gap_io},
                  {"config_hash", config_hash(res.config.to_json())},
                  {"seeds", cfg.seeds},
                  {"curves", summary}};
      const std::string tag = "figure1_gapio_" + format_double(res.config.gap_io);
      files.push_back({tag + ".csv", res.csv().str()});
      files.push_back({tag + "_summary.json", report.dump(2) + "\n"});
    }
    Json resolved = cfg.to_json();
    resolved["gap_io"] = fig_gaps;
    emit(c, "figure1", resolved, cfg.seeds, files, out);
    return kOk;
  }

  if (demo->parsed()) {
    Json report;
    Json cfg;
    std::vector<std::uint64_t> seeds;
    std::vector<std::pair<std::string, std::string>> files;
    if (demo_name == "impossibility_overlap") {
      const auto rep = demo_impossibility_overlap(alphas);
      report = rep.to_json();
      cfg = Json{{"demo", demo_name}, {"alphas", alphas}};
    } else if (demo_name == "separate_learnable") {
      SeparateConfig sc;
      sc.alphas = alphas;
      if (!c.n_list.empty()) sc.n_list = parse_n_list(c.n_list);
      sc.seeds = seed_list(c, sc.seeds.size());
      sc.jobs = c.jobs;
      const auto rep = demo_separate_learnable(sc);
      report = rep.to_json();
      cfg = sc.to_json();
      seeds = sc.seeds;
      files.push_back({"convergence.csv", rep.csv().str()});
    } else if (demo_name == "finite_id_space") {
      FiniteIdConfig fc;
      if (!c.n_list.empty()) fc.n_list = parse_n_list(c.n_list);
      if (c.seeds) fc.trials = c.seeds;
      fc.seed = c.seed;
      fc.jobs = c.jobs;
      const auto rep = demo_finite_id_space(fc);
      report = rep.to_json();
      cfg = fc.to_json();
      seeds = {fc.seed};
      files.push_back({"selector.csv", rep.csv().str()});
    } else if (demo_name == "constrained_erm" || demo_name == "constrained_erm_overlap") {
      ConstrainedConfig cc;
      cc.alphas = alphas;
      cc.overlap = demo_name == "constrained_erm_overlap";
      cc.seeds = seed_list(c, cc.seeds.size());
      if (!c.n_list.empty()) {
        const auto ns = parse_n_list(c.n_list);
        cc.n = cc.m = ns.back();
      }
      const auto rep = demo_constrained_erm(cc);
      report = rep.to_json();
      cfg = cc.to_json();
      seeds = cc.seeds;
      if (rep.infeasible) err << "infeasible: " << rep.message << '\n';
    } else {
      throw ArgumentError("unknown demo '" + demo_name + "'");
    }
    report["config_hash"] = config_hash(cfg);
    report["seeds"] = seeds;
    files.insert(files.begin(), {"report.json", report.dump(2) + "\n"});
    emit(c, "demo " + demo_name, cfg, seeds, files, out);
    return kOk;
  }
  return kUsage;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return run(args, out, err);
  } catch (const CapacityError& e) {
    err << "capacity error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Json::exception& e) {
    err << "error: malformed input: " << e.what() << '\n';
    return kUsage;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::logic_error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return kRuntime;
  }
}

}  // namespace oodlab::cli
