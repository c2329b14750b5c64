#include "oodlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "oodlab/parallel.hpp"

namespace oodlab {

Domain named_domain(const std::string& name, double gap_ii, double gap_io) {
  const LabelSpace binary(1);
  if (name == "overlap_two_atom")
    return Domain(binary, JointDistribution::point_mass({0.0}, 1), JointDistribution::point_mass({0.0}, 2), 0.5);
  if (name == "separate_two_atom")
    return Domain(binary, JointDistribution::point_mass({0.0}, 1), JointDistribution::point_mass({1.0}, 2), 0.5);
  if (name == "benchmark") return make_benchmark_domain(gap_ii, gap_io);
  throw ArgumentError("unknown domain '" + name + "'");
}

std::vector<std::uint64_t> seed_range(std::size_t count, std::uint64_t first) {
  std::vector<std::uint64_t> s(count);
  for (std::size_t i = 0; i < count; ++i) s[i] = first + i;
  return s;
}

// ---------------------------------------------------------------------------
// Figure 1

PipelineConfig Figure1Config::default_pipeline(Scale scale) {
  PipelineConfig p;
  p.train.arch = FcnnArchitecture{{2, 100, 100, 10}, Activation::sigmoid};
  p.train.learning_rate = 1e-3;
  p.train.iterations = scale == Scale::paper ? 10000 : 2000;
  return p;
}

Figure1Config Figure1Config::for_scale(Scale scale, double gap_io) {
  Figure1Config c;
  c.gap_io = gap_io;
  c.pipeline = default_pipeline(scale);
  if (scale == Scale::paper) {
    c.n_list = {15000, 20000, 25000};
    c.seeds = seed_range(20);
  }
  return c;
}

namespace {

const char* scaling_name(TrainConfig::InputScaling s) {
  switch (s) {
    case TrainConfig::InputScaling::none:
      return "none";
    case TrainConfig::InputScaling::per_feature:
      return "per_feature";
    case TrainConfig::InputScaling::isotropic:
      return "isotropic";
  }
  return "none";
}

TrainConfig::InputScaling scaling_from(const std::string& s) {
  if (s == "none") return TrainConfig::InputScaling::none;
  if (s == "per_feature") return TrainConfig::InputScaling::per_feature;
  if (s == "isotropic") return TrainConfig::InputScaling::isotropic;
  throw ArgumentError("unknown input scaling '" + s + "'");
}

}  // namespace

Json Figure1Config::to_json() const {
  const auto& t = pipeline.train;
  Json p{{"architecture", oodlab::to_json(t.arch)},
         {"learning_rate", t.learning_rate},
         {"iterations", t.iterations},
         {"batch", t.batch},
         {"adam", {{"beta1", t.adam.beta1}, {"beta2", t.adam.beta2}, {"eps_hat", t.adam.eps_hat}}},
         {"input_scaling", scaling_name(t.input_scaling)},
         {"tpr", pipeline.tpr},
         {"holdout_fraction", pipeline.holdout_fraction},
         {"temperature", pipeline.temperature}};
  p["lambda_override"] = pipeline.lambda_override ? Json(*pipeline.lambda_override) : Json(nullptr);
  return Json{{"experiment", "figure1"},
              {"gap_ii", gap_ii},
              {"gap_io", gap_io},
              {"n_list", n_list},
              {"seeds", seeds},
              {"alphas", alphas},
              {"eval_cells", eval_cells},
              {"pipeline", p}};
}

void Figure1Config::merge(const Json& j) {
  if (j.contains("gap_ii")) gap_ii = j["gap_ii"].get<double>();
  if (j.contains("gap_io")) gap_io = j["gap_io"].get<double>();
  if (j.contains("n_list")) n_list = j["n_list"].get<std::vector<std::size_t>>();
  if (j.contains("seeds")) seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  if (j.contains("alphas")) alphas = j["alphas"].get<std::vector<double>>();
  if (j.contains("eval_cells")) eval_cells = j["eval_cells"].get<int>();
  if (!j.contains("pipeline")) return;
  const Json& p = j["pipeline"];
  auto& t = pipeline.train;
  if (p.contains("architecture")) t.arch = architecture_from_json(p["architecture"]);
  if (p.contains("learning_rate")) t.learning_rate = p["learning_rate"].get<double>();
  if (p.contains("iterations")) t.iterations = p["iterations"].get<int>();
  if (p.contains("batch")) t.batch = p["batch"].get<std::size_t>();
  if (p.contains("adam")) {
    t.adam.beta1 = p["adam"].value("beta1", t.adam.beta1);
    t.adam.beta2 = p["adam"].value("beta2", t.adam.beta2);
    t.adam.eps_hat = p["adam"].value("eps_hat", t.adam.eps_hat);
  }
  if (p.contains("input_scaling")) t.input_scaling = scaling_from(p["input_scaling"].get<std::string>());
  if (p.contains("tpr")) pipeline.tpr = p["tpr"].get<double>();
  if (p.contains("holdout_fraction")) pipeline.holdout_fraction = p["holdout_fraction"].get<double>();
  if (p.contains("temperature")) pipeline.temperature = p["temperature"].get<double>();
  if (p.contains("lambda_override")) {
    if (p["lambda_override"].is_null())
      pipeline.lambda_override.reset();
    else
      pipeline.lambda_override = p["lambda_override"].get<double>();
  }
}

CsvTable Figure1Result::csv() const {
  CsvTable t({"alpha", "curve_id", "value", "std"});
  for (std::size_t a = 0; a < config.alphas.size(); ++a)
    t.add({format_double(config.alphas[a]), kBayesCurveId, format_double(bayes[a]), "0"});
  for (const auto& c : dashed)
    for (const auto& r : c.risk.rows)
      t.add({format_double(r.alpha), c.curve_id, format_double(r.mean), format_double(r.std)});
  return t;
}

std::vector<Figure1Result> figure1_panels(const Figure1Config& cfg, const std::vector<double>& gap_ios) {
  if (cfg.n_list.empty() || cfg.seeds.empty()) throw ArgumentError("figure1 needs n values and seeds");
  if (gap_ios.empty()) throw ArgumentError("figure1 needs at least one gap_io");
  if (cfg.eval_cells < 1) throw ArgumentError("eval_cells must be positive");
  std::vector<Domain> domains;
  for (double g : gap_ios) domains.push_back(make_benchmark_domain(cfg.gap_ii, g));
  const Loss loss = Loss::zero_one(domains.front().k());
  const std::size_t panels = domains.size();

  std::vector<Figure1Result> res(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    res[p].config = cfg;
    res[p].config.gap_io = gap_ios[p];
    for (double a : cfg.alphas) res[p].bayes.push_back(bayes_alpha_risk(domains[p], a, loss));
  }

  const std::size_t ns = cfg.n_list.size();
  const std::size_t ss = cfg.seeds.size();
  std::vector<std::vector<RiskPair>> pairs(panels, std::vector<RiskPair>(ns * ss));
  std::vector<double> lambdas(ns * ss, 0.0);
  parallel_for(ns * ss, cfg.jobs, [&](std::size_t w) {
    const std::size_t n = cfg.n_list[w / ss];
    const std::uint64_t seed = cfg.seeds[w % ss];
    PipelineConfig pc = cfg.pipeline;
    pc.train.seed = seed;
    pc.split_seed = seed;
    const PipelineModel model = run_pipeline(pc, sample(domains.front().id(), n, seed), domains.front().k());
    for (std::size_t p = 0; p < panels; ++p)
      pairs[p][w] = evaluate_risk_pair(model.hypothesis, domains[p], loss, RiskEvaluation::grid(cfg.eval_cells));
    lambdas[w] = model.lambda;
  });

  for (std::size_t p = 0; p < panels; ++p) {
    res[p].lambdas = lambdas;
    for (std::size_t i = 0; i < ns; ++i) {
      std::vector<RiskPair> per(pairs[p].begin() + static_cast<std::ptrdiff_t>(i * ss),
                                pairs[p].begin() + static_cast<std::ptrdiff_t>((i + 1) * ss));
      res[p].dashed.push_back({"fcnn_energy_n" + std::to_string(cfg.n_list[i]), cfg.n_list[i],
                               summarize_risks(cfg.seeds, std::move(per), cfg.alphas)});
    }
  }
  return res;
}

Figure1Result figure1(const Figure1Config& cfg) { return figure1_panels(cfg, {cfg.gap_io}).front(); }

double max_deviation(const DashedCurve& c, const std::vector<double>& bayes) {
  double m = 0.0;
  for (std::size_t a = 0; a < c.risk.rows.size(); ++a) m = std::max(m, std::abs(c.risk.rows[a].mean - bayes[a]));
  return m;
}

// ---------------------------------------------------------------------------
// Overlap impossibility

Json ImpossibilityReport::to_json() const {
  return Json{{"demo", "impossibility_overlap"},
              {"alphas", alphas},
              {"inf_curve", inf_curve},
              {"linear_form", linear_form},
              {"linear_condition", oodlab::to_json(linear)},
              {"sup_gaps", sup_gaps}};
}

ImpossibilityReport demo_impossibility_overlap(const std::vector<double>& alphas) {
  const Domain domain = named_domain("overlap_two_atom");
  const Loss loss = Loss::zero_one(1);
  const auto features = std::make_shared<const FeatureSet>(std::vector<Point>{{0.0}});
  const TableSpace space = enumerate_space(features, 1);

  ImpossibilityReport rep;
  rep.alphas = alphas;
  const double inf_in = inf_risk(space, domain, 0.0, loss).value;
  const double inf_out = inf_risk(space, domain, 1.0, loss).value;
  for (double a : alphas) {
    rep.inf_curve.push_back(inf_risk(space, domain, a, loss).value);
    rep.linear_form.push_back((1.0 - a) * inf_in + a * inf_out);
  }
  rep.linear = check_linear(space, domain, alphas, 1e-12, loss);
  for (const RiskPair& r : table_risks(space, domain, loss)) {
    double gap = 0.0;
    for (std::size_t i = 0; i < alphas.size(); ++i) gap = std::max(gap, r.at(alphas[i]) - rep.inf_curve[i]);
    rep.sup_gaps.push_back(gap);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Separate finite-X domain with the NN-threshold learner

Json SeparateConfig::to_json() const {
  return Json{{"demo", "separate_learnable"}, {"x_size", x_size}, {"id_atoms", id_atoms},
              {"n_list", n_list},             {"seeds", seeds},   {"alphas", alphas},
              {"domain_seed", domain_seed}};
}

FeatureSetPtr make_feature_set(const Domain& domain) {
  if (!domain.id().is_discrete() || !domain.ood().is_discrete())
    throw UnsupportedError("feature sets come from discrete domains");
  std::set<Point> seen;
  std::vector<Point> pts;
  for (const auto* j : {&domain.id(), &domain.ood()})
    for (const auto& a : j->discrete().atoms())
      if (seen.insert(a.point).second) pts.push_back(a.point);
  return std::make_shared<const FeatureSet>(std::move(pts));
}

Domain random_separate_domain(std::size_t x_size, std::size_t id_atoms, std::uint64_t seed) {
  if (x_size < 2) throw ArgumentError("separate domain needs at least two points");
  if (id_atoms < 1 || id_atoms >= x_size) throw ArgumentError("need 1 <= id_atoms < x_size");
  Rng rng(seed);
  const auto side = static_cast<std::size_t>(std::ceil(std::sqrt(4.0 * static_cast<double>(x_size))));
  std::set<std::pair<std::size_t, std::size_t>> used;
  std::vector<Point> pts;
  while (pts.size() < x_size) {
    const std::pair<std::size_t, std::size_t> c{rng.index(side), rng.index(side)};
    if (used.insert(c).second) pts.push_back({static_cast<double>(c.first), static_cast<double>(c.second)});
  }
  auto part = [&](std::size_t lo, std::size_t hi, Label y) {
    std::vector<Atom> atoms;
    double total = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      atoms.push_back({pts[i], rng.uniform(0.5, 1.5)});
      total += atoms.back().mass;
    }
    // Renormalize, then push the rounding residue onto the last atom.
    double sum = 0.0;
    for (auto& a : atoms) sum += (a.mass /= total);
    atoms.back().mass += 1.0 - sum;
    return JointDistribution(DiscreteDistribution(std::move(atoms)), std::vector<Label>(hi - lo, y));
  };
  return Domain(LabelSpace(1), part(0, id_atoms, 1), part(id_atoms, x_size, 2), 0.5);
}

CsvTable SeparateReport::csv() const {
  CsvTable t({"n", "alpha", "mean", "std"});
  for (const auto& row : convergence.rows)
    for (const auto& r : row.risk.rows)
      t.add({std::to_string(row.n), format_double(r.alpha), format_double(r.mean), format_double(r.std)});
  return t;
}

Json SeparateReport::to_json() const {
  Json rows = Json::array();
  for (const auto& row : convergence.rows) {
    double worst = 0.0;
    for (const auto& r : row.risk.rows) worst = std::max(worst, r.mean);
    rows.push_back({{"n", row.n},
                    {"mean_r_in", row.risk.mean_r_in},
                    {"mean_r_out", row.risk.mean_r_out},
                    {"max_mean_risk", worst}});
  }
  return Json{{"config", config.to_json()}, {"r_out_always_zero", r_out_always_zero}, {"rows", rows}};
}

SeparateReport demo_separate_learnable(const SeparateConfig& cfg) {
  const Domain domain = random_separate_domain(cfg.x_size, cfg.id_atoms, cfg.domain_seed);
  const auto features = make_feature_set(domain);
  const Algorithm alg = [features](const LabeledSample& s) -> Hypothesis { return nn_threshold(s, features); };

  SeparateReport rep;
  rep.config = cfg;
  rep.convergence = convergence_sweep(alg, domain, cfg.n_list, cfg.seeds, cfg.alphas, Loss::zero_one(1),
                                      RiskEvaluation::exact(), cfg.jobs);
  for (const auto& row : rep.convergence.rows)
    for (const auto& r : row.risk.per_seed)
      if (r.r_out != 0.0) rep.r_out_always_zero = false;
  return rep;
}

// ---------------------------------------------------------------------------
// Finite ID space with the MMD anchor selector

Json FiniteIdConfig::to_json() const {
  return Json{{"demo", "finite_id_space"}, {"m_distributions", m_distributions},
              {"separation", separation},  {"anchor_size", anchor_size},
              {"n_list", n_list},          {"trials", trials},
              {"seed", seed},              {"bandwidth", bandwidth}};
}

std::vector<Domain> finite_id_domains(std::size_t m, double separation) {
  if (m < 2) throw ArgumentError("need at least two ID distributions");
  if (!(separation > 0.0)) throw ArgumentError("separation must be positive");
  const double pitch = separation + 2.0;
  std::vector<Atom> ood_atoms;
  for (std::size_t j = 0; j < m; ++j)
    ood_atoms.push_back({{static_cast<double>(j) * pitch + 0.5, 30.0}, 1.0 / static_cast<double>(m)});
  const JointDistribution ood(DiscreteDistribution(ood_atoms), std::vector<Label>(m, 3));

  static const double base_mass[4] = {0.4, 0.3, 0.2, 0.1};
  static const double offsets[4][2] = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  std::vector<Domain> out;
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<Atom> atoms;
    for (std::size_t a = 0; a < 4; ++a)
      atoms.push_back({{static_cast<double>(i) * pitch + offsets[a][0], offsets[a][1]}, base_mass[(a + i) % 4]});
    out.emplace_back(LabelSpace(2), JointDistribution(DiscreteDistribution(atoms), {1, 1, 2, 2}), ood, 0.5);
  }
  return out;
}

CsvTable FiniteIdReport::csv() const {
  CsvTable t({"n", "trial", "selected", "truth"});
  for (const auto& r : rows)
    t.add({std::to_string(r.n), std::to_string(r.trial), std::to_string(r.selected), std::to_string(r.truth)});
  return t;
}

Json FiniteIdReport::to_json() const {
  Json per_n = Json::array();
  for (std::size_t i = 0; i < config.n_list.size(); ++i)
    per_n.push_back({{"n", config.n_list[i]},
                     {"misselection_rate", misselection[i]},
                     {"mean_r_in", mean_risk[i].r_in},
                     {"mean_r_out", mean_risk[i].r_out}});
  return Json{{"config", config.to_json()},
              {"bandwidth", bandwidth},
              {"min_anchor_support_distance", min_anchor_distance},
              {"per_n", per_n}};
}

FiniteIdReport demo_finite_id_space(const FiniteIdConfig& cfg) {
  const std::vector<Domain> domains = finite_id_domains(cfg.m_distributions, cfg.separation);
  const std::size_t m = domains.size();

  std::vector<Point> pts;
  for (const auto& d : domains)
    for (const auto& a : d.id().discrete().atoms()) pts.push_back(a.point);
  for (const auto& a : domains.front().ood().discrete().atoms()) pts.push_back(a.point);
  const auto features = std::make_shared<const FeatureSet>(pts);

  // A_i knows the support of distribution i: seen points keep their sample
  // label, unseen support points get label 1, everything else is OOD.
  auto dedicated = [features](const Domain& d) -> Algorithm {
    std::vector<Point> support;
    for (const auto& a : d.id().discrete().atoms()) support.push_back(a.point);
    const int k = d.k();
    return [features, support, k](const LabeledSample& s) -> Hypothesis {
      std::vector<Label> labels(features->size(), k + 1);
      for (const auto& p : support) labels[features->index_of(p)] = 1;
      for (const auto& p : s) labels[features->index_of(p.x)] = p.y;
      return TableHypothesis(features, std::move(labels), k);
    };
  };

  std::vector<MmdAnchor> entries;
  for (std::size_t i = 0; i < m; ++i)
    entries.push_back({sample(domains[i].id(), cfg.anchor_size, cfg.seed * 1000 + i), dedicated(domains[i]),
                       "id_" + std::to_string(i)});
  const MmdAnchors anchors(std::move(entries), cfg.bandwidth);

  FiniteIdReport rep;
  rep.config = cfg;
  rep.bandwidth = anchors.bandwidth();
  rep.min_anchor_distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      for (const auto& a : domains[i].id().discrete().atoms())
        for (const auto& b : domains[j].id().discrete().atoms())
          rep.min_anchor_distance = std::min(rep.min_anchor_distance, distance(a.point, b.point));

  const Loss loss = Loss::zero_one(2);
  const std::size_t per_n = cfg.trials;
  rep.rows.resize(cfg.n_list.size() * per_n);
  std::vector<RiskPair> risks(rep.rows.size());
  parallel_for(rep.rows.size(), cfg.jobs, [&](std::size_t w) {
    const std::size_t n = cfg.n_list[w / per_n];
    const std::size_t t = w % per_n;
    const std::size_t truth = t % m;
    // The trial seed does not depend on n, so smaller samples are prefixes.
    const LabeledSample s = sample(domains[truth].id(), n, cfg.seed * 1000003 + t + 1);
    const Selection sel = mmd_select(s, anchors);
    rep.rows[w] = {n, t, sel.index, truth};
    const Hypothesis h = anchors.entries()[sel.index].algorithm(s);
    risks[w] = risk_pair_exact(h, domains[truth], loss);
  });

  for (std::size_t i = 0; i < cfg.n_list.size(); ++i) {
    std::size_t wrong = 0;
    RiskPair mean;
    for (std::size_t t = 0; t < per_n; ++t) {
      const auto& r = rep.rows[i * per_n + t];
      wrong += r.selected != r.truth ? 1 : 0;
      mean.r_in += risks[i * per_n + t].r_in;
      mean.r_out += risks[i * per_n + t].r_out;
    }
    const double denom = static_cast<double>(std::max<std::size_t>(per_n, 1));
    rep.misselection.push_back(static_cast<double>(wrong) / denom);
    rep.mean_risk.push_back({mean.r_in / denom, mean.r_out / denom});
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Constrained ERM under realizability

Json ConstrainedConfig::to_json() const {
  return Json{{"demo", "constrained_erm"}, {"n", n},         {"m", m},
              {"seeds", seeds},            {"alphas", alphas}, {"bound_b", bound_b},
              {"overlap", overlap}};
}

Domain constrained_demo_domain(bool overlap, DensitySpaceSpec* spec) {
  std::vector<Point> grid;
  for (int i = 0; i < 12; ++i) grid.push_back({static_cast<double>(i % 4), static_cast<double>(i / 4)});
  static const double id_mass[6] = {0.1, 0.2, 0.1, 0.2, 0.2, 0.2};
  std::vector<Atom> id_atoms;
  for (int i = 0; i < 6; ++i) id_atoms.push_back({grid[i], id_mass[i]});
  std::vector<Atom> ood_atoms;
  if (overlap) ood_atoms.push_back({grid[0], 1.0 / 7.0});
  const double w = overlap ? 1.0 / 7.0 : 1.0 / 6.0;
  for (int i = 6; i < 12; ++i) ood_atoms.push_back({grid[i], w});
  if (overlap) {
    double rest = 0.0;
    for (std::size_t i = 0; i + 1 < ood_atoms.size(); ++i) rest += ood_atoms[i].mass;
    ood_atoms.back().mass = 1.0 - rest;
  }
  if (spec) {
    spec->base = DensitySpaceSpec::Base::discrete;
    std::vector<Atom> mu;
    for (const auto& p : grid) mu.push_back({p, 1.0 / 12.0});
    spec->discrete_measure = DiscreteDistribution(std::move(mu));
    spec->bound_b = 2.0;
  }
  const std::size_t n_ood = ood_atoms.size();
  return Domain(LabelSpace(2), JointDistribution(DiscreteDistribution(id_atoms), {1, 2, 1, 2, 1, 2}),
                JointDistribution(DiscreteDistribution(ood_atoms), std::vector<Label>(n_ood, 3)), 0.5);
}

Json ConstrainedReport::to_json() const {
  Json j{{"config", config.to_json()},
         {"realizable", realizable},
         {"density_bounded", density_bounded},
         {"infeasible", infeasible}};
  if (!message.empty()) j["message"] = message;
  if (!infeasible) {
    Json rows = Json::array();
    double worst = 0.0;
    for (const auto& r : risk.rows) {
      rows.push_back({{"alpha", r.alpha}, {"mean", r.mean}, {"std", r.std}});
      worst = std::max(worst, r.mean);
    }
    j["mean_r_in"] = risk.mean_r_in;
    j["mean_r_out"] = risk.mean_r_out;
    j["max_mean_alpha_risk"] = worst;
    j["rows"] = rows;
  }
  return j;
}

ConstrainedReport demo_constrained_erm(const ConstrainedConfig& cfg) {
  DensitySpaceSpec spec;
  const Domain domain = constrained_demo_domain(cfg.overlap, &spec);
  spec.bound_b = cfg.bound_b;
  const Loss loss = Loss::zero_one(2);
  std::vector<Point> pts;
  for (const auto& a : spec.discrete_measure.atoms()) pts.push_back(a.point);
  const auto features = std::make_shared<const FeatureSet>(std::move(pts));
  const TableSpace space = enumerate_space(features, 2);

  ConstrainedReport rep;
  rep.config = cfg;
  rep.density_bounded = satisfies_density_bound(domain, spec);
  rep.realizable = check_realizability(space, domain, loss).holds;
  if (!rep.realizable) {
    rep.infeasible = true;
    rep.message = "realizability violated: no hypothesis in the space has zero risk";
    return rep;
  }

  std::vector<RiskPair> per_seed(cfg.seeds.size());
  try {
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
      const std::uint64_t seed = cfg.seeds[i];
      const LabeledSample s = sample(domain.id(), cfg.n, seed);
      const std::vector<Point> u = sample_base_measure(spec, cfg.m, seed ^ 0x5bd1e995ULL);
      const TableHypothesis h = constrained_erm(space, s, u, loss);
      per_seed[i] = risk_pair_exact(h, domain, loss);
    }
  } catch (const InfeasibleError& e) {
    rep.infeasible = true;
    rep.message = e.what();
    return rep;
  }
  rep.risk = summarize_risks(cfg.seeds, std::move(per_seed), cfg.alphas);
  return rep;
}

}  // namespace oodlab
