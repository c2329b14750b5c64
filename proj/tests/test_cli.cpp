#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "oodlab/serialization.hpp"

using namespace oodlab;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("oodlab_cli_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("usage errors exit 2") {
  const Run none = run({});
  CHECK(none.code == cli::kUsage);
  CHECK(none.err.find("Usage") != std::string::npos);
  CHECK(run({"bogus"}).code == cli::kUsage);
  CHECK(run({"inf-risk", "--alphas", "2"}).code == cli::kUsage);
  CHECK(run({"inf-risk", "--domain", "nowhere"}).code == cli::kUsage);
  CHECK(run({"figure1", "--paper-scale", "--desk-scale"}).code == cli::kUsage);
  CHECK(run({"--help"}).code == cli::kOk);
}

TEST_CASE("check-conditions on the overlap domain exits 3") {
  const auto dir = scratch("check");
  const Run r = run({"check-conditions", "--domain", "overlap_two_atom", "--space", "all_tables", "--out", dir.string()});
  CHECK(r.code == cli::kConditionFailed);
  CHECK(r.out.find("violating_alpha 0.5") != std::string::npos);
  const Json rep = read_json_file(dir / "conditions.json");
  CHECK(rep["linear"]["violating_alpha"] == 0.5);
  CHECK(rep["realizability"]["holds"] == false);
  const Json manifest = read_json_file(dir / "manifest.json");
  CHECK(manifest["version"] == kVersion);

  CHECK(run({"check-conditions", "--domain", "separate_two_atom", "--out", dir.string()}).code == cli::kOk);
  fs::remove_all(dir);
}

TEST_CASE("gen-domain, eval-risk and inf-risk") {
  const auto dir = scratch("eval");
  REQUIRE(run({"gen-domain", "--domain", "separate_two_atom", "--out", dir.string()}).code == 0);
  const fs::path domain = dir / "domain.json";
  CHECK(domain_from_json(read_json_file(domain)).k() == 1);

  write_text_file(dir / "h.json", R"({"k": 1, "table": [{"point": [0.0], "label": 1}, {"point": [1.0], "label": 1}]})");
  const Run e = run({"eval-risk", "--domain", domain.string(), "--hypothesis", (dir / "h.json").string(),
                     "--alphas", "0,0.5,1", "--out", dir.string()});
  CHECK(e.code == 0);
  CHECK(slurp(dir / "risk.csv") == "alpha,risk\n0,0\n0.5,0.5\n1,1\n");
  CHECK(run({"eval-risk", "--domain", domain.string(), "--out", dir.string()}).code == cli::kUsage);

  CHECK(run({"inf-risk", "--domain", "overlap_two_atom", "--alphas", "0.25,0.5", "--out", dir.string()}).code == 0);
  CHECK(slurp(dir / "inf_risk.csv") == "alpha,inf_risk,argmin_count\n0.25,0.25,1\n0.5,0.5,2\n");
  CHECK(run({"inf-risk", "--domain", "benchmark", "--out", dir.string()}).code == cli::kUsage);
  fs::remove_all(dir);
}

TEST_CASE("sweep and run-algorithm are reproducible") {
  const auto a = scratch("sweep_a");
  const auto b = scratch("sweep_b");
  const std::vector<std::string> base{"sweep", "--algorithm", "nn_threshold", "--domain", "separate_two_atom",
                                      "--n-list", "1,5", "--seeds", "4", "--alphas", "grid:3"};
  auto with = [&](const fs::path& d) {
    auto v = base;
    v.insert(v.end(), {"--out", d.string()});
    return v;
  };
  REQUIRE(run(with(a)).code == 0);
  REQUIRE(run(with(b)).code == 0);
  CHECK(slurp(a / "convergence.csv") == slurp(b / "convergence.csv"));
  CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));
  CHECK(slurp(a / "convergence.csv").rfind("n,alpha,mean,std\n", 0) == 0);

  const Run r = run({"run-algorithm", "--algorithm", "erm", "--domain", "separate_two_atom", "--n", "20", "--out", a.string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("r_in=0 r_out=") != std::string::npos);
  CHECK(run({"run-algorithm", "--algorithm", "magic", "--domain", "separate_two_atom", "--out", a.string()}).code ==
        cli::kUsage);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("demos write reports") {
  const auto dir = scratch("demo");
  CHECK(run({"demo", "impossibility_overlap", "--out", dir.string()}).code == 0);
  const Json rep = read_json_file(dir / "report.json");
  CHECK(rep.contains("config_hash"));
  CHECK(rep["linear_condition"]["violating_alpha"] == 0.5);

  const Run bad = run({"demo", "constrained_erm_overlap", "--seeds", "1", "--out", dir.string()});
  CHECK(bad.code == 0);
  CHECK(bad.err.find("infeasible") != std::string::npos);
  CHECK(run({"demo", "nope", "--out", dir.string()}).code == cli::kUsage);
  fs::remove_all(dir);
}

TEST_CASE("figure1 with a small config") {
  const auto dir = scratch("figure1");
  write_text_file(dir / "cfg.json",
                  R"({"n_list": [30], "seeds": [1], "eval_cells": 4,
                      "pipeline": {"iterations": 5, "architecture": {"widths": [2, 6, 10]}}})");
  const Run r = run({"figure1", "--gap-io", "100", "--gap-io", "-2", "--config", (dir / "cfg.json").string(),
                     "--alphas", "grid:5", "--desk-scale", "--out", dir.string()});
  CHECK(r.code == 0);
  const std::string csv = slurp(dir / "figure1_gapio_-2.csv");
  CHECK(csv.rfind("alpha,curve_id,value,std\n", 0) == 0);
  CHECK(csv.find("bayes_inf_surrogate") != std::string::npos);
  CHECK(csv.find("fcnn_energy_n30") != std::string::npos);
  CHECK(fs::exists(dir / "figure1_gapio_100_summary.json"));
  fs::remove_all(dir);
}
