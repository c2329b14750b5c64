#include <doctest.h>

#include <filesystem>

#include "oodlab/experiments.hpp"
#include "oodlab/learners.hpp"
#include "oodlab/serialization.hpp"

using namespace oodlab;

TEST_CASE("float formatting") {
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(-0.0) == "0");
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(1.0 / 3.0) == "0.333333333");
  CHECK(format_double(1e-20) == "1e-20");
}

TEST_CASE("FNV-1a reference vectors") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("domain round trips") {
  for (const Domain& d : {named_domain("overlap_two_atom"), make_benchmark_domain(20, -2),
                          random_separate_domain(12, 5, 3)}) {
    const Json j = to_json(d);
    const Domain back = domain_from_json(Json::parse(j.dump()));
    CHECK(back.k() == d.k());
    CHECK(back.pi_out() == d.pi_out());
    CHECK(back.id() == d.id());
    CHECK(back.ood() == d.ood());
    CHECK(to_json(back).dump() == j.dump());
  }
  CHECK_THROWS_AS(domain_from_json(Json{{"label_space", {{"k", 1}}}, {"id", Json::array()}, {"ood", Json::array()}}),
                  ArgumentError);
}

TEST_CASE("network round trip") {
  TrainConfig cfg;
  cfg.arch = {{2, 5, 3}, Activation::sigmoid};
  cfg.iterations = 20;
  cfg.seed = 2;
  const Network net = train_fcnn(cfg, {{{0.0, 1.0}, 1}, {{3.0, -1.0}, 2}, {{1.0, 1.0}, 3}});
  const Network back = network_from_json(Json::parse(to_json(net).dump()));
  CHECK(back.shift == net.shift);
  CHECK(back.scale == net.scale);
  for (std::size_t i = 0; i < net.params.weights.size(); ++i) {
    CHECK(back.params.weights[i] == net.params.weights[i]);
    CHECK(back.params.biases[i] == net.params.biases[i]);
  }
  Json broken = to_json(net);
  broken["layers"][0]["biases"] = {1.0};
  CHECK_THROWS_AS(network_from_json(broken), ArgumentError);
  broken = to_json(net);
  broken["architecture"]["activation"] = "tanh";
  CHECK_THROWS_AS(network_from_json(broken), ArgumentError);
}

TEST_CASE("table hypothesis round trip") {
  const auto f = std::make_shared<const FeatureSet>(std::vector<Point>{{0.0, 1.0}, {2.0, 3.0}});
  const TableHypothesis h(f, {2, 3}, 2);
  const TableHypothesis back = table_from_json(Json::parse(to_json(h).dump()));
  CHECK(back == h);
  CHECK(back(Point{2.0, 3.0}) == 3);
}

TEST_CASE("condition report json") {
  ConditionReport r;
  r.condition = "linear";
  r.violating_alpha = 0.5;
  const Json j = to_json(r);
  CHECK(j["violating_alpha"] == 0.5);
  CHECK(j["witness"].is_null());
  CHECK_FALSE(j["holds"].get<bool>());
}

TEST_CASE("csv and files") {
  CsvTable t({"a", "b"});
  t.add({"1", "x"});
  CHECK(t.str() == "a,b\n1,x\n");
  CHECK_THROWS_AS(t.add({"1"}), ArgumentError);

  const auto dir = std::filesystem::temp_directory_path() / "oodlab_serialization_test";
  std::filesystem::remove_all(dir);
  write_text_file(dir / "nested" / "c.json", "{\"x\": 1 // comment\n}");
  CHECK(read_json_file(dir / "nested" / "c.json")["x"] == 1);
  CHECK_THROWS_AS(read_json_file(dir / "missing.json"), ArgumentError);
  write_text_file(dir / "bad.json", "{");
  CHECK_THROWS_AS(read_json_file(dir / "bad.json"), ArgumentError);

  write_manifest(dir, "demo", Json{{"k", 1}}, {1, 2}, {"out.csv"});
  const Json m = read_json_file(dir / "manifest.json");
  CHECK(m["version"] == kVersion);
  CHECK(m["config_hash"] == config_hash(Json{{"k", 1}}));
  CHECK(m["seeds"] == Json({1, 2}));
  std::filesystem::remove_all(dir);
}
