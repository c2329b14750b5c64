#include "oodlab/serialization.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace oodlab {

std::string format_double(double v) {
  if (v == 0.0) return "0";  // also folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

namespace {

Json matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const Json& j, Eigen::Index rows, Eigen::Index cols) {
  if (static_cast<Eigen::Index>(j.size()) != rows) throw ArgumentError("weight matrix has wrong row count");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto row = j.at(static_cast<std::size_t>(r)).get<std::vector<double>>();
    if (static_cast<Eigen::Index>(row.size()) != cols) throw ArgumentError("weight matrix has wrong column count");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

}  // namespace

Json to_json(const JointDistribution& joint) {
  Json comps = Json::array();
  if (joint.is_discrete()) {
    const auto& a = joint.discrete().atoms();
    for (std::size_t i = 0; i < a.size(); ++i)
      comps.push_back({{"point", a[i].point}, {"mass", a[i].mass}, {"label", joint.labels()[i]}});
  } else {
    const auto& c = joint.rects().components();
    for (std::size_t i = 0; i < c.size(); ++i)
      comps.push_back({{"lo", c[i].rect.lo}, {"hi", c[i].rect.hi}, {"weight", c[i].weight}, {"label", joint.labels()[i]}});
  }
  return comps;
}

JointDistribution joint_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw ArgumentError("a distribution needs a nonempty component list");
  std::vector<Label> labels;
  if (j.front().contains("point")) {
    std::vector<Atom> atoms;
    for (const auto& a : j) {
      atoms.push_back({a.at("point").get<Point>(), a.at("mass").get<double>()});
      labels.push_back(a.at("label").get<Label>());
    }
    return JointDistribution(DiscreteDistribution(std::move(atoms)), std::move(labels));
  }
  std::vector<RectComponent> comps;
  for (const auto& c : j) {
    comps.push_back({Rect{c.at("lo").get<std::vector<double>>(), c.at("hi").get<std::vector<double>>()},
                     c.at("weight").get<double>()});
    labels.push_back(c.at("label").get<Label>());
  }
  return JointDistribution(UniformRectMixture(std::move(comps)), std::move(labels));
}

Json to_json(const Domain& domain) {
  return Json{{"label_space", {{"k", domain.k()}}},
              {"id", to_json(domain.id())},
              {"ood", to_json(domain.ood())},
              {"pi_out", domain.pi_out()}};
}

Domain domain_from_json(const Json& j) {
  return Domain(LabelSpace(j.at("label_space").at("k").get<int>()), joint_from_json(j.at("id")),
                joint_from_json(j.at("ood")), j.value("pi_out", 0.0));
}

Json to_json(const FcnnArchitecture& arch) {
  return Json{{"widths", arch.widths},
              {"activation", arch.activation == Activation::relu ? "relu" : "sigmoid"}};
}

FcnnArchitecture architecture_from_json(const Json& j) {
  FcnnArchitecture a;
  a.widths = j.at("widths").get<std::vector<int>>();
  const std::string act = j.value("activation", std::string("sigmoid"));
  if (act == "relu")
    a.activation = Activation::relu;
  else if (act == "sigmoid")
    a.activation = Activation::sigmoid;
  else
    throw ArgumentError("unknown activation '" + act + "'");
  a.validate();
  return a;
}

Json to_json(const Network& net) {
  Json layers = Json::array();
  for (std::size_t i = 0; i < net.params.weights.size(); ++i) {
    const Eigen::VectorXd& b = net.params.biases[i];
    layers.push_back({{"weights", matrix_json(net.params.weights[i])},
                      {"biases", std::vector<double>(b.data(), b.data() + b.size())}});
  }
  return Json{{"architecture", to_json(net.arch)},
              {"input_shift", net.shift},
              {"input_scale", net.scale},
              {"layers", layers}};
}

Network network_from_json(const Json& j) {
  const FcnnArchitecture arch = architecture_from_json(j.at("architecture"));
  FcnnParams p = FcnnParams::zeros(arch);
  const Json& layers = j.at("layers");
  if (layers.size() != p.weights.size()) throw ArgumentError("layer count does not match architecture");
  for (std::size_t i = 0; i < p.weights.size(); ++i) {
    p.weights[i] = matrix_from(layers[i].at("weights"), p.weights[i].rows(), p.weights[i].cols());
    const auto b = layers[i].at("biases").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(b.size()) != p.biases[i].size()) throw ArgumentError("bias has wrong length");
    p.biases[i] = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
  }
  Network net(arch, std::move(p));
  if (j.contains("input_shift")) net.shift = j.at("input_shift").get<std::vector<double>>();
  if (j.contains("input_scale")) net.scale = j.at("input_scale").get<std::vector<double>>();
  if (static_cast<int>(net.shift.size()) != arch.input_dim() ||
      static_cast<int>(net.scale.size()) != arch.input_dim())
    throw ArgumentError("input map has wrong length");
  return net;
}

Json to_json(const TableHypothesis& h) {
  Json table = Json::array();
  for (std::size_t i = 0; i < h.assignment().size(); ++i)
    table.push_back({{"point", h.features()->points()[i]}, {"label", h.at(i)}});
  return Json{{"k", h.k()}, {"table", table}};
}

TableHypothesis table_from_json(const Json& j) {
  std::vector<Point> pts;
  std::vector<Label> labels;
  for (const auto& e : j.at("table")) {
    pts.push_back(e.at("point").get<Point>());
    labels.push_back(e.at("label").get<Label>());
  }
  return TableHypothesis(std::make_shared<const FeatureSet>(std::move(pts)), std::move(labels), j.at("k").get<int>());
}

Json to_json(const ConditionReport& r) {
  Json j{{"condition", r.condition}, {"holds", r.holds}, {"max_deviation", r.max_deviation}};
  j["violating_alpha"] = r.violating_alpha ? Json(*r.violating_alpha) : Json(nullptr);
  j["witness"] = r.witness ? to_json(*r.witness) : Json(nullptr);
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const Json& config) { return fnv1a_hex(config.dump()); }

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open " + path.string());
  try {
    return Json::parse(in, nullptr, true, true);
  } catch (const Json::parse_error& e) {
    throw ArgumentError("cannot parse " + path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void CsvTable::add(std::vector<std::string> row) {
  if (row.size() != header_.size()) throw ArgumentError("CSV row width does not match header");
  rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return os.str();
}

void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    const Json& config, const std::vector<std::uint64_t>& seeds,
                    const std::vector<std::string>& outputs) {
  Json m{{"tool", "oodlab"},
         {"version", kVersion},
         {"command", command},
         {"config_hash", config_hash(config)},
         {"seeds", seeds},
         {"outputs", outputs},
         {"config", config}};
  write_text_file(dir / "manifest.json", m.dump(2) + "\n");
}

}  // namespace oodlab
