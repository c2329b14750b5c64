#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "oodlab/conditions.hpp"
#include "oodlab/domains.hpp"
#include "oodlab/fcnn.hpp"
#include "oodlab/hypotheses.hpp"

namespace oodlab {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";

/// Shortest "%.9g" rendering used for every float in CSV output.
std::string format_double(double v);

Json to_json(const JointDistribution& joint);
JointDistribution joint_from_json(const Json& j);

Json to_json(const Domain& domain);
Domain domain_from_json(const Json& j);

Json to_json(const FcnnArchitecture& arch);
FcnnArchitecture architecture_from_json(const Json& j);

/// Architecture, parameters and input map of a network.
Json to_json(const Network& net);
Network network_from_json(const Json& j);

Json to_json(const TableHypothesis& h);
TableHypothesis table_from_json(const Json& j);

Json to_json(const ConditionReport& r);

/// 64-bit FNV-1a over the bytes of s, as 16 hex digits.
std::string fnv1a_hex(const std::string& s);

/// Hash of the compact dump of a config document.
std::string config_hash(const Json& config);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Minimal CSV builder; cells are written verbatim.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add(std::vector<std::string> row);
  std::string str() const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Writes manifest.json (config echo, hash, seeds, version) into dir.
void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    const Json& config, const std::vector<std::uint64_t>& seeds,
                    const std::vector<std::string>& outputs);

}  // namespace oodlab
