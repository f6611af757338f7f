#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>

#include "planloc/factor_graph.hpp"

namespace planloc {

/// {"variables": [{"id", "frame", "value", "fixed"}],
///  "factors": [{"id", "variables", "measurement", "information"}]}
nlohmann::json graph_to_json(const FactorGraph& graph);

/// Throws ParseError naming the offending field, InvalidInput for inconsistent content.
FactorGraph graph_from_json(const nlohmann::json& doc);

/// Reads a whole JSON document; syntax errors carry the line and column.
nlohmann::json read_json_file(const std::filesystem::path& path);
/// Writes `doc` with two-space indentation and a trailing newline.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);

FactorGraph load_graph(const std::filesystem::path& path);
void save_graph(const std::filesystem::path& path, const FactorGraph& graph);

/// Converts Eigen vectors and matrices to and from JSON arrays.
nlohmann::json vector_to_json(const Eigen::VectorXd& v);
nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::VectorXd vector_from_json(const nlohmann::json& j, const std::string& path);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& path);

}  // namespace planloc
