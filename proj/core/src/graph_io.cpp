#include "planloc/graph_io.hpp"

#include <fstream>
#include <sstream>

#include "planloc/errors.hpp"

namespace planloc {
namespace {

const nlohmann::json& field(const nlohmann::json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw ParseError(path + ": expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(path + "." + key + ": missing field");
  return *it;
}

std::string string_field(const nlohmann::json& obj, const char* key, const std::string& path) {
  const auto& j = field(obj, key, path);
  if (!j.is_string()) throw ParseError(path + "." + key + ": expected a string");
  return j.get<std::string>();
}

}  // namespace

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j, const std::string& path) {
  if (!j.is_array()) throw ParseError(path + ": expected an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      throw ParseError(path + "[" + std::to_string(i) + "]: expected a number");
    }
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& path) {
  if (!j.is_array()) throw ParseError(path + ": expected an array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = rows == 0 ? 0 : (j[0].is_array() ? j[0].size() : 0);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string row_path = path + "[" + std::to_string(r) + "]";
    const Eigen::VectorXd row = vector_from_json(j[r], row_path);
    if (static_cast<std::size_t>(row.size()) != cols) throw ParseError(row_path + ": ragged matrix");
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

nlohmann::json graph_to_json(const FactorGraph& graph) {
  nlohmann::json vars = nlohmann::json::array();
  for (const auto& [id, var] : graph.variables()) {
    vars.push_back({{"id", to_string(id)},
                    {"frame", std::string(to_string(var.frame))},
                    {"value", vector_to_json(var.value)},
                    {"fixed", var.fixed}});
  }
  nlohmann::json factors = nlohmann::json::array();
  for (const auto& [id, factor] : graph.factors()) {
    nlohmann::json refs = nlohmann::json::array();
    for (const auto& vid : factor.variables) refs.push_back(to_string(vid));
    factors.push_back({{"id", to_string(id)},
                       {"variables", std::move(refs)},
                       {"measurement", vector_to_json(factor.measurement)},
                       {"information", matrix_to_json(factor.information)}});
  }
  return {{"variables", std::move(vars)}, {"factors", std::move(factors)}};
}

FactorGraph graph_from_json(const nlohmann::json& doc) {
  FactorGraph graph;
  const auto& vars = field(doc, "variables", "$");
  if (!vars.is_array()) throw ParseError("$.variables: expected an array");
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const std::string path = "$.variables[" + std::to_string(i) + "]";
    const auto& v = vars[i];
    Variable var;
    var.id = parse_variable_id(string_field(v, "id", path));
    var.frame = frame_from_string(string_field(v, "frame", path));
    var.value = vector_from_json(field(v, "value", path), path + ".value");
    if (v.contains("fixed")) {
      if (!v["fixed"].is_boolean()) throw ParseError(path + ".fixed: expected a boolean");
      var.fixed = v["fixed"].get<bool>();
    }
    try {
      graph.insert_variable(var);
    } catch (const InvalidInput& e) {
      throw InvalidInput(path + ": " + e.what());
    }
  }
  const auto& factors = field(doc, "factors", "$");
  if (!factors.is_array()) throw ParseError("$.factors: expected an array");
  for (std::size_t i = 0; i < factors.size(); ++i) {
    const std::string path = "$.factors[" + std::to_string(i) + "]";
    const auto& f = factors[i];
    Factor factor;
    factor.id = parse_factor_id(string_field(f, "id", path));
    const auto& refs = field(f, "variables", path);
    if (!refs.is_array()) throw ParseError(path + ".variables: expected an array");
    for (std::size_t k = 0; k < refs.size(); ++k) {
      if (!refs[k].is_string()) {
        throw ParseError(path + ".variables[" + std::to_string(k) + "]: expected a string");
      }
      factor.variables.push_back(parse_variable_id(refs[k].get<std::string>()));
    }
    factor.measurement = vector_from_json(field(f, "measurement", path), path + ".measurement");
    factor.information = matrix_from_json(field(f, "information", path), path + ".information");
    try {
      graph.insert_factor(factor);
    } catch (const InvalidInput& e) {
      throw InvalidInput(path + ": " + e.what());
    }
  }
  return graph;
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t offset = std::min(e.byte, text.size());
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i + 1 < offset; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(column) +
                     ": JSON syntax error");
  }
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InvalidInput(path.string() + ": cannot open file for writing");
  out << doc.dump(2) << '\n';
}

FactorGraph load_graph(const std::filesystem::path& path) {
  return graph_from_json(read_json_file(path));
}

void save_graph(const std::filesystem::path& path, const FactorGraph& graph) {
  write_json_file(path, graph_to_json(graph));
}

}  // namespace planloc
