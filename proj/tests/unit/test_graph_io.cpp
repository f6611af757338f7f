#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "planloc/a_graph.hpp"
#include "planloc/errors.hpp"
#include "planloc/graph_io.hpp"
#include "planloc/plans.hpp"
#include "test_support.hpp"

using namespace planloc;
using nlohmann::json;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("planloc_io_" + name);
}

void expect_same_graph(const FactorGraph& a, const FactorGraph& b) {
  ASSERT_EQ(a.num_variables(), b.num_variables());
  ASSERT_EQ(a.num_factors(), b.num_factors());
  for (const auto& [id, var] : a.variables()) {
    ASSERT_TRUE(b.contains(id)) << to_string(id);
    EXPECT_EQ(var.value, b.value(id));
    EXPECT_EQ(var.frame, b.variable(id).frame);
    EXPECT_EQ(var.fixed, b.variable(id).fixed);
  }
  for (const auto& [id, f] : a.factors()) {
    ASSERT_TRUE(b.contains(id)) << to_string(id);
    EXPECT_EQ(f.variables, b.factor(id).variables);
    EXPECT_EQ(f.measurement, b.factor(id).measurement);
    EXPECT_EQ(f.information, b.factor(id).information);
  }
  for (VariableKind k : {VariableKind::Keyframe, VariableKind::PlaneVar, VariableKind::Room}) {
    EXPECT_EQ(a.next_index(k), b.next_index(k));
  }
}

}  // namespace

TEST(GraphJson, RoundTripIsExact) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 20; ++i) {
    const FactorGraph g = test::random_factor_zoo(rng);
    const FactorGraph back = graph_from_json(graph_to_json(g));
    expect_same_graph(g, back);
    EXPECT_EQ(graph_to_json(back).dump(), graph_to_json(g).dump());
  }
}

TEST(GraphJson, FileRoundTrip) {
  const AGraph a = build_a_graph(fixture_plan("asym5"));
  const auto path = temp_file("asym5.json");
  save_graph(path, a.graph);
  expect_same_graph(a.graph, load_graph(path));
  std::ifstream in(path);
  const std::string text((std::istreambuf_iterator<char>(in)), {});
  EXPECT_EQ(text.back(), '\n');
  std::filesystem::remove(path);
}

TEST(GraphJson, Layout) {
  FactorGraph g;
  const auto k = g.add_variable(VariableKind::Keyframe, Eigen::Vector3d(1, 2, 0.5));
  g.add_factor(FactorKind::Prior, {k}, Eigen::Vector3d(1, 2, 0.5), Eigen::Matrix3d::Identity());
  const json doc = graph_to_json(g);
  ASSERT_EQ(doc.at("variables").size(), 1u);
  EXPECT_EQ(doc["variables"][0]["id"], "Keyframe:0");
  EXPECT_EQ(doc["variables"][0]["frame"], "M");
  EXPECT_EQ(doc["variables"][0]["value"], json({1.0, 2.0, 0.5}));
  EXPECT_EQ(doc["factors"][0]["id"], "Prior:0");
  EXPECT_EQ(doc["factors"][0]["variables"], json({"Keyframe:0"}));
}

TEST(GraphJson, ErrorsNameTheField) {
  FactorGraph g;
  const auto k = g.add_variable(VariableKind::Keyframe, Eigen::Vector3d(1, 2, 0.5));
  g.add_factor(FactorKind::Prior, {k}, Eigen::Vector3d(1, 2, 0.5), Eigen::Matrix3d::Identity());
  json doc = graph_to_json(g);

  json bad = doc;
  bad["variables"][0]["value"] = "x";
  try {
    graph_from_json(bad);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("variables[0].value"), std::string::npos) << e.what();
  }

  bad = doc;
  bad["factors"][0]["variables"] = json({"Keyframe:9"});
  EXPECT_THROW(graph_from_json(bad), Error);

  bad = doc;
  bad.erase("factors");
  EXPECT_THROW(graph_from_json(bad), ParseError);

  bad = doc;
  bad["variables"][0]["id"] = "Bogus:0";
  EXPECT_THROW(graph_from_json(bad), ParseError);
}

TEST(ReadJsonFile, SyntaxErrorCarriesPosition) {
  const auto path = temp_file("broken.json");
  {
    std::ofstream out(path);
    out << "{\n  \"a\": 1,\n  \"b\": ]\n}\n";
  }
  try {
    read_json_file(path);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("3"), std::string::npos) << e.what();
  }
  std::filesystem::remove(path);
  EXPECT_THROW(read_json_file(temp_file("does_not_exist.json")), Error);
}
