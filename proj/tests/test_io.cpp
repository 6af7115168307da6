#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <regex>

#include <json.hpp>

#include "storyline/error.hpp"
#include "storyline/io.hpp"
#include "storyline/render.hpp"
#include "storyline/tree.hpp"
#include "support.hpp"

namespace storyline {
namespace {

template <class Fn>
std::string error_text(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

void write(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

TEST(Csv, ThreeByTwo) {
  const auto t = parse_csv_table("a,b\n1,2\n3,4\n5,6.5\n");
  EXPECT_EQ(t.names, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(t.columns[1][2], 6.5);
  EXPECT_TRUE(t.row_ids.empty());
  EXPECT_EQ(build_scenario_matrix(t).outputs(), 2u);
}

TEST(Csv, IdColumnAndCrlf) {
  const auto t = parse_csv_table("scenario,x\r\ns1,1\r\ns2,-2e3\r\n");
  EXPECT_EQ(t.row_ids, (std::vector<std::string>{"s1", "s2"}));
  EXPECT_EQ(t.columns[0][1], -2000.0);
}

TEST(Csv, BadCellCitesRow) {
  const auto msg = error_text([] { parse_csv_table("a,b\n1,2\n3,4\n5,6\nabc,8\n", "in.csv"); });
  EXPECT_NE(msg.find("row 4"), std::string::npos) << msg;
  EXPECT_NE(msg.find("'a'"), std::string::npos) << msg;
  EXPECT_NE(msg.find("abc"), std::string::npos) << msg;
}

TEST(Csv, ShapeErrors) {
  EXPECT_THROW(parse_csv_table(""), DataError);
  EXPECT_THROW(parse_csv_table("a,b\n1\n"), DataError);
  EXPECT_THROW(parse_csv_table("a,,c\n1,2,3\n"), DataError);
  EXPECT_THROW(parse_csv_table("id,a\nx,1\nx,2\n"), DataError);
  EXPECT_THROW(parse_csv_table("a\n1,000\n"), DataError);
}

TEST(Csv, MissingFileNamesPath) {
  const auto msg = error_text([] { read_csv_table("/nonexistent/dir/file.csv"); });
  EXPECT_NE(msg.find("/nonexistent/dir/file.csv"), std::string::npos);
}

TEST(Metadata, ParsesAndAttaches) {
  testing::TempDir dir("meta");
  write(dir.path() / "s.csv", "id,gas,wind\na,1,5\nb,2,4\n");
  write(dir.path() / "t.csv", "id,price\na,0.3\nb,0.4\n");
  write(dir.path() / "m.json",
        R"({"columns":[{"name":"gas","unit":"EJ"},{"name":"price","kind":"theta","unit":"USD"}]})");
  const auto b = read_dataset(dir.path() / "s.csv", dir.path() / "t.csv", dir.path() / "m.json");
  EXPECT_EQ(b.scenarios.descriptors()[0].unit, "EJ");
  EXPECT_EQ(b.scenarios.descriptors()[1].unit, "unitless");
  EXPECT_EQ(b.scenarios.descriptors()[1].kind, OutputKind::OutputOfInterest);
  ASSERT_TRUE(b.theta);
  EXPECT_EQ(b.theta->descriptors()[0].unit, "USD");
  // read alone, each table ignores the other table's entries
  EXPECT_NO_THROW(read_scenario_matrix(dir.path() / "s.csv", dir.path() / "m.json"));
  EXPECT_NO_THROW(read_uncertainty_matrix(dir.path() / "t.csv", dir.path() / "m.json"));
}

TEST(Metadata, UnknownColumnNamed) {
  testing::TempDir dir("meta2");
  write(dir.path() / "s.csv", "gas,wind\n1,5\n2,4\n");
  write(dir.path() / "m.json", R"({"columns":[{"name":"coal"}]})");
  const auto msg = error_text([&] { read_dataset(dir.path() / "s.csv", std::nullopt, dir.path() / "m.json"); });
  EXPECT_NE(msg.find("'coal'"), std::string::npos) << msg;
  EXPECT_THROW(parse_metadata("{\"columns\": 3}"), DataError);
  EXPECT_THROW(parse_metadata("{\"columns\":[{\"name\":\"a\",\"kind\":\"bogus\"}]}"), DataError);
}

TEST(Metadata, IdMisalignment) {
  testing::TempDir dir("meta3");
  write(dir.path() / "s.csv", "id,gas\na,1\nb,2\n");
  write(dir.path() / "t.csv", "id,price\nb,1\na,2\n");
  EXPECT_THROW(read_dataset(dir.path() / "s.csv", dir.path() / "t.csv", std::nullopt), DataError);
}

TEST(Format, SignificantDigits) {
  EXPECT_EQ(format_significant(29.6412345), "29.6412");
  EXPECT_EQ(format_significant(-0.0), "0");
  EXPECT_EQ(format_significant(1.0), "1");
  EXPECT_EQ(round_significant(0.1234567), 0.123457);
}

StorylineTree sample_tree() {
  RawTable t;
  t.names = {"heat", "industry", "transport"};
  t.columns = {{0, 1, 2, 3, 10, 11, 12, 13}, {5, 6, 5, 9, 8, 9, 8, 9.5}, {100, 250, 120, 130, 200, 240, 260, 90}};
  t.descriptors = {{"heat", "PJ"}, {"industry", "PJ"}, {"transport", "unitless"}};
  const auto space = make_feature_space(build_scenario_matrix(t));
  const std::vector<int> labels = {0, 0, 0, 1, 2, 2, 2, 2};
  return fit_tree(space, labels, 3);
}

TEST(TreeJson, SingleLeaf) {
  Matrix x(3, 1);
  x(1, 0) = 1;
  x(2, 0) = 2;
  const std::vector<int> labels = {0, 0, 0};
  const auto doc = nlohmann::json::parse(export_tree_json(fit_tree(x, labels, 3), {1}));
  ASSERT_EQ(doc["nodes"].size(), 1u);
  EXPECT_EQ(doc["nodes"][0]["sigma"], 1.0);
  EXPECT_TRUE(doc["nodes"][0]["threshold_raw"].is_null());
  EXPECT_EQ(doc["nodes"][0]["kind"], "leaf");
}

TEST(TreeJson, KeyOrderIsFixed) {
  const std::string text = export_tree_json(sample_tree(), {3, 1.5, 1.6, 7});
  const std::vector<std::string> keys = {"\"id\"", "\"kind\"", "\"feature\"", "\"threshold_normalized\"",
                                         "\"threshold_raw\"", "\"label\"", "\"count\"", "\"sigma\"", "\"ranges\"",
                                         "\"left\"", "\"right\""};
  std::size_t pos = 0;
  for (const auto& k : keys) {
    const auto at = text.find(k, pos);
    ASSERT_NE(at, std::string::npos) << k;
    pos = at;
  }
  const auto doc = nlohmann::json::parse(text);
  EXPECT_EQ(doc["meta"]["k"], 3);
  EXPECT_EQ(doc["meta"]["d_before"], 1.5);
  EXPECT_EQ(doc["meta"]["seed"], 7);
  EXPECT_TRUE(doc.contains("root"));
}

TEST(TreeJson, RoundTripsByteIdentically) {
  const auto tree = sample_tree();
  const TreeMeta meta{3, 29.6412345, 29.7321, 7};
  const std::string first = export_tree_json(tree, meta);
  const auto parsed = parse_tree_json(first);
  EXPECT_EQ(export_tree_json(parsed.tree, parsed.meta), first);
  EXPECT_EQ(render_tree_text(parsed.tree), render_tree_text(tree));
  // routing is preserved
  Matrix probe(1, 3);
  probe(0, 0) = 0.21;
  probe(0, 1) = 0.5;
  probe(0, 2) = 0.4;
  EXPECT_EQ(predict(parsed.tree, probe.row(0)), predict(tree, probe.row(0)));
}

TEST(TreeJson, SigmaMatchesExportedRanges) {
  const auto doc = nlohmann::json::parse(export_tree_json(sample_tree(), {3}));
  const auto& root_ranges = doc["nodes"][0]["ranges"];
  for (const auto& node : doc["nodes"]) {
    double sigma = 1.0;
    for (std::size_t j = 0; j < node["ranges"].size(); ++j) {
      const double w = node["ranges"][j]["max"].get<double>() - node["ranges"][j]["min"].get<double>();
      const double w0 = root_ranges[j]["max"].get<double>() - root_ranges[j]["min"].get<double>();
      sigma *= w / w0;
    }
    const double exported = node["sigma"].get<double>();
    // one unit in the 6th significant digit
    const double ulp6 = exported == 0.0 ? 1e-300 : std::pow(10.0, std::floor(std::log10(std::abs(exported))) - 5);
    EXPECT_LE(std::abs(exported - sigma), ulp6 + 1e-15) << node["id"];
  }
}

TEST(TreeJson, MalformedDocumentsRejected) {
  EXPECT_THROW(parse_tree_json("not json"), DataError);
  EXPECT_THROW(parse_tree_json("{\"nodes\": []}"), DataError);
}

TEST(TreeText, TwoLeaves) {
  Matrix x(4, 1);
  for (std::size_t i = 0; i < 4; ++i) x(i, 0) = static_cast<double>(i);
  const std::vector<int> labels = {0, 0, 1, 1};
  const auto text = render_tree_text(fit_tree(x, labels, 2));
  EXPECT_EQ(count(text, "\n"), 3u);
  EXPECT_NE(text.find("Σ=1.000"), std::string::npos);
  EXPECT_EQ(text.substr(0, 2), "f0");
  EXPECT_NE(text.find("f0 ≤ 1.5 (n=4, Σ=1.000)"), std::string::npos) << text;
  EXPECT_EQ(render_tree_text(fit_tree(x, labels, 2)), text);
}

TEST(TreeText, UnitsShownExceptUnitless) {
  const auto text = render_tree_text(sample_tree());
  EXPECT_NE(text.find(" PJ ("), std::string::npos) << text;
  EXPECT_EQ(text.find("unitless"), std::string::npos);
}

TEST(TreeDot, OneStatementPerNodeAndEdge) {
  const auto tree = sample_tree();
  const auto dot = export_tree_dot(tree);
  EXPECT_EQ(dot.rfind("digraph", 0), 0u);
  EXPECT_EQ(count(dot, "->"), tree.nodes.size() - 1);
}

std::string attr(const std::string& svg, const std::string& cls) {
  const std::regex re("<polygon class=\"" + cls + "\" points=\"([^\"]*)\"");
  std::smatch m;
  return std::regex_search(svg, m, re) ? m[1].str() : std::string("<missing>");
}

TEST(Radar, RootCoversEveryAxis) {
  const auto tree = sample_tree();
  const auto& root = tree.nodes[tree.root].summary;
  const auto svg = render_radar_svg(root, tree.features, root.ranges);
  EXPECT_EQ(count(svg, "lock-open"), 3u);
  EXPECT_NE(svg.find("Σ = 1.000"), std::string::npos);
  // outer polygon sits on the outermost grid ring
  EXPECT_NE(svg.find("<polygon points=\"" + attr(svg, "max") + "\""), std::string::npos);
  EXPECT_EQ(svg, render_radar_svg(root, tree.features, root.ranges));
}

TEST(Radar, SingleMemberBandCollapses) {
  Matrix v(3, 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) v(i, j) = static_cast<double>(i * j + i);
  const auto init = column_ranges(v);
  const std::vector<std::size_t> one = {1};
  const auto s = node_summary(v, one, init, {});
  const std::vector<OutputDescriptor> d = {{"a"}, {"b"}, {"c"}};
  const auto svg = render_radar_svg(s, d, init);
  EXPECT_EQ(attr(svg, "max"), attr(svg, "min"));
  EXPECT_EQ(count(svg, "lock-locked"), 3u);
}

TEST(Radar, FewerThanThreeOutputsFallsBackToBars) {
  Matrix v(2, 2);
  v(1, 0) = 1;
  v(1, 1) = 1;
  const auto init = column_ranges(v);
  const std::vector<std::size_t> all = {0, 1};
  const auto s = node_summary(v, all, init, {});
  const std::vector<OutputDescriptor> d = {{"a"}, {"b"}};
  const auto svg = render_radar_svg(s, d, init);
  EXPECT_EQ(count(svg, "class=\"band\""), 2u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(Charts, ElbowSinglePoint) {
  const std::vector<ElbowPoint> curve = {{3, 1.25, std::nullopt}};
  const auto svg = render_elbow_svg(curve);
  EXPECT_EQ(count(svg, "class=\"marker\""), 1u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(Charts, DiscoveryHasThreeSeries) {
  DiscoveryCurve c;
  for (std::size_t b = 2; b <= 4; ++b) {
    DiscoveryEntry e;
    e.max_leaves = b;
    e.interpretability = 1.0 / static_cast<double>(b);
    e.coverage = 0.9;
    e.cv_coverage = 0.85;
    c.entries.push_back(e);
  }
  const auto svg = render_discovery_svg(c);
  EXPECT_EQ(count(svg, "<g class=\"series\""), 3u);
  for (const char* name : {"interpretability", "coverage", "cv_coverage"}) {
    EXPECT_NE(svg.find(std::string("data-name=\"") + name + "\""), std::string::npos) << name;
  }
}

TEST(Charts, ScatterLegendPerLabel) {
  const std::vector<double> x = {0, 1, 2, 3}, y = {1, 0, 1, 0};
  const std::vector<int> labels = {0, 2, 1, 2};
  const auto svg = render_scatter_svg(x, y, labels, "a", "b");
  EXPECT_EQ(count(svg, "class=\"legend-entry\""), 3u);
}

TEST(Charts, PaletteIsColorBlindSafe) {
  EXPECT_STREQ(cluster_color(0), "#E69F00");
  EXPECT_STREQ(cluster_color(8), cluster_color(0));
  EXPECT_STRNE(cluster_color(-1), cluster_color(0));
}

TEST(Files, AtomicWriteCreatesParents) {
  testing::TempDir dir("files");
  const auto p = dir.path() / "a" / "b" / "c.txt";
  write_file_atomic(p, "hello\n");
  EXPECT_EQ(read_file(p), "hello\n");
  write_file_atomic(p, "again\n");
  EXPECT_EQ(read_file(p), "again\n");
  EXPECT_FALSE(std::filesystem::exists(p.string() + ".tmp"));
}

}  // namespace
}  // namespace storyline
