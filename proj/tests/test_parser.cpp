#include <random>

#include "doctest.h"
#include "ooro/parser.hpp"
#include "support.hpp"

using namespace ooro;

namespace {

Scene clock_building_scene() {
  Scene s = scene_from_display_names({"clock 0", "clock 1", "building 0"});
  s.ground_truth = set_occludes(set_occludes(relations_new(3), 0, 2), 1, 2);
  return s;
}

}  // namespace

TEST_CASE("normalize_label") {
  CHECK(normalize_label("Object Bottle 1.") == "bottle 1");
  CHECK(normalize_label("  CLOCK 0 ") == "clock 0");
  CHECK(normalize_label("**Traffic   Light 2**") == "traffic light 2");
  CHECK(normalize_label("object 3") == "object 3");

  const auto counts = category_counts(clock_building_scene());
  CHECK(normalize_label("building", &counts) == "building 0");
  CHECK(normalize_label("clock", &counts) == "clock");
}

TEST_CASE("parse_response on the clock/building response") {
  const Scene s = clock_building_scene();
  auto [r, report] = parse_response("clock 0 occludes building 0\nclock 1 occludes building 0", s);
  CHECK(r == s.ground_truth);
  CHECK(to_signed(r) == (SignedOrderMatrix(3, 3) << 0, 0, 1, 0, 0, 1, -1, -1, 0).finished());
  CHECK_FALSE(report.all_zero);
  CHECK(report.statements.size() == 2);
  CHECK(report.unmatched_labels.empty());

  const auto fixture_text = testing::slurp(testing::fixture("clock_building_response.txt"));
  auto [r2, report2] = parse_response(fixture_text, s);
  CHECK(r2 == s.ground_truth);
  REQUIRE(report2.ordered_list);
  CHECK(*report2.ordered_list == std::vector<std::size_t>{0, 1, 2});
  CHECK_FALSE(report2.sequence_mismatch);
  CHECK(report2.ignored_lines == 0);
}

TEST_CASE("parse_response without statements is all-zero") {
  const Scene s = clock_building_scene();
  for (const char* text : {"", "I cannot determine the occlusion order.", "0. clock 0\n1. building 0\n"}) {
    auto [r, report] = parse_response(text, s);
    CHECK(is_all_zero(r));
    CHECK(report.all_zero);
  }
}

TEST_CASE("parse_response reports labels outside the scene") {
  const Scene s = scene_from_display_names({"vehicle 0", "person 0"});
  auto [r, report] = parse_response("automobile 0 occludes person 0\nAutomobile 0 occludes vehicle 0", s);
  CHECK(is_all_zero(r));
  CHECK(report.unmatched_labels == std::vector<std::string>{"automobile 0"});
  REQUIRE(report.statements.size() == 2);
  CHECK_FALSE(report.statements[0].resolved);
}

TEST_CASE("parse_response formatting tolerance") {
  const Scene s = scene_from_display_names({"bottle 0", "bottle 1", "person 0"});
  const std::string text =
      "Here is the list:\n"
      "0. Bottle 1\n"
      "- Object Bottle 0 OCCLUDES Object Bottle 1.\n"
      "* person occludes bottle 0\n"
      "  2) bottle 1 occludes person 0  \n"
      "bottle 0 occludes bottle 0\n"
      "bottles are near the person\n";
  auto [r, report] = parse_response(text, s);
  CHECK(r.occludes(0, 1));
  CHECK(r.occludes(2, 0));
  CHECK(r.occludes(1, 2));
  CHECK(r.adjacency().count() == 3);
  CHECK(report.sequence_mismatch);
  // The preamble, the self statement and the free-text line.
  CHECK(report.ignored_lines == 3);
  CHECK(report.unmatched_labels.empty());
  CHECK(parse_report_to_json(report)["all_zero"] == false);
}

TEST_CASE("'occludes' must be a whole word") {
  const Scene s = scene_from_display_names({"bottle 0", "person 0"});
  auto [r, report] = parse_response("bottle 0 preoccludes person 0", s);
  CHECK(is_all_zero(r));
  CHECK(report.statements.empty());
  CHECK(report.ignored_lines == 1);
}

TEST_CASE("relations_to_statements") {
  const Scene s = clock_building_scene();
  CHECK(relations_to_statements(s.ground_truth, category_list(s)) ==
        "clock 0 occludes building 0\nclock 1 occludes building 0\n");
  CHECK(relations_to_statements(relations_new(3), category_list(s)).empty());
  const auto mutual = set_occludes(set_occludes(relations_new(3), 0, 1), 1, 0);
  CHECK(relations_to_statements(mutual, category_list(s)) ==
        "clock 0 occludes clock 1\nclock 1 occludes clock 0\n");
}

TEST_CASE("statements round trip through the parser") {
  std::mt19937 rng(29);
  std::uniform_int_distribution<std::size_t> size(0, 8);
  for (int trial = 0; trial < 1000; ++trial) {
    const Scene s = testing::random_label_scene(rng, size(rng));
    const auto r = testing::random_relations(rng, s.size(), 0.3);
    auto [back, report] = parse_response(relations_to_statements(r, category_list(s)), s);
    REQUIRE(back == r);
    REQUIRE(report.unmatched_labels.empty());
    REQUIRE(report.all_zero == is_all_zero(r));
    for (const auto& st : report.statements) REQUIRE(st.resolved);
  }
}
