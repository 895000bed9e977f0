#include <numeric>
#include <random>

#include "doctest.h"
#include "ooro/error.hpp"
#include "ooro/metrics.hpp"
#include "support.hpp"

using namespace ooro;

namespace {

OcclusionRelations clock_building_gt() { return set_occludes(set_occludes(relations_new(3), 0, 2), 1, 2); }

SceneEvaluation eval(std::size_t correct, std::size_t total, bool all_zero = false) {
  SceneEvaluation e;
  e.correct_pairs = correct;
  e.total_pairs = total;
  e.all_zero_prediction = all_zero;
  return e;
}

OcclusionRelations permuted(const OcclusionRelations& r, const std::vector<std::size_t>& perm) {
  OcclusionRelations out(r.n());
  for (std::size_t i = 0; i < r.n(); ++i)
    for (std::size_t j = 0; j < r.n(); ++j)
      if (r.occludes(i, j)) out.set_occludes(perm[i], perm[j]);
  return out;
}

}  // namespace

TEST_CASE("scene_accuracy examples") {
  const auto gt = clock_building_gt();
  CHECK(scene_accuracy(gt, gt, PairMode::All).accuracy() == 1.0);

  const auto pred = set_occludes(relations_new(3), 1, 2);
  const auto e = scene_accuracy(pred, gt, PairMode::All);
  CHECK(e.correct_pairs == 5);
  CHECK(e.total_pairs == 6);
  CHECK(e.accuracy() == doctest::Approx(5.0 / 6.0));

  const auto g = scene_accuracy(pred, gt, PairMode::GtOccluded);
  CHECK(g.total_pairs == 4);
  CHECK(g.correct_pairs == 3);

  const auto bad = scene_accuracy(relations_new(6), gt, PairMode::All, 2);
  CHECK_FALSE(bad.comparable);
  CHECK(bad.image_id == 2);
}

TEST_CASE("aggregate") {
  const auto r = aggregate({eval(5, 6), eval(6, 6)}, "m", "d", PairMode::All);
  CHECK(r.micro_accuracy == doctest::Approx(11.0 / 12.0));
  CHECK(r.macro_accuracy == doctest::Approx((5.0 / 6.0 + 1.0) / 2));

  SceneEvaluation incomparable = eval(0, 0);
  incomparable.comparable = false;
  CHECK_THROWS_AS(aggregate({incomparable, incomparable}, "m", "d", PairMode::All), Error);
  CHECK_THROWS_AS(aggregate({}, "m", "d", PairMode::All), Error);

  auto mixed = aggregate({eval(5, 6), incomparable}, "m", "d", PairMode::All);
  CHECK(mixed.incomparable_count == 1);
  CHECK(mixed.micro_accuracy == doctest::Approx(5.0 / 6.0));
}

TEST_CASE("all_zero_rate") {
  std::vector<SceneEvaluation> v(10, eval(1, 2));
  CHECK(all_zero_rate(v) == 0.0);
  v.resize(13, eval(1, 2));
  v[4].all_zero_prediction = true;
  CHECK(all_zero_rate(v) == doctest::Approx(0.0769).epsilon(0.001));
  std::vector<SceneEvaluation> twenty(20, eval(1, 2));
  twenty[7].all_zero_prediction = true;
  CHECK(aggregate(twenty, "m", "d", PairMode::All).all_zero_rate == doctest::Approx(0.05));
}

TEST_CASE("scene_accuracy equals brute-force enumeration") {
  std::mt19937 rng(31);
  std::uniform_int_distribution<std::size_t> size(0, 5);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = size(rng);
    const auto pred = testing::random_relations(rng, n, 0.3);
    const auto gt = testing::random_relations(rng, n, 0.3);
    for (const auto mode : {PairMode::All, PairMode::GtOccluded}) {
      const auto e = scene_accuracy(pred, gt, mode);
      const auto [correct, total] = testing::brute_force_accuracy(pred, gt, mode);
      REQUIRE(e.correct_pairs == correct);
      REQUIRE(e.total_pairs == total);
      REQUIRE(e.correct_pairs <= e.total_pairs);
      if (mode == PairMode::All) REQUIRE(e.total_pairs == n * (n ? n - 1 : 0));
      REQUIRE(e.all_zero_prediction == is_all_zero(pred));
    }
  }
}

TEST_CASE("accuracy is symmetric in 'all' mode and permutation invariant") {
  std::mt19937 rng(37);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + trial % 6;
    const auto a = testing::random_relations(rng, n), b = testing::random_relations(rng, n);
    CHECK(scene_accuracy(a, b, PairMode::All).correct_pairs ==
          scene_accuracy(b, a, PairMode::All).correct_pairs);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (const auto mode : {PairMode::All, PairMode::GtOccluded}) {
      const auto e = scene_accuracy(a, b, mode);
      const auto p = scene_accuracy(permuted(a, perm), permuted(b, perm), mode);
      CHECK(e.correct_pairs == p.correct_pairs);
      CHECK(e.total_pairs == p.total_pairs);
    }
  }
}

TEST_CASE("report serialization") {
  auto r = aggregate({eval(5, 6), eval(6, 6, true)}, "area", "fixture", PairMode::GtOccluded);
  CHECK(report_csv_header() == "method,dataset,pair_mode,micro,macro,all_zero_rate,incomparable");
  CHECK(report_csv_row(r) == "area,fixture,gt-occluded,0.916667,0.916667,0.500000,0");
  const auto j = report_to_json(r);
  CHECK(j["pair_mode"] == "gt-occluded");
  CHECK(j["per_scene"].size() == 2);
  CHECK(pair_mode_from_string("all") == PairMode::All);
  CHECK_FALSE(pair_mode_from_string("pairs"));
}
