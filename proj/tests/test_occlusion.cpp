#include <random>

#include "doctest.h"
#include "ooro/error.hpp"
#include "ooro/occlusion.hpp"
#include "support.hpp"

using namespace ooro;

namespace {

SignedOrderMatrix matrix(std::initializer_list<std::initializer_list<int>> rows) {
  SignedOrderMatrix m(Eigen::Index(rows.size()), Eigen::Index(rows.size()));
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (const int v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an ooro::Error");
  return ErrorKind::Usage;
}

}  // namespace

TEST_CASE("relations_new gives an empty relation") {
  for (const std::size_t n : {0u, 1u, 3u}) {
    const auto r = relations_new(n);
    CHECK(r.n() == n);
    CHECK(is_all_zero(r));
  }
}

TEST_CASE("set_occludes") {
  auto r = set_occludes(relations_new(2), 0, 1);
  CHECK(r.occludes(0, 1));
  CHECK_FALSE(r.occludes(1, 0));

  CHECK(kind_of([&] { r.set_occludes(1, 1); }) == ErrorKind::SelfOcclusion);
  CHECK(kind_of([&] { r.set_occludes(0, 2); }) == ErrorKind::IndexOutOfRange);

  r.set_occludes(1, 0);
  CHECK(r.occludes(0, 1));
  CHECK(r.occludes(1, 0));

  SUBCASE("idempotent") {
    const auto once = set_occludes(relations_new(3), 2, 0);
    CHECK(set_occludes(once, 2, 0) == once);
  }
}

TEST_CASE("to_signed on the clock/building ground truth") {
  auto r = relations_new(3);
  r.set_occludes(0, 2);
  r.set_occludes(1, 2);
  CHECK(to_signed(r) == matrix({{0, 0, 1}, {0, 0, 1}, {-1, -1, 0}}));
  CHECK(to_signed(relations_new(2)) == matrix({{0, 0}, {0, 0}}));

  auto mutual = set_occludes(set_occludes(relations_new(2), 0, 1), 1, 0);
  CHECK(to_signed(mutual) == matrix({{0, 2}, {2, 0}}));
}

TEST_CASE("from_signed") {
  const auto r = from_signed(matrix({{0, 0, 1}, {0, 0, 1}, {-1, -1, 0}}));
  CHECK(r.occludes(0, 2));
  CHECK(r.occludes(1, 2));
  CHECK(r.adjacency().count() == 2);

  CHECK(kind_of([] { from_signed(matrix({{0, 1}, {1, 0}})); }) == ErrorKind::InconsistentMatrix);
  CHECK(kind_of([] { from_signed(matrix({{1, 0}, {0, 0}})); }) == ErrorKind::InconsistentMatrix);
  CHECK(kind_of([] { from_signed(matrix({{0, 2}, {-1, 0}})); }) == ErrorKind::InconsistentMatrix);
  CHECK(is_all_zero(from_signed(matrix({{0, 0}, {0, 0}}))));
}

TEST_CASE("is_all_zero") {
  CHECK(is_all_zero(relations_new(0)));
  CHECK(is_all_zero(relations_new(4)));
  CHECK_FALSE(is_all_zero(set_occludes(relations_new(4), 3, 1)));
}

TEST_CASE("signed round trip and encoding invariants on random relations") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<std::size_t> size(0, 8);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto r = testing::random_relations(rng, size(rng), 0.35);
    const auto m = to_signed(r);
    REQUIRE(from_signed(m) == r);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      CHECK(m(i, i) == 0);
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        CHECK((m(i, j) == 1) == (m(j, i) == -1));
        CHECK((m(i, j) == 2) == (m(j, i) == 2));
      }
    }
  }
}

TEST_CASE("signed matrix JSON form") {
  const auto m = matrix({{0, 0, 1}, {0, 0, 1}, {-1, -1, 0}});
  const auto j = signed_to_json(m);
  CHECK(j.dump() == R"({"m":[[0,0,1],[0,0,1],[-1,-1,0]],"n":3})");
  CHECK(signed_from_json(j) == m);
  CHECK_THROWS_AS(signed_from_json(nlohmann::json::parse(R"({"n":2,"m":[[0]]})")), Error);
}

TEST_CASE("subset keeps relations among retained instances") {
  auto r = relations_new(3);
  r.set_occludes(0, 2);
  r.set_occludes(2, 1);
  const auto s = r.subset({0, 2});
  CHECK(s.n() == 2);
  CHECK(s.occludes(0, 1));
  CHECK(s.adjacency().count() == 1);
}
