#include "catch_amalgamated.hpp"

#include "oracle/linear_scan.hpp"
#include "signgraph/fixture.hpp"
#include "support.hpp"

using namespace signgraph;

namespace {

std::size_t count_pair(const std::vector<SignPrototype>& signs, const std::string& plate, const std::string& bg) {
  return static_cast<std::size_t>(std::count_if(signs.begin(), signs.end(), [&](const SignPrototype& s) {
    return s.plate_shape.name == plate && s.background_color.name == bg;
  }));
}

}  // namespace

TEST_CASE("default fixture hits the target pair counts", "[fixture]") {
  auto f = generate_fixture(FixtureSpec{});
  CHECK(f.signs.size() == 845);
  CHECK(count_pair(f.signs, "rectangle", "white") == 355);
  CHECK(count_pair(f.signs, "diamond", "yellow") == 118);
  std::set<std::string> ids;
  for (const auto& s : f.signs) ids.insert(s.id);
  CHECK(ids.size() == f.signs.size());
  // The remainder is spread evenly: no other pair differs by more than one.
  std::map<std::pair<std::string, std::string>, std::size_t> rest;
  for (const auto& s : f.signs) {
    auto key = std::make_pair(s.plate_shape.name, s.background_color.name);
    if (key != std::make_pair(std::string("rectangle"), std::string("white")) &&
        key != std::make_pair(std::string("diamond"), std::string("yellow"))) {
      ++rest[key];
    }
  }
  REQUIRE_FALSE(rest.empty());
  auto [lo, hi] = std::minmax_element(rest.begin(), rest.end(),
                                      [](const auto& a, const auto& b) { return a.second < b.second; });
  CHECK(hi->second - lo->second <= 1);
}

TEST_CASE("every generated sign passes validation", "[fixture]") {
  auto f = generate_fixture(FixtureSpec{});
  for (const auto& s : f.signs) CHECK(parse_sign_line(render_sign_line(s), VocabularySet::defaults()) == s);
}

TEST_CASE("a single full target fills the catalogue", "[fixture]") {
  FixtureSpec spec;
  spec.total_signs = 10;
  spec.targets = {{"octagon", "red", 1.0}};
  auto f = generate_fixture(spec);
  REQUIRE(f.signs.size() == 10);
  CHECK(count_pair(f.signs, "octagon", "red") == 10);
}

TEST_CASE("bad distribution targets are rejected", "[fixture]") {
  FixtureSpec spec;
  spec.targets = {{"rectangle", "white", 0.7}, {"diamond", "yellow", 0.4}};
  CHECK_THROWS_AS(generate_fixture(spec), Error);
  spec.targets = {{"rectangle", "white", -0.1}};
  CHECK_THROWS_AS(generate_fixture(spec), Error);
  spec.targets = {{"rectangle", "pink", 0.1}};
  CHECK_THROWS_AS(generate_fixture(spec), Error);
  spec.targets = {{"rectangle", "white", 0.1}, {"rectangle", "white", 0.1}};
  CHECK_THROWS_AS(generate_fixture(spec), Error);
}

TEST_CASE("fixture output is byte-identical for a seed", "[fixture]") {
  auto a = generate_fixture(FixtureSpec{});
  auto b = generate_fixture(FixtureSpec{});
  CHECK(a.sign_document() == b.sign_document());
  CHECK(a.workload_document() == b.workload_document());
  FixtureSpec other;
  other.seed = FixtureSpec{}.seed + 1;
  CHECK(generate_fixture(other).sign_document() != a.sign_document());
}

TEST_CASE("default workload is calibrated", "[fixture]") {
  auto f = generate_fixture(FixtureSpec{});
  REQUIRE(f.workload.size() == 50);
  std::set<std::string> distinct;
  double total = 0;
  for (const auto& q : f.workload) {
    CHECK(q.clauses.size() >= 3);
    CHECK(q.clauses.size() <= 5);
    CHECK(q.clauses[0].key == AttributeKey::plate);
    CHECK(q.clauses[1].key == AttributeKey::bg);
    distinct.insert(render_query(q));
    const auto hits = oracle::linear_scan(f.signs, q);
    CHECK_FALSE(hits.empty());
    total += static_cast<double>(hits.size());
  }
  CHECK(distinct.size() == f.workload.size());
  const double mean = total / static_cast<double>(f.workload.size());
  CHECK(std::abs(mean - 8.92) <= 2.0);
  CHECK(100.0 * (1.0 - mean / 845.0) >= 97.0);

  std::istringstream in(f.workload_document());
  CHECK(parse_workload(in) == f.workload);
}

TEST_CASE("small catalogues get a shorter workload", "[fixture]") {
  FixtureSpec spec;
  spec.total_signs = 20;
  auto f = generate_fixture(spec);
  CHECK(f.signs.size() == 20);
  CHECK(f.workload.size() <= 50);
  for (const auto& q : f.workload) CHECK_FALSE(oracle::linear_scan(f.signs, q).empty());
}
