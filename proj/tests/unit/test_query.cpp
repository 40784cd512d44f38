#include "catch_amalgamated.hpp"

#include "oracle/linear_scan.hpp"
#include "oracle/random_clause.hpp"
#include "signgraph/detail/rng.hpp"
#include "signgraph/evaluate.hpp"
#include "signgraph/fixture.hpp"
#include "support.hpp"

using namespace signgraph;

namespace {

std::size_t error_offset(std::string_view text) {
  try {
    parse_query(text);
  } catch (const PositionedError& e) {
    CHECK(e.kind() == ErrorKind::syntax);
    return e.position();
  }
  FAIL("query parsed: " << text);
  return 0;
}

}  // namespace

TEST_CASE("query parser accepts the documented grammar", "[query]") {
  auto q = parse_query("plate=diamond AND bg=Yellow and text~\"Speed\" AND text=\"SPEED LIMIT 30\"");
  REQUIRE(q.clauses.size() == 4);
  CHECK(q.clauses[0] == Clause{AttributeKey::plate, ClauseOp::equals, "diamond"});
  CHECK(q.clauses[1].value == "yellow");
  CHECK(q.clauses[2] == Clause{AttributeKey::text, ClauseOp::contains, "speed"});
  CHECK(q.clauses[3].value == "speed limit 30");
  CHECK(parse_query("  plate = octagon  ").clauses.size() == 1);
  CHECK(parse_query("text=\"say \\\"hi\\\"\"").clauses[0].value == "say \"hi\"");
}

TEST_CASE("query syntax errors report the byte offset", "[query]") {
  CHECK(error_offset("") == 0);
  CHECK(error_offset("plate") == 5);
  CHECK(error_offset("plate=") == 6);
  CHECK(error_offset("colour=red") == 0);
  CHECK(error_offset("plate=octagon OR bg=red") == 14);
  CHECK(error_offset("plate=octagon AND") == 17);
  CHECK(error_offset("plate~octagon") == 5);
  CHECK(error_offset("text~speed") == 5);
  CHECK(error_offset("text=\"open") == 5);
  CHECK(error_offset("plate=octagon AND bg=red AND ") == 29);
}

TEST_CASE("render_query round trips through the parser", "[query]") {
  detail::SplitMix64 rng(5);
  FixtureSpec spec;
  spec.total_signs = 100;
  auto signs = generate_signs(spec);
  for (int i = 0; i < 500; ++i) {
    AttributeQuery q;
    auto n = 1 + rng.below(5);
    for (std::size_t j = 0; j < n; ++j) q.clauses.push_back(oracle::random_clause(rng, signs));
    CHECK(parse_query(render_query(q)) == q);
  }
  AttributeQuery odd{{{AttributeKey::text, ClauseOp::equals, "a \"quoted\" \\ value"},
                      {AttributeKey::text, ClauseOp::contains, ""}}};
  CHECK(parse_query(render_query(odd)) == odd);
}

TEST_CASE("indexed evaluation equals a linear scan on random graphs", "[query]") {
  detail::SplitMix64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    FixtureSpec spec;
    spec.total_signs = 1 + rng.below(200);
    spec.seed = rng.next();
    spec.targets = {};
    auto signs = generate_signs(spec);
    KnowledgeGraph kg;
    for (const auto& s : signs) kg.insert_sign(s);
    AttributeQuery q;
    auto n = 1 + rng.below(5);
    for (std::size_t j = 0; j < n; ++j) q.clauses.push_back(oracle::random_clause(rng, signs));
    CHECK(evaluate(q, kg).sign_ids == oracle::linear_scan(signs, q));
  }
}

TEST_CASE("evaluation laws", "[query]") {
  auto kg = testsupport::us_graph();
  auto signs = testsupport::read_signs(testsupport::fixtures_dir() / "us" / "signs.jsonl");
  detail::SplitMix64 rng(77);
  for (int i = 0; i < 200; ++i) {
    AttributeQuery a{{oracle::random_clause(rng, signs)}};
    AttributeQuery b{{oracle::random_clause(rng, signs), oracle::random_clause(rng, signs)}};
    AttributeQuery ab = a;
    ab.clauses.insert(ab.clauses.end(), b.clauses.begin(), b.clauses.end());
    AttributeQuery ba = b;
    ba.clauses.insert(ba.clauses.end(), a.clauses.begin(), a.clauses.end());
    auto rab = evaluate(ab, kg).sign_ids;
    CHECK(rab == evaluate(ba, kg).sign_ids);  // order does not matter
    auto ra = evaluate(a, kg).sign_ids;
    CHECK(std::includes(ra.begin(), ra.end(), rab.begin(), rab.end()));  // adding clauses narrows
    CHECK(std::is_sorted(rab.begin(), rab.end()));
    AttributeQuery twice = a;
    twice.clauses.push_back(a.clauses[0]);
    CHECK(evaluate(twice, kg).sign_ids == ra);  // repeated clause changes nothing
  }
  CHECK(evaluate(AttributeQuery{}, kg).empty());
  CHECK(evaluate(parse_query("plate=octagon AND bg=red"), kg).sign_ids == std::vector<std::string>{"R1-1"});
  CHECK(evaluate(parse_query("plate=diamond AND bg=yellow"), kg).size() == 10);
  CHECK(evaluate(parse_query("plate=hexagon"), kg).empty());
}

TEST_CASE("search-space statistics follow their definitions", "[query]") {
  auto r = summarize_sizes({1, 5, 6, 10, 11, 25, 26, 0}, 100);
  CHECK(r.histogram == std::array<std::size_t, 6>{2, 2, 1, 0, 1, 1});
  CHECK(r.empty_queries == 1);
  CHECK(r.mean == Catch::Approx(84.0 / 8));
  double ss = 0;
  for (double s : {1, 5, 6, 10, 11, 25, 26, 0}) ss += (s - 10.5) * (s - 10.5);
  CHECK(r.stdev == Catch::Approx(std::sqrt(ss / 7)));
  CHECK(r.reduction_percent == Catch::Approx(100.0 * (1 - 10.5 / 100)));
  CHECK(summarize_sizes({4}, 10).stdev == 0.0);
  CHECK_THROWS_AS(summarize_sizes({}, 10), Error);
}

TEST_CASE("workload files skip comments and report bad lines", "[query]") {
  std::istringstream ok("# header\n\nplate=octagon AND bg=red\n  plate=diamond\n");
  CHECK(parse_workload(ok).size() == 2);
  std::istringstream bad("plate=octagon\nplate=\n");
  try {
    parse_workload(bad, "w.txt");
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::syntax);
    CHECK(std::string(e.what()).rfind("w.txt:2: offset 6:", 0) == 0);
  }
}
