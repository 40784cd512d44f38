#include "catch_amalgamated.hpp"

#include "signgraph/alignment.hpp"
#include "signgraph/evaluate.hpp"
#include "signgraph/fixture.hpp"
#include "signgraph/snapshot.hpp"
#include "support.hpp"

using namespace signgraph;
using testsupport::fixtures_dir;

namespace {

AlignmentRuleSet shipped_rules() { return AlignmentRuleSet::load(fixtures_dir() / "alignment.rules"); }

KnowledgeGraph us_and_de() {
  return testsupport::load_graph({fixtures_dir() / "us" / "signs.jsonl", fixtures_dir() / "de" / "signs.jsonl"});
}

std::set<std::string> objects_of(const KnowledgeGraph& kg, const std::string& subject, std::string_view pred) {
  std::set<std::string> out;
  for (const auto& o : kg.objects(subject, pred)) out.insert(o.text());
  return out;
}

}  // namespace

TEST_CASE("shipped rules parse", "[alignment]") {
  auto rules = shipped_rules();
  CHECK(rules.hierarchy.edges().size() == 6);
  CHECK(rules.category_rules.size() == 11);
  CHECK(rules.text_rules.size() == 8);
  CHECK(rules.manual_links.size() == 4);
}

TEST_CASE("SPEED LIMIT 30 derives text, number and speed category", "[alignment]") {
  auto kg = testsupport::us_graph();
  apply_alignment(kg, shipped_rules());
  CHECK(objects_of(kg, "R2-1-30", predicates::text).count("SPEED LIMIT") == 1);
  CHECK(objects_of(kg, "R2-1-30", predicates::text_category).count("speed") == 1);

  const auto node = "R2-1-30#rule-text[SPEED LIMIT 30]";
  auto numbers = kg.objects(node, predicates::numeric_value);
  REQUIRE(numbers.size() == 1);
  CHECK(numbers[0].is_number());
  CHECK(numbers[0].as_number() == 30.0);
  CHECK(objects_of(kg, node, predicates::unit) == std::set<std::string>{"mph"});
  CHECK(objects_of(kg, node, predicates::raw_text) == std::set<std::string>{"SPEED LIMIT"});
  CHECK(kg.provenance(make_fact("R2-1-30", predicates::text, FactObject::literal("SPEED LIMIT"))) ==
        Provenance::derived_by_rule);

  auto hits = evaluate(parse_query("text=\"speed limit\" AND text_cat=speed"), kg);
  CHECK(std::find(hits.sign_ids.begin(), hits.sign_ids.end(), "R2-1-30") != hits.sign_ids.end());
}

TEST_CASE("text patterns match whole strings only", "[alignment]") {
  auto p = TextPattern::parse("SPEED LIMIT {number}");
  auto m = p.match("speed  limit 45");
  REQUIRE(m);
  CHECK(m->number == 45.0);
  CHECK_FALSE(p.match("SPEED LIMIT"));
  CHECK_FALSE(p.match("SPEED LIMIT 30 AHEAD"));
  CHECK_FALSE(p.match("MINIMUM SPEED LIMIT 30"));
  auto t = TextPattern::parse("{time-range}");
  CHECK(t.match("7 AM - 9 AM"));
  CHECK(t.match("8:30 AM - 4 PM"));
  CHECK_FALSE(t.match("SCHOOL"));
  CHECK_THROWS_AS(TextPattern::parse("{colour}"), Error);
}

TEST_CASE("icon color lifts to foreground color and has-color", "[alignment]") {
  auto kg = testsupport::us_graph();
  REQUIRE(kg.add_fact(make_fact("W11-2", predicates::icon_color, FactObject::entity("black")),
                      Provenance::ingested));
  apply_alignment(kg, shipped_rules());
  CHECK(kg.contains(make_fact("W11-2", predicates::foreground_color, FactObject::entity("black"))));
  CHECK(kg.contains(make_fact("W11-2", predicates::color, FactObject::entity("black"))));
  CHECK(kg.contains(make_fact("W11-2", predicates::color, FactObject::entity("yellow"))));
}

TEST_CASE("category rules and manual links", "[alignment]") {
  auto kg = testsupport::us_graph();
  apply_alignment(kg, shipped_rules());
  CHECK(objects_of(kg, "R1-1", predicates::category).count("regulatory") == 1);
  CHECK(objects_of(kg, "W1-1", predicates::category).count("warning") == 1);
  CHECK(kg.contains(make_fact("R1-1", predicates::equivalent_class, FactObject::entity("gtsrb:14"))));
  CHECK(kg.provenance(make_fact("R1-1", predicates::equivalent_class, FactObject::entity("gtsrb:14"))) ==
        Provenance::manual_alignment);
  CHECK(kg.properties().knows("gtsrb:anything"));
  // diamond/yellow and pennant/yellow
  CHECK(evaluate(parse_query("category=warning"), kg).size() ==
        evaluate(parse_query("plate=diamond AND bg=yellow"), kg).size() + evaluate(parse_query("plate=pennant AND bg=yellow"), kg).size());
}

TEST_CASE("alignment is idempotent and never removes facts", "[alignment]") {
  SECTION("shipped catalogue") {
    auto kg = us_and_de();
    const auto before = kg.facts();
    auto first = apply_alignment(kg, shipped_rules());
    CHECK(first > 0);
    for (const auto& [fact, prov] : before) CHECK(kg.provenance(fact) == prov);
    auto snapshot = kg.facts();
    CHECK(apply_alignment(kg, shipped_rules()) == 0);
    CHECK(kg.facts() == snapshot);
  }
  SECTION("generated fixture") {
    auto fixture = generate_fixture(FixtureSpec{});
    KnowledgeGraph kg;
    for (const auto& s : fixture.signs) kg.insert_sign(s);
    CHECK(apply_alignment(kg, shipped_rules()) > 0);
    CHECK(apply_alignment(kg, shipped_rules()) == 0);
  }
}

TEST_CASE("a cyclic hierarchy is rejected before any change", "[alignment]") {
  auto rules = AlignmentRuleSet::parse("[hierarchy]\na -> b\nb -> c\nc -> a\n");
  auto kg = testsupport::us_graph();
  const auto before = kg.facts();
  try {
    apply_alignment(kg, rules);
    FAIL("expected a cycle error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::validation);
    CHECK(std::string(e.what()).find("cycle") != std::string::npos);
  }
  CHECK(kg.facts() == before);
}

TEST_CASE("rule syntax errors carry the line", "[alignment]") {
  try {
    AlignmentRuleSet::parse("[category]\noctagon red regulatory\n");
    FAIL("expected a syntax error");
  } catch (const PositionedError& e) {
    CHECK(e.kind() == ErrorKind::syntax);
    CHECK(e.position() == 2);
  }
  CHECK_THROWS_AS(AlignmentRuleSet::parse("[category]\noctagon pink -> regulatory\n"), Error);
  CHECK_THROWS_AS(AlignmentRuleSet::parse("[nonsense]\n"), PositionedError);
}

TEST_CASE("domain subgraphs partition the graph by region", "[subgraph]") {
  auto kg = us_and_de();
  apply_alignment(kg, shipped_rules());
  auto us = domain_subgraph(kg, "us");
  auto de = domain_subgraph(kg, " DE ");
  CHECK(us.size() == 42);
  CHECK(de.size() == 6);
  CHECK(us.size() + de.size() == kg.size());
  for (const auto& [id, _] : us.signs()) CHECK_FALSE(de.find_sign(id));

  std::size_t covered = 0;
  for (const auto& [fact, prov] : kg.facts()) {
    const bool in_us = us.contains(fact), in_de = de.contains(fact);
    CHECK_FALSE((in_us && in_de));
    if (in_us || in_de) {
      ++covered;
      CHECK((in_us ? us : de).provenance(fact) == prov);
    }
  }
  // Only facts whose subject is not a sign (feature-level links) stay out.
  for (const auto& [fact, _] : kg.facts()) {
    if (!us.contains(fact) && !de.contains(fact)) CHECK_FALSE(kg.find_sign(std::string(owner_of(fact.subject))));
  }
  CHECK(covered > 0);

  CHECK(evaluate(parse_query("plate=octagon AND bg=red"), us).sign_ids == std::vector<std::string>{"R1-1"});
  CHECK(evaluate(parse_query("plate=octagon AND bg=red"), de).sign_ids == std::vector<std::string>{"DE-206"});
  CHECK(domain_subgraph(kg, "FR").empty());
}

TEST_CASE("snapshot round trip preserves every fact and provenance", "[snapshot]") {
  auto kg = us_and_de();
  apply_alignment(kg, shipped_rules());
  auto bytes = snapshot_bytes(kg);
  auto back = load_snapshot_bytes(bytes);
  CHECK(back == kg);
  CHECK(back.facts() == kg.facts());
  CHECK(snapshot_bytes(back) == bytes);
  CHECK(evaluate(parse_query("text_cat=speed"), back) == evaluate(parse_query("text_cat=speed"), kg));
}

TEST_CASE("snapshot bytes do not depend on insertion order", "[snapshot]") {
  auto signs = testsupport::read_signs(fixtures_dir() / "us" / "signs.jsonl");
  KnowledgeGraph a, b;
  for (const auto& s : signs) a.insert_sign(s);
  std::reverse(signs.begin(), signs.end());
  for (const auto& s : signs) b.insert_sign(s);
  CHECK(snapshot_bytes(a) == snapshot_bytes(b));
}

TEST_CASE("snapshot files round trip on disk", "[snapshot]") {
  testsupport::TempDir dir;
  auto kg = testsupport::us_graph();
  save_snapshot(kg, dir.path() / "kg.rskg");
  CHECK(load_snapshot(dir.path() / "kg.rskg") == kg);
  CHECK_THROWS_AS(load_snapshot(dir.path() / "missing.rskg"), Error);
}

TEST_CASE("damaged snapshots are rejected with an offset", "[snapshot]") {
  const auto bytes = snapshot_bytes(testsupport::us_graph());
  SECTION("every truncation fails") {
    for (std::size_t n = 0; n < bytes.size(); n += std::max<std::size_t>(1, bytes.size() / 97)) {
      CHECK_THROWS_AS(load_snapshot_bytes(std::string_view(bytes).substr(0, n)), PositionedError);
    }
    CHECK_THROWS_AS(load_snapshot_bytes(std::string_view(bytes).substr(0, bytes.size() - 1)), PositionedError);
  }
  SECTION("bad magic") {
    auto bad = bytes;
    bad[0] = 'X';
    try {
      load_snapshot_bytes(bad);
      FAIL("expected failure");
    } catch (const PositionedError& e) {
      CHECK(e.kind() == ErrorKind::format);
      CHECK(e.position() == 0);
    }
  }
  SECTION("bad version") {
    auto bad = bytes;
    bad[4] = 0x02;
    CHECK_THROWS_AS(load_snapshot_bytes(bad), PositionedError);
  }
  SECTION("trailing bytes") {
    CHECK_THROWS_AS(load_snapshot_bytes(bytes + "x"), PositionedError);
  }
}

TEST_CASE("objects() returns entity, literal and number objects alike", "[ingest]") {
  auto kg = testsupport::us_graph();
  auto plate = kg.objects("R1-1", predicates::plate_shape);
  REQUIRE(plate.size() == 1);
  CHECK(plate[0] == FactObject::entity("octagon"));
  CHECK(kg.objects("R1-1", predicates::text) == std::vector<FactObject>{FactObject::literal("STOP")});
  CHECK(kg.objects("R2-1-30#text0", predicates::numeric_value).size() == 1);
}
