// Copyright (c) 2026 The SymQuant Authors. MIT license, see LICENSE.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "symquant/spec.hpp"

using namespace symquant;

namespace {

std::string bench_path(const std::string& name) {
  const char* dir = std::getenv("SYMQUANT_BENCH_DIR");
  REQUIRE(dir != nullptr);
  return std::string(dir) + "/" + name;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("toy consensus parses and typechecks") {
  ProtocolSpec spec = parse_spec(slurp(bench_path("toy_consensus.spec")));
  CHECK(spec.sorts.size() == 3);
  CHECK(spec.sorts[2].kind == SortKind::DependentMajority);
  CHECK(spec.sorts[2].base == spec.sort_index("node"));
  CHECK(spec.relation_index("vote") >= 0);
  CHECK(spec.relation_index("decision") >= 0);
  CHECK(spec.relations[spec.relation_index("didNotVote")].role ==
        RelRole::Definition);
  CHECK(spec.definitions.size() == 2);
  CHECK(spec.actions.size() == 2);
  REQUIRE(spec.init.has_value());
  REQUIRE(spec.safety.has_value());
  CHECK(typecheck(spec).empty());
}

TEST_CASE("print then reparse is stable") {
  ProtocolSpec spec = parse_spec(slurp(bench_path("toy_consensus.spec")));
  std::string once = print_spec(spec);
  ProtocolSpec again = parse_spec(once);
  CHECK(print_spec(again) == once);
  CHECK(typecheck(again).empty());
}

TEST_CASE("undeclared sort in a relation is a resolution error") {
  bool threw = false;
  try {
    parse_spec("(sort node)\n(relation r (node missing))\n");
  } catch (const ParseError& e) {
    threw = true;
    CHECK(std::string(e.what()).find("missing") != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("arity mismatch is rejected at parse time") {
  CHECK_THROWS_AS(parse_spec("(sort s)\n(relation r (s s))\n"
                             "(init (forall ((X s)) (r X)))\n"
                             "(safety (and))\n"),
                  ParseError);
}

TEST_CASE("unbound variable is rejected") {
  CHECK_THROWS_AS(parse_spec("(sort s)\n(relation r (s))\n(init (r X))\n"),
                  ParseError);
}

TEST_CASE("equality cannot mix a formula and a term") {
  CHECK_THROWS_AS(
      parse_spec("(sort s)\n(relation r (s))\n"
                 "(init (forall ((X s)) (= (r X) X)))\n"),
      ParseError);
}

TEST_CASE("boolean equality parses as iff") {
  ProtocolSpec spec = parse_spec(
      "(sort s)\n(relation a ())\n(relation b ())\n"
      "(init (= (a) (b)))\n(safety (and))\n");
  REQUIRE(spec.init.has_value());
  CHECK(spec.init->kind == FKind::Iff);
}

TEST_CASE("missing safety is a typecheck diagnostic") {
  ProtocolSpec spec = parse_spec("(sort s)\n(relation r (s))\n"
                                 "(init (forall ((X s)) (not (r X))))\n");
  auto diags = typecheck(spec);
  REQUIRE(!diags.empty());
  bool found = false;
  for (const auto& d : diags)
    found |= d.message.find("safety") != std::string::npos;
  CHECK(found);
}

TEST_CASE("primed relation outside its update is flagged") {
  ProtocolSpec spec = parse_spec(
      "(sort s)\n(relation r (s))\n(relation w (s))\n"
      "(init (forall ((X s)) (not (r X))))\n"
      "(action step ((x s)) :guard (and) :update ((r (forall ((X s)) (= (r' X) (w' X))))))\n"
      "(safety (and))\n");
  auto diags = typecheck(spec);
  bool found = false;
  for (const auto& d : diags)
    found |= d.message.find("outside its own update") != std::string::npos;
  CHECK(found);
}

TEST_CASE("axioms must be rigid") {
  ProtocolSpec spec = parse_spec(
      "(sort s)\n(relation r (s))\n"
      "(axiom (forall ((X s)) (r X)))\n"
      "(init (and))\n(safety (and))\n");
  auto diags = typecheck(spec);
  bool found = false;
  for (const auto& d : diags)
    found |= d.message.find("rigid") != std::string::npos;
  CHECK(found);
}

TEST_CASE("double update of one relation is flagged") {
  ProtocolSpec spec = parse_spec(
      "(sort s)\n(relation r (s))\n(init (and))\n"
      "(action step ((x s)) :guard (and) :update ((r (and)) (r (and))))\n"
      "(safety (and))\n");
  auto diags = typecheck(spec);
  bool found = false;
  for (const auto& d : diags)
    found |= d.message.find("twice") != std::string::npos;
  CHECK(found);
}

TEST_CASE("definitions referencing definitions stay acyclic") {
  ProtocolSpec spec = parse_spec(
      "(sort s)\n(relation r (s))\n"
      "(definition (one (x s)) (r x))\n"
      "(definition (two (x s)) (not (one x)))\n"
      "(init (and))\n(safety (and))\n");
  CHECK(typecheck(spec).empty());
}

TEST_CASE("duplicate sort declaration is rejected") {
  CHECK_THROWS_AS(parse_spec("(sort s)\n(sort s)\n"), ParseError);
}

TEST_CASE("member requires the base sort element") {
  CHECK_THROWS_AS(
      parse_spec("(sort a)\n(sort b)\n(dependent-sort q (majority a))\n"
                 "(init (forall ((X b) (Q q)) (member X Q)))\n"),
      ParseError);
}
