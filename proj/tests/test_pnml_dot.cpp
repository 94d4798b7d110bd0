#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "careflow/pnml.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace careflow;

namespace {

PetriNet parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse_pnml(in);
}

PetriNet load_fixture() {
  std::ifstream in(testing::fixture("fig5_net.pnml"));
  REQUIRE(in);
  return parse_pnml(in);
}

}  // namespace

TEST_CASE("PNML parse/serialize reaches a fixpoint on random nets") {
  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    const auto net = testing::random_net(rng);
    const auto text = to_pnml(net);
    const auto back = parse_text(text);
    CHECK(back == net);
    CHECK(to_pnml(back) == text);
  }
}

TEST_CASE("PNML keeps hidden transitions, weights, marking, source and sink") {
  PetriNet net;
  net.add_place("a");
  net.add_place("b");
  net.add_transition("t1", "go & stop");
  net.add_transition("t2");
  net.add_arc("a", "t1", 3);
  net.add_arc("t1", "b");
  net.set_initial_tokens("a", 4);
  net.set_source("a");
  net.set_sink("b");
  const auto back = parse_text(to_pnml(net));
  CHECK(back == net);
  CHECK(back.transitions()[1].hidden());
  CHECK(back.transitions()[0].label == "go & stop");
  CHECK(back.arcs()[0].weight == 3);
  CHECK(back.initial_marking()[0] == 4);
}

TEST_CASE("foreign PNML: pages, ProM invisible marker, inferred source and sink") {
  const std::string text = R"(<?xml version="1.0"?>
<pnml><net id="n" type="http://www.pnml.org/version-2009/grammar/ptnet">
  <page id="pg"><page id="inner">
    <place id="i"><initialMarking><text>1</text></initialMarking></place>
    <place id="o"/>
  </page>
  <transition id="x"><name><text>X</text></name></transition>
  <transition id="h"><name><text>tau</text></name>
    <toolspecific tool="ProM" version="6.4" activity="$invisible$"/></transition>
  <arc id="a1" source="i" target="x"/>
  <arc id="a2" source="x" target="o"><inscription><text>2</text></inscription></arc>
  </page>
</net></pnml>)";
  const auto net = parse_text(text);
  CHECK(net.place_count() == 2);
  CHECK(net.transitions()[0].label == "X");
  CHECK(net.transitions()[1].hidden());
  CHECK(net.source() == net.find_place("i"));
  CHECK(net.sink() == net.find_place("o"));
  CHECK(net.arcs()[1].weight == 2);
}

TEST_CASE("malformed PNML is a data error") {
  CHECK_THROWS_AS(parse_text("<pnml><net>"), DataError);
  CHECK_THROWS_AS(parse_text("<pnml><net id=\"n\"><place id=\"p\"/>"
                             "<arc id=\"a\" source=\"p\" target=\"missing\"/></net></pnml>"),
                  DataError);
  CHECK_THROWS_AS(parse_text("<pnml></pnml>"), DataError);
}

TEST_CASE("fixture net has the documented shape") {
  const auto net = load_fixture();
  CHECK(net.place_count() == 22);
  CHECK(net.visible_transition_count() == 25);
  CHECK(net.transition_count() - net.visible_transition_count() == 24);
  CHECK(net.source() == net.find_place("source"));
  CHECK(net.sink() == net.find_place("sink"));
  CHECK(net.initial_marking().total() == 1);
  CHECK_NOTHROW(net.validate());
}

TEST_CASE("DOT output parses and mirrors the net") {
  Rng rng(9);
  for (int i = 0; i < 30; ++i) {
    const auto net = testing::random_net(rng);
    std::string error;
    const auto g = testing::parse_dot(to_dot(net), &error);
    REQUIRE_MESSAGE(g.has_value(), error);
    CHECK(g->directed);
    CHECK(g->nodes.size() == net.place_count() + net.transition_count());
    CHECK(g->edges.size() == net.arcs().size());
    std::set<std::string> nodes(g->nodes.begin(), g->nodes.end());
    for (const auto& [from, to] : g->edges) {
      CHECK(nodes.count(from) == 1);
      CHECK(nodes.count(to) == 1);
    }
  }
}

TEST_CASE("DOT styles places and hidden transitions") {
  const auto net = load_fixture();
  Marking m = net.initial_marking();
  const auto g = testing::parse_dot(to_dot(net, &m));
  REQUIRE(g.has_value());
  std::size_t circles = 0, black = 0, boxes = 0;
  for (const auto& [node, attrs] : g->node_attributes) {
    const auto shape = attrs.count("shape") ? attrs.at("shape") : "";
    if (shape == "circle") ++circles;
    if (shape == "box") {
      ++boxes;
      if (attrs.count("fillcolor") && attrs.at("fillcolor") == "black") {
        ++black;
        CHECK(attrs.at("label").empty());
      }
    }
  }
  CHECK(circles == 22);
  CHECK(boxes == 49);
  CHECK(black == 24);
  const auto& source_attrs = g->node_attributes.at("p:source");
  CHECK(source_attrs.at("fillcolor") == "yellow");
  CHECK(source_attrs.at("label") == "●");
  CHECK(g->node_attributes.at("p:sink").at("fillcolor") == "green");
}

TEST_CASE("DOT oracle rejects broken input") {
  CHECK_FALSE(testing::parse_dot("digraph { a -> }").has_value());
  CHECK_FALSE(testing::parse_dot("graph { a -> b }").has_value());
  CHECK(testing::parse_dot("digraph g { /* c */ a -> b -> c [w=1]; x; }")->edges.size() == 2);
}
