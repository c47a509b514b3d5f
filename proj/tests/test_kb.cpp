#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "parthenos/extraction.hpp"
#include "parthenos/kb.hpp"
#include "testutil.hpp"

using namespace parthenos;

TEST_SUITE_BEGIN("kb");

TEST_CASE("single vertex parses") {
    KnowledgeBase kb = parse_kb("% parthenos knowledge base v1\nvertex('class:Book', class).\n");
    CHECK(kb.vertices().size() == 1);
    CHECK(kb.has_vertex("class:Book"));
    CHECK(kb.vertices().at("class:Book") == "class");
}

TEST_CASE("edge referencing a missing vertex is a dangling edge error") {
    const char* text =
        "% parthenos knowledge base v1\n"
        "vertex('class:Book', class).\n"
        "edge('e:extends:Book', 'class:Book', 'class:Ghost', extends).\n";
    CHECK_THROWS_AS(parse_kb(text), DanglingEdgeError);
}

TEST_CASE("duplicate ids and duplicate properties are rejected") {
    CHECK_THROWS_AS(parse_kb("% parthenos knowledge base v1\n"
                             "vertex('v', class).\n"
                             "vertex('v', class).\n"),
                    DuplicateIdError);
    CHECK_THROWS_AS(parse_kb("% parthenos knowledge base v1\n"
                             "vertex('v', class).\n"
                             "property('v', name, 'a').\n"
                             "property('v', name, 'b').\n"),
                    FactSyntaxError);
}

TEST_CASE("missing header or malformed facts carry line numbers") {
    CHECK_THROWS_AS(parse_kb("vertex('v', class).\n"), FactSyntaxError);
    try {
        parse_kb("% parthenos knowledge base v1\nvertex('v' class).\n");
        FAIL("expected FactSyntaxError");
    } catch (const FactSyntaxError& e) {
        CHECK(e.line == 2);
    }
    CHECK_THROWS_AS(parse_kb("% parthenos knowledge base v1\nwidget('v').\n"), FactSyntaxError);
    CHECK_THROWS_AS(parse_kb("% parthenos knowledge base v1\nproperty('v', name, 'a').\n"),
                    FactSyntaxError);
}

TEST_CASE("empty knowledge base serializes to the header only") {
    CHECK(serialize_kb(KnowledgeBase{}) == "% parthenos knowledge base v1\n");
}

TEST_CASE("serialization is sorted, typed, and quoted") {
    KnowledgeBase kb;
    kb.add_vertex("class:Book", "class");
    kb.add_vertex("panel:Book", "panel");
    kb.add_edge("e:represents:Book", "panel:Book", "class:Book", "represents");
    kb.set_property("panel:Book", "label", Value(std::string("Unrated 'n' \\ Book")));
    kb.set_property("panel:Book", "position", Value(static_cast<long long>(2)));
    kb.set_property("panel:Book", "visible", Value(true));
    std::string text = serialize_kb(kb);
    CHECK(text ==
          "% parthenos knowledge base v1\n"
          "vertex('class:Book', class).\n"
          "vertex('panel:Book', panel).\n"
          "edge('e:represents:Book', 'panel:Book', 'class:Book', represents).\n"
          "property('panel:Book', label, 'Unrated \\'n\\' \\\\ Book').\n"
          "property('panel:Book', position, 2).\n"
          "property('panel:Book', visible, true).\n");
    CHECK(parse_kb(text) == kb);
}

TEST_CASE("round-trip on the extracted fixture model") {
    KnowledgeBase kb = extract_model(testutil::fixture("library"));
    std::string text = serialize_kb(kb);
    CHECK(serialize_kb(parse_kb(text)) == text);
    CHECK(parse_kb(text) == kb);
}

TEST_CASE("fact lines conform to Prolog term syntax") {
    // Quoted atoms, bare lowercase functors/labels, integers, booleans; every
    // line ends with ').' and uses only the three fact functors.
    KnowledgeBase kb = extract_model(testutil::fixture("library_s3"));
    std::string text = serialize_kb(kb);
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    CHECK(line == "% parthenos knowledge base v1");
    while (std::getline(in, line)) {
        CAPTURE(line);
        bool known = line.rfind("vertex('", 0) == 0 || line.rfind("edge('", 0) == 0 ||
                     line.rfind("property('", 0) == 0;
        CHECK(known);
        REQUIRE(line.size() > 2);
        CHECK(line.back() == '.');
        CHECK(line[line.size() - 2] == ')');
        // Unescaped quote parity.
        std::string unescaped;
        for (size_t i = 0; i < line.size(); i++) {
            if (line[i] == '\\' && i + 1 < line.size()) {
                i++;
                continue;
            }
            unescaped.push_back(line[i]);
        }
        CHECK(std::count(unescaped.begin(), unescaped.end(), '\'') % 2 == 0);
    }
}

TEST_CASE("kb_diff of identical models is empty") {
    KnowledgeBase kb = extract_model(testutil::fixture("library"));
    Delta d = kb_diff(kb, kb);
    CHECK(d.empty());
}

TEST_CASE("kb_diff recovers the scenario-2 additions") {
    KnowledgeBase before = extract_model(testutil::fixture("library_s1"));
    KnowledgeBase after = extract_model(testutil::fixture("library_s2"));
    Delta d = kb_diff(before, after);
    CHECK(d.removed.empty());

    size_t classes = 0, attributes = 0, panels = 0, fields = 0;
    for (const auto& fact : d.added) {
        const auto* v = std::get_if<VertexFact>(&fact);
        if (!v) continue;
        if (v->label == "class") classes++;
        if (v->label == "attribute") attributes++;
        if (v->label == "panel") panels++;
        if (v->label == "field") fields++;
    }
    CHECK(classes == 1);
    CHECK(attributes == 4);
    CHECK(panels == 1);
    CHECK(fields == 4);

    // after = before + added
    std::set<Fact> rebuilt;
    for (const auto& f : before.facts()) rebuilt.insert(f);
    for (const auto& f : d.added) rebuilt.insert(f);
    std::set<Fact> target;
    for (const auto& f : after.facts()) target.insert(f);
    CHECK(rebuilt == target);
}

TEST_CASE("remove_vertex cascades to incident edges and properties") {
    KnowledgeBase kb;
    kb.add_vertex("a", "class");
    kb.add_vertex("b", "class");
    kb.add_edge("e1", "a", "b", "extends");
    kb.add_edge("e2", "b", "a", "extends");
    kb.set_property("a", "name", Value(std::string("A")));
    kb.set_property("e1", "name", Value(std::string("E")));
    kb.remove_vertex("a");
    CHECK(!kb.has_vertex("a"));
    CHECK(kb.edges().empty());
    CHECK(kb.properties().empty());
    CHECK(kb.has_vertex("b"));
}

TEST_CASE("well-formedness is enforced on construction") {
    KnowledgeBase kb;
    kb.add_vertex("a", "class");
    CHECK_THROWS_AS(kb.add_vertex("a", "class"), DuplicateIdError);
    CHECK_THROWS_AS(kb.add_edge("e", "a", "ghost", "extends"), DanglingEdgeError);
    CHECK_THROWS(kb.set_property("ghost", "name", Value(std::string("x"))));
}

TEST_SUITE_END();
