#include <doctest.h>

#include <algorithm>

#include "parthenos/extraction.hpp"
#include "parthenos/injection.hpp"
#include "parthenos/transformation.hpp"
#include "testutil.hpp"

using namespace parthenos;

namespace {

Delta delta_of(const KnowledgeBase& kb, const TransformationOutcome& outcome) {
    REQUIRE(outcome.applied());
    return kb_diff(kb, outcome.kb_after);
}

}  // namespace

TEST_SUITE_BEGIN("injection");

TEST_CASE("typecheck accepts a subclass delta against the fixture model") {
    KnowledgeBase kb = extract_model(testutil::fixture("library_s2"));
    TransformationOutcome outcome = create_class(kb, "RatedBook", "Book");
    CHECK(typecheck_delta(kb, delta_of(kb, outcome)).empty());
}

TEST_CASE("typecheck reports a missing superclass") {
    KnowledgeBase kb = extract_model(testutil::fixture("library"));
    Delta delta;
    delta.added.insert(VertexFact{"class:PuzzleBook", "class"});
    delta.added.insert(
        EdgeFact{"e:extends:PuzzleBook", "class:PuzzleBook", "class:UnratedBook", "extends"});
    auto errors = typecheck_delta(kb, delta);
    REQUIRE(errors.size() == 1);
    CHECK(errors[0].code == "SuperclassNotFound");
}

TEST_CASE("typecheck of an empty delta is clean") {
    KnowledgeBase kb = extract_model(testutil::fixture("library"));
    CHECK(typecheck_delta(kb, Delta{}).empty());
}

TEST_CASE("typecheck reports every error, not just the first") {
    KnowledgeBase kb = extract_model(testutil::fixture("library"));
    Delta delta;
    delta.added.insert(VertexFact{"attr:Book.weight", "attribute"});
    delta.added.insert(PropertyFact{"attr:Book.weight", "name", Value(std::string("weight"))});
    delta.added.insert(VertexFact{"type:Flooble", "type"});
    delta.added.insert(
        EdgeFact{"e:has_type:Book.weight", "attr:Book.weight", "type:Flooble", "has_type"});
    delta.added.insert(VertexFact{"attr:Book.title2", "attribute"});
    delta.added.insert(PropertyFact{"attr:Book.title2", "name", Value(std::string("title"))});
    delta.added.insert(
        EdgeFact{"e:has_attribute:Book.title2", "class:Book", "attr:Book.title2",
                 "has_attribute"});
    auto errors = typecheck_delta(kb, delta);
    REQUIRE(errors.size() == 2);
    std::set<std::string> codes;
    for (const auto& e : errors) codes.insert(e.code);
    CHECK(codes == std::set<std::string>{"TypeNotFound", "DuplicateMember"});
}

TEST_CASE("typecheck flags a duplicate attribute introduced through the chain") {
    KnowledgeBase kb = extract_model(testutil::fixture("library_s3"));
    Delta delta;
    delta.added.insert(VertexFact{"attr:RatedBook.title", "attribute"});
    delta.added.insert(PropertyFact{"attr:RatedBook.title", "name", Value(std::string("title"))});
    delta.added.insert(EdgeFact{"e:has_attribute:RatedBook.title", "class:RatedBook",
                                "attr:RatedBook.title", "has_attribute"});
    auto errors = typecheck_delta(kb, delta);
    REQUIRE(errors.size() == 1);
    CHECK(errors[0].code == "DuplicateMember");
}

TEST_CASE("typecheck also flags duplicates introduced above a declaring subclass") {
    KnowledgeBase kb = extract_model(testutil::fixture("library_s3"));
    // RatedBook declares rating; giving Book a rating shadows it.
    Delta delta;
    delta.added.insert(VertexFact{"attr:Book.rating", "attribute"});
    delta.added.insert(PropertyFact{"attr:Book.rating", "name", Value(std::string("rating"))});
    delta.added.insert(
        EdgeFact{"e:has_attribute:Book.rating", "class:Book", "attr:Book.rating",
                 "has_attribute"});
    auto errors = typecheck_delta(kb, delta);
    REQUIRE(errors.size() == 1);
    CHECK(errors[0].code == "DuplicateMember");
}

TEST_CASE("scenario-2 delta plans one new file followed by per-attribute and ui models") {
    KnowledgeBase kb = extract_model(testutil::fixture("library_s1"));
    KnowledgeBase target = extract_model(testutil::fixture("library_s2"));
    Delta delta = kb_diff(kb, target);
    auto models = plan_injection(delta, target);

    REQUIRE(models.size() == 14);  // class + 4*(field+methods) + panel + 4 fields
    CHECK(models[0].injection == "add_class");
    CHECK(!models[0].target_file);
    CHECK(models[0].params.at("name") == "Magazine");
    for (size_t i = 1; i < models.size(); i++)
        CHECK(model_target_file(models[i]) == "Magazine.pss");
    std::vector<std::string> kinds;
    for (const auto& m : models) kinds.push_back(m.injection);
    CHECK(kinds == std::vector<std::string>{
                       "add_class", "add_field", "add_methods", "add_field", "add_methods",
                       "add_field", "add_methods", "add_field", "add_methods", "set_annotation",
                       "set_annotation", "set_annotation", "set_annotation", "set_annotation"});
    // attributes planned in name order: issueNo, publisher, subject, title
    CHECK(models[1].params.at("name") == "issueNo");
    CHECK(models[1].params.at("type") == "int");
    CHECK(models[2].params.at("attribute") == "issueNo");
    CHECK(models[7].params.at("name") == "title");
    // the panel annotation precedes the field annotations
    CHECK(models[9].params.at("annotation") == "Panel");
    CHECK(models[9].params.at("args").at("position") == 5);
    CHECK(models[10].params.at("annotation") == "UiField");
}

TEST_CASE("empty delta plans nothing") {
    KnowledgeBase kb = extract_model(testutil::fixture("library"));
    CHECK(plan_injection(Delta{}, kb).empty());
}

TEST_CASE("a label change plans a single annotation edit") {
    KnowledgeBase kb = extract_model(testutil::fixture("library_s2"));
    TransformationOutcome outcome = ui_set_property(kb, UiKind::panel, UiTarget{"Book", ""},
                                                    "label", Value(std::string("Unrated Book")));
    auto models = plan_injection(delta_of(kb, outcome), outcome.kb_after);
    REQUIRE(models.size() == 1);
    CHECK(models[0].injection == "set_annotation");
    CHECK(model_target_file(models[0]) == "Book.pss");
    CHECK(models[0].params.at("key") == "label");
    CHECK(models[0].params.at("value") == "Unrated Book");
    CHECK(!models[0].params.contains("args"));
}

TEST_CASE("a delta with no injection rule is a defect guard") {
    KnowledgeBase kb = extract_model(testutil::fixture("library"));
    Delta delta;
    delta.added.insert(PropertyFact{"class:Book", "mystery", Value(true)});
    CHECK_THROWS_AS(plan_injection(delta, kb), UnmappableDelta);
}

TEST_CASE("anchor table: fields, methods, and empty bodies") {
    InjectionModel add_field{"add_field", std::string("X.pss"),
                             Json{{"class", "X"}, {"name", "n"}, {"type", "int"}}};
    InjectionModel add_methods{"add_methods", std::string("X.pss"),
                               Json{{"class", "X"}, {"attribute", "n"}, {"type", "int"}}};

    SourceUnit full = parse_unit("class X { int a; int b; void m() {} }", "X.pss");
    InjectionPoint p1 = locate_injection_point(full, add_field);
    CHECK(p1.anchor == InjectionPoint::Anchor::AfterLastField);
    CHECK(p1.member_index == 2);

    SourceUnit methods_only = parse_unit("class X { void m() {} }", "X.pss");
    InjectionPoint p2 = locate_injection_point(methods_only, add_field);
    CHECK(p2.anchor == InjectionPoint::Anchor::BeforeFirstMethod);

    SourceUnit empty = parse_unit("class X { }", "X.pss");
    InjectionPoint p3 = locate_injection_point(empty, add_field);
    CHECK(p3.anchor == InjectionPoint::Anchor::EndOfClassBody);

    InjectionPoint p4 = locate_injection_point(full, add_methods);
    CHECK(p4.anchor == InjectionPoint::Anchor::EndOfClassBody);
    CHECK(p4.member_index == 1);
}

TEST_CASE("editing an annotation on an unannotated class has no anchor") {
    SourceUnit unit = parse_unit("class X { }", "X.pss");
    InjectionModel edit{"set_annotation", std::string("X.pss"),
                        Json{{"annotation", "Panel"},
                             {"member", nullptr},
                             {"key", "label"},
                             {"value", "L"}}};
    CHECK_THROWS_AS(locate_injection_point(unit, edit), AnchorNotFound);

    InjectionModel create{"set_annotation", std::string("X.pss"),
                          Json{{"annotation", "Panel"},
                               {"member", nullptr},
                               {"args", Json{{"label", "L"}, {"position", 1}, {"visible", true}}}}};
    CHECK_NOTHROW(locate_injection_point(unit, create));

    InjectionModel missing_member{"set_annotation", std::string("X.pss"),
                                  Json{{"annotation", "UiField"},
                                       {"member", "ghost"},
                                       {"key", "label"},
                                       {"value", "L"}}};
    CHECK_THROWS_AS(locate_injection_point(unit, missing_member), AnchorNotFound);
}

TEST_CASE("adding a field and accessors produces the canonical source") {
    SourceUnit book = parse_unit(read_file(testutil::fixture("library/Book.pss")), "Book.pss");
    InjectionModel add_field{"add_field", std::string("Book.pss"),
                             Json{{"class", "Book"}, {"name", "ISBN"}, {"type", "String"}}};
    InjectionModel add_methods{"add_methods", std::string("Book.pss"),
                               Json{{"class", "Book"}, {"attribute", "ISBN"}, {"type", "String"}}};
    SourceUnit edited = inject_ast(inject_ast(book, add_field), add_methods);
    std::string text = print_unit(edited);
    CHECK(text.find("    String ISBN;") != std::string::npos);
    CHECK(text.find("    String getISBN() {\n        return this.ISBN;\n    }") !=
          std::string::npos);
    CHECK(text.find("    void setISBN(String value) {\n        this.ISBN = value;\n    }") !=
          std::string::npos);
    // existing members untouched
    CHECK(text.find("    String title;") != std::string::npos);
    CHECK_NOTHROW(parse_unit(text, "Book.pss"));
}

TEST_CASE("adding a panel annotation keeps it above the class line") {
    SourceUnit book = parse_unit("class Book { String title; }", "Book.pss");
    InjectionModel model{"set_annotation", std::string("Book.pss"),
                         Json{{"annotation", "Panel"},
                              {"member", nullptr},
                              {"args", Json{{"label", "Book"}, {"position", 1}, {"visible", true}}}}};
    std::string text = print_unit(inject_ast(book, model));
    CHECK(text.rfind("@Panel(label=\"Book\", position=1, visible=true)\nclass Book {", 0) == 0);
}

TEST_CASE("per-file sync: injected facts equal the old facts plus the delta") {
    KnowledgeBase kb = extract_model(testutil::fixture("library"));
    TransformationOutcome outcome = add_attribute(kb, "Book", "ISBN", "String");
    Delta delta = delta_of(kb, outcome);

    SourceUnit book = parse_unit(read_file(testutil::fixture("library/Book.pss")), "Book.pss");
    SourceUnit edited = book;
    for (const auto& model : plan_injection(delta, outcome.kb_after))
        edited = inject_ast(edited, model);

    auto before = analyze_class_facts(book);
    auto after = analyze_class_facts(parse_unit(print_unit(edited), "Book.pss"));
    std::set<Fact> want(before.begin(), before.end());
    for (const auto& f : delta.added) {
        bool metadata = std::holds_alternative<PropertyFact>(f) &&
                        std::get<PropertyFact>(f).key == "generated";
        if (!metadata) want.insert(f);
    }
    std::set<Fact> got(after.begin(), after.end());
    CHECK(got == want);
}

TEST_CASE("annotation edits rewrite one argument in canonical order") {
    SourceUnit unit = parse_unit(
        "@Panel(label=\"Book\", position=2, visible=true)\nclass Book { }", "Book.pss");
    InjectionModel edit{"set_annotation", std::string("Book.pss"),
                        Json{{"annotation", "Panel"},
                             {"member", nullptr},
                             {"key", "label"},
                             {"value", "Unrated Book"}}};
    std::string text = print_unit(inject_ast(unit, edit));
    CHECK(text.rfind("@Panel(label=\"Unrated Book\", position=2, visible=true)", 0) == 0);

    SourceUnit bare = parse_unit("@Panel(visible=true)\nclass Book { }", "Book.pss");
    InjectionModel add_pos{"set_annotation", std::string("Book.pss"),
                           Json{{"annotation", "Panel"},
                                {"member", nullptr},
                                {"key", "position"},
                                {"value", 4}}};
    CHECK(print_unit(inject_ast(bare, add_pos))
              .rfind("@Panel(position=4, visible=true)", 0) == 0);
}

TEST_CASE("remove_annotation strips the annotation and nothing else") {
    SourceUnit unit = parse_unit(
        "@Deprecated\n@Panel(label=\"B\", position=1, visible=true)\n"
        "class Book { @UiField(label=\"t\", position=1, visible=true) String title; }",
        "Book.pss");
    InjectionModel drop_field{"remove_annotation", std::string("Book.pss"),
                              Json{{"annotation", "UiField"}, {"member", "title"}}};
    InjectionModel drop_panel{"remove_annotation", std::string("Book.pss"),
                              Json{{"annotation", "Panel"}, {"member", nullptr}}};
    SourceUnit edited = inject_ast(inject_ast(unit, drop_field), drop_panel);
    std::string text = print_unit(edited);
    CHECK(text.find("@Panel") == std::string::npos);
    CHECK(text.find("@UiField") == std::string::npos);
    CHECK(text.find("@Deprecated") != std::string::npos);
    CHECK(text.find("String title;") != std::string::npos);
}

TEST_CASE("write_sources replaces content for a single edit") {
    testutil::TempDir tmp;
    testutil::write_file(tmp.path / "Book.pss", "class Book { }");
    write_sources({FileEdit{tmp.path / "Book.pss", "class Book {\n    int a;\n}\n", true}});
    CHECK(read_file(tmp.path / "Book.pss") == "class Book {\n    int a;\n}\n");
    CHECK(!std::filesystem::exists(tmp.path / "Book.pss.parthenos-tmp"));
}

TEST_CASE("write_sources refuses output that does not parse") {
    testutil::TempDir tmp;
    testutil::write_file(tmp.path / "Book.pss", "class Book { }");
    CHECK_THROWS_AS(
        write_sources({FileEdit{tmp.path / "Book.pss", "class Book {", true}}),
        InjectionError);
    CHECK(read_file(tmp.path / "Book.pss") == "class Book { }");
}

TEST_CASE("a failure mid-write restores every original byte") {
    testutil::TempDir tmp;
    testutil::write_file(tmp.path / "A.pss", "class A { }");
    testutil::write_file(tmp.path / "B.pss", "class B { }");
    std::vector<FileEdit> edits = {
        FileEdit{tmp.path / "A.pss", "class A {\n    int a;\n}\n", true},
        FileEdit{tmp.path / "B.pss", "class B {\n    int b;\n}\n", true},
        FileEdit{tmp.path / "C.pss", "class C {\n}\n", true},  // created file
    };
    for (const char* phase : {"stage", "rename"}) {
        for (size_t fail_at : {size_t(1), size_t(2)}) {
            CHECK_THROWS_AS(
                write_sources(edits,
                              [&](const char* p, size_t i) {
                                  if (std::string(p) == phase && i == fail_at)
                                      throw IoError("simulated failure");
                              }),
                InjectionError);
            CHECK(read_file(tmp.path / "A.pss") == "class A { }");
            CHECK(read_file(tmp.path / "B.pss") == "class B { }");
            CHECK(!std::filesystem::exists(tmp.path / "C.pss"));
            CHECK(!std::filesystem::exists(tmp.path / "A.pss.parthenos-tmp"));
            CHECK(!std::filesystem::exists(tmp.path / "B.pss.parthenos-tmp"));
            CHECK(!std::filesystem::exists(tmp.path / "C.pss.parthenos-tmp"));
        }
    }
}

TEST_CASE("zero edits change nothing") {
    CHECK_NOTHROW(write_sources({}));
}

TEST_CASE("injection model json round-trips") {
    InjectionModel model{"set_annotation", std::string("Book.pss"),
                         Json{{"annotation", "Panel"},
                              {"member", nullptr},
                              {"key", "label"},
                              {"value", "X"}}};
    Json j = injection_model_json(model);
    InjectionModel back = parse_injection_model(j);
    CHECK(back.injection == model.injection);
    CHECK(back.target_file == model.target_file);
    CHECK(back.params == model.params);

    InjectionModel add_class{"add_class", std::nullopt,
                             Json{{"name", "Magazine"}, {"superclass", nullptr}}};
    Json j2 = injection_model_json(add_class);
    CHECK(j2.at("target_file").is_null());
    CHECK(model_target_file(parse_injection_model(j2)) == "Magazine.pss");
}

TEST_SUITE_END();
