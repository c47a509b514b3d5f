#include <doctest.h>

#include <fstream>

#include "parthenos/extraction.hpp"
#include "parthenos/injection.hpp"
#include "parthenos/transformation.hpp"
#include "testutil.hpp"

using namespace parthenos;

namespace {

KnowledgeBase fixture_kb(const char* name) { return extract_model(testutil::fixture(name)); }

long long position_of(const KnowledgeBase& kb, const std::string& id) {
    return std::get<long long>(*kb.property(id, "position"));
}

// Panels (or one panel's fields) must always carry positions 1..n.
void check_permutation(const KnowledgeBase& kb, UiKind kind, const std::string& panel) {
    std::vector<long long> positions;
    if (kind == UiKind::panel) {
        for (const auto& [id, label] : kb.vertices())
            if (label == "panel") positions.push_back(position_of(kb, id));
    } else {
        for (const auto& eid : kb.edges_from(panel, "has_field"))
            positions.push_back(position_of(kb, kb.edges().at(eid).to));
    }
    std::sort(positions.begin(), positions.end());
    for (size_t i = 0; i < positions.size(); i++)
        CHECK(positions[i] == static_cast<long long>(i + 1));
}

struct RepoCopy {
    testutil::TempDir tmp;
    std::filesystem::path repo;
    std::filesystem::path kb_file;
    KnowledgeBase kb;

    explicit RepoCopy(const char* fixture_name) {
        repo = tmp.path / "repo";
        testutil::copy_tree(testutil::fixture(fixture_name), repo);
        kb_file = tmp.path / "model.pl";
        kb = extract_model(repo);
        std::ofstream out(kb_file, std::ios::binary);
        out << serialize_kb(kb);
    }

    std::map<std::string, std::string> bytes() const {
        std::map<std::string, std::string> out;
        for (const auto& rel : list_source_files(repo)) out[rel] = read_file(repo / rel);
        out["model.pl"] = read_file(kb_file);
        return out;
    }
};

TransformationRequest request_json(const char* text) {
    return parse_request(nlohmann::json::parse(text));
}

}  // namespace

TEST_SUITE_BEGIN("transformation");

TEST_CASE("create_class adds the class with its bookkeeping facts") {
    KnowledgeBase kb = fixture_kb("library_s1");
    TransformationOutcome outcome = create_class(kb, "Magazine", std::nullopt);
    REQUIRE(outcome.applied());
    CHECK(outcome.kb_after.has_vertex("class:Magazine"));
    CHECK(outcome.kb_after.property("class:Magazine", "source_file") ==
          Value(std::string("Magazine.pss")));
    size_t classes = 0;
    for (const auto& [id, label] : outcome.kb_after.vertices())
        if (label == "class") classes++;
    CHECK(classes == 9);
    CHECK(outcome.delta.removed.empty());
    CHECK(outcome.delta.added.size() == 3);
}

TEST_CASE("create_class rejects duplicates and unknown superclasses") {
    KnowledgeBase kb = fixture_kb("library");
    TransformationOutcome dup = create_class(kb, "Book", std::nullopt);
    CHECK(!dup.applied());
    CHECK(dup.reason == "DuplicateClass: Book");
    CHECK(dup.kb_after == kb);
    CHECK(dup.delta.empty());

    TransformationOutcome missing = create_class(kb, "PuzzleBook", "UnratedBook");
    CHECK(!missing.applied());
    CHECK(missing.reason == "SuperclassNotFound: UnratedBook");
    CHECK(missing.kb_after == kb);
}

TEST_CASE("add_attribute adds the attribute and both accessors") {
    KnowledgeBase kb = fixture_kb("library_s2");
    TransformationOutcome outcome = add_attribute(kb, "Book", "ISBN", "String");
    REQUIRE(outcome.applied());
    const KnowledgeBase& after = outcome.kb_after;
    CHECK(after.has_vertex("attr:Book.ISBN"));
    CHECK(after.has_vertex("method:Book.getISBN"));
    CHECK(after.has_vertex("method:Book.setISBN"));
    CHECK(after.property("method:Book.getISBN", "generated") == Value(true));
    CHECK(after.edges().at("e:returns:Book.getISBN").to == "type:String");
    CHECK(after.edges().at("e:returns:Book.setISBN").to == "type:void");
    size_t attrs = 0;
    for (const auto& [id, label] : after.vertices())
        if (label == "attribute") attrs++;
    CHECK(attrs == 22);
}

TEST_CASE("add_attribute precondition rejections") {
    KnowledgeBase kb = fixture_kb("library");
    CHECK(add_attribute(kb, "Ghost", "x", "int").reason == "ClassNotFound: Ghost");
    CHECK(add_attribute(kb, "Book", "weight", "Flooble").reason == "TypeNotFound: Flooble");
    CHECK(add_attribute(kb, "Book", "title", "String").reason == "DuplicateAttribute: Book.title");

    TransformationOutcome rejected = add_attribute(kb, "Book", "weight", "Flooble");
    CHECK(serialize_kb(rejected.kb_after) == serialize_kb(kb));
}

TEST_CASE("add_attribute accepts an existing class as the type") {
    KnowledgeBase kb = fixture_kb("library");
    TransformationOutcome outcome = add_attribute(kb, "Book", "publisher", "Publisher");
    REQUIRE(outcome.applied());
    CHECK(outcome.kb_after.has_vertex("type:Publisher"));
    CHECK(outcome.kb_after.edges().at("e:has_type:Book.publisher").to == "type:Publisher");
}

TEST_CASE("duplicate attribute detection walks the extends chain") {
    KnowledgeBase kb = fixture_kb("library_s3");
    TransformationOutcome outcome = add_attribute(kb, "RatedBook", "title", "String");
    CHECK(!outcome.applied());
    CHECK(outcome.reason == "DuplicateAttribute: RatedBook.title");
}

TEST_CASE("attributes colliding with existing members are rejected, not crashed") {
    KnowledgeBase kb = fixture_kb("library");
    // Book already has getTitle/setTitle methods.
    CHECK(add_attribute(kb, "Book", "getTitle", "String").reason ==
          "DuplicateMember: Book.getTitle");
    testutil::TempDir tmp;
    testutil::write_file(tmp.path / "X.pss", "class X { void getA() {} }");
    KnowledgeBase kb2 = extract_model(tmp.path);
    TransformationOutcome outcome = add_attribute(kb2, "X", "a", "int");
    CHECK(!outcome.applied());
    CHECK(outcome.reason == "DuplicateMember: X.getA");
}

TEST_CASE("labels with control characters cannot reach the source") {
    KnowledgeBase kb = fixture_kb("library_s1");
    CHECK(ui_set_property(kb, UiKind::panel, UiTarget{"Book", ""}, "label",
                          Value(std::string("two\nlines")))
              .reason == "BadValueType: label must not contain control characters");
    UiProps props;
    props.label = "tab\there";
    CHECK(!ui_create_element(kb, UiKind::panel, UiTarget{"Shelf", ""}, props).applied());
}

TEST_CASE("panels and fields are created with defaults") {
    KnowledgeBase kb = fixture_kb("library");
    TransformationOutcome panel = ui_create_element(kb, UiKind::panel, UiTarget{"Book", ""}, {});
    REQUIRE(panel.applied());
    CHECK(panel.kb_after.property("panel:Book", "label") == Value(std::string("Book")));
    CHECK(position_of(panel.kb_after, "panel:Book") == 1);
    CHECK(panel.kb_after.property("panel:Book", "visible") == Value(true));

    TransformationOutcome field =
        ui_create_element(panel.kb_after, UiKind::field, UiTarget{"Book", "title"}, {});
    REQUIRE(field.applied());
    CHECK(field.kb_after.has_edge("e:reflects:Book.title"));
    CHECK(field.kb_after.has_edge("e:has_field:Book.title"));
    CHECK(field.kb_after.property("field:Book.title", "label") == Value(std::string("title")));
    check_permutation(field.kb_after, UiKind::field, "panel:Book");
}

TEST_CASE("four panels and eight fields reproduce the first scenario counts") {
    KnowledgeBase kb = fixture_kb("library");
    for (const char* cls : {"Librarian", "Book", "Member", "Loan"}) {
        TransformationOutcome o = ui_create_element(kb, UiKind::panel, UiTarget{cls, ""}, {});
        REQUIRE(o.applied());
        kb = o.kb_after;
    }
    const std::pair<const char*, const char*> fields[] = {
        {"Librarian", "name"},   {"Librarian", "address"}, {"Librarian", "phoneNo"},
        {"Librarian", "salary"}, {"Librarian", "officeNo"}, {"Book", "title"},
        {"Book", "subject"},     {"Book", "author"}};
    for (const auto& [cls, attr] : fields) {
        TransformationOutcome o = ui_create_element(kb, UiKind::field, UiTarget{cls, attr}, {});
        REQUIRE(o.applied());
        kb = o.kb_after;
    }
    size_t panels = 0, field_count = 0;
    for (const auto& [id, label] : kb.vertices()) {
        if (label == "panel") panels++;
        if (label == "field") field_count++;
    }
    CHECK(panels == 4);
    CHECK(field_count == 8);
    check_permutation(kb, UiKind::panel, "");
}

TEST_CASE("creating the same panel twice is a duplicate") {
    KnowledgeBase kb = fixture_kb("library");
    TransformationOutcome first = ui_create_element(kb, UiKind::panel, UiTarget{"Book", ""}, {});
    REQUIRE(first.applied());
    TransformationOutcome second =
        ui_create_element(first.kb_after, UiKind::panel, UiTarget{"Book", ""}, {});
    CHECK(!second.applied());
    CHECK(second.reason == "DuplicateElement: panel Book");
}

TEST_CASE("field creation demands the panel and the attribute") {
    KnowledgeBase kb = fixture_kb("library");
    CHECK(ui_create_element(kb, UiKind::field, UiTarget{"Book", "title"}, {}).reason ==
          "PanelMissing: Book");
    TransformationOutcome panel = ui_create_element(kb, UiKind::panel, UiTarget{"Book", ""}, {});
    CHECK(ui_create_element(panel.kb_after, UiKind::field, UiTarget{"Book", "ghost"}, {}).reason ==
          "TargetNotFound: attribute Book.ghost");
    CHECK(ui_create_element(kb, UiKind::panel, UiTarget{"Ghost", ""}, {}).reason ==
          "TargetNotFound: class Ghost");
}

TEST_CASE("explicit positions insert and shift the permutation") {
    KnowledgeBase kb = fixture_kb("library_s1");  // panels 1..4
    UiProps props;
    props.position = 2;
    TransformationOutcome o = ui_create_element(kb, UiKind::panel, UiTarget{"Shelf", ""}, props);
    REQUIRE(o.applied());
    CHECK(position_of(o.kb_after, "panel:Shelf") == 2);
    CHECK(position_of(o.kb_after, "panel:Librarian") == 1);
    CHECK(position_of(o.kb_after, "panel:Book") == 3);
    check_permutation(o.kb_after, UiKind::panel, "");

    props.position = 99;
    CHECK(!ui_create_element(kb, UiKind::panel, UiTarget{"Shelf", ""}, props).applied());
}

TEST_CASE("removing a panel removes its fields and compacts positions") {
    KnowledgeBase kb = fixture_kb("library_s2");  // Book panel holds 3 fields, position 2 of 5
    TransformationOutcome o = ui_remove_element(kb, UiKind::panel, UiTarget{"Book", ""});
    REQUIRE(o.applied());
    const KnowledgeBase& after = o.kb_after;
    CHECK(!after.has_vertex("panel:Book"));
    CHECK(!after.has_vertex("field:Book.title"));
    CHECK(!after.has_vertex("field:Book.subject"));
    CHECK(!after.has_vertex("field:Book.author"));
    CHECK(!after.has_edge("e:represents:Book"));
    CHECK(!after.has_edge("e:has_field:Book.title"));
    size_t removed_vertices = 0;
    for (const auto& f : o.delta.removed)
        if (std::holds_alternative<VertexFact>(f)) removed_vertices++;
    CHECK(removed_vertices == 4);
    check_permutation(after, UiKind::panel, "");
    CHECK(position_of(after, "panel:Librarian") == 1);
    CHECK(position_of(after, "panel:Member") == 2);
    CHECK(position_of(after, "panel:Loan") == 3);
    CHECK(position_of(after, "panel:Magazine") == 4);
}

TEST_CASE("removing a missing element is a target error") {
    KnowledgeBase kb = fixture_kb("library");
    CHECK(ui_remove_element(kb, UiKind::field, UiTarget{"Book", "title"}).reason ==
          "TargetNotFound: field Book.title");
}

TEST_CASE("remove then re-create differs only by the position default") {
    KnowledgeBase kb = fixture_kb("library_s1");
    TransformationOutcome removed = ui_remove_element(kb, UiKind::panel, UiTarget{"Book", ""});
    REQUIRE(removed.applied());
    KnowledgeBase work = removed.kb_after;
    TransformationOutcome panel = ui_create_element(work, UiKind::panel, UiTarget{"Book", ""}, {});
    REQUIRE(panel.applied());
    work = panel.kb_after;
    for (const char* attr : {"title", "subject", "author"}) {
        TransformationOutcome field =
            ui_create_element(work, UiKind::field, UiTarget{"Book", attr}, {});
        REQUIRE(field.applied());
        work = field.kb_after;
    }
    // Restore the original panel order and everything matches again.
    CHECK(position_of(work, "panel:Book") == 4);
    TransformationOutcome moved =
        ui_set_property(work, UiKind::panel, UiTarget{"Book", ""}, "position",
                        Value(static_cast<long long>(2)));
    REQUIRE(moved.applied());
    CHECK(serialize_kb(moved.kb_after) == serialize_kb(kb));
}

TEST_CASE("set_label rewrites the panel label") {
    KnowledgeBase kb = fixture_kb("library_s2");
    TransformationOutcome o = ui_set_property(kb, UiKind::panel, UiTarget{"Book", ""}, "label",
                                              Value(std::string("Unrated Book")));
    REQUIRE(o.applied());
    CHECK(o.kb_after.property("panel:Book", "label") == Value(std::string("Unrated Book")));
    CHECK(o.delta.added.size() == 1);
    CHECK(o.delta.removed.size() == 1);
}

TEST_CASE("set_position moves an element ahead of another") {
    KnowledgeBase kb = fixture_kb("library_s2");
    KnowledgeBase work = create_class(kb, "RatedBook", "Book").kb_after;
    work = ui_create_element(work, UiKind::panel, UiTarget{"RatedBook", ""}, {}).kb_after;
    CHECK(position_of(work, "panel:RatedBook") == 6);
    TransformationOutcome moved =
        ui_set_property(work, UiKind::panel, UiTarget{"RatedBook", ""}, "position",
                        Value(position_of(work, "panel:Magazine")));
    REQUIRE(moved.applied());
    CHECK(position_of(moved.kb_after, "panel:RatedBook") == 5);
    CHECK(position_of(moved.kb_after, "panel:Magazine") == 6);
    check_permutation(moved.kb_after, UiKind::panel, "");

    TransformationOutcome back =
        ui_set_property(moved.kb_after, UiKind::panel, UiTarget{"Librarian", ""}, "position",
                        Value(static_cast<long long>(6)));
    REQUIRE(back.applied());
    CHECK(position_of(back.kb_after, "panel:Librarian") == 6);
    CHECK(position_of(back.kb_after, "panel:Book") == 1);
    check_permutation(back.kb_after, UiKind::panel, "");
}

TEST_CASE("setting an already-true visibility applies with an empty delta") {
    KnowledgeBase kb = fixture_kb("library_s1");
    TransformationOutcome o =
        ui_set_property(kb, UiKind::field, UiTarget{"Book", "title"}, "visible", Value(true));
    REQUIRE(o.applied());
    CHECK(o.delta.empty());
    CHECK(o.kb_after == kb);
}

TEST_CASE("set property value type mismatches are rejected") {
    KnowledgeBase kb = fixture_kb("library_s1");
    CHECK(ui_set_property(kb, UiKind::panel, UiTarget{"Book", ""}, "label", Value(true)).reason ==
          "BadValueType: label must be a string");
    CHECK(ui_set_property(kb, UiKind::panel, UiTarget{"Book", ""}, "visible",
                          Value(std::string("yes")))
              .reason == "BadValueType: visible must be a boolean");
    CHECK(ui_set_property(kb, UiKind::panel, UiTarget{"Book", ""}, "position",
                          Value(static_cast<long long>(0)))
              .reason == "BadValueType: position must be an integer >= 1");
    CHECK(!ui_set_property(kb, UiKind::panel, UiTarget{"Book", ""}, "position",
                           Value(static_cast<long long>(9)))
               .applied());
    CHECK(ui_set_property(kb, UiKind::panel, UiTarget{"Ghost", ""}, "label",
                          Value(std::string("x")))
              .reason == "TargetNotFound: panel Ghost");
}

TEST_CASE("request parsing enforces the per-op schemas") {
    CHECK_NOTHROW(request_json(R"({"op":"create_class","params":{"name":"A"}})"));
    CHECK_NOTHROW(request_json(
        R"({"op":"set_label","params":{"kind":"field","class":"B","attribute":"t","value":"x"}})"));
    CHECK_THROWS_AS(request_json(R"({"op":"mystery","params":{}})"), RequestError);
    CHECK_THROWS_AS(request_json(R"({"op":"create_class","params":{}})"), RequestError);
    CHECK_THROWS_AS(
        request_json(R"({"op":"create_class","params":{"name":"A","bogus":1}})"), RequestError);
    CHECK_THROWS_AS(request_json(R"({"op":"create_class","params":{"name":"9bad"}})"),
                    RequestError);
    CHECK_THROWS_AS(
        request_json(R"({"op":"set_label","params":{"kind":"panel","class":"B","attribute":"t","value":"x"}})"),
        RequestError);
    CHECK_THROWS_AS(
        request_json(R"({"op":"set_label","params":{"kind":"field","class":"B","value":"x"}})"),
        RequestError);
    CHECK_THROWS_AS(
        request_json(R"({"op":"create_panel","params":{"class":"B","position":1.5}})"),
        RequestError);
}

TEST_CASE("apply_transformation persists sources and model together") {
    RepoCopy work("library");
    TransformationRequest req = request_json(
        R"({"op":"add_attribute","params":{"class":"Book","name":"ISBN","type":"String"}})");
    TransformationOutcome outcome = apply_transformation(work.kb, work.repo, work.kb_file, req);
    REQUIRE(outcome.applied());
    CHECK(read_file(work.repo / "Book.pss").find("String ISBN;") != std::string::npos);
    CHECK(read_file(work.kb_file) == serialize_kb(outcome.kb_after));
    CHECK(serialize_kb(extract_model(work.repo)) == serialize_kb(outcome.kb_after));
    CHECK(!std::filesystem::exists(work.repo / "parthenos.lock"));
}

TEST_CASE("rejected transformations leave the repository byte-identical") {
    RepoCopy work("library_s3");
    auto before = work.bytes();
    TransformationRequest req = request_json(
        R"({"op":"create_class","params":{"name":"PuzzleBook","superclass":"UnratedBook"}})");
    TransformationOutcome outcome = apply_transformation(work.kb, work.repo, work.kb_file, req);
    CHECK(!outcome.applied());
    CHECK(outcome.reason == "SuperclassNotFound: UnratedBook");
    CHECK(work.bytes() == before);
    CHECK(!std::filesystem::exists(work.repo / "parthenos.lock"));
}

TEST_CASE("every applied transformation keeps model and sources in sync") {
    RepoCopy work("library_s1");
    const char* requests[] = {
        R"({"op":"create_class","params":{"name":"Magazine"}})",
        R"({"op":"add_attribute","params":{"class":"Magazine","name":"issueNo","type":"int"}})",
        R"({"op":"create_panel","params":{"class":"Magazine"}})",
        R"({"op":"create_field","params":{"class":"Magazine","attribute":"issueNo"}})",
        R"({"op":"set_label","params":{"kind":"panel","class":"Magazine","value":"The Magazine"}})",
        R"({"op":"set_visibility","params":{"kind":"field","class":"Magazine","attribute":"issueNo","value":false}})",
        R"({"op":"set_position","params":{"kind":"panel","class":"Magazine","value":1}})",
        R"({"op":"set_position","params":{"kind":"field","class":"Librarian","attribute":"officeNo","value":1}})",
        R"({"op":"remove_field","params":{"class":"Magazine","attribute":"issueNo"}})",
        R"({"op":"remove_panel","params":{"class":"Magazine"}})",
    };
    for (const char* text : requests) {
        TransformationRequest req = request_json(text);
        TransformationOutcome outcome =
            apply_transformation(work.kb, work.repo, work.kb_file, req);
        REQUIRE_MESSAGE(outcome.applied(), outcome.reason);
        work.kb = outcome.kb_after;
        CHECK(serialize_kb(extract_model(work.repo)) == serialize_kb(work.kb));
        CHECK(read_file(work.kb_file) == serialize_kb(work.kb));
    }
}

TEST_CASE("the first edit of a messy file normalizes it canonically") {
    testutil::TempDir tmp;
    auto repo = tmp.path / "repo";
    testutil::write_file(repo / "Box.pss", "class   Box{int w;// c\nint  h ;}");
    auto kb_file = tmp.path / "model.pl";
    KnowledgeBase kb = extract_model(repo);
    {
        std::ofstream out(kb_file, std::ios::binary);
        out << serialize_kb(kb);
    }
    TransformationRequest req = request_json(
        R"({"op":"add_attribute","params":{"class":"Box","name":"depth","type":"int"}})");
    TransformationOutcome outcome = apply_transformation(kb, repo, kb_file, req);
    REQUIRE(outcome.applied());
    std::string text = read_file(repo / "Box.pss");
    CHECK(text.rfind("class Box {\n    int w;\n\n    int h;\n\n    int depth;\n", 0) == 0);
    CHECK(serialize_kb(extract_model(repo)) == serialize_kb(outcome.kb_after));
}

TEST_CASE("a held lock makes concurrent invocations fail fast") {
    RepoCopy work("library");
    RepoLock held(work.repo);
    TransformationRequest req = request_json(R"({"op":"create_class","params":{"name":"X"}})");
    CHECK_THROWS_AS(apply_transformation(work.kb, work.repo, work.kb_file, req), LockError);
}

TEST_SUITE_END();
