#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "parthenos/dialect.hpp"
#include "parthenos/kb.hpp"

namespace parthenos {

using Json = nlohmann::json;

// One planned source edit. target_file is absent for file-creating
// injections (the file is derived from params.name).
struct InjectionModel {
    std::string injection;  // add_class | add_field | add_methods | set_annotation | remove_annotation
    std::optional<std::string> target_file;
    Json params;
};

Json injection_model_json(const InjectionModel& model);
InjectionModel parse_injection_model(const Json& j);

// Repository-relative path the model writes to.
std::string model_target_file(const InjectionModel& model);

struct InjectionPoint {
    enum class Anchor {
        AfterLastField,
        BeforeFirstMethod,
        EndOfClassBody,
        AnnotationSlot,
        NewFile,
    };
    std::string file;
    Anchor anchor;
    int member_index;    // insertion index; -1 for class-level anchors
    std::string member;  // member name for annotation slots, empty for class
};

struct AnchorNotFound : Error {
    using Error::Error;
};

struct UnmappableDelta : Error {
    using Error::Error;
};

struct InjectionError : Error {
    using Error::Error;
};

struct TypeError {
    std::string code;
    std::string message;
};

// Checks a delta against the pre-transformation knowledge base: added
// has_type/returns edges must target known types, extends targets must exist,
// no duplicate member may appear across the inheritance chain, and UI
// elements must reference existing classes and attributes. Returns the full
// error list.
std::vector<TypeError> typecheck_delta(const KnowledgeBase& kb, const Delta& delta);

// Translates a delta into injection models, ordered by target file. kb is the
// post-transformation knowledge base (annotation rewrites need the full
// label/position/visible trio, not just the changed key).
std::vector<InjectionModel> plan_injection(const Delta& delta, const KnowledgeBase& kb);

InjectionPoint locate_injection_point(const SourceUnit& unit, const InjectionModel& model);

SourceUnit inject_ast(const SourceUnit& unit, const InjectionModel& model);

// Builds the unit for an add_class model.
SourceUnit create_unit(const InjectionModel& model);

struct FileEdit {
    std::filesystem::path path;  // absolute
    std::string text;
    bool verify_dialect = false;  // re-parse before rename
};

// Test hook, called as ("stage", i) after staging edit i and ("rename", i)
// after renaming edit i; a throwing hook simulates a mid-write failure.
using WriteHook = std::function<void(const char* phase, size_t index)>;

// All-or-nothing write: every file is staged to a temporary sibling and then
// renamed into place; any failure restores every original byte.
void write_sources(const std::vector<FileEdit>& edits, const WriteHook& hook = {});

}  // namespace parthenos
