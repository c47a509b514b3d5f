#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "parthenos/common.hpp"

namespace parthenos {

// The subject dialect: one class per `.pss` file, typed fields, methods with
// opaque token-balanced bodies, and @Name(key=value, ...) annotations.

struct TypeRef {
    std::string name;  // int, double, boolean, String, void, or a class name
    bool operator==(const TypeRef&) const = default;
};

bool is_builtin_type(const std::string& name);

struct Annotation {
    std::string name;
    std::vector<std::pair<std::string, Value>> args;  // keys unique, order kept
    bool operator==(const Annotation&) const = default;

    const Value* arg(const std::string& key) const;
};

struct FieldDecl {
    std::string name;
    TypeRef type;
    std::vector<Annotation> annotations;
    bool operator==(const FieldDecl&) const = default;
};

struct MethodDecl {
    std::string name;
    TypeRef return_type;
    std::vector<std::pair<std::string, TypeRef>> params;  // (name, type)
    std::string body_text;  // token-balanced text, lines trimmed
    std::vector<Annotation> annotations;
    bool operator==(const MethodDecl&) const = default;
};

struct ClassDecl {
    std::string name;
    std::optional<std::string> superclass;
    std::vector<Annotation> annotations;
    std::vector<FieldDecl> fields;
    std::vector<MethodDecl> methods;
    bool operator==(const ClassDecl&) const = default;

    const FieldDecl* field(const std::string& name) const;
    const MethodDecl* method(const std::string& name) const;
};

struct SourceUnit {
    std::string file_path;  // repository-relative
    ClassDecl class_decl;
    bool operator==(const SourceUnit&) const = default;
};

struct SyntaxError : Error {
    size_t line;
    size_t column;
    SyntaxError(size_t line, size_t column, const std::string& message);
};

SourceUnit parse_unit(std::string_view text, const std::string& file_path);

// Canonical form: 4-space indent, one blank line between members, fields
// before methods, annotations one per line. print_unit(parse_unit(t)) is a
// fixpoint of its own output.
std::string print_unit(const SourceUnit& unit);

struct ClassListing {
    std::string class_name;  // file stem
    std::string file;        // repository-relative path
    bool ok;
    std::string error;  // empty when ok
};

std::vector<ClassListing> list_classes(const std::filesystem::path& repo);

// Sorted repository-relative paths of all `.pss` files.
std::vector<std::string> list_source_files(const std::filesystem::path& repo);

std::string read_file(const std::filesystem::path& path);

// Accessor naming: get/set + attribute name with its first letter upper-cased.
std::string getter_name(const std::string& attribute);
std::string setter_name(const std::string& attribute);
std::string getter_body(const std::string& attribute);
std::string setter_body(const std::string& attribute);

}  // namespace parthenos
