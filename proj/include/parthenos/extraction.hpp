#pragma once

#include <filesystem>
#include <vector>

#include "parthenos/dialect.hpp"
#include "parthenos/kb.hpp"

namespace parthenos {

// Vertex ids are `kind:QualifiedName` (class:Book, attr:Book.title,
// method:Book.getTitle, type:String, panel:Book, field:Book.title); edge ids
// are `e:<label>:<QualifiedName>`.
std::string class_id(const std::string& name);
std::string attr_id(const std::string& class_name, const std::string& attr);
std::string method_id(const std::string& class_name, const std::string& method);
std::string type_id(const std::string& name);
std::string panel_id(const std::string& class_name);
std::string field_id(const std::string& class_name, const std::string& attr);

struct UiAnnotationError : Error {
    using Error::Error;
};

struct ExtractionError : Error {
    struct FileIssue {
        std::string file;
        std::string message;
    };
    std::vector<FileIssue> issues;
    explicit ExtractionError(std::vector<FileIssue> issues);
};

// Class-level facts for one unit: class vertex, attribute and method vertices
// with their edges, name/source_file properties, type vertices per use, and
// an extends edge when a superclass is named.
std::vector<Fact> analyze_class_facts(const SourceUnit& unit);

// UI facts for one unit: panel and field vertices for @Panel / @UiField with
// represents/reflects/has_field edges and label/position/visible properties.
// Panel positions are left absent unless explicit; they are assigned
// repository-wide so that extraction does not depend on traversal order.
std::vector<Fact> analyze_ui_facts(const SourceUnit& unit);

// Adds the built-in type vertices if absent and marks canonical accessor
// methods with generated=true. Idempotent.
KnowledgeBase process_metadata(KnowledgeBase kb);

KnowledgeBase extract_model(const std::filesystem::path& repo);

// Merge per-unit fact sets into a knowledge base: detects conflicts, assigns
// default panel positions (lexicographic panel id order, smallest unused
// index), and drops extends edges whose target class is not declared.
// Exposed so order-independence is directly testable.
KnowledgeBase merge_facts(const std::vector<std::vector<Fact>>& fact_sets);

const std::vector<std::string>& builtin_type_names();

}  // namespace parthenos
