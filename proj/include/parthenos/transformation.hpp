#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "parthenos/kb.hpp"
#include "parthenos/rewrite.hpp"

namespace parthenos {

enum class TransformOp {
    create_class,
    add_attribute,
    create_panel,
    remove_panel,
    create_field,
    remove_field,
    set_label,
    set_position,
    set_visibility,
};

const char* transform_op_name(TransformOp op);

struct TransformationRequest {
    TransformOp op;
    std::map<std::string, Value> params;
};

struct RequestError : Error {
    using Error::Error;
};

// Validates the wire format: known op, exactly the required keys, and
// identifier-shaped names. Value-level problems (a non-string label, an
// out-of-range position) surface later as rejections.
TransformationRequest parse_request(const nlohmann::json& j);

struct TransformationOutcome {
    enum class Status { applied, rejected };
    Status status = Status::rejected;
    KnowledgeBase kb_after;
    Delta delta;
    std::string reason;  // "<Code>: detail" when rejected

    bool applied() const { return status == Status::applied; }
};

enum class UiKind { panel, field };

struct UiTarget {
    std::string class_name;
    std::string attribute;  // empty for panels
};

struct UiProps {
    std::optional<std::string> label;
    std::optional<long long> position;
    std::optional<bool> visible;
};

TransformationOutcome create_class(const KnowledgeBase& kb, const std::string& name,
                                   const std::optional<std::string>& superclass);
TransformationOutcome add_attribute(const KnowledgeBase& kb, const std::string& class_name,
                                    const std::string& attr_name, const std::string& type_name);
TransformationOutcome ui_create_element(const KnowledgeBase& kb, UiKind kind,
                                        const UiTarget& target, const UiProps& props);
TransformationOutcome ui_remove_element(const KnowledgeBase& kb, UiKind kind,
                                        const UiTarget& target);
TransformationOutcome ui_set_property(const KnowledgeBase& kb, UiKind kind, const UiTarget& target,
                                      const std::string& key, const Value& value);

// Catalog dispatch on the knowledge base only; no file system involved.
TransformationOutcome transform_kb(const KnowledgeBase& kb, const TransformationRequest& request);

struct LockError : Error {
    using Error::Error;
};

// Advisory exclusive lock on a repository (lock file `parthenos.lock`).
// Concurrent acquisition fails fast rather than waiting.
class RepoLock {
public:
    explicit RepoLock(const std::filesystem::path& repo);
    ~RepoLock();
    RepoLock(const RepoLock&) = delete;
    RepoLock& operator=(const RepoLock&) = delete;

private:
    std::filesystem::path path_;
};

// Full pipeline step: applies the request to the knowledge base and, on
// success, injects the changes into the repository and persists both the
// sources and the knowledge base file atomically. On rejection or failure
// nothing on disk changes.
TransformationOutcome apply_transformation(const KnowledgeBase& kb,
                                           const std::filesystem::path& repo,
                                           const std::filesystem::path& kb_file,
                                           const TransformationRequest& request);

}  // namespace parthenos
