#pragma once

#include <map>
#include <string>
#include <vector>

#include "parthenos/kb.hpp"

namespace parthenos {

// Pattern graphs mirror the knowledge base shape, but ids and property
// values may be variables (`?name`). Strings may also embed variables as
// templates (`attr:?class.?name`); templates must be fully bound before a
// pattern is matched or instantiated.

struct PatternVertex {
    std::string id;
    std::string label;
};

struct PatternEdge {
    std::string id;
    std::string from;  // pattern vertex id
    std::string to;    // pattern vertex id
    std::string label;
};

struct PatternProperty {
    std::string owner;  // pattern element id
    std::string key;
    Value value;  // concrete, `?var`, or a string template
};

struct PatternGraph {
    std::vector<PatternVertex> vertices;
    std::vector<PatternEdge> edges;
    std::vector<PatternProperty> properties;
};

// Rewrite rule: pattern (mother) graph, replacement (daughter) graph, and an
// injective, label-preserving partial map from lhs element ids to rhs
// element ids. Unmapped lhs elements are deleted; unmapped rhs elements are
// created.
struct Production {
    PatternGraph lhs;
    PatternGraph rhs;
    std::map<std::string, std::string> mapping;
};

using Bindings = std::map<std::string, Value>;

// Total, label- and structure-preserving assignment of a pattern into a
// knowledge base; injective on vertices.
struct Match {
    std::map<std::string, std::string> vertex_assignment;  // pattern id -> kb id
    std::map<std::string, std::string> edge_assignment;    // pattern id -> kb id
    Bindings variables;
};

struct IdCollisionError : Error {
    std::string id;
    explicit IdCollisionError(const std::string& id)
        : Error("generated id already exists: " + id), id(id) {}
};

bool is_variable(const std::string& s);

// Replaces every bound `?var` occurrence; unbound variables are left intact.
std::string substitute(const std::string& text, const Bindings& bindings);

// All matches of the pattern consistent with the given pre-bindings, in
// lexicographic order of assigned target ids.
std::vector<Match> find_matches(const PatternGraph& pattern, const Bindings& bindings,
                                const KnowledgeBase& kb);

struct SpoResult {
    KnowledgeBase kb;
    Delta delta;
};

// Single-pushout step: deletes the targets of unmapped lhs elements together
// with dangling edges and orphaned properties, then adds instantiated rhs
// elements outside the mapping image. Properties stated on a preserved lhs
// element and not restated in the rhs are removed; rhs property values
// replace existing ones.
SpoResult apply_spo(const Production& production, const Match& match, const KnowledgeBase& kb);

}  // namespace parthenos
