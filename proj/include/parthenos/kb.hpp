#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "parthenos/common.hpp"

namespace parthenos {

// Labeled directed graph of vertices, edges, and (owner, key) -> value
// properties. Edge endpoints always name existing vertices; ids are unique;
// at most one property per (owner, key).

struct EdgeRec {
    std::string from;
    std::string to;
    std::string label;
    bool operator==(const EdgeRec&) const = default;
};

struct VertexFact {
    std::string id;
    std::string label;
    bool operator==(const VertexFact&) const = default;
    bool operator<(const VertexFact& o) const { return std::tie(id, label) < std::tie(o.id, o.label); }
};

struct EdgeFact {
    std::string id;
    std::string from;
    std::string to;
    std::string label;
    bool operator==(const EdgeFact&) const = default;
    bool operator<(const EdgeFact& o) const {
        return std::tie(id, from, to, label) < std::tie(o.id, o.from, o.to, o.label);
    }
};

struct PropertyFact {
    std::string owner;
    std::string key;
    Value value;
    bool operator==(const PropertyFact&) const = default;
    bool operator<(const PropertyFact& o) const {
        return std::tie(owner, key, value) < std::tie(o.owner, o.key, o.value);
    }
};

using Fact = std::variant<VertexFact, EdgeFact, PropertyFact>;

struct Delta {
    std::set<Fact> added;
    std::set<Fact> removed;
    bool operator==(const Delta&) const = default;
    bool empty() const { return added.empty() && removed.empty(); }
};

struct FactSyntaxError : Error {
    size_t line;
    FactSyntaxError(size_t line, const std::string& message)
        : Error("line " + std::to_string(line) + ": " + message), line(line) {}
};

struct DanglingEdgeError : Error {
    std::string edge_id;
    explicit DanglingEdgeError(const std::string& edge_id, const std::string& endpoint)
        : Error("edge '" + edge_id + "' references missing vertex '" + endpoint + "'"),
          edge_id(edge_id) {}
};

struct DuplicateIdError : Error {
    std::string id;
    explicit DuplicateIdError(const std::string& id)
        : Error("duplicate element id '" + id + "'"), id(id) {}
};

class KnowledgeBase {
public:
    const std::map<std::string, std::string>& vertices() const { return vertices_; }
    const std::map<std::string, EdgeRec>& edges() const { return edges_; }
    const std::map<std::pair<std::string, std::string>, Value>& properties() const {
        return properties_;
    }

    bool has_vertex(const std::string& id) const { return vertices_.count(id) > 0; }
    bool has_edge(const std::string& id) const { return edges_.count(id) > 0; }
    bool has_element(const std::string& id) const { return has_vertex(id) || has_edge(id); }
    std::optional<Value> property(const std::string& owner, const std::string& key) const;

    void add_vertex(const std::string& id, const std::string& label);
    void add_edge(const std::string& id, const std::string& from, const std::string& to,
                  const std::string& label);
    void set_property(const std::string& owner, const std::string& key, const Value& value);

    // Removing a vertex removes its incident edges and the properties of
    // everything removed (the dangling rule).
    void remove_vertex(const std::string& id);
    void remove_edge(const std::string& id);
    void remove_property(const std::string& owner, const std::string& key);

    // Outgoing/incoming edge ids for a vertex, sorted.
    std::vector<std::string> edges_from(const std::string& vertex, const std::string& label) const;
    std::vector<std::string> edges_to(const std::string& vertex, const std::string& label) const;

    std::vector<Fact> facts() const;
    static KnowledgeBase from_facts(const std::vector<Fact>& facts);

    bool operator==(const KnowledgeBase&) const = default;

private:
    std::map<std::string, std::string> vertices_;
    std::map<std::string, EdgeRec> edges_;
    std::map<std::pair<std::string, std::string>, Value> properties_;
};

// Fact-level set difference: after = (before \ removed) + added.
Delta kb_diff(const KnowledgeBase& before, const KnowledgeBase& after);

// Prolog-compatible fact text: header comment, then vertex/edge/property
// blocks, each sorted lexicographically by rendered line.
std::string serialize_kb(const KnowledgeBase& kb);
KnowledgeBase parse_kb(std::string_view text);

std::string render_fact(const Fact& fact);

}  // namespace parthenos
