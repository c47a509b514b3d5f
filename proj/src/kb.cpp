#include "parthenos/kb.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace parthenos {

namespace {

const char* kHeader = "% parthenos knowledge base v1";

bool is_plain_atom(const std::string& s) {
    if (s.empty()) return false;
    if (!std::islower(static_cast<unsigned char>(s[0]))) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    });
}

std::string quote_atom(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('\'');
    return out;
}

std::string render_atom(const std::string& s) {
    return is_plain_atom(s) ? s : quote_atom(s);
}

std::string render_value(const Value& v) {
    if (const auto* s = std::get_if<std::string>(&v)) return quote_atom(*s);
    if (const auto* i = std::get_if<long long>(&v)) return std::to_string(*i);
    return std::get<bool>(v) ? "true" : "false";
}

}  // namespace

std::optional<Value> KnowledgeBase::property(const std::string& owner,
                                             const std::string& key) const {
    auto it = properties_.find({owner, key});
    if (it == properties_.end()) return std::nullopt;
    return it->second;
}

void KnowledgeBase::add_vertex(const std::string& id, const std::string& label) {
    if (has_element(id)) throw DuplicateIdError(id);
    vertices_.emplace(id, label);
}

void KnowledgeBase::add_edge(const std::string& id, const std::string& from,
                             const std::string& to, const std::string& label) {
    if (has_element(id)) throw DuplicateIdError(id);
    if (!has_vertex(from)) throw DanglingEdgeError(id, from);
    if (!has_vertex(to)) throw DanglingEdgeError(id, to);
    edges_.emplace(id, EdgeRec{from, to, label});
}

void KnowledgeBase::set_property(const std::string& owner, const std::string& key,
                                 const Value& value) {
    if (!has_element(owner)) throw Error("property owner does not exist: " + owner);
    properties_[{owner, key}] = value;
}

void KnowledgeBase::remove_vertex(const std::string& id) {
    if (!has_vertex(id)) throw Error("no such vertex: " + id);
    std::vector<std::string> incident;
    for (const auto& [eid, e] : edges_)
        if (e.from == id || e.to == id) incident.push_back(eid);
    for (const auto& eid : incident) remove_edge(eid);
    vertices_.erase(id);
    std::erase_if(properties_, [&](const auto& p) { return p.first.first == id; });
}

void KnowledgeBase::remove_edge(const std::string& id) {
    if (!has_edge(id)) throw Error("no such edge: " + id);
    edges_.erase(id);
    std::erase_if(properties_, [&](const auto& p) { return p.first.first == id; });
}

void KnowledgeBase::remove_property(const std::string& owner, const std::string& key) {
    properties_.erase({owner, key});
}

std::vector<std::string> KnowledgeBase::edges_from(const std::string& vertex,
                                                   const std::string& label) const {
    std::vector<std::string> out;
    for (const auto& [eid, e] : edges_)
        if (e.from == vertex && e.label == label) out.push_back(eid);
    return out;
}

std::vector<std::string> KnowledgeBase::edges_to(const std::string& vertex,
                                                 const std::string& label) const {
    std::vector<std::string> out;
    for (const auto& [eid, e] : edges_)
        if (e.to == vertex && e.label == label) out.push_back(eid);
    return out;
}

std::vector<Fact> KnowledgeBase::facts() const {
    std::vector<Fact> out;
    for (const auto& [id, label] : vertices_) out.push_back(VertexFact{id, label});
    for (const auto& [id, e] : edges_) out.push_back(EdgeFact{id, e.from, e.to, e.label});
    for (const auto& [key, value] : properties_)
        out.push_back(PropertyFact{key.first, key.second, value});
    return out;
}

KnowledgeBase KnowledgeBase::from_facts(const std::vector<Fact>& facts) {
    KnowledgeBase kb;
    for (const auto& f : facts)
        if (const auto* v = std::get_if<VertexFact>(&f)) kb.add_vertex(v->id, v->label);
    for (const auto& f : facts)
        if (const auto* e = std::get_if<EdgeFact>(&f)) kb.add_edge(e->id, e->from, e->to, e->label);
    for (const auto& f : facts)
        if (const auto* p = std::get_if<PropertyFact>(&f)) {
            if (kb.property(p->owner, p->key))
                throw Error("conflicting property (" + p->owner + ", " + p->key + ")");
            kb.set_property(p->owner, p->key, p->value);
        }
    return kb;
}

Delta kb_diff(const KnowledgeBase& before, const KnowledgeBase& after) {
    std::vector<Fact> b = before.facts();
    std::vector<Fact> a = after.facts();
    std::set<Fact> bs(b.begin(), b.end());
    std::set<Fact> as(a.begin(), a.end());
    Delta d;
    std::set_difference(as.begin(), as.end(), bs.begin(), bs.end(),
                        std::inserter(d.added, d.added.begin()));
    std::set_difference(bs.begin(), bs.end(), as.begin(), as.end(),
                        std::inserter(d.removed, d.removed.begin()));
    return d;
}

std::string render_fact(const Fact& fact) {
    if (const auto* v = std::get_if<VertexFact>(&fact))
        return "vertex(" + quote_atom(v->id) + ", " + render_atom(v->label) + ").";
    if (const auto* e = std::get_if<EdgeFact>(&fact))
        return "edge(" + quote_atom(e->id) + ", " + quote_atom(e->from) + ", " +
               quote_atom(e->to) + ", " + render_atom(e->label) + ").";
    const auto& p = std::get<PropertyFact>(fact);
    return "property(" + quote_atom(p.owner) + ", " + render_atom(p.key) + ", " +
           render_value(p.value) + ").";
}

std::string serialize_kb(const KnowledgeBase& kb) {
    std::vector<std::string> vertex_lines, edge_lines, property_lines;
    for (const auto& f : kb.facts()) {
        if (std::holds_alternative<VertexFact>(f))
            vertex_lines.push_back(render_fact(f));
        else if (std::holds_alternative<EdgeFact>(f))
            edge_lines.push_back(render_fact(f));
        else
            property_lines.push_back(render_fact(f));
    }
    std::sort(vertex_lines.begin(), vertex_lines.end());
    std::sort(edge_lines.begin(), edge_lines.end());
    std::sort(property_lines.begin(), property_lines.end());
    std::string out = kHeader;
    out.push_back('\n');
    for (const auto& l : vertex_lines) out += l + "\n";
    for (const auto& l : edge_lines) out += l + "\n";
    for (const auto& l : property_lines) out += l + "\n";
    return out;
}

namespace {

// Scanner for one fact line.
class FactScanner {
public:
    FactScanner(const std::string& line, size_t lineno) : line_(line), lineno_(lineno) {}

    std::string functor() { return bare_word("fact name"); }

    void open() { expect('('); }
    void comma() {
        skip_ws();
        expect(',');
    }
    void close() {
        skip_ws();
        expect(')');
        expect('.');
        skip_ws();
        if (pos_ != line_.size()) fail("trailing text after fact");
    }

    std::string atom() {
        skip_ws();
        if (pos_ < line_.size() && line_[pos_] == '\'') return quoted_atom();
        return bare_word("atom");
    }

    Value value() {
        skip_ws();
        if (pos_ >= line_.size()) fail("expected value");
        char c = line_[pos_];
        if (c == '\'') return Value(quoted_atom());
        if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) {
            size_t start = pos_;
            if (c == '-') pos_++;
            if (pos_ >= line_.size() || !std::isdigit(static_cast<unsigned char>(line_[pos_])))
                fail("expected integer");
            while (pos_ < line_.size() && std::isdigit(static_cast<unsigned char>(line_[pos_])))
                pos_++;
            try {
                return Value(std::stoll(line_.substr(start, pos_ - start)));
            } catch (const std::out_of_range&) {
                fail("integer out of range");
            }
        }
        std::string word = bare_word("value");
        if (word == "true") return Value(true);
        if (word == "false") return Value(false);
        fail("unquoted value must be an integer, true, or false");
    }

private:
    [[noreturn]] void fail(const std::string& message) const {
        throw FactSyntaxError(lineno_, message);
    }

    void skip_ws() {
        while (pos_ < line_.size() && (line_[pos_] == ' ' || line_[pos_] == '\t')) pos_++;
    }

    void expect(char c) {
        if (pos_ >= line_.size() || line_[pos_] != c)
            fail(std::string("expected '") + c + "'");
        pos_++;
    }

    std::string bare_word(const char* what) {
        skip_ws();
        size_t start = pos_;
        while (pos_ < line_.size() &&
               (std::isalnum(static_cast<unsigned char>(line_[pos_])) || line_[pos_] == '_'))
            pos_++;
        if (pos_ == start) fail(std::string("expected ") + what);
        return line_.substr(start, pos_ - start);
    }

    std::string quoted_atom() {
        expect('\'');
        std::string out;
        while (true) {
            if (pos_ >= line_.size()) fail("unterminated quoted atom");
            char c = line_[pos_++];
            if (c == '\'') break;
            if (c == '\\') {
                if (pos_ >= line_.size()) fail("dangling escape in quoted atom");
                out.push_back(line_[pos_++]);
                continue;
            }
            out.push_back(c);
        }
        return out;
    }

    const std::string& line_;
    size_t lineno_;
    size_t pos_ = 0;
};

}  // namespace

KnowledgeBase parse_kb(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    size_t lineno = 0;
    bool saw_header = false;
    struct Pending {
        Fact fact;
        size_t line;
    };
    std::vector<Pending> pending;
    while (std::getline(in, line)) {
        lineno++;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        size_t b = line.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        if (line[b] == '%') {
            if (!saw_header) {
                if (line != kHeader)
                    throw FactSyntaxError(lineno, "expected header comment");
                saw_header = true;
            }
            continue;
        }
        if (!saw_header) throw FactSyntaxError(lineno, "expected header comment");
        FactScanner scan(line, lineno);
        std::string functor = scan.functor();
        scan.open();
        if (functor == "vertex") {
            std::string id = scan.atom();
            scan.comma();
            std::string label = scan.atom();
            scan.close();
            pending.push_back({VertexFact{id, label}, lineno});
        } else if (functor == "edge") {
            std::string id = scan.atom();
            scan.comma();
            std::string from = scan.atom();
            scan.comma();
            std::string to = scan.atom();
            scan.comma();
            std::string label = scan.atom();
            scan.close();
            pending.push_back({EdgeFact{id, from, to, label}, lineno});
        } else if (functor == "property") {
            std::string owner = scan.atom();
            scan.comma();
            std::string key = scan.atom();
            scan.comma();
            Value value = scan.value();
            scan.close();
            pending.push_back({PropertyFact{owner, key, value}, lineno});
        } else {
            throw FactSyntaxError(lineno, "unknown fact '" + functor + "'");
        }
    }
    if (!saw_header && !pending.empty())
        throw FactSyntaxError(1, "expected header comment");

    KnowledgeBase kb;
    for (const auto& p : pending)
        if (const auto* v = std::get_if<VertexFact>(&p.fact)) kb.add_vertex(v->id, v->label);
    for (const auto& p : pending)
        if (const auto* e = std::get_if<EdgeFact>(&p.fact))
            kb.add_edge(e->id, e->from, e->to, e->label);
    for (const auto& p : pending)
        if (const auto* pr = std::get_if<PropertyFact>(&p.fact)) {
            if (kb.property(pr->owner, pr->key))
                throw FactSyntaxError(p.line, "duplicate property (" + pr->owner + ", " +
                                                  pr->key + ")");
            if (!kb.has_element(pr->owner))
                throw FactSyntaxError(p.line, "unknown property owner '" + pr->owner + "'");
            kb.set_property(pr->owner, pr->key, pr->value);
        }
    return kb;
}

}  // namespace parthenos
