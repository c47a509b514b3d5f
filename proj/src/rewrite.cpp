#include "parthenos/rewrite.hpp"

#include <algorithm>
#include <cctype>

namespace parthenos {

namespace {

bool is_var_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool contains_variable(const std::string& s) { return s.find('?') != std::string::npos; }

// A pattern string that is exactly one variable reference.
bool whole_variable(const std::string& s) {
    if (s.size() < 2 || s[0] != '?') return false;
    return std::all_of(s.begin() + 1, s.end(), is_var_char);
}

std::string substitute_impl(const std::string& text, const Bindings& bindings) {
    std::string out;
    size_t i = 0;
    while (i < text.size()) {
        if (text[i] != '?') {
            out.push_back(text[i++]);
            continue;
        }
        size_t j = i + 1;
        while (j < text.size() && is_var_char(text[j])) j++;
        std::string var = text.substr(i, j - i);
        auto it = bindings.find(var);
        if (it == bindings.end()) {
            out += var;
        } else {
            out += value_text(it->second);
        }
        i = j;
    }
    return out;
}

Value substitute_value(const Value& v, const Bindings& bindings) {
    const auto* s = std::get_if<std::string>(&v);
    if (!s || !contains_variable(*s)) return v;
    if (whole_variable(*s)) {
        auto it = bindings.find(*s);
        if (it != bindings.end()) return it->second;
        return v;
    }
    return Value(substitute_impl(*s, bindings));
}

PatternGraph substitute_pattern(const PatternGraph& pattern, const Bindings& bindings) {
    PatternGraph out = pattern;
    for (auto& v : out.vertices) v.id = substitute_impl(v.id, bindings);
    for (auto& e : out.edges) {
        e.id = substitute_impl(e.id, bindings);
        e.from = substitute_impl(e.from, bindings);
        e.to = substitute_impl(e.to, bindings);
    }
    for (auto& p : out.properties) {
        p.owner = substitute_impl(p.owner, bindings);
        p.value = substitute_value(p.value, bindings);
    }
    return out;
}

struct MatchState {
    std::map<std::string, std::string> vertex_assignment;
    std::map<std::string, std::string> edge_assignment;
    Bindings variables;
    std::set<std::string> used_vertices;  // injectivity on vertices
};

class Matcher {
public:
    Matcher(const PatternGraph& pattern, const Bindings& bindings, const KnowledgeBase& kb)
        : kb_(kb) {
        work_ = substitute_pattern(pattern, bindings);
        state_.variables = bindings;
        vertex_order_.resize(work_.vertices.size());
        for (size_t i = 0; i < vertex_order_.size(); i++) vertex_order_[i] = i;
        std::sort(vertex_order_.begin(), vertex_order_.end(), [&](size_t a, size_t b) {
            return work_.vertices[a].id < work_.vertices[b].id;
        });
        edge_order_.resize(work_.edges.size());
        for (size_t i = 0; i < edge_order_.size(); i++) edge_order_[i] = i;
        std::sort(edge_order_.begin(), edge_order_.end(), [&](size_t a, size_t b) {
            return work_.edges[a].id < work_.edges[b].id;
        });
    }

    std::vector<Match> run() {
        match_vertex(0);
        std::sort(results_.begin(), results_.end(), [this](const Match& a, const Match& b) {
            return match_key(a) < match_key(b);
        });
        return results_;
    }

private:
    std::string match_key(const Match& m) const {
        std::string key;
        for (size_t idx : vertex_order_) {
            key += m.vertex_assignment.at(work_.vertices[idx].id);
            key.push_back('\x01');
        }
        for (size_t idx : edge_order_) {
            key += m.edge_assignment.at(work_.edges[idx].id);
            key.push_back('\x01');
        }
        return key;
    }

    void match_vertex(size_t pos) {
        if (pos == vertex_order_.size()) {
            match_edge(0);
            return;
        }
        const PatternVertex& pv = work_.vertices[vertex_order_[pos]];
        if (whole_variable(pv.id)) {
            auto bound = state_.variables.find(pv.id);
            if (bound != state_.variables.end()) {
                const auto* s = std::get_if<std::string>(&bound->second);
                if (!s) return;
                try_vertex(pv, *s, pos, false);
                return;
            }
            for (const auto& [id, label] : kb_.vertices()) {
                if (label != pv.label) continue;
                try_vertex(pv, id, pos, true);
            }
            return;
        }
        if (contains_variable(pv.id))
            throw Error("pattern vertex id has unbound variables: " + pv.id);
        try_vertex(pv, pv.id, pos, false);
    }

    void try_vertex(const PatternVertex& pv, const std::string& target, size_t pos,
                    bool bind_var) {
        auto it = kb_.vertices().find(target);
        if (it == kb_.vertices().end() || it->second != pv.label) return;
        if (state_.used_vertices.count(target)) return;
        state_.used_vertices.insert(target);
        state_.vertex_assignment[pv.id] = target;
        if (bind_var) state_.variables[pv.id] = Value(target);
        match_vertex(pos + 1);
        if (bind_var) state_.variables.erase(pv.id);
        state_.vertex_assignment.erase(pv.id);
        state_.used_vertices.erase(target);
    }

    void match_edge(size_t pos) {
        if (pos == edge_order_.size()) {
            check_properties();
            return;
        }
        const PatternEdge& pe = work_.edges[edge_order_[pos]];
        auto from_it = state_.vertex_assignment.find(pe.from);
        auto to_it = state_.vertex_assignment.find(pe.to);
        if (from_it == state_.vertex_assignment.end() || to_it == state_.vertex_assignment.end())
            throw Error("pattern edge endpoint is not a pattern vertex: " + pe.id);
        const std::string& from = from_it->second;
        const std::string& to = to_it->second;
        if (whole_variable(pe.id)) {
            auto bound = state_.variables.find(pe.id);
            if (bound != state_.variables.end()) {
                const auto* s = std::get_if<std::string>(&bound->second);
                if (!s) return;
                try_edge(pe, *s, from, to, pos, false);
                return;
            }
            for (const auto& [id, e] : kb_.edges()) {
                if (e.label != pe.label || e.from != from || e.to != to) continue;
                try_edge(pe, id, from, to, pos, true);
            }
            return;
        }
        if (contains_variable(pe.id))
            throw Error("pattern edge id has unbound variables: " + pe.id);
        try_edge(pe, pe.id, from, to, pos, false);
    }

    void try_edge(const PatternEdge& pe, const std::string& target, const std::string& from,
                  const std::string& to, size_t pos, bool bind_var) {
        auto it = kb_.edges().find(target);
        if (it == kb_.edges().end()) return;
        const EdgeRec& e = it->second;
        if (e.label != pe.label || e.from != from || e.to != to) return;
        state_.edge_assignment[pe.id] = target;
        if (bind_var) state_.variables[pe.id] = Value(target);
        match_edge(pos + 1);
        if (bind_var) state_.variables.erase(pe.id);
        state_.edge_assignment.erase(pe.id);
    }

    void check_properties() {
        Bindings saved = state_.variables;
        bool ok = true;
        for (const auto& pp : work_.properties) {
            std::string owner = resolve_element(pp.owner);
            auto actual = kb_.property(owner, pp.key);
            if (!actual) {
                ok = false;
                break;
            }
            Value want = substitute_value(pp.value, state_.variables);
            const auto* s = std::get_if<std::string>(&want);
            if (s && whole_variable(*s)) {
                state_.variables[*s] = *actual;
                continue;
            }
            if (s && contains_variable(*s)) {
                state_.variables = saved;
                throw Error("pattern property value has unbound variables: " + *s);
            }
            if (!(want == *actual)) {
                ok = false;
                break;
            }
        }
        if (ok) {
            Match m;
            m.vertex_assignment = state_.vertex_assignment;
            m.edge_assignment = state_.edge_assignment;
            m.variables = state_.variables;
            results_.push_back(std::move(m));
        }
        state_.variables = saved;
    }

    std::string resolve_element(const std::string& pattern_id) const {
        auto v = state_.vertex_assignment.find(pattern_id);
        if (v != state_.vertex_assignment.end()) return v->second;
        auto e = state_.edge_assignment.find(pattern_id);
        if (e != state_.edge_assignment.end()) return e->second;
        throw Error("pattern property owner is not a pattern element: " + pattern_id);
    }

    const KnowledgeBase& kb_;
    PatternGraph work_;
    MatchState state_;
    std::vector<size_t> vertex_order_;
    std::vector<size_t> edge_order_;
    std::vector<Match> results_;
};

std::string instantiate(const std::string& text, const Bindings& bindings) {
    std::string out = substitute_impl(text, bindings);
    if (contains_variable(out)) throw Error("unbound variable in '" + text + "'");
    return out;
}

Value instantiate_value(const Value& v, const Bindings& bindings) {
    Value out = substitute_value(v, bindings);
    const auto* s = std::get_if<std::string>(&out);
    if (s && contains_variable(*s)) throw Error("unbound variable in property value");
    return out;
}

}  // namespace

bool is_variable(const std::string& s) { return whole_variable(s); }

std::string substitute(const std::string& text, const Bindings& bindings) {
    return substitute_impl(text, bindings);
}

std::vector<Match> find_matches(const PatternGraph& pattern, const Bindings& bindings,
                                const KnowledgeBase& kb) {
    return Matcher(pattern, bindings, kb).run();
}

SpoResult apply_spo(const Production& production, const Match& match, const KnowledgeBase& kb) {
    const Bindings& vars = match.variables;

    // Assignment keys are the pattern ids as the matcher saw them: templates
    // were substituted with the caller's pre-bindings, free variables were
    // not. Resolve a production-side reference by trying the raw id first,
    // then its substituted form.
    auto resolve_lhs = [&](const std::string& pattern_id) -> const std::string& {
        auto v = match.vertex_assignment.find(pattern_id);
        if (v != match.vertex_assignment.end()) return v->second;
        auto e = match.edge_assignment.find(pattern_id);
        if (e != match.edge_assignment.end()) return e->second;
        std::string sub = substitute_impl(pattern_id, vars);
        v = match.vertex_assignment.find(sub);
        if (v != match.vertex_assignment.end()) return v->second;
        e = match.edge_assignment.find(sub);
        if (e != match.edge_assignment.end()) return e->second;
        throw Error("production references unmatched lhs element: " + pattern_id);
    };

    std::set<std::string> mapped_lhs;  // lhs pattern ids preserved by the mapping
    std::map<std::string, std::string> rhs_target;  // rhs pattern id -> kb id
    for (const auto& [l, r] : production.mapping) {
        mapped_lhs.insert(l);
        rhs_target[r] = resolve_lhs(l);
    }

    KnowledgeBase out = kb;

    // Deletion phase: targets of unmapped lhs elements, edges first, with the
    // dangling rule applied by remove_vertex. When an element is both
    // preserved and deleted through overlapping matches, deletion wins.
    for (const auto& pe : production.lhs.edges) {
        if (mapped_lhs.count(pe.id)) continue;
        const std::string& target = resolve_lhs(pe.id);
        if (out.has_edge(target)) out.remove_edge(target);
    }
    for (const auto& pv : production.lhs.vertices) {
        if (mapped_lhs.count(pv.id)) continue;
        const std::string& target = resolve_lhs(pv.id);
        if (out.has_vertex(target)) out.remove_vertex(target);
    }
    std::erase_if(rhs_target, [&](const auto& entry) { return !out.has_element(entry.second); });

    // Insertion phase: instantiate rhs elements outside the mapping image.
    for (const auto& rv : production.rhs.vertices) {
        if (rhs_target.count(rv.id)) continue;
        std::string id = instantiate(rv.id, vars);
        if (out.has_element(id)) throw IdCollisionError(id);
        out.add_vertex(id, rv.label);
        rhs_target[rv.id] = id;
    }
    for (const auto& re : production.rhs.edges) {
        if (rhs_target.count(re.id)) continue;
        auto from = rhs_target.find(re.from);
        auto to = rhs_target.find(re.to);
        if (from == rhs_target.end() || to == rhs_target.end()) {
            // Endpoint was preserved but lost to an overlapping deletion;
            // adding the edge would dangle, so it is dropped.
            if (production.mapping.count(re.from) || production.mapping.count(re.to)) continue;
            throw Error("rhs edge endpoint is not an rhs vertex: " + re.id);
        }
        std::string id = instantiate(re.id, vars);
        if (out.has_element(id)) throw IdCollisionError(id);
        out.add_edge(id, from->second, to->second, re.label);
        rhs_target[re.id] = id;
    }

    // Property phase. Keys stated in the lhs on a preserved element and not
    // restated in the rhs are removed; rhs values replace existing ones.
    auto rhs_image = [&](const std::string& rhs_id) -> const std::string* {
        auto it = rhs_target.find(rhs_id);
        return it == rhs_target.end() ? nullptr : &it->second;
    };
    std::set<std::pair<std::string, std::string>> rhs_props;  // (kb owner, key)
    for (const auto& rp : production.rhs.properties) {
        if (const std::string* owner = rhs_image(rp.owner)) rhs_props.insert({*owner, rp.key});
    }
    for (const auto& lp : production.lhs.properties) {
        auto mapped = production.mapping.find(lp.owner);
        if (mapped == production.mapping.end()) continue;  // owner deleted with its properties
        const std::string* owner = rhs_image(mapped->second);
        if (!owner || !out.has_element(*owner)) continue;
        if (!rhs_props.count({*owner, lp.key})) out.remove_property(*owner, lp.key);
    }
    std::set<std::string> rhs_ids;
    for (const auto& rv : production.rhs.vertices) rhs_ids.insert(rv.id);
    for (const auto& re : production.rhs.edges) rhs_ids.insert(re.id);
    for (const auto& rp : production.rhs.properties) {
        if (!rhs_ids.count(rp.owner))
            throw Error("rhs property owner is not an rhs element: " + rp.owner);
        const std::string* owner = rhs_image(rp.owner);
        if (!owner || !out.has_element(*owner)) continue;
        out.set_property(*owner, rp.key, instantiate_value(rp.value, vars));
    }

    return SpoResult{out, kb_diff(kb, out)};
}

}  // namespace parthenos
