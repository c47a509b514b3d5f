#include "parthenos/extraction.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace parthenos {

std::string class_id(const std::string& name) { return "class:" + name; }
std::string attr_id(const std::string& c, const std::string& a) { return "attr:" + c + "." + a; }
std::string method_id(const std::string& c, const std::string& m) {
    return "method:" + c + "." + m;
}
std::string type_id(const std::string& name) { return "type:" + name; }
std::string panel_id(const std::string& c) { return "panel:" + c; }
std::string field_id(const std::string& c, const std::string& a) {
    return "field:" + c + "." + a;
}

const std::vector<std::string>& builtin_type_names() {
    static const std::vector<std::string> names = {"String", "boolean", "double", "int", "void"};
    return names;
}

namespace {

std::string join_issues(const std::vector<ExtractionError::FileIssue>& issues) {
    std::string out = "extraction failed:";
    for (const auto& i : issues) out += "\n  " + i.file + ": " + i.message;
    return out;
}

void add_type_use(std::vector<Fact>& facts, const std::string& name) {
    facts.push_back(VertexFact{type_id(name), "type"});
    facts.push_back(PropertyFact{type_id(name), "name", Value(name)});
}

}  // namespace

ExtractionError::ExtractionError(std::vector<FileIssue> iss)
    : Error(join_issues(iss)), issues(std::move(iss)) {}

std::vector<Fact> analyze_class_facts(const SourceUnit& unit) {
    const ClassDecl& decl = unit.class_decl;
    const std::string c = decl.name;
    std::vector<Fact> facts;
    facts.push_back(VertexFact{class_id(c), "class"});
    facts.push_back(PropertyFact{class_id(c), "name", Value(c)});
    facts.push_back(PropertyFact{class_id(c), "source_file", Value(unit.file_path)});
    if (decl.superclass)
        facts.push_back(EdgeFact{"e:extends:" + c, class_id(c), class_id(*decl.superclass),
                                 "extends"});
    for (const auto& f : decl.fields) {
        facts.push_back(VertexFact{attr_id(c, f.name), "attribute"});
        facts.push_back(PropertyFact{attr_id(c, f.name), "name", Value(f.name)});
        facts.push_back(EdgeFact{"e:has_attribute:" + c + "." + f.name, class_id(c),
                                 attr_id(c, f.name), "has_attribute"});
        facts.push_back(EdgeFact{"e:has_type:" + c + "." + f.name, attr_id(c, f.name),
                                 type_id(f.type.name), "has_type"});
        add_type_use(facts, f.type.name);
    }
    for (const auto& m : decl.methods) {
        facts.push_back(VertexFact{method_id(c, m.name), "method"});
        facts.push_back(PropertyFact{method_id(c, m.name), "name", Value(m.name)});
        facts.push_back(EdgeFact{"e:has_method:" + c + "." + m.name, class_id(c),
                                 method_id(c, m.name), "has_method"});
        facts.push_back(EdgeFact{"e:returns:" + c + "." + m.name, method_id(c, m.name),
                                 type_id(m.return_type.name), "returns"});
        add_type_use(facts, m.return_type.name);
    }
    return facts;
}

namespace {

struct UiArgs {
    std::optional<std::string> label;
    std::optional<long long> position;
    std::optional<bool> visible;
};

UiArgs read_ui_args(const Annotation& a, const std::string& where) {
    UiArgs out;
    for (const auto& [key, value] : a.args) {
        if (key == "label") {
            const auto* s = std::get_if<std::string>(&value);
            if (!s) throw UiAnnotationError(where + ": label must be a string");
            out.label = *s;
        } else if (key == "position") {
            const auto* i = std::get_if<long long>(&value);
            if (!i || *i < 1)
                throw UiAnnotationError(where + ": position must be an integer >= 1");
            out.position = *i;
        } else if (key == "visible") {
            const auto* b = std::get_if<bool>(&value);
            if (!b) throw UiAnnotationError(where + ": visible must be a boolean");
            out.visible = *b;
        } else {
            throw UiAnnotationError(where + ": unknown argument '" + key + "'");
        }
    }
    return out;
}

const Annotation* find_annotation(const std::vector<Annotation>& annotations,
                                  const std::string& name) {
    for (const auto& a : annotations)
        if (a.name == name) return &a;
    return nullptr;
}

}  // namespace

std::vector<Fact> analyze_ui_facts(const SourceUnit& unit) {
    const ClassDecl& decl = unit.class_decl;
    const std::string c = decl.name;
    std::vector<Fact> facts;

    if (find_annotation(decl.annotations, "UiField"))
        throw UiAnnotationError(c + ": @UiField is only valid on fields");
    for (const auto& m : decl.methods) {
        if (find_annotation(m.annotations, "Panel") || find_annotation(m.annotations, "UiField"))
            throw UiAnnotationError(c + "." + m.name + ": UI annotations are not valid on methods");
    }
    for (const auto& f : decl.fields) {
        if (find_annotation(f.annotations, "Panel"))
            throw UiAnnotationError(c + "." + f.name + ": @Panel is only valid on classes");
    }

    const Annotation* panel = find_annotation(decl.annotations, "Panel");
    if (panel) {
        UiArgs args = read_ui_args(*panel, c);
        facts.push_back(VertexFact{panel_id(c), "panel"});
        facts.push_back(EdgeFact{"e:represents:" + c, panel_id(c), class_id(c), "represents"});
        facts.push_back(PropertyFact{panel_id(c), "label", Value(args.label.value_or(c))});
        facts.push_back(PropertyFact{panel_id(c), "visible", Value(args.visible.value_or(true))});
        if (args.position)
            facts.push_back(PropertyFact{panel_id(c), "position", Value(*args.position)});
    }

    std::set<long long> used_positions;
    struct PendingField {
        const FieldDecl* field;
        UiArgs args;
    };
    std::vector<PendingField> pending;
    for (const auto& f : decl.fields) {
        const Annotation* ui = find_annotation(f.annotations, "UiField");
        if (!ui) continue;
        if (!panel)
            throw UiAnnotationError(c + "." + f.name + ": @UiField requires @Panel on the class");
        UiArgs args = read_ui_args(*ui, c + "." + f.name);
        if (args.position) {
            if (used_positions.count(*args.position))
                throw UiAnnotationError(c + "." + f.name + ": field position " +
                                        std::to_string(*args.position) + " already in use");
            used_positions.insert(*args.position);
        }
        pending.push_back({&f, std::move(args)});
    }
    long long next_free = 1;
    auto take_free = [&] {
        while (used_positions.count(next_free)) next_free++;
        used_positions.insert(next_free);
        return next_free;
    };
    for (auto& p : pending) {
        const std::string& a = p.field->name;
        long long position = p.args.position ? *p.args.position : take_free();
        facts.push_back(VertexFact{field_id(c, a), "field"});
        facts.push_back(EdgeFact{"e:reflects:" + c + "." + a, field_id(c, a), attr_id(c, a),
                                 "reflects"});
        facts.push_back(EdgeFact{"e:has_field:" + c + "." + a, panel_id(c), field_id(c, a),
                                 "has_field"});
        facts.push_back(PropertyFact{field_id(c, a), "label", Value(p.args.label.value_or(a))});
        facts.push_back(PropertyFact{field_id(c, a), "position", Value(position)});
        facts.push_back(
            PropertyFact{field_id(c, a), "visible", Value(p.args.visible.value_or(true))});
    }
    return facts;
}

KnowledgeBase merge_facts(const std::vector<std::vector<Fact>>& fact_sets) {
    std::set<Fact> merged;
    std::map<std::string, std::string> vertex_labels;
    std::map<std::pair<std::string, std::string>, Value> property_values;
    std::map<std::string, EdgeFact> edge_defs;
    for (const auto& set : fact_sets) {
        for (const auto& fact : set) {
            if (const auto* v = std::get_if<VertexFact>(&fact)) {
                auto [it, fresh] = vertex_labels.emplace(v->id, v->label);
                if (!fresh && it->second != v->label)
                    throw ExtractionError({{v->id, "conflicting vertex labels"}});
            } else if (const auto* e = std::get_if<EdgeFact>(&fact)) {
                auto [it, fresh] = edge_defs.emplace(e->id, *e);
                if (!fresh && !(it->second == *e))
                    throw ExtractionError({{e->id, "conflicting edge definitions"}});
            } else if (const auto* p = std::get_if<PropertyFact>(&fact)) {
                auto [it, fresh] = property_values.emplace(std::make_pair(p->owner, p->key),
                                                           p->value);
                if (!fresh && !(it->second == p->value))
                    throw ExtractionError(
                        {{p->owner, "conflicting values for property '" + p->key + "'"}});
            }
            merged.insert(fact);
        }
    }

    // Panels: explicit positions must not collide; panels without one get the
    // smallest unused index in lexicographic panel id order.
    std::set<long long> used;
    std::map<long long, std::string> position_owner;
    std::vector<std::string> unplaced;
    for (const auto& [id, label] : vertex_labels) {
        if (label != "panel") continue;
        auto it = property_values.find({id, "position"});
        if (it == property_values.end()) {
            unplaced.push_back(id);
            continue;
        }
        long long p = std::get<long long>(it->second);
        auto [owner_it, fresh] = position_owner.emplace(p, id);
        if (!fresh)
            throw ExtractionError({{id, "panel position " + std::to_string(p) +
                                            " already used by " + owner_it->second}});
        used.insert(p);
    }
    long long next_free = 1;
    for (const auto& id : unplaced) {
        while (used.count(next_free)) next_free++;
        used.insert(next_free);
        merged.insert(PropertyFact{id, "position", Value(next_free)});
    }

    // Field positions may collide across files only through a duplicated
    // panel, which the conflict checks above already reject.

    // An extends edge whose target class is not declared anywhere cannot be
    // represented; the semantic defect is still reported by the metrics.
    std::erase_if(merged, [&](const Fact& fact) {
        const auto* e = std::get_if<EdgeFact>(&fact);
        return e && e->label == "extends" && !vertex_labels.count(e->to);
    });

    return KnowledgeBase::from_facts({merged.begin(), merged.end()});
}

KnowledgeBase process_metadata(KnowledgeBase kb) {
    for (const auto& name : builtin_type_names()) {
        if (!kb.has_vertex(type_id(name))) kb.add_vertex(type_id(name), "type");
        kb.set_property(type_id(name), "name", Value(name));
    }

    // Mark accessor pairs: for attribute a of class C with type T, a method
    // C.get<A> returning T or C.set<A> returning void counts as generated.
    for (const auto& [eid, e] : kb.edges()) {
        if (e.label != "has_attribute") continue;
        const std::string& cls = e.from;
        const std::string& attr = e.to;
        auto name = kb.property(attr, "name");
        if (!name) continue;
        const std::string attr_name = std::get<std::string>(*name);
        std::string attr_type;
        for (const auto& out : kb.edges_from(attr, "has_type")) {
            const auto& t = kb.edges().at(out).to;
            if (t.rfind("type:", 0) == 0) attr_type = t.substr(5);
        }
        if (attr_type.empty()) continue;
        std::string class_name = cls.substr(cls.find(':') + 1);
        auto mark_if_accessor = [&](const std::string& method_name,
                                    const std::string& return_type) {
            std::string mid = method_id(class_name, method_name);
            if (!kb.has_vertex(mid)) return;
            if (!kb.has_edge("e:has_method:" + class_name + "." + method_name)) return;
            auto returns = kb.edges().find("e:returns:" + class_name + "." + method_name);
            if (returns == kb.edges().end() || returns->second.to != type_id(return_type)) return;
            kb.set_property(mid, "generated", Value(true));
        };
        mark_if_accessor(getter_name(attr_name), attr_type);
        mark_if_accessor(setter_name(attr_name), "void");
    }
    return kb;
}

KnowledgeBase extract_model(const std::filesystem::path& repo) {
    std::vector<ExtractionError::FileIssue> issues;
    std::vector<std::vector<Fact>> fact_sets;
    for (const std::string& rel : list_source_files(repo)) {
        try {
            SourceUnit unit = parse_unit(read_file(repo / rel), rel);
            std::vector<Fact> facts = analyze_class_facts(unit);
            std::vector<Fact> ui = analyze_ui_facts(unit);
            facts.insert(facts.end(), ui.begin(), ui.end());
            fact_sets.push_back(std::move(facts));
        } catch (const SyntaxError& e) {
            issues.push_back({rel, e.what()});
        } catch (const UiAnnotationError& e) {
            issues.push_back({rel, e.what()});
        }
    }
    if (!issues.empty()) throw ExtractionError(std::move(issues));
    return process_metadata(merge_facts(fact_sets));
}

}  // namespace parthenos
