#include "parthenos/injection.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "parthenos/extraction.hpp"

namespace parthenos {

namespace {

std::string strip_prefix(const std::string& id) {
    size_t colon = id.find(':');
    return colon == std::string::npos ? id : id.substr(colon + 1);
}

std::string qualified_class(const std::string& id) {
    // attr:Book.title -> Book ; panel:Book -> Book
    std::string rest = strip_prefix(id);
    size_t dot = rest.find('.');
    return dot == std::string::npos ? rest : rest.substr(0, dot);
}

std::string qualified_member(const std::string& id) {
    std::string rest = strip_prefix(id);
    size_t dot = rest.find('.');
    return dot == std::string::npos ? std::string() : rest.substr(dot + 1);
}

}  // namespace

Json injection_model_json(const InjectionModel& model) {
    Json j;
    j["injection"] = model.injection;
    if (model.target_file)
        j["target_file"] = *model.target_file;
    else
        j["target_file"] = nullptr;
    j["params"] = model.params;
    return j;
}

InjectionModel parse_injection_model(const Json& j) {
    if (!j.is_object() || !j.contains("injection") || !j.contains("params"))
        throw InjectionError("injection model must have 'injection' and 'params'");
    InjectionModel model;
    model.injection = j.at("injection").get<std::string>();
    if (j.contains("target_file") && !j.at("target_file").is_null())
        model.target_file = j.at("target_file").get<std::string>();
    model.params = j.at("params");
    return model;
}

std::string model_target_file(const InjectionModel& model) {
    if (model.target_file) return *model.target_file;
    if (model.injection == "add_class")
        return model.params.at("name").get<std::string>() + ".pss";
    throw InjectionError("injection model has no target file: " + model.injection);
}

std::vector<TypeError> typecheck_delta(const KnowledgeBase& kb, const Delta& delta) {
    std::vector<TypeError> errors;

    std::set<Fact> post_facts;
    for (const auto& f : kb.facts()) post_facts.insert(f);
    for (const auto& f : delta.removed) post_facts.erase(f);
    for (const auto& f : delta.added) post_facts.insert(f);

    // Lenient post-state: facts that cannot be represented (a dangling
    // extends edge, say) are left out here and reported by the per-edge
    // checks below.
    KnowledgeBase post;
    for (const auto& f : post_facts)
        if (const auto* v = std::get_if<VertexFact>(&f)) {
            if (!post.has_element(v->id)) post.add_vertex(v->id, v->label);
        }
    for (const auto& f : post_facts)
        if (const auto* e = std::get_if<EdgeFact>(&f)) {
            if (!post.has_element(e->id) && post.has_vertex(e->from) && post.has_vertex(e->to))
                post.add_edge(e->id, e->from, e->to, e->label);
        }
    for (const auto& f : post_facts)
        if (const auto* p = std::get_if<PropertyFact>(&f)) {
            if (post.has_element(p->owner) && !post.property(p->owner, p->key))
                post.set_property(p->owner, p->key, p->value);
        }

    std::set<std::string> class_names;
    for (const auto& [id, label] : post.vertices())
        if (label == "class") class_names.insert(strip_prefix(id));
    auto type_exists = [&](const std::string& name) {
        return is_builtin_type(name) || class_names.count(name) > 0;
    };

    auto attribute_names = [&](const std::string& class_vertex) {
        std::set<std::string> names;
        for (const auto& eid : post.edges_from(class_vertex, "has_attribute")) {
            auto name = post.property(post.edges().at(eid).to, "name");
            if (name) names.insert(std::get<std::string>(*name));
        }
        return names;
    };
    auto method_names = [&](const std::string& class_vertex) {
        std::set<std::string> names;
        for (const auto& eid : post.edges_from(class_vertex, "has_method")) {
            auto name = post.property(post.edges().at(eid).to, "name");
            if (name) names.insert(std::get<std::string>(*name));
        }
        return names;
    };
    auto superclass_of = [&](const std::string& class_vertex) -> std::optional<std::string> {
        for (const auto& eid : post.edges_from(class_vertex, "extends"))
            return post.edges().at(eid).to;
        return std::nullopt;
    };

    for (const auto& fact : delta.added) {
        const auto* e = std::get_if<EdgeFact>(&fact);
        if (!e) continue;
        if (e->label == "has_type" || e->label == "returns") {
            std::string t = strip_prefix(e->to);
            if (!type_exists(t))
                errors.push_back({"TypeNotFound", e->id + " targets unknown type '" + t + "'"});
        } else if (e->label == "extends") {
            if (!post.has_vertex(e->to)) {
                errors.push_back(
                    {"SuperclassNotFound", strip_prefix(e->to) + " is not a declared class"});
                continue;
            }
            std::set<std::string> seen{e->from};
            std::optional<std::string> cur = e->to;
            while (cur) {
                if (seen.count(*cur)) {
                    errors.push_back({"InheritanceCycle",
                                      "extends chain through " + strip_prefix(e->from) +
                                          " forms a cycle"});
                    break;
                }
                seen.insert(*cur);
                cur = post.has_vertex(*cur) ? superclass_of(*cur) : std::nullopt;
            }
        } else if (e->label == "represents") {
            if (!post.has_vertex(e->to))
                errors.push_back({"TargetNotFound", e->id + " references missing class"});
        } else if (e->label == "reflects") {
            if (!post.has_vertex(e->to))
                errors.push_back({"TargetNotFound", e->id + " references missing attribute"});
        } else if (e->label == "has_field") {
            if (!post.has_vertex(e->from) || !post.has_vertex(e->to))
                errors.push_back({"TargetNotFound", e->id + " references missing panel or field"});
        } else if (e->label == "has_attribute") {
            // Duplicate member check across the inheritance chain.
            auto name = post.property(e->to, "name");
            if (!name) continue;
            const std::string attr_name = std::get<std::string>(*name);
            size_t own_count = 0;
            for (const auto& eid : post.edges_from(e->from, "has_attribute")) {
                auto n = post.property(post.edges().at(eid).to, "name");
                if (n && std::get<std::string>(*n) == attr_name) own_count++;
            }
            if (own_count > 1)
                errors.push_back({"DuplicateMember", strip_prefix(e->from) + " declares '" +
                                                         attr_name + "' more than once"});
            std::set<std::string> seen{e->from};
            auto cur = superclass_of(e->from);
            while (cur && !seen.count(*cur)) {
                seen.insert(*cur);
                if (attribute_names(*cur).count(attr_name)) {
                    errors.push_back({"DuplicateMember",
                                      "'" + attr_name + "' already exists in superclass " +
                                          strip_prefix(*cur)});
                    break;
                }
                cur = superclass_of(*cur);
            }
            // The other direction: a subclass that already declares the name
            // now inherits a duplicate.
            for (const auto& [vid, vlabel] : post.vertices()) {
                if (vlabel != "class" || vid == e->from) continue;
                if (!attribute_names(vid).count(attr_name)) continue;
                std::set<std::string> walked{vid};
                auto up = superclass_of(vid);
                while (up && !walked.count(*up)) {
                    if (*up == e->from) {
                        errors.push_back({"DuplicateMember",
                                          "'" + attr_name + "' in " + strip_prefix(vid) +
                                              " is shadowed through " + strip_prefix(e->from)});
                        break;
                    }
                    walked.insert(*up);
                    up = superclass_of(*up);
                }
            }
        } else if (e->label == "has_method") {
            auto name = post.property(e->to, "name");
            if (!name) continue;
            const std::string mname = std::get<std::string>(*name);
            std::set<std::string> seen{e->from};
            auto cur = superclass_of(e->from);
            while (cur && !seen.count(*cur)) {
                seen.insert(*cur);
                if (method_names(*cur).count(mname)) {
                    errors.push_back({"DuplicateMember",
                                      "method '" + mname + "' already exists in superclass " +
                                          strip_prefix(*cur)});
                    break;
                }
                cur = superclass_of(*cur);
            }
        }
    }
    return errors;
}

namespace {

struct DeltaIndex {
    std::map<std::string, std::string> added_vertices;  // id -> label
    std::map<std::string, EdgeFact> added_edges;
    std::map<std::pair<std::string, std::string>, Value> added_props;
    std::map<std::string, std::string> removed_vertices;
    std::map<std::string, EdgeFact> removed_edges;
    std::map<std::pair<std::string, std::string>, Value> removed_props;

    std::set<Fact> unconsumed;

    explicit DeltaIndex(const Delta& delta) {
        for (const auto& f : delta.added) {
            unconsumed.insert(f);
            if (const auto* v = std::get_if<VertexFact>(&f))
                added_vertices[v->id] = v->label;
            else if (const auto* e = std::get_if<EdgeFact>(&f))
                added_edges[e->id] = *e;
            else if (const auto* p = std::get_if<PropertyFact>(&f))
                added_props[{p->owner, p->key}] = p->value;
        }
        for (const auto& f : delta.removed) {
            unconsumed.insert(f);
            if (const auto* v = std::get_if<VertexFact>(&f))
                removed_vertices[v->id] = v->label;
            else if (const auto* e = std::get_if<EdgeFact>(&f))
                removed_edges[e->id] = *e;
            else if (const auto* p = std::get_if<PropertyFact>(&f))
                removed_props[{p->owner, p->key}] = p->value;
        }
    }

    void consume_added(const Fact& f) { unconsumed.erase(f); }
    void consume_removed(const Fact& f) { unconsumed.erase(f); }

    bool added_vertex(const std::string& id) const { return added_vertices.count(id) > 0; }
};

struct PlannedModel {
    std::string file;
    int major;
    std::string minor1;
    int minor2;
    InjectionModel model;
};

Value json_to_value(const Json& j) {
    if (j.is_string()) return Value(j.get<std::string>());
    if (j.is_boolean()) return Value(j.get<bool>());
    if (j.is_number_integer()) return Value(j.get<long long>());
    throw InjectionError("expected string, integer, or boolean");
}

Json value_to_json(const Value& v) {
    if (const auto* s = std::get_if<std::string>(&v)) return Json(*s);
    if (const auto* i = std::get_if<long long>(&v)) return Json(*i);
    return Json(std::get<bool>(v));
}

std::string source_file_of(const KnowledgeBase& kb, const std::string& class_name) {
    auto file = kb.property(class_id(class_name), "source_file");
    if (!file) throw UnmappableDelta("class " + class_name + " has no source_file");
    return std::get<std::string>(*file);
}

}  // namespace

std::vector<InjectionModel> plan_injection(const Delta& delta, const KnowledgeBase& kb) {
    DeltaIndex index(delta);
    std::vector<PlannedModel> planned;

    auto ui_args = [&](const std::string& element_id) {
        Json args = Json::object();
        for (const char* key : {"label", "position", "visible"}) {
            auto v = kb.property(element_id, key);
            if (!v) throw UnmappableDelta(element_id + " lacks property '" + std::string(key) + "'");
            args[key] = value_to_json(*v);
        }
        return args;
    };
    auto consume_added_prop = [&](const std::string& owner, const std::string& key) {
        auto it = index.added_props.find({owner, key});
        if (it != index.added_props.end())
            index.consume_added(PropertyFact{owner, key, it->second});
    };

    // New classes.
    for (const auto& [id, label] : index.added_vertices) {
        if (label != "class") continue;
        std::string name = strip_prefix(id);
        Json params;
        params["name"] = name;
        params["superclass"] = nullptr;
        std::string extends_id = "e:extends:" + name;
        auto ext = index.added_edges.find(extends_id);
        if (ext != index.added_edges.end()) {
            params["superclass"] = strip_prefix(ext->second.to);
            index.consume_added(ext->second);
        }
        index.consume_added(VertexFact{id, label});
        consume_added_prop(id, "name");
        consume_added_prop(id, "source_file");
        planned.push_back({name + ".pss", 0, "", 0,
                           InjectionModel{"add_class", std::nullopt, params}});
    }

    // New attributes, with their accessor methods.
    for (const auto& [id, label] : index.added_vertices) {
        if (label != "attribute") continue;
        std::string cls = qualified_class(id);
        std::string attr = qualified_member(id);
        std::string file = source_file_of(kb, cls);
        std::string has_type_id = "e:has_type:" + cls + "." + attr;
        auto type_edge = index.added_edges.find(has_type_id);
        if (type_edge == index.added_edges.end())
            throw UnmappableDelta("attribute " + id + " has no added has_type edge");
        std::string type_name = strip_prefix(type_edge->second.to);

        Json field_params;
        field_params["class"] = cls;
        field_params["name"] = attr;
        field_params["type"] = type_name;
        planned.push_back({file, 1, attr, 0,
                           InjectionModel{"add_field", file, field_params}});

        index.consume_added(VertexFact{id, label});
        consume_added_prop(id, "name");
        index.consume_added(type_edge->second);
        auto has_attr = index.added_edges.find("e:has_attribute:" + cls + "." + attr);
        if (has_attr != index.added_edges.end()) index.consume_added(has_attr->second);

        // Accessors: generated getter/setter vertices for this attribute.
        std::string getter = method_id(cls, getter_name(attr));
        std::string setter = method_id(cls, setter_name(attr));
        if (index.added_vertex(getter) && index.added_vertex(setter)) {
            Json method_params;
            method_params["class"] = cls;
            method_params["attribute"] = attr;
            method_params["type"] = type_name;
            planned.push_back({file, 1, attr, 1,
                               InjectionModel{"add_methods", file, method_params}});
            for (const std::string& mid : {getter, setter}) {
                index.consume_added(VertexFact{mid, "method"});
                consume_added_prop(mid, "name");
                consume_added_prop(mid, "generated");
                std::string qualified = strip_prefix(mid);
                auto hm = index.added_edges.find("e:has_method:" + qualified);
                if (hm != index.added_edges.end()) index.consume_added(hm->second);
                auto rt = index.added_edges.find("e:returns:" + qualified);
                if (rt != index.added_edges.end()) index.consume_added(rt->second);
            }
        }
    }

    // Type vertices are graph metadata; the field declaration carries the
    // type name, so nothing is injected for them.
    for (const auto& [id, label] : index.added_vertices) {
        if (label != "type") continue;
        index.consume_added(VertexFact{id, label});
        consume_added_prop(id, "name");
    }

    // New panels and fields become whole-annotation writes.
    for (const auto& [id, label] : index.added_vertices) {
        if (label != "panel") continue;
        std::string cls = strip_prefix(id);
        std::string file = source_file_of(kb, cls);
        Json params;
        params["annotation"] = "Panel";
        params["member"] = nullptr;
        params["args"] = ui_args(id);
        planned.push_back({file, 2, "", 0, InjectionModel{"set_annotation", file, params}});
        index.consume_added(VertexFact{id, label});
        auto rep = index.added_edges.find("e:represents:" + cls);
        if (rep != index.added_edges.end()) index.consume_added(rep->second);
        for (const char* key : {"label", "position", "visible"}) consume_added_prop(id, key);
    }
    for (const auto& [id, label] : index.added_vertices) {
        if (label != "field") continue;
        std::string cls = qualified_class(id);
        std::string attr = qualified_member(id);
        std::string file = source_file_of(kb, cls);
        Json params;
        params["annotation"] = "UiField";
        params["member"] = attr;
        params["args"] = ui_args(id);
        planned.push_back({file, 3, attr, 0, InjectionModel{"set_annotation", file, params}});
        index.consume_added(VertexFact{id, label});
        std::string qualified = cls + "." + attr;
        auto refl = index.added_edges.find("e:reflects:" + qualified);
        if (refl != index.added_edges.end()) index.consume_added(refl->second);
        auto hf = index.added_edges.find("e:has_field:" + qualified);
        if (hf != index.added_edges.end()) index.consume_added(hf->second);
        for (const char* key : {"label", "position", "visible"}) consume_added_prop(id, key);
    }

    // Removed panels and fields.
    for (const auto& [id, label] : index.removed_vertices) {
        if (label != "field") continue;
        std::string cls = qualified_class(id);
        std::string attr = qualified_member(id);
        std::string file = source_file_of(kb, cls);
        Json params;
        params["annotation"] = "UiField";
        params["member"] = attr;
        planned.push_back({file, 5, attr, 0, InjectionModel{"remove_annotation", file, params}});
        index.consume_removed(VertexFact{id, label});
        std::string qualified = cls + "." + attr;
        for (const auto& eid : {"e:reflects:" + qualified, "e:has_field:" + qualified}) {
            auto e = index.removed_edges.find(eid);
            if (e != index.removed_edges.end()) index.consume_removed(e->second);
        }
        for (const char* key : {"label", "position", "visible"}) {
            auto p = index.removed_props.find({id, key});
            if (p != index.removed_props.end())
                index.consume_removed(PropertyFact{id, key, p->second});
        }
    }
    for (const auto& [id, label] : index.removed_vertices) {
        if (label != "panel") continue;
        std::string cls = strip_prefix(id);
        std::string file = source_file_of(kb, cls);
        Json params;
        params["annotation"] = "Panel";
        params["member"] = nullptr;
        planned.push_back({file, 6, "", 0, InjectionModel{"remove_annotation", file, params}});
        index.consume_removed(VertexFact{id, label});
        auto rep = index.removed_edges.find("e:represents:" + cls);
        if (rep != index.removed_edges.end()) index.consume_removed(rep->second);
        for (const auto& [eid, e] : index.removed_edges)
            if (e.from == id && e.label == "has_field") index.consume_removed(e);
        for (const char* key : {"label", "position", "visible"}) {
            auto p = index.removed_props.find({id, key});
            if (p != index.removed_props.end())
                index.consume_removed(PropertyFact{id, key, p->second});
        }
    }

    // Property changes on surviving panels and fields become single-argument
    // annotation edits.
    for (const auto& [owner_key, value] : index.added_props) {
        const auto& [owner, key] = owner_key;
        PropertyFact fact{owner, key, value};
        if (!index.unconsumed.count(Fact{fact})) continue;
        bool is_panel = owner.rfind("panel:", 0) == 0;
        bool is_field = owner.rfind("field:", 0) == 0;
        if (!is_panel && !is_field) continue;
        if (key != "label" && key != "position" && key != "visible") continue;
        std::string cls = qualified_class(owner);
        std::string file = source_file_of(kb, cls);
        Json params;
        params["annotation"] = is_panel ? "Panel" : "UiField";
        params["member"] = is_panel ? Json(nullptr) : Json(qualified_member(owner));
        params["key"] = key;
        params["value"] = value_to_json(value);
        planned.push_back({file, 4, is_panel ? "" : qualified_member(owner), 0,
                           InjectionModel{"set_annotation", file, params}});
        index.consume_added(fact);
        auto old = index.removed_props.find(owner_key);
        if (old != index.removed_props.end())
            index.consume_removed(PropertyFact{owner, key, old->second});
    }

    if (!index.unconsumed.empty()) {
        std::string msg = "no injection rule for:";
        for (const auto& f : index.unconsumed) msg += "\n  " + render_fact(f);
        throw UnmappableDelta(msg);
    }

    std::stable_sort(planned.begin(), planned.end(), [](const PlannedModel& a,
                                                        const PlannedModel& b) {
        return std::tie(a.file, a.major, a.minor1, a.minor2) <
               std::tie(b.file, b.major, b.minor1, b.minor2);
    });
    std::vector<InjectionModel> out;
    out.reserve(planned.size());
    for (auto& p : planned) out.push_back(std::move(p.model));
    return out;
}

namespace {

const Annotation* find_annotation(const std::vector<Annotation>& annotations,
                                  const std::string& name) {
    for (const auto& a : annotations)
        if (a.name == name) return &a;
    return nullptr;
}

int annotation_rank(const std::string& key) {
    if (key == "label") return 0;
    if (key == "position") return 1;
    if (key == "visible") return 2;
    return 3;
}

void set_annotation_arg(Annotation& a, const std::string& key, const Value& value) {
    for (auto& [k, v] : a.args) {
        if (k == key) {
            v = value;
            return;
        }
    }
    a.args.emplace_back(key, value);
    std::stable_sort(a.args.begin(), a.args.end(), [](const auto& x, const auto& y) {
        return annotation_rank(x.first) < annotation_rank(y.first);
    });
}

Annotation build_annotation(const std::string& name, const Json& args) {
    Annotation a;
    a.name = name;
    for (const char* key : {"label", "position", "visible"})
        if (args.contains(key)) a.args.emplace_back(key, json_to_value(args.at(key)));
    return a;
}

bool is_edit_flavor(const InjectionModel& model) { return model.params.contains("key"); }

std::string annotation_member(const InjectionModel& model) {
    const Json& member = model.params.at("member");
    return member.is_null() ? std::string() : member.get<std::string>();
}

}  // namespace

InjectionPoint locate_injection_point(const SourceUnit& unit, const InjectionModel& model) {
    const ClassDecl& decl = unit.class_decl;
    InjectionPoint point;
    point.file = unit.file_path;
    point.member_index = -1;

    if (model.injection == "add_class") {
        point.anchor = InjectionPoint::Anchor::NewFile;
        return point;
    }
    if (model.injection == "add_field") {
        if (!decl.fields.empty()) {
            point.anchor = InjectionPoint::Anchor::AfterLastField;
            point.member_index = static_cast<int>(decl.fields.size());
        } else if (!decl.methods.empty()) {
            point.anchor = InjectionPoint::Anchor::BeforeFirstMethod;
            point.member_index = 0;
        } else {
            point.anchor = InjectionPoint::Anchor::EndOfClassBody;
            point.member_index = 0;
        }
        return point;
    }
    if (model.injection == "add_methods") {
        point.anchor = InjectionPoint::Anchor::EndOfClassBody;
        point.member_index = static_cast<int>(decl.methods.size());
        return point;
    }
    if (model.injection == "set_annotation" || model.injection == "remove_annotation") {
        point.anchor = InjectionPoint::Anchor::AnnotationSlot;
        std::string member = annotation_member(model);
        point.member = member;
        const std::vector<Annotation>* slot = &decl.annotations;
        if (!member.empty()) {
            const FieldDecl* field = decl.field(member);
            if (!field)
                throw AnchorNotFound(unit.file_path + ": no field '" + member + "' in class " +
                                     decl.name);
            slot = &field->annotations;
            for (size_t i = 0; i < decl.fields.size(); i++)
                if (decl.fields[i].name == member) point.member_index = static_cast<int>(i);
        }
        const std::string annotation = model.params.at("annotation").get<std::string>();
        if ((model.injection == "remove_annotation" || is_edit_flavor(model)) &&
            !find_annotation(*slot, annotation))
            throw AnchorNotFound(unit.file_path + ": no @" + annotation + " annotation on " +
                                 (member.empty() ? "class " + decl.name : "field " + member));
        return point;
    }
    throw InjectionError("unknown injection '" + model.injection + "'");
}

SourceUnit create_unit(const InjectionModel& model) {
    if (model.injection != "add_class") throw InjectionError("create_unit expects add_class");
    SourceUnit unit;
    std::string name = model.params.at("name").get<std::string>();
    unit.file_path = name + ".pss";
    unit.class_decl.name = name;
    const Json& superclass = model.params.at("superclass");
    if (!superclass.is_null()) unit.class_decl.superclass = superclass.get<std::string>();
    return unit;
}

SourceUnit inject_ast(const SourceUnit& unit, const InjectionModel& model) {
    locate_injection_point(unit, model);
    SourceUnit out = unit;
    ClassDecl& decl = out.class_decl;
    const Json& params = model.params;

    if (model.injection == "add_field") {
        std::string name = params.at("name").get<std::string>();
        if (decl.field(name) || decl.method(name))
            throw InjectionError(decl.name + " already has a member '" + name + "'");
        decl.fields.push_back(FieldDecl{name, TypeRef{params.at("type").get<std::string>()}, {}});
        return out;
    }
    if (model.injection == "add_methods") {
        std::string attr = params.at("attribute").get<std::string>();
        std::string type = params.at("type").get<std::string>();
        for (const std::string& name : {getter_name(attr), setter_name(attr)})
            if (decl.field(name) || decl.method(name))
                throw InjectionError(decl.name + " already has a member '" + name + "'");
        MethodDecl getter;
        getter.name = getter_name(attr);
        getter.return_type = TypeRef{type};
        getter.body_text = getter_body(attr);
        decl.methods.push_back(std::move(getter));
        MethodDecl setter;
        setter.name = setter_name(attr);
        setter.return_type = TypeRef{"void"};
        setter.params.emplace_back("value", TypeRef{type});
        setter.body_text = setter_body(attr);
        decl.methods.push_back(std::move(setter));
        return out;
    }

    std::string member = annotation_member(model);
    std::vector<Annotation>* slot = &decl.annotations;
    if (!member.empty()) {
        for (auto& f : decl.fields)
            if (f.name == member) slot = &f.annotations;
    }
    const std::string annotation = params.at("annotation").get<std::string>();

    if (model.injection == "set_annotation") {
        if (is_edit_flavor(model)) {
            for (auto& a : *slot) {
                if (a.name != annotation) continue;
                set_annotation_arg(a, params.at("key").get<std::string>(),
                                   json_to_value(params.at("value")));
                return out;
            }
            throw AnchorNotFound("no @" + annotation + " annotation");  // unreachable after locate
        }
        Annotation fresh = build_annotation(annotation, params.at("args"));
        for (auto& a : *slot) {
            if (a.name == annotation) {
                a = fresh;
                return out;
            }
        }
        slot->push_back(std::move(fresh));
        return out;
    }
    if (model.injection == "remove_annotation") {
        std::erase_if(*slot, [&](const Annotation& a) { return a.name == annotation; });
        return out;
    }
    throw InjectionError("unknown injection '" + model.injection + "'");
}

void write_sources(const std::vector<FileEdit>& edits, const WriteHook& hook) {
    namespace fs = std::filesystem;

    for (const auto& edit : edits) {
        if (!edit.verify_dialect) continue;
        try {
            parse_unit(edit.text, edit.path.filename().string());
        } catch (const SyntaxError& e) {
            throw InjectionError("refusing to write " + edit.path.string() +
                                 ": output does not parse: " + e.what());
        }
    }

    struct Original {
        bool existed = false;
        std::string bytes;
    };
    std::vector<Original> originals(edits.size());
    std::vector<fs::path> temps;
    std::vector<size_t> renamed;

    auto cleanup_temps = [&] {
        for (const auto& t : temps) {
            std::error_code ec;
            fs::remove(t, ec);
        }
    };
    auto rollback = [&] {
        for (auto it = renamed.rbegin(); it != renamed.rend(); ++it) {
            const FileEdit& edit = edits[*it];
            std::error_code ec;
            if (originals[*it].existed) {
                std::ofstream restore(edit.path, std::ios::binary | std::ios::trunc);
                restore << originals[*it].bytes;
            } else {
                fs::remove(edit.path, ec);
            }
        }
        cleanup_temps();
    };

    try {
        for (size_t i = 0; i < edits.size(); i++) {
            const FileEdit& edit = edits[i];
            if (fs::exists(edit.path)) {
                originals[i].existed = true;
                originals[i].bytes = read_file(edit.path);
            }
            fs::path temp = edit.path;
            temp += ".parthenos-tmp";
            {
                std::ofstream out(temp, std::ios::binary | std::ios::trunc);
                if (!out) throw IoError("cannot stage file: " + temp.string());
                out << edit.text;
                if (!out) throw IoError("failed writing staged file: " + temp.string());
            }
            temps.push_back(temp);
            if (hook) hook("stage", i);
        }
        for (size_t i = 0; i < edits.size(); i++) {
            fs::path temp = edits[i].path;
            temp += ".parthenos-tmp";
            fs::rename(temp, edits[i].path);
            temps.erase(std::remove(temps.begin(), temps.end(), temp), temps.end());
            renamed.push_back(i);
            if (hook) hook("rename", i);
        }
    } catch (const std::exception& e) {
        rollback();
        throw InjectionError(std::string("write failed, originals restored: ") + e.what());
    }
}

}  // namespace parthenos
