#include "parthenos/transformation.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <set>

#include "parthenos/extraction.hpp"
#include "parthenos/injection.hpp"

namespace parthenos {

namespace {

TransformationOutcome rejected(const KnowledgeBase& kb, const std::string& reason) {
    TransformationOutcome out;
    out.status = TransformationOutcome::Status::rejected;
    out.kb_after = kb;
    out.reason = reason;
    return out;
}

TransformationOutcome applied(const KnowledgeBase& before, KnowledgeBase after) {
    TransformationOutcome out;
    out.status = TransformationOutcome::Status::applied;
    out.delta = kb_diff(before, after);
    out.kb_after = std::move(after);
    return out;
}

// Applies an anchored production; anchored rules must match exactly once.
KnowledgeBase apply_anchored(const Production& production, const Bindings& bindings,
                             const KnowledgeBase& kb) {
    std::vector<Match> matches = find_matches(production.lhs, bindings, kb);
    if (matches.size() != 1)
        throw Error("anchored rule matched " + std::to_string(matches.size()) + " times");
    return apply_spo(production, matches[0], kb).kb;
}

std::optional<std::string> superclass_of(const KnowledgeBase& kb, const std::string& class_name) {
    for (const auto& eid : kb.edges_from(class_id(class_name), "extends"))
        return kb.edges().at(eid).to.substr(6);  // strip "class:"
    return std::nullopt;
}

bool class_has_attribute(const KnowledgeBase& kb, const std::string& class_name,
                         const std::string& attr_name) {
    for (const auto& eid : kb.edges_from(class_id(class_name), "has_attribute")) {
        auto name = kb.property(kb.edges().at(eid).to, "name");
        if (name && std::get<std::string>(*name) == attr_name) return true;
    }
    return false;
}

bool class_has_method(const KnowledgeBase& kb, const std::string& class_name,
                      const std::string& method_name) {
    for (const auto& eid : kb.edges_from(class_id(class_name), "has_method")) {
        auto name = kb.property(kb.edges().at(eid).to, "name");
        if (name && std::get<std::string>(*name) == method_name) return true;
    }
    return false;
}

// Annotation argument strings must survive the dialect's single-line string
// literals.
bool label_fits_source(const std::string& s) {
    return std::none_of(s.begin(), s.end(),
                        [](unsigned char c) { return c < 0x20; });
}

// Walks the extends chain, including the class itself.
bool attribute_in_chain(const KnowledgeBase& kb, const std::string& class_name,
                        const std::string& attr_name) {
    std::set<std::string> seen;
    std::optional<std::string> cur = class_name;
    while (cur && !seen.count(*cur)) {
        seen.insert(*cur);
        if (class_has_attribute(kb, *cur, attr_name)) return true;
        cur = superclass_of(kb, *cur);
    }
    return false;
}

std::string ui_element_id(UiKind kind, const UiTarget& target) {
    return kind == UiKind::panel ? panel_id(target.class_name)
                                 : field_id(target.class_name, target.attribute);
}

std::string ui_element_name(UiKind kind, const UiTarget& target) {
    return kind == UiKind::panel ? "panel " + target.class_name
                                 : "field " + target.class_name + "." + target.attribute;
}

// Position-carrying elements of the permutation the target belongs to:
// all panels, or all fields of one panel.
std::vector<std::pair<std::string, long long>> position_group(const KnowledgeBase& kb,
                                                              UiKind kind,
                                                              const std::string& panel) {
    std::vector<std::pair<std::string, long long>> out;
    if (kind == UiKind::panel) {
        for (const auto& [id, label] : kb.vertices()) {
            if (label != "panel") continue;
            auto p = kb.property(id, "position");
            if (p) out.emplace_back(id, std::get<long long>(*p));
        }
    } else {
        for (const auto& eid : kb.edges_from(panel, "has_field")) {
            const std::string& fid = kb.edges().at(eid).to;
            auto p = kb.property(fid, "position");
            if (p) out.emplace_back(fid, std::get<long long>(*p));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Single-property rewrite, built as an anchored production.
KnowledgeBase set_position_property(const KnowledgeBase& kb, const std::string& element_id,
                                    const std::string& key, const Value& from, const Value& to) {
    const std::string& label = kb.vertices().at(element_id);
    Production p;
    p.lhs.vertices.push_back({element_id, label});
    p.lhs.properties.push_back({element_id, key, from});
    p.rhs.vertices.push_back({element_id, label});
    p.rhs.properties.push_back({element_id, key, to});
    p.mapping[element_id] = element_id;
    return apply_anchored(p, {}, kb);
}

}  // namespace

const char* transform_op_name(TransformOp op) {
    switch (op) {
        case TransformOp::create_class: return "create_class";
        case TransformOp::add_attribute: return "add_attribute";
        case TransformOp::create_panel: return "create_panel";
        case TransformOp::remove_panel: return "remove_panel";
        case TransformOp::create_field: return "create_field";
        case TransformOp::remove_field: return "remove_field";
        case TransformOp::set_label: return "set_label";
        case TransformOp::set_position: return "set_position";
        case TransformOp::set_visibility: return "set_visibility";
    }
    return "?";
}

TransformationOutcome create_class(const KnowledgeBase& kb, const std::string& name,
                                   const std::optional<std::string>& superclass) {
    if (kb.has_vertex(class_id(name))) return rejected(kb, "DuplicateClass: " + name);
    if (superclass && !kb.has_vertex(class_id(*superclass)))
        return rejected(kb, "SuperclassNotFound: " + *superclass);

    Production p;
    Bindings bindings{{"?name", Value(name)}};
    p.rhs.vertices.push_back({"class:?name", "class"});
    p.rhs.properties.push_back({"class:?name", "name", Value(std::string("?name"))});
    p.rhs.properties.push_back({"class:?name", "source_file", Value(std::string("?name.pss"))});
    if (superclass) {
        bindings["?super"] = Value(*superclass);
        p.lhs.vertices.push_back({"class:?super", "class"});
        p.rhs.vertices.push_back({"class:?super", "class"});
        p.mapping["class:?super"] = "class:?super";
        p.rhs.edges.push_back({"e:extends:?name", "class:?name", "class:?super", "extends"});
    }
    return applied(kb, apply_anchored(p, bindings, kb));
}

TransformationOutcome add_attribute(const KnowledgeBase& kb, const std::string& class_name,
                                    const std::string& attr_name, const std::string& type_name) {
    if (!kb.has_vertex(class_id(class_name)))
        return rejected(kb, "ClassNotFound: " + class_name);
    if (!is_builtin_type(type_name) && !kb.has_vertex(class_id(type_name)))
        return rejected(kb, "TypeNotFound: " + type_name);
    if (attribute_in_chain(kb, class_name, attr_name))
        return rejected(kb, "DuplicateAttribute: " + class_name + "." + attr_name);
    // Members share one namespace in source, and the accessors land in it too.
    if (class_has_method(kb, class_name, attr_name))
        return rejected(kb, "DuplicateMember: " + class_name + "." + attr_name);
    for (const std::string& accessor : {getter_name(attr_name), setter_name(attr_name)})
        if (class_has_method(kb, class_name, accessor) ||
            class_has_attribute(kb, class_name, accessor))
            return rejected(kb, "DuplicateMember: " + class_name + "." + accessor);

    Bindings bindings{{"?class", Value(class_name)},
                      {"?attr", Value(attr_name)},
                      {"?type", Value(type_name)},
                      {"?getter", Value(getter_name(attr_name))},
                      {"?setter", Value(setter_name(attr_name))}};
    Production p;
    p.lhs.vertices.push_back({"class:?class", "class"});
    p.rhs.vertices.push_back({"class:?class", "class"});
    p.mapping["class:?class"] = "class:?class";

    auto preserve_or_create_type = [&](const std::string& pattern_id, const std::string& name) {
        if (kb.has_vertex(type_id(name))) {
            p.lhs.vertices.push_back({pattern_id, "type"});
            p.rhs.vertices.push_back({pattern_id, "type"});
            p.mapping[pattern_id] = pattern_id;
        } else {
            p.rhs.vertices.push_back({pattern_id, "type"});
            p.rhs.properties.push_back({pattern_id, "name", Value(name)});
        }
    };
    preserve_or_create_type("type:?type", type_name);
    if (type_name != "void") preserve_or_create_type("type:void", "void");

    p.rhs.vertices.push_back({"attr:?class.?attr", "attribute"});
    p.rhs.properties.push_back({"attr:?class.?attr", "name", Value(std::string("?attr"))});
    p.rhs.edges.push_back({"e:has_attribute:?class.?attr", "class:?class", "attr:?class.?attr",
                           "has_attribute"});
    p.rhs.edges.push_back({"e:has_type:?class.?attr", "attr:?class.?attr", "type:?type",
                           "has_type"});

    p.rhs.vertices.push_back({"method:?class.?getter", "method"});
    p.rhs.properties.push_back({"method:?class.?getter", "name", Value(std::string("?getter"))});
    p.rhs.properties.push_back({"method:?class.?getter", "generated", Value(true)});
    p.rhs.edges.push_back({"e:has_method:?class.?getter", "class:?class",
                           "method:?class.?getter", "has_method"});
    p.rhs.edges.push_back({"e:returns:?class.?getter", "method:?class.?getter", "type:?type",
                           "returns"});

    p.rhs.vertices.push_back({"method:?class.?setter", "method"});
    p.rhs.properties.push_back({"method:?class.?setter", "name", Value(std::string("?setter"))});
    p.rhs.properties.push_back({"method:?class.?setter", "generated", Value(true)});
    p.rhs.edges.push_back({"e:has_method:?class.?setter", "class:?class",
                           "method:?class.?setter", "has_method"});
    p.rhs.edges.push_back({"e:returns:?class.?setter", "method:?class.?setter", "type:void",
                           "returns"});

    return applied(kb, apply_anchored(p, bindings, kb));
}

TransformationOutcome ui_create_element(const KnowledgeBase& kb, UiKind kind,
                                        const UiTarget& target, const UiProps& props) {
    const std::string& cls = target.class_name;
    if (!kb.has_vertex(class_id(cls))) return rejected(kb, "TargetNotFound: class " + cls);
    if (kind == UiKind::field) {
        if (!kb.has_vertex(attr_id(cls, target.attribute)))
            return rejected(kb, "TargetNotFound: attribute " + cls + "." + target.attribute);
        if (!kb.has_vertex(panel_id(cls))) return rejected(kb, "PanelMissing: " + cls);
    }
    const std::string element = ui_element_id(kind, target);
    if (kb.has_vertex(element))
        return rejected(kb, "DuplicateElement: " + ui_element_name(kind, target));

    if (props.label && !label_fits_source(*props.label))
        return rejected(kb, "BadValueType: label must not contain control characters");

    auto group = position_group(kb, kind, panel_id(cls));
    long long n = static_cast<long long>(group.size());
    long long position;
    if (props.position) {
        position = *props.position;
        if (position < 1 || position > n + 1)
            return rejected(kb, "BadValueType: position " + std::to_string(position) +
                                    " out of range 1.." + std::to_string(n + 1));
    } else {
        // Smallest unused index; n+1 whenever positions form a permutation.
        std::set<long long> used;
        for (const auto& [id, pos] : group) used.insert(pos);
        position = 1;
        while (used.count(position)) position++;
    }

    KnowledgeBase work = kb;
    // Make room: occupied positions >= the insertion point shift up by one.
    std::vector<std::pair<std::string, long long>> shifted;
    for (const auto& [id, pos] : group)
        if (pos >= position) shifted.emplace_back(id, pos);
    std::sort(shifted.begin(), shifted.end(),
              [](const auto& a, const auto& b) { return a.second > b.second; });
    for (const auto& [id, pos] : shifted)
        work = set_position_property(work, id, "position", Value(pos), Value(pos + 1));

    std::string label = props.label.value_or(kind == UiKind::panel ? cls : target.attribute);
    bool visible = props.visible.value_or(true);

    Production p;
    Bindings bindings{{"?class", Value(cls)}};
    if (kind == UiKind::panel) {
        p.lhs.vertices.push_back({"class:?class", "class"});
        p.rhs.vertices.push_back({"class:?class", "class"});
        p.mapping["class:?class"] = "class:?class";
        p.rhs.vertices.push_back({"panel:?class", "panel"});
        p.rhs.edges.push_back({"e:represents:?class", "panel:?class", "class:?class",
                               "represents"});
        p.rhs.properties.push_back({"panel:?class", "label", Value(label)});
        p.rhs.properties.push_back({"panel:?class", "position", Value(position)});
        p.rhs.properties.push_back({"panel:?class", "visible", Value(visible)});
    } else {
        bindings["?attr"] = Value(target.attribute);
        p.lhs.vertices.push_back({"attr:?class.?attr", "attribute"});
        p.lhs.vertices.push_back({"panel:?class", "panel"});
        p.rhs.vertices.push_back({"attr:?class.?attr", "attribute"});
        p.rhs.vertices.push_back({"panel:?class", "panel"});
        p.mapping["attr:?class.?attr"] = "attr:?class.?attr";
        p.mapping["panel:?class"] = "panel:?class";
        p.rhs.vertices.push_back({"field:?class.?attr", "field"});
        p.rhs.edges.push_back({"e:reflects:?class.?attr", "field:?class.?attr",
                               "attr:?class.?attr", "reflects"});
        p.rhs.edges.push_back({"e:has_field:?class.?attr", "panel:?class", "field:?class.?attr",
                               "has_field"});
        p.rhs.properties.push_back({"field:?class.?attr", "label", Value(label)});
        p.rhs.properties.push_back({"field:?class.?attr", "position", Value(position)});
        p.rhs.properties.push_back({"field:?class.?attr", "visible", Value(visible)});
    }
    return applied(kb, apply_anchored(p, bindings, work));
}

TransformationOutcome ui_remove_element(const KnowledgeBase& kb, UiKind kind,
                                        const UiTarget& target) {
    const std::string element = ui_element_id(kind, target);
    if (!kb.has_vertex(element))
        return rejected(kb, "TargetNotFound: " + ui_element_name(kind, target));

    KnowledgeBase work = kb;
    auto delete_vertex_rule = [&](const std::string& id, const std::string& label) {
        Production p;
        p.lhs.vertices.push_back({id, label});
        work = apply_anchored(p, {}, work);
    };

    std::string panel = kind == UiKind::panel ? element : panel_id(target.class_name);
    long long removed_position = 0;
    auto pos = kb.property(element, "position");
    if (pos) removed_position = std::get<long long>(*pos);

    if (kind == UiKind::panel) {
        // A panel takes its fields with it.
        std::vector<std::string> fields;
        for (const auto& eid : kb.edges_from(element, "has_field"))
            fields.push_back(kb.edges().at(eid).to);
        std::sort(fields.begin(), fields.end());
        for (const auto& fid : fields) delete_vertex_rule(fid, "field");
        delete_vertex_rule(element, "panel");
        // Close the gap in the panel position permutation.
        if (removed_position > 0) {
            auto group = position_group(kb, UiKind::panel, panel);
            std::sort(group.begin(), group.end(),
                      [](const auto& a, const auto& b) { return a.second < b.second; });
            for (const auto& [id, p] : group)
                if (id != element && p > removed_position)
                    work = set_position_property(work, id, "position", Value(p), Value(p - 1));
        }
    } else {
        delete_vertex_rule(element, "field");
        if (removed_position > 0) {
            auto group = position_group(kb, UiKind::field, panel);
            std::sort(group.begin(), group.end(),
                      [](const auto& a, const auto& b) { return a.second < b.second; });
            for (const auto& [id, p] : group)
                if (id != element && p > removed_position)
                    work = set_position_property(work, id, "position", Value(p), Value(p - 1));
        }
    }
    return applied(kb, work);
}

TransformationOutcome ui_set_property(const KnowledgeBase& kb, UiKind kind, const UiTarget& target,
                                      const std::string& key, const Value& value) {
    const std::string element = ui_element_id(kind, target);
    if (!kb.has_vertex(element))
        return rejected(kb, "TargetNotFound: " + ui_element_name(kind, target));

    if (key == "label") {
        const auto* s = std::get_if<std::string>(&value);
        if (!s) return rejected(kb, "BadValueType: label must be a string");
        if (!label_fits_source(*s))
            return rejected(kb, "BadValueType: label must not contain control characters");
    }
    if (key == "visible" && !std::holds_alternative<bool>(value))
        return rejected(kb, "BadValueType: visible must be a boolean");
    if (key == "position" &&
        (!std::holds_alternative<long long>(value) || std::get<long long>(value) < 1))
        return rejected(kb, "BadValueType: position must be an integer >= 1");

    if (key == "label" || key == "visible") {
        auto current = kb.property(element, key);
        Production p;
        const std::string& label = kb.vertices().at(element);
        p.lhs.vertices.push_back({element, label});
        p.rhs.vertices.push_back({element, label});
        p.mapping[element] = element;
        if (current) p.lhs.properties.push_back({element, key, *current});
        p.rhs.properties.push_back({element, key, value});
        return applied(kb, apply_anchored(p, {}, kb));
    }

    // position: move within the permutation, shifting displaced elements.
    std::string panel = kind == UiKind::panel ? element : panel_id(target.class_name);
    auto group = position_group(kb, kind, panel);
    long long n = static_cast<long long>(group.size());
    long long to = std::get<long long>(value);
    if (to > n)
        return rejected(kb, "BadValueType: position " + std::to_string(to) +
                                " out of range 1.." + std::to_string(n));
    auto current = kb.property(element, "position");
    if (!current) return rejected(kb, "BadValueType: element has no position");
    long long from = std::get<long long>(*current);
    KnowledgeBase work = kb;
    if (to == from) {
        work = set_position_property(work, element, "position", Value(from), Value(to));
        return applied(kb, work);
    }
    if (to < from) {
        std::sort(group.begin(), group.end(),
                  [](const auto& a, const auto& b) { return a.second > b.second; });
        for (const auto& [id, p] : group)
            if (id != element && p >= to && p < from)
                work = set_position_property(work, id, "position", Value(p), Value(p + 1));
    } else {
        std::sort(group.begin(), group.end(),
                  [](const auto& a, const auto& b) { return a.second < b.second; });
        for (const auto& [id, p] : group)
            if (id != element && p > from && p <= to)
                work = set_position_property(work, id, "position", Value(p), Value(p - 1));
    }
    work = set_position_property(work, element, "position", Value(from), Value(to));
    return applied(kb, work);
}

namespace {

const std::map<std::string, TransformOp>& op_by_name() {
    static const std::map<std::string, TransformOp> ops = {
        {"create_class", TransformOp::create_class},
        {"add_attribute", TransformOp::add_attribute},
        {"create_panel", TransformOp::create_panel},
        {"remove_panel", TransformOp::remove_panel},
        {"create_field", TransformOp::create_field},
        {"remove_field", TransformOp::remove_field},
        {"set_label", TransformOp::set_label},
        {"set_position", TransformOp::set_position},
        {"set_visibility", TransformOp::set_visibility},
    };
    return ops;
}

struct ParamSpec {
    std::vector<std::string> required;
    std::vector<std::string> optional;
};

const ParamSpec& param_spec(TransformOp op) {
    static const std::map<TransformOp, ParamSpec> specs = {
        {TransformOp::create_class, {{"name"}, {"superclass"}}},
        {TransformOp::add_attribute, {{"class", "name", "type"}, {}}},
        {TransformOp::create_panel, {{"class"}, {"label", "position", "visible"}}},
        {TransformOp::remove_panel, {{"class"}, {}}},
        {TransformOp::create_field, {{"class", "attribute"}, {"label", "position", "visible"}}},
        {TransformOp::remove_field, {{"class", "attribute"}, {}}},
        {TransformOp::set_label, {{"kind", "class", "value"}, {"attribute"}}},
        {TransformOp::set_position, {{"kind", "class", "value"}, {"attribute"}}},
        {TransformOp::set_visibility, {{"kind", "class", "value"}, {"attribute"}}},
    };
    return specs.at(op);
}

Value request_value(const nlohmann::json& j, const std::string& key) {
    if (j.is_string()) return Value(j.get<std::string>());
    if (j.is_boolean()) return Value(j.get<bool>());
    if (j.is_number_integer()) return Value(j.get<long long>());
    throw RequestError("param '" + key + "' must be a string, integer, or boolean");
}

std::string require_identifier(const TransformationRequest& r, const std::string& key) {
    auto it = r.params.find(key);
    const auto* s = it == r.params.end() ? nullptr : std::get_if<std::string>(&it->second);
    if (!s || !is_identifier(*s))
        throw RequestError("param '" + key + "' must be an identifier");
    return *s;
}

}  // namespace

TransformationRequest parse_request(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("op") || !j.contains("params"))
        throw RequestError("request must be an object with 'op' and 'params'");
    if (!j.at("op").is_string()) throw RequestError("'op' must be a string");
    const std::string op_name = j.at("op").get<std::string>();
    auto op_it = op_by_name().find(op_name);
    if (op_it == op_by_name().end()) throw RequestError("unknown op '" + op_name + "'");
    const nlohmann::json& params = j.at("params");
    if (!params.is_object()) throw RequestError("'params' must be an object");

    TransformationRequest request;
    request.op = op_it->second;
    const ParamSpec& spec = param_spec(request.op);
    for (const auto& key : spec.required)
        if (!params.contains(key))
            throw RequestError(op_name + " requires param '" + key + "'");
    for (const auto& [key, value] : params.items()) {
        bool required = std::count(spec.required.begin(), spec.required.end(), key) > 0;
        bool optional = std::count(spec.optional.begin(), spec.optional.end(), key) > 0;
        if (!required && !optional)
            throw RequestError(op_name + " does not take param '" + key + "'");
        if (value.is_null()) {
            // explicit null for an optional param reads as absent
            if (required) throw RequestError(op_name + " requires param '" + key + "'");
            continue;
        }
        request.params[key] = request_value(value, key);
    }

    // Structural validation beyond key presence.
    for (const char* key : {"name", "class", "type", "attribute", "superclass"})
        if (request.params.count(key)) require_identifier(request, key);
    if (request.params.count("kind")) {
        const auto* kind = std::get_if<std::string>(&request.params.at("kind"));
        if (!kind || (*kind != "panel" && *kind != "field"))
            throw RequestError("param 'kind' must be \"panel\" or \"field\"");
        if (*kind == "field" && !request.params.count("attribute"))
            throw RequestError(op_name + " on a field requires param 'attribute'");
        if (*kind == "panel" && request.params.count("attribute"))
            throw RequestError(op_name + " on a panel does not take param 'attribute'");
    }
    return request;
}

TransformationOutcome transform_kb(const KnowledgeBase& kb, const TransformationRequest& request) {
    auto str = [&](const std::string& key) {
        return std::get<std::string>(request.params.at(key));
    };
    auto opt_str = [&](const std::string& key) -> std::optional<std::string> {
        auto it = request.params.find(key);
        if (it == request.params.end()) return std::nullopt;
        return std::get<std::string>(it->second);
    };

    switch (request.op) {
        case TransformOp::create_class:
            return create_class(kb, str("name"), opt_str("superclass"));
        case TransformOp::add_attribute:
            return add_attribute(kb, str("class"), str("name"), str("type"));
        case TransformOp::create_panel:
        case TransformOp::create_field: {
            UiKind kind =
                request.op == TransformOp::create_panel ? UiKind::panel : UiKind::field;
            UiTarget target{str("class"),
                            kind == UiKind::field ? str("attribute") : std::string()};
            UiProps props;
            auto it = request.params.find("label");
            if (it != request.params.end()) {
                const auto* s = std::get_if<std::string>(&it->second);
                if (!s) return rejected(kb, "BadValueType: label must be a string");
                props.label = *s;
            }
            it = request.params.find("position");
            if (it != request.params.end()) {
                const auto* i = std::get_if<long long>(&it->second);
                if (!i) return rejected(kb, "BadValueType: position must be an integer");
                props.position = *i;
            }
            it = request.params.find("visible");
            if (it != request.params.end()) {
                const auto* b = std::get_if<bool>(&it->second);
                if (!b) return rejected(kb, "BadValueType: visible must be a boolean");
                props.visible = *b;
            }
            return ui_create_element(kb, kind, target, props);
        }
        case TransformOp::remove_panel:
            return ui_remove_element(kb, UiKind::panel, UiTarget{str("class"), ""});
        case TransformOp::remove_field:
            return ui_remove_element(kb, UiKind::field,
                                     UiTarget{str("class"), str("attribute")});
        case TransformOp::set_label:
        case TransformOp::set_position:
        case TransformOp::set_visibility: {
            UiKind kind = str("kind") == "panel" ? UiKind::panel : UiKind::field;
            UiTarget target{str("class"),
                            kind == UiKind::field ? str("attribute") : std::string()};
            std::string key = request.op == TransformOp::set_label ? "label"
                              : request.op == TransformOp::set_position ? "position"
                                                                        : "visible";
            return ui_set_property(kb, kind, target, key, request.params.at("value"));
        }
    }
    throw Error("unhandled op");
}

RepoLock::RepoLock(const std::filesystem::path& repo) : path_(repo / "parthenos.lock") {
    int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
        if (errno == EEXIST)
            throw LockError("repository is locked (remove " + path_.string() +
                            " if no other instance is running)");
        throw IoError("cannot create lock file: " + path_.string());
    }
    ::close(fd);
}

RepoLock::~RepoLock() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
}

TransformationOutcome apply_transformation(const KnowledgeBase& kb,
                                           const std::filesystem::path& repo,
                                           const std::filesystem::path& kb_file,
                                           const TransformationRequest& request) {
    RepoLock lock(repo);

    TransformationOutcome outcome = transform_kb(kb, request);
    if (!outcome.applied()) return outcome;

    std::vector<TypeError> type_errors = typecheck_delta(kb, outcome.delta);
    if (!type_errors.empty())
        return rejected(kb, type_errors.front().code + ": " + type_errors.front().message);

    std::vector<InjectionModel> models = plan_injection(outcome.delta, outcome.kb_after);

    std::map<std::string, SourceUnit> units;
    for (const auto& model : models) {
        std::string rel = model_target_file(model);
        auto it = units.find(rel);
        if (model.injection == "add_class") {
            if (it != units.end() || std::filesystem::exists(repo / rel))
                throw InjectionError("file already exists: " + rel);
            units.emplace(rel, create_unit(model));
            continue;
        }
        if (it == units.end()) {
            std::filesystem::path path = repo / rel;
            if (!std::filesystem::exists(path))
                throw InjectionError("target file does not exist: " + rel);
            it = units.emplace(rel, parse_unit(read_file(path), rel)).first;
        }
        it->second = inject_ast(it->second, model);
    }

    std::vector<FileEdit> edits;
    for (const auto& [rel, unit] : units)
        edits.push_back(FileEdit{repo / rel, print_unit(unit), true});
    edits.push_back(FileEdit{kb_file, serialize_kb(outcome.kb_after), false});
    write_sources(edits);
    return outcome;
}

}  // namespace parthenos
