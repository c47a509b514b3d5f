#include "parthenos/ui_codegen.hpp"

#include <algorithm>
#include <limits>

#include "parthenos/injection.hpp"

namespace parthenos {

namespace {

std::string html_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string strip_prefix(const std::string& id) {
    size_t colon = id.find(':');
    return colon == std::string::npos ? id : id.substr(colon + 1);
}

bool is_visible(const KnowledgeBase& kb, const std::string& id) {
    auto v = kb.property(id, "visible");
    return !v || std::get<bool>(*v);
}

long long position_of(const KnowledgeBase& kb, const std::string& id) {
    auto p = kb.property(id, "position");
    return p ? std::get<long long>(*p) : std::numeric_limits<long long>::max();
}

std::string label_of(const KnowledgeBase& kb, const std::string& id,
                     const std::string& fallback) {
    auto l = kb.property(id, "label");
    return l ? std::get<std::string>(*l) : fallback;
}

std::string input_type_for(const KnowledgeBase& kb, const std::string& attr_vertex) {
    for (const auto& eid : kb.edges_from(attr_vertex, "has_type")) {
        std::string type_name = strip_prefix(kb.edges().at(eid).to);
        if (type_name == "int" || type_name == "double") return "number";
        if (type_name == "boolean") return "checkbox";
    }
    return "text";
}

std::vector<std::string> sorted_by_position(const KnowledgeBase& kb,
                                            std::vector<std::string> ids) {
    std::sort(ids.begin(), ids.end(), [&](const std::string& a, const std::string& b) {
        long long pa = position_of(kb, a);
        long long pb = position_of(kb, b);
        return std::tie(pa, a) < std::tie(pb, b);
    });
    return ids;
}

const char* kStyleCss =
    "body {\n"
    "    font-family: sans-serif;\n"
    "    margin: 2rem auto;\n"
    "    max-width: 40rem;\n"
    "}\n"
    "\n"
    "section.panel {\n"
    "    border: 1px solid #ccc;\n"
    "    border-radius: 4px;\n"
    "    margin-bottom: 1.5rem;\n"
    "    padding: 1rem;\n"
    "}\n"
    "\n"
    "section.panel h2 {\n"
    "    margin-top: 0;\n"
    "}\n"
    "\n"
    ".field {\n"
    "    display: flex;\n"
    "    gap: 0.5rem;\n"
    "    margin-bottom: 0.5rem;\n"
    "}\n"
    "\n"
    ".field label {\n"
    "    min-width: 10rem;\n"
    "}\n";

const char* kAppJs =
    "// Static scaffolding: the forms render entities but submit nowhere.\n"
    "document.addEventListener('submit', function (event) {\n"
    "    event.preventDefault();\n"
    "});\n";

}  // namespace

std::string render_panel(const KnowledgeBase& kb, const std::string& panel_id) {
    if (!is_visible(kb, panel_id)) return "";
    std::string cls = strip_prefix(panel_id);
    std::string out;
    out += "<section class=\"panel\" id=\"panel-" + html_escape(cls) + "\">\n";
    out += "<h2>" + html_escape(label_of(kb, panel_id, cls)) + "</h2>\n";
    out += "<form>\n";

    std::vector<std::string> fields;
    for (const auto& eid : kb.edges_from(panel_id, "has_field"))
        fields.push_back(kb.edges().at(eid).to);
    for (const auto& fid : sorted_by_position(kb, std::move(fields))) {
        if (!is_visible(kb, fid)) continue;
        std::string attr_vertex;
        for (const auto& eid : kb.edges_from(fid, "reflects"))
            attr_vertex = kb.edges().at(eid).to;
        std::string attr_name = strip_prefix(fid);
        size_t dot = attr_name.find('.');
        if (dot != std::string::npos) attr_name = attr_name.substr(dot + 1);
        std::string input_id = "input-" + cls + "-" + attr_name;
        out += "<div class=\"field\">\n";
        out += "<label for=\"" + html_escape(input_id) + "\">" +
               html_escape(label_of(kb, fid, attr_name)) + "</label>\n";
        out += "<input type=\"" + (attr_vertex.empty() ? "text" : input_type_for(kb, attr_vertex)) +
               "\" id=\"" + html_escape(input_id) + "\" name=\"" + html_escape(attr_name) +
               "\">\n";
        out += "</div>\n";
    }
    out += "</form>\n";
    out += "</section>\n";
    return out;
}

std::string render_index_html(const KnowledgeBase& kb) {
    std::string out;
    out += "<!DOCTYPE html>\n";
    out += "<html lang=\"en\">\n";
    out += "<head>\n";
    out += "<meta charset=\"utf-8\">\n";
    out += "<title>Parthenos UI</title>\n";
    out += "<link rel=\"stylesheet\" href=\"style.css\">\n";
    out += "</head>\n";
    out += "<body>\n";
    out += "<main>\n";
    std::vector<std::string> panels;
    for (const auto& [id, label] : kb.vertices())
        if (label == "panel") panels.push_back(id);
    for (const auto& pid : sorted_by_position(kb, std::move(panels)))
        out += render_panel(kb, pid);
    out += "</main>\n";
    out += "<script src=\"app.js\"></script>\n";
    out += "</body>\n";
    out += "</html>\n";
    return out;
}

std::vector<std::string> generate_site(const KnowledgeBase& kb,
                                       const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + out_dir.string());

    write_sources({
        FileEdit{out_dir / "index.html", render_index_html(kb)},
        FileEdit{out_dir / "style.css", kStyleCss},
        FileEdit{out_dir / "app.js", kAppJs},
    });
    return {"index.html", "style.css", "app.js"};
}

}  // namespace parthenos
