#include "parthenos/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "parthenos/dialect.hpp"
#include "parthenos/extraction.hpp"

namespace parthenos {

namespace fs = std::filesystem;

const std::vector<std::string>& metric_categories() {
    static const std::vector<std::string> categories = {
        "Classes", "Attributes", "Panels", "Fields", "Syntax", "Semantics", "KB"};
    return categories;
}

const std::set<std::string>& MetricsReport::set_for(const std::string& category) const {
    static const std::set<std::string> empty;
    auto it = sets.find(category);
    return it == sets.end() ? empty : it->second;
}

namespace {

// Semantics: resolvable supertypes (transitive, acyclic), resolvable field
// types, and accessor-shaped methods whose types agree with the attribute.
std::set<std::string> semantic_classes(const std::vector<SourceUnit>& units) {
    std::map<std::string, const ClassDecl*> decls;
    for (const auto& u : units) decls[u.class_decl.name] = &u.class_decl;

    auto chain_ok = [&](const ClassDecl& decl) {
        std::set<std::string> seen{decl.name};
        const ClassDecl* cur = &decl;
        while (cur->superclass) {
            auto it = decls.find(*cur->superclass);
            if (it == decls.end()) return false;
            if (seen.count(*cur->superclass)) return false;  // cycle
            seen.insert(*cur->superclass);
            cur = it->second;
        }
        return true;
    };
    auto type_ok = [&](const TypeRef& t) {
        return is_builtin_type(t.name) || decls.count(t.name) > 0;
    };

    std::set<std::string> out;
    for (const auto& u : units) {
        const ClassDecl& decl = u.class_decl;
        bool ok = chain_ok(decl);
        for (const auto& f : decl.fields)
            if (!type_ok(f.type)) ok = false;
        for (const auto& m : decl.methods) {
            for (const auto& f : decl.fields) {
                if (m.name == getter_name(f.name)) {
                    if (!m.params.empty() || !(m.return_type == f.type)) ok = false;
                } else if (m.name == setter_name(f.name)) {
                    if (m.params.size() != 1 || !(m.params[0].second == f.type) ||
                        m.return_type.name != "void")
                        ok = false;
                }
            }
        }
        if (ok) out.insert(decl.name);
    }
    return out;
}

}  // namespace

MetricsReport compute_metrics(const fs::path& repo, const KnowledgeBase& kb) {
    MetricsReport report;
    for (const auto& category : metric_categories()) report.sets[category];

    std::vector<SourceUnit> units;
    for (const auto& entry : list_classes(repo)) {
        report.sets["Classes"].insert(entry.class_name);
        if (!entry.ok) continue;
        report.sets["Syntax"].insert(entry.class_name);
        units.push_back(parse_unit(read_file(repo / entry.file), entry.file));
    }
    for (const auto& u : units)
        for (const auto& f : u.class_decl.fields)
            report.sets["Attributes"].insert(u.class_decl.name + "." + f.name);
    report.sets["Semantics"] = semantic_classes(units);

    for (const auto& [id, label] : kb.vertices()) {
        if (label == "panel") report.sets["Panels"].insert(id);
        if (label == "field") report.sets["Fields"].insert(id);
    }
    for (const auto& fact : kb.facts()) report.sets["KB"].insert(render_fact(fact));
    return report;
}

Score score(const std::set<std::string>& obtained, const std::set<std::string>& expected) {
    std::vector<std::string> inter;
    std::set_intersection(obtained.begin(), obtained.end(), expected.begin(), expected.end(),
                          std::back_inserter(inter));
    double hits = static_cast<double>(inter.size());
    double p = obtained.empty() ? 1.0 : hits / static_cast<double>(obtained.size());
    double r = expected.empty() ? 1.0 : hits / static_cast<double>(expected.size());
    double f = (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
    return Score{p, r, f};
}

double round2(double x) { return std::floor(x * 100.0 + 1e-9) / 100.0; }

std::string format_metric(double x) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(2);
    out << x;
    std::string s = out.str();
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
}

ScenarioSpec load_scenario(const fs::path& file) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(file));
    } catch (const nlohmann::json::parse_error& e) {
        throw ScenarioError("cannot parse scenario file " + file.string() + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("name") || !j.contains("start_repo") ||
        !j.contains("expected_repo") || !j.contains("requests"))
        throw ScenarioError("scenario file must define name, start_repo, expected_repo, requests");
    ScenarioSpec spec;
    spec.name = j.at("name").get<std::string>();
    fs::path base = file.parent_path();
    spec.start_repo = base / j.at("start_repo").get<std::string>();
    spec.expected_repo = base / j.at("expected_repo").get<std::string>();
    for (const auto& rj : j.at("requests")) {
        if (!rj.contains("expect_applied") || !rj.at("expect_applied").is_boolean())
            throw ScenarioError("every request needs a boolean expect_applied");
        ScenarioRequest r{parse_request(rj), rj.at("expect_applied").get<bool>()};
        spec.requests.push_back(std::move(r));
    }
    return spec;
}

namespace {

struct TempWorkspace {
    fs::path dir;

    TempWorkspace() {
        std::random_device rd;
        std::mt19937_64 gen(rd());
        for (int attempt = 0; attempt < 16; attempt++) {
            fs::path candidate = fs::temp_directory_path() /
                                 ("parthenos-" + std::to_string(gen()));
            std::error_code ec;
            if (fs::create_directory(candidate, ec)) {
                dir = candidate;
                return;
            }
        }
        throw IoError("cannot create temporary workspace");
    }

    ~TempWorkspace() {
        std::error_code ec;
        if (!dir.empty()) fs::remove_all(dir, ec);
    }
};

void copy_repo(const fs::path& from, const fs::path& to) {
    std::error_code ec;
    fs::create_directories(to, ec);
    fs::copy(from, to, fs::copy_options::recursive, ec);
    if (ec) throw IoError("cannot copy " + from.string() + " to " + to.string());
}

std::map<std::string, std::string> snapshot(const fs::path& repo, const fs::path& kb_file) {
    std::map<std::string, std::string> out;
    for (const auto& rel : list_source_files(repo)) out[rel] = read_file(repo / rel);
    if (fs::exists(kb_file)) out["model.pl"] = read_file(kb_file);
    return out;
}

}  // namespace

ScenarioResult run_scenario(const ScenarioSpec& spec) {
    TempWorkspace workspace;
    fs::path repo = workspace.dir / "repo";
    copy_repo(spec.start_repo, repo);
    fs::path kb_file = workspace.dir / "model.pl";

    KnowledgeBase kb = extract_model(repo);
    {
        std::ofstream out(kb_file, std::ios::binary);
        out << serialize_kb(kb);
    }

    ScenarioResult result;
    result.name = spec.name;
    result.initial_files = snapshot(repo, kb_file);
    MetricsReport m_a = compute_metrics(repo, kb);

    for (size_t i = 0; i < spec.requests.size(); i++) {
        const ScenarioRequest& r = spec.requests[i];
        TransformationOutcome outcome = apply_transformation(kb, repo, kb_file, r.request);
        if (outcome.applied()) kb = outcome.kb_after;
        ScenarioStep step;
        step.op = transform_op_name(r.request.op);
        step.applied = outcome.applied();
        step.reason = outcome.reason;
        step.sync_ok = serialize_kb(extract_model(repo)) == serialize_kb(kb);
        result.steps.push_back(step);
        if (outcome.applied() != r.expect_applied)
            throw ScenarioError(spec.name + ": request " + std::to_string(i + 1) + " (" +
                                step.op + ") was " +
                                (outcome.applied() ? "applied" : "rejected: " + outcome.reason) +
                                " but the scenario expected the opposite");
    }

    MetricsReport m_c = compute_metrics(repo, kb);
    KnowledgeBase kb_ab = extract_model(spec.expected_repo);
    MetricsReport m_ab = compute_metrics(spec.expected_repo, kb_ab);

    double f_sum = 0.0;
    for (const auto& category : metric_categories()) {
        const auto& a = m_a.set_for(category);
        const auto& ab = m_ab.set_for(category);
        const auto& c = m_c.set_for(category);
        std::vector<std::string> added;
        std::set_difference(ab.begin(), ab.end(), a.begin(), a.end(), std::back_inserter(added));
        Score s = score(c, ab);
        ScenarioRow row;
        row.category = category;
        row.m_a = a.size();
        row.m_b = added.size();
        row.m_ab = ab.size();
        row.m_c = c.size();
        row.precision = round2(s.precision);
        row.recall = round2(s.recall);
        row.f_measure = round2(s.f_measure);
        f_sum += row.f_measure;
        result.rows.push_back(row);
    }
    result.average_f = round2(f_sum / static_cast<double>(result.rows.size()));
    result.final_files = snapshot(repo, kb_file);
    result.final_kb = kb;
    return result;
}

std::string render_table(const ScenarioResult& result) {
    std::ostringstream out;
    out << "Scenario: " << result.name << "\n";
    auto cell = [&](const std::string& text, size_t width) {
        out << text;
        for (size_t i = text.size(); i < width; i++) out << ' ';
    };
    cell("Metrics", 12);
    for (const char* h : {"M_A", "M_B", "M_AB", "M_C"}) cell(h, 7);
    cell("Precision", 11);
    cell("Recall", 8);
    out << "F-measure\n";
    for (const auto& row : result.rows) {
        cell(row.category, 12);
        cell(std::to_string(row.m_a), 7);
        cell(std::to_string(row.m_b), 7);
        cell(std::to_string(row.m_ab), 7);
        cell(std::to_string(row.m_c), 7);
        cell(format_metric(row.precision), 11);
        cell(format_metric(row.recall), 8);
        out << format_metric(row.f_measure) << "\n";
    }
    cell("", 12 + 7 * 4 + 11);
    cell("Average:", 9);
    out << format_metric(result.average_f) << "\n";
    return out.str();
}

nlohmann::json scenario_json(const ScenarioResult& result) {
    nlohmann::json j;
    j["name"] = result.name;
    j["average_f_measure"] = result.average_f;
    j["rows"] = nlohmann::json::array();
    for (const auto& row : result.rows) {
        nlohmann::json rj;
        rj["category"] = row.category;
        rj["m_a"] = row.m_a;
        rj["m_b"] = row.m_b;
        rj["m_ab"] = row.m_ab;
        rj["m_c"] = row.m_c;
        rj["precision"] = row.precision;
        rj["recall"] = row.recall;
        rj["f_measure"] = row.f_measure;
        j["rows"].push_back(rj);
    }
    j["steps"] = nlohmann::json::array();
    for (const auto& step : result.steps) {
        nlohmann::json sj;
        sj["op"] = step.op;
        sj["applied"] = step.applied;
        sj["reason"] = step.reason;
        sj["sync_ok"] = step.sync_ok;
        j["steps"].push_back(sj);
    }
    return j;
}

}  // namespace parthenos
