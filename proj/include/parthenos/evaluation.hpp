#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "parthenos/kb.hpp"
#include "parthenos/transformation.hpp"

namespace parthenos {

// Element sets per category; scoring compares sets, never bare counts.
struct MetricsReport {
    std::map<std::string, std::set<std::string>> sets;

    const std::set<std::string>& set_for(const std::string& category) const;
    size_t count(const std::string& category) const { return set_for(category).size(); }
};

// Table order: Classes, Attributes, Panels, Fields, Syntax, Semantics, KB.
const std::vector<std::string>& metric_categories();

MetricsReport compute_metrics(const std::filesystem::path& repo, const KnowledgeBase& kb);

struct Score {
    double precision;
    double recall;
    double f_measure;
};

// P = |obtained ∩ expected| / |obtained|, R = ... / |expected|,
// F = 2PR / (P + R); empty obtained gives P = 1, empty expected gives R = 1,
// P = R = 0 gives F = 0.
Score score(const std::set<std::string>& obtained, const std::set<std::string>& expected);

// Two-decimal reporting precision (toward zero).
double round2(double x);
std::string format_metric(double x);

struct ScenarioRequest {
    TransformationRequest request;
    bool expect_applied;
};

struct ScenarioSpec {
    std::string name;
    std::filesystem::path start_repo;
    std::filesystem::path expected_repo;
    std::vector<ScenarioRequest> requests;
};

// Paths in the file are resolved relative to its directory.
ScenarioSpec load_scenario(const std::filesystem::path& file);

struct ScenarioError : Error {
    using Error::Error;
};

struct ScenarioStep {
    std::string op;
    bool applied;
    std::string reason;
    bool sync_ok;  // fact file re-extracted from the repo equals the kept model
};

struct ScenarioRow {
    std::string category;
    size_t m_a;
    size_t m_b;  // |M_AB \ M_A|
    size_t m_ab;
    size_t m_c;
    double precision;
    double recall;
    double f_measure;
};

struct ScenarioResult {
    std::string name;
    std::vector<ScenarioRow> rows;
    double average_f;
    std::vector<ScenarioStep> steps;
    // Repository snapshots (relative path -> bytes, plus "model.pl").
    std::map<std::string, std::string> initial_files;
    std::map<std::string, std::string> final_files;
    KnowledgeBase final_kb;
};

// Runs the scenario on an isolated temporary copy of the start repository:
// extracts M_A, applies the requests (M_C path), extracts M_AB from the
// expected repository, and scores M_C against M_AB per category. Throws
// ScenarioError when a request's outcome contradicts expect_applied.
ScenarioResult run_scenario(const ScenarioSpec& spec);

std::string render_table(const ScenarioResult& result);
nlohmann::json scenario_json(const ScenarioResult& result);

}  // namespace parthenos
