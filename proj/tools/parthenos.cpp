// Command-line front end: extract a model from a repository, apply
// transformations with source injection, run standalone injections, generate
// the UI site, and evaluate scenarios.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "parthenos/dialect.hpp"
#include "parthenos/evaluation.hpp"
#include "parthenos/extraction.hpp"
#include "parthenos/injection.hpp"
#include "parthenos/kb.hpp"
#include "parthenos/transformation.hpp"
#include "parthenos/ui_codegen.hpp"

namespace {

using namespace parthenos;

constexpr int kExitOk = 0;
constexpr int kExitRejected = 1;
constexpr int kExitError = 2;

int run_extract(const std::string& repo, const std::string& out_file) {
    KnowledgeBase kb = extract_model(repo);
    write_sources({FileEdit{out_file, serialize_kb(kb)}});
    std::cout << "extracted " << kb.vertices().size() << " vertices, " << kb.edges().size()
              << " edges, " << kb.properties().size() << " properties to " << out_file << "\n";
    return kExitOk;
}

int run_transform(const std::string& model, const std::string& repo, const std::string& request,
                  bool as_json) {
    KnowledgeBase kb = parse_kb(read_file(model));
    nlohmann::json request_json;
    try {
        request_json = nlohmann::json::parse(read_file(request));
    } catch (const nlohmann::json::parse_error& e) {
        throw RequestError("cannot parse request file: " + std::string(e.what()));
    }
    TransformationRequest parsed = parse_request(request_json);
    TransformationOutcome outcome = apply_transformation(kb, repo, model, parsed);
    if (!outcome.applied()) {
        if (as_json) {
            nlohmann::json j;
            j["status"] = "rejected";
            j["reason"] = outcome.reason;
            std::cout << j.dump(2) << "\n";
        }
        std::cerr << "rejected: " << outcome.reason << "\n";
        return kExitRejected;
    }
    if (as_json) {
        nlohmann::json j;
        j["status"] = "applied";
        j["op"] = transform_op_name(parsed.op);
        j["added_facts"] = outcome.delta.added.size();
        j["removed_facts"] = outcome.delta.removed.size();
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "applied " << transform_op_name(parsed.op) << ": +"
                  << outcome.delta.added.size() << " facts, -" << outcome.delta.removed.size()
                  << " facts\n";
    }
    return kExitOk;
}

int run_inject(const std::string& model_file, const std::string& repo) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(model_file));
    } catch (const nlohmann::json::parse_error& e) {
        throw InjectionError("cannot parse injection model: " + std::string(e.what()));
    }
    InjectionModel model = parse_injection_model(j);
    std::string rel = model_target_file(model);
    std::filesystem::path target = std::filesystem::path(repo) / rel;

    SourceUnit unit;
    if (model.injection == "add_class") {
        if (std::filesystem::exists(target))
            throw InjectionError("file already exists: " + rel);
        unit = create_unit(model);
    } else {
        unit = inject_ast(parse_unit(read_file(target), rel), model);
    }
    write_sources({FileEdit{target, print_unit(unit), true}});
    std::cout << "injected " << model.injection << " into " << rel << "\n";
    return kExitOk;
}

int run_generate_ui(const std::string& model, const std::string& out_dir) {
    KnowledgeBase kb = parse_kb(read_file(model));
    for (const auto& name : generate_site(kb, out_dir))
        std::cout << (std::filesystem::path(out_dir) / name).string() << "\n";
    return kExitOk;
}

int run_evaluate(const std::string& scenario_file, bool as_json) {
    ScenarioSpec spec = load_scenario(scenario_file);
    ScenarioResult result = run_scenario(spec);
    if (as_json)
        std::cout << scenario_json(result).dump(2) << "\n";
    else
        std::cout << render_table(result);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"parthenos - graph-based source maintenance pipeline"};
    app.require_subcommand(1);

    std::string repo, out_file, model, request, scenario, out_dir;
    bool as_json = false;

    CLI::App* extract = app.add_subcommand("extract", "Extract the abstract model of a repository");
    extract->add_option("--repo", repo, "Source repository")->required();
    extract->add_option("--out", out_file, "Fact file to write")->required();

    CLI::App* transform =
        app.add_subcommand("transform", "Apply a transformation and inject the sources");
    transform->add_option("--model", model, "Fact file of the repository model")->required();
    transform->add_option("--repo", repo, "Source repository")->required();
    transform->add_option("--request", request, "Transformation request JSON")->required();
    transform->add_flag("--json", as_json, "Machine-readable report");

    CLI::App* inject = app.add_subcommand("inject", "Run a single injection model (debugging)");
    inject->add_option("--model", model, "Injection model JSON")->required();
    inject->add_option("--repo", repo, "Source repository")->required();

    CLI::App* generate = app.add_subcommand("generate-ui", "Generate the static site");
    generate->add_option("--model", model, "Fact file of the repository model")->required();
    generate->add_option("--out-dir", out_dir, "Output directory")->required();

    CLI::App* evaluate = app.add_subcommand("evaluate", "Run an evaluation scenario");
    evaluate->add_option("--scenario", scenario, "Scenario spec JSON")->required();
    evaluate->add_flag("--json", as_json, "Machine-readable report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitError;
    }

    try {
        if (app.got_subcommand(extract)) return run_extract(repo, out_file);
        if (app.got_subcommand(transform)) return run_transform(model, repo, request, as_json);
        if (app.got_subcommand(inject)) return run_inject(model, repo);
        if (app.got_subcommand(generate)) return run_generate_ui(model, out_dir);
        if (app.got_subcommand(evaluate)) return run_evaluate(scenario, as_json);
    } catch (const ScenarioError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRejected;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
