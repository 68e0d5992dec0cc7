// lowpapr: run, list and validate link-level simulation scenarios.

#include "lowpapr/scenario.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <iostream>

namespace {

using nlohmann::json;
using namespace lowpapr;

int report_error(const std::string& kind, const std::string& message, const json& issues = json::array())
{
    json err{{"error", kind}, {"message", message}};
    if (!issues.empty()) err["issues"] = issues;
    std::cerr << err.dump() << '\n';
    return kind == "validation" ? 2 : 1;
}

int report_validation(const ValidationError& e)
{
    json issues = json::array();
    for (const auto& i : e.issues()) issues.push_back({{"path", i.path}, {"message", i.message}});
    return report_error("validation", "invalid scenario", issues);
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"DFT-s-OFDM low-PAPR link-level simulator"};
    app.require_subcommand(1);

    std::string target;
    RunOptions opts;
    std::uint64_t seed = 0;
    std::int64_t trials = 0;
    std::string out_dir = ".";

    auto* run_cmd = app.add_subcommand("run", "run a scenario file or bundled scenario");
    run_cmd->add_option("scenario", target, "scenario file or bundled name")->required();
    auto* seed_opt = run_cmd->add_option("--seed", seed, "override the master seed");
    auto* trials_opt = run_cmd->add_option("--trials", trials, "override the trial count")->check(CLI::PositiveNumber);
    run_cmd->add_option("--out-dir", out_dir, "directory for CSV files and manifest.json");
    run_cmd->add_option("--threads", opts.threads, "worker threads")->check(CLI::PositiveNumber);

    auto* list_cmd = app.add_subcommand("list", "list bundled scenarios");

    auto* validate_cmd = app.add_subcommand("validate", "check a scenario without running it");
    validate_cmd->add_option("scenario", target, "scenario file or bundled name")->required();

    auto* show_cmd = app.add_subcommand("show", "print the JSON of a bundled scenario");
    show_cmd->add_option("name", target, "bundled scenario name")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        return report_error("usage", e.what());
    }

    try {
        if (*list_cmd) {
            for (const auto& name : bundled_scenario_names()) {
                const auto s = parse_scenario(bundled_scenario_text(name));
                std::cout << name << '\t' << to_string(s.experiment) << '\t' << s.description << '\n';
            }
            return 0;
        }
        if (*show_cmd) {
            std::cout << bundled_scenario_text(target);
            return 0;
        }
        if (*validate_cmd) {
            const auto s = load_scenario(target);
            std::cout << json{{"status", "ok"}, {"name", s.name}, {"experiment", to_string(s.experiment)}}.dump()
                      << '\n';
            return 0;
        }
        if (*run_cmd) {
            if (*seed_opt) opts.seed = seed;
            if (*trials_opt) opts.trials = trials;
            opts.out_dir = out_dir;
            const auto summary = run(load_scenario(target), opts);
            json out{{"status", "ok"},
                     {"wall_time_s", summary.wall_time_s},
                     {"singular_resamples", summary.singular_resamples},
                     {"warnings", summary.warnings}};
            out["files"] = json::array();
            for (const auto& f : summary.files) out["files"].push_back(f.string());
            for (const auto& [k, v] : summary.metrics) out["metrics"][k] = v;
            std::cout << out.dump(2) << '\n';
            return 0;
        }
    } catch (const ValidationError& e) {
        return report_validation(e);
    } catch (const DomainError& e) {
        return report_error("domain", e.what());
    } catch (const std::exception& e) {
        return report_error("runtime", e.what());
    }
    return 0;
}
