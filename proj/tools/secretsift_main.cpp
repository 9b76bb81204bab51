// secretsift: scan a repository working tree for leaked secrets, verify
// candidates through layered checks, and benchmark against labeled corpora.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "secretsift/cli.hpp"
#include "secretsift/config.hpp"

namespace {

void add_common_flags(CLI::App* cmd, secretsift::ScanConfig& config, std::string& config_path) {
    cmd->add_option("--config", config_path, "JSON config file; flags override file values");
    cmd->add_option("--format", config.format, "Output format: json|text")->capture_default_str();
    cmd->add_option("--backend",
                    [&config](const std::vector<std::string>& values) {
                        if (values.back() == "deterministic") {
                            config.backend = secretsift::BackendKind::Deterministic;
                        } else if (values.back() == "http") {
                            config.backend = secretsift::BackendKind::Http;
                        } else {
                            return false;
                        }
                        return true;
                    },
                    "Analysis backend: deterministic|http");
    cmd->add_option("--endpoint", config.http.endpoint, "Chat-completion endpoint URL (http backend)");
    cmd->add_option("--model", config.http.model, "Model name for the http backend");
    cmd->add_option("--max-iters", config.max_iterations, "Commander iteration bound")
        ->capture_default_str();
    cmd->add_option("--levels",
                    [&config](const std::vector<std::string>& values) {
                        const std::string& v = values.back();
                        if (v == "1") config.levels = 1;
                        else if (v == "12") config.levels = 12;
                        else if (v == "123") config.levels = 123;
                        else return false;
                        return true;
                    },
                    "Analysis depth: 1|12|123 (ablation)");
    cmd->add_flag_callback("--no-advanced", [&config] { config.levels = 1; },
                           "Level 1 only (same as --levels 1)");
    cmd->add_flag("--redact", config.redact, "Never print raw secret values outside pool snapshots");
    cmd->add_option("--jobs", config.jobs, "Worker count (0 = logical CPUs)")->capture_default_str();
    cmd->add_option("--window-lines", config.window_lines, "Context window size in lines")
        ->capture_default_str();
    cmd->add_option("--prices", config.price_table_path, "Price table JSON for cost estimates");
}

secretsift::ScanConfig merge_config(const secretsift::ScanConfig& flag_values,
                                    const std::string& config_path, const CLI::App* cmd) {
    if (config_path.empty()) return flag_values;
    secretsift::ScanConfig merged = secretsift::load_config_file(config_path);
    // Flags that were actually given override the file.
    const secretsift::ScanConfig defaults;
    auto given = [cmd](const std::string& name) { return cmd->count(name) > 0; };
    if (given("--format")) merged.format = flag_values.format;
    if (given("--backend")) merged.backend = flag_values.backend;
    if (given("--endpoint")) merged.http.endpoint = flag_values.http.endpoint;
    if (given("--model")) merged.http.model = flag_values.http.model;
    if (given("--max-iters")) merged.max_iterations = flag_values.max_iterations;
    if (given("--levels") || given("--no-advanced")) merged.levels = flag_values.levels;
    if (given("--redact")) merged.redact = flag_values.redact;
    if (given("--jobs")) merged.jobs = flag_values.jobs;
    if (given("--window-lines")) merged.window_lines = flag_values.window_lines;
    if (given("--prices")) merged.price_table_path = flag_values.price_table_path;
    return merged;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"secretsift: repository secret-leak detection and verification"};
    app.require_subcommand(0, 1);

    bool show_version = false;
    app.add_flag("--version", show_version, "Print version info as JSON and exit");

    secretsift::ScanConfig scan_config, verify_config, bench_config;
    std::string scan_config_path, verify_config_path, bench_config_path;
    std::string scan_root = ".", verify_findings, verify_root = ".", bench_manifest, report_path;
    std::string dump_graph_path;
    double min_f1 = -1.0;

    CLI::App* scan = app.add_subcommand("scan", "Scan a working tree and verify every candidate");
    scan->add_option("root", scan_root, "Repository root")->required();
    add_common_flags(scan, scan_config, scan_config_path);
    scan->add_option("--dump-graph", dump_graph_path, "Write the reference graph JSON to a file");

    CLI::App* verify = app.add_subcommand("verify", "Verify findings ingested from an external scanner");
    verify->add_option("findings", verify_findings, "Line-delimited JSON findings file")->required();
    verify->add_option("root", verify_root, "Repository root the findings refer to")->required();
    add_common_flags(verify, verify_config, verify_config_path);

    CLI::App* bench = app.add_subcommand("bench", "Scan labeled repos and score against the manifest");
    bench->add_option("manifest", bench_manifest, "Line-delimited JSON labeled manifest")->required();
    add_common_flags(bench, bench_config, bench_config_path);
    bench->add_option("--min-f1", min_f1, "Fail (exit 1) when F1 falls below this gate");

    CLI::App* report = app.add_subcommand("report", "Re-render a saved JSON report as text");
    report->add_option("report", report_path, "Report JSON file")->required();

    CLI11_PARSE(app, argc, argv);

    if (show_version) {
        std::cout << secretsift::json{{"name", "secretsift"},
                                      {"version", secretsift::kToolVersion},
                                      {"schema_version", secretsift::kSchemaVersion}}
                         .dump()
                  << "\n";
        return secretsift::kExitClean;
    }

    try {
        if (scan->parsed()) {
            auto config = merge_config(scan_config, scan_config_path, scan);
            config.dump_graph_path = dump_graph_path;
            return secretsift::cmd_scan(scan_root, config, std::cout, std::cerr);
        }
        if (verify->parsed()) {
            auto config = merge_config(verify_config, verify_config_path, verify);
            return secretsift::cmd_verify(verify_findings, verify_root, config, std::cout, std::cerr);
        }
        if (bench->parsed()) {
            auto config = merge_config(bench_config, bench_config_path, bench);
            if (min_f1 >= 0.0) config.min_f1 = min_f1;
            return secretsift::cmd_bench(bench_manifest, config, std::cout, std::cerr);
        }
        if (report->parsed()) {
            return secretsift::cmd_report(report_path, std::cout, std::cerr);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return secretsift::kExitError;
    }
    std::cout << app.help() << "\n";
    return secretsift::kExitClean;
}
