// Command-line driver for the corner-growth experiment library.
//
// Subcommands:
//   validate-geometry   boundary-reflection self-checks for the configured domain
//   validate-keylemma   small-scale velocity diagnostics near the corner
//   run-growth          coupled field + marker evolution, trace CSV
//   emit-plots          turn CSV artifacts into plot-ready series files
//   print-schema        dump the config schema as JSON
//
// Exit codes: 0 success, 1 a validation suite failed, 2 configuration error,
// 3 runtime/solver error.

#include <CLI11.hpp>

#include <Eigen/Core>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <ess/suites.hpp>

namespace {

constexpr int exit_ok = 0;
constexpr int exit_suite_failed = 1;
constexpr int exit_config_error = 2;
constexpr int exit_runtime_error = 3;

void log_line(const std::string& s) { std::cerr << "[ess] " << s << "\n"; }

struct ManifestScope {
    std::filesystem::path dir;
    ess::RunManifest m;

    explicit ManifestScope(const std::filesystem::path& d, const std::string& hash) : dir(d) {
        std::filesystem::create_directories(dir);
        m.config_hash = hash;
        m.started_at = ess::utc_timestamp();
    }
    void finish() {
        m.finished_at = ess::utc_timestamp();
        ess::write_manifest(dir / "run_manifest.json", m);
    }
};

void store_config_copy(ManifestScope& scope, const ess::ExperimentConfig& cfg) {
    ess::atomic_write_text(scope.dir / "config_used.json", cfg.doc.dump(2) + "\n");
    scope.m.files.push_back("config_used.json");
}

void print_geometry_report(const ess::GeometryReport& rep) {
    for (const auto& c : rep.checks) {
        std::cout << (c.passed ? "[ok]  " : "[FAIL] ") << c.name << ": worst " << c.worst
                  << " (tol " << c.tol << ")";
        if (!c.message.empty()) std::cout << " -- " << c.message;
        std::cout << "\n";
    }
    std::cout << (rep.passed ? "geometry validation passed" : "geometry validation FAILED")
              << " over " << rep.n_samples << " samples\n";
}

int do_validate_geometry(const ess::ExperimentConfig& cfg, const std::filesystem::path& out) {
    ManifestScope scope(out, cfg.hash);
    store_config_copy(scope, cfg);
    const ess::GeometryReport rep = ess::validate_geometry(cfg);
    print_geometry_report(rep);
    ess::write_csv(scope.dir / "geometry_checks.csv", ess::geometry_report_table(rep));
    scope.m.files.push_back("geometry_checks.csv");
    scope.m.suites.push_back({"geometry", rep.passed});
    scope.finish();
    return rep.passed ? exit_ok : exit_suite_failed;
}

void print_keylemma_report(const ess::KeylemmaReport& rep) {
    std::cout << "wall-sector residual: max " << rep.b1.max_abs_residual << ", median "
              << rep.b1.median_abs_residual << " over " << rep.b1.samples.size() << " samples\n";
    std::cout << "axis-sector residual: max " << rep.b2.max_abs_residual << ", median "
              << rep.b2.median_abs_residual << " over " << rep.b2.samples.size() << " samples\n";
    std::cout << "scale fit: slope " << rep.lambda_fit.slope << ", r2 " << rep.lambda_fit.r2
              << "\n";
    std::cout << "diagonal: outflow " << (rep.diagonal.all_outflow ? "yes" : "no")
              << ", ratios pinched " << (rep.diagonal.ratios_in_interval ? "yes" : "no") << "\n";
    for (const auto& n : rep.notes) std::cout << "note: " << n << "\n";
    if (rep.under_resolved) std::cout << "warning: degraded confidence (under-resolved)\n";
    std::cout << (rep.passed ? "velocity validation passed" : "velocity validation FAILED")
              << "\n";
}

int do_validate_keylemma(const ess::ExperimentConfig& cfg, const std::filesystem::path& out) {
    ManifestScope scope(out, cfg.hash);
    store_config_copy(scope, cfg);

    const ess::GeometryReport geo = ess::validate_geometry(cfg);
    scope.m.suites.push_back({"geometry", geo.passed});
    if (!geo.passed) {
        print_geometry_report(geo);
        std::cout << "geometry validation failed; velocity checks skipped\n";
        scope.finish();
        return exit_suite_failed;
    }

    const ess::KeylemmaReport rep = ess::validate_keylemma(cfg, out, log_line);
    for (const auto& f : rep.files) scope.m.files.push_back(f);
    scope.m.suites.push_back({"keylemma", rep.passed});
    print_keylemma_report(rep);
    scope.finish();
    return rep.passed ? exit_ok : exit_suite_failed;
}

int do_run_growth(const ess::ExperimentConfig& cfg, const std::filesystem::path& out,
                  const std::string& model_field) {
    ManifestScope scope(out, cfg.hash);
    store_config_copy(scope, cfg);

    if (model_field.empty()) {
        const ess::GeometryReport geo = ess::validate_geometry(cfg);
        scope.m.suites.push_back({"geometry", geo.passed});
        if (!geo.passed) {
            print_geometry_report(geo);
            std::cout << "geometry validation failed; growth run refused\n";
            scope.finish();
            return exit_suite_failed;
        }
        const ess::KeylemmaReport kl = ess::validate_keylemma(cfg, out, log_line);
        for (const auto& f : kl.files) scope.m.files.push_back(f);
        scope.m.suites.push_back({"keylemma", kl.passed});
        if (!kl.passed) {
            print_keylemma_report(kl);
            std::cout << "velocity validation failed; growth run refused\n";
            scope.finish();
            return exit_suite_failed;
        }
    }

    ess::GrowthOutcome outcome;
    try {
        outcome = ess::run_growth(cfg, out, model_field, log_line);
    } catch (...) {
        scope.m.suites.push_back({"growth", false});
        scope.finish();
        throw;
    }
    for (const auto& f : outcome.files) scope.m.files.push_back(f);
    scope.m.suites.push_back({"growth", outcome.completed});
    scope.finish();

    std::cout << "termination: " << outcome.termination << " after "
              << outcome.trace.rows.size() << " rows\n";
    const auto& last = outcome.trace.rows.back();
    std::cout << "final t " << last.t << ", log_a " << last.log_a << ", log_b " << last.log_b
              << "\n";
    std::cout << "integrity: " << outcome.integrity_failures << " failures over "
              << outcome.integrity_checks << " resolvable rows";
    if (outcome.integrity_checks > 0) std::cout << ", min value " << outcome.integrity_min;
    std::cout << "\n";
    std::cout << "gap-rate diagnostic: " << outcome.gronwall.status << ", c_fit "
              << outcome.gronwall.c_fit << ", head-line fit r2 " << outcome.gronwall.loglog_fit.r2
              << "\n";
    std::cout << "velocity-floor consistency: " << outcome.consistency.violations
              << " violations over " << outcome.consistency.checked << " rows\n";
    return exit_ok;
}

int do_emit_plots(const std::filesystem::path& out, std::vector<std::string> inputs) {
    std::vector<std::filesystem::path> paths;
    if (inputs.empty()) {
        for (const char* name :
             {"growth_trace.csv", "residual_b1.csv", "residual_b2.csv", "lambda_scaling.csv"}) {
            const auto p = out / name;
            if (std::filesystem::exists(p)) paths.push_back(p);
        }
        if (paths.empty())
            throw ess::ConfigError("emit-plots: no known CSV artifacts in " + out.string());
    } else {
        for (const auto& s : inputs) paths.emplace_back(s);
    }
    const std::filesystem::path plot_dir = out / "plots";
    ManifestScope scope(plot_dir, "");
    const ess::PlotOutput po = ess::emit_plots(paths, plot_dir);
    for (const auto& f : po.files) scope.m.files.push_back(f);
    scope.m.suites.push_back({"plots", true});
    scope.finish();
    for (const auto& f : po.files) std::cout << "wrote " << (plot_dir / f).string() << "\n";
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"corner-growth experiment driver"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::string model_field;
    int threads = 0;
    std::vector<std::string> plot_inputs;

    app.add_option("--threads", threads, "linear-algebra thread count")
        ->envname("ESS_THREADS");

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* opt = sub->add_option("--config", config_path, "experiment config (JSON)");
        if (needs_config) opt->required();
        sub->add_option("--out", out_dir, "output directory");
    };

    CLI::App* sc_geo = app.add_subcommand("validate-geometry",
                                          "boundary-reflection self-checks");
    add_common(sc_geo, true);
    CLI::App* sc_kl = app.add_subcommand("validate-keylemma",
                                         "small-scale velocity diagnostics");
    add_common(sc_kl, true);
    CLI::App* sc_run = app.add_subcommand("run-growth", "field + marker growth experiment");
    add_common(sc_run, true);
    sc_run->add_option("--model-field", model_field,
                       "closed-form marker velocity (xlogx[:kappa] | linear[:rate]); "
                       "bypasses the field solver");
    CLI::App* sc_plots = app.add_subcommand("emit-plots", "plot-ready series from CSVs");
    add_common(sc_plots, false);
    sc_plots->add_option("inputs", plot_inputs, "CSV files to convert");
    CLI::App* sc_schema = app.add_subcommand("print-schema", "dump the config schema");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help and friends carry exit code 0; anything else is a usage error.
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config_error;
    }

    if (threads > 0) Eigen::setNbThreads(threads);

    try {
        if (sc_schema->parsed()) {
            std::cout << ess::print_schema();
            return exit_ok;
        }
        if (sc_plots->parsed()) return do_emit_plots(out_dir, plot_inputs);

        const ess::ExperimentConfig cfg = ess::load_config(config_path);
        if (sc_geo->parsed()) return do_validate_geometry(cfg, out_dir);
        if (sc_kl->parsed()) return do_validate_keylemma(cfg, out_dir);
        if (sc_run->parsed()) return do_run_growth(cfg, out_dir, model_field);
    } catch (const ess::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config_error;
    } catch (const ess::DomainError& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return exit_runtime_error;
    } catch (const ess::SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return exit_runtime_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_runtime_error;
    }
    return exit_ok;
}
