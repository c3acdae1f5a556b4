// squeezecool <single-sweep|continuum-sweep|oracle|validate> --config <path> --out <dir>
//             [--backend gaussian|fock|both] [--jobs N]

#include <squeezecool/experiment.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <string>

namespace {

int fail(const std::string& code, const std::string& message) {
    const squeezecool::Json j{{"error", {{"code", code}, {"message", message}}}};
    std::cerr << j.dump() << '\n';
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace squeezecool;
    CLI::App app{"Dissipative squeezing simulator", "squeezecool"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string config_path, out_dir, backend;
    unsigned jobs = 1;
    const std::pair<const char*, ExperimentKind> commands[] = {
        {"single-sweep", ExperimentKind::single_sweep},
        {"continuum-sweep", ExperimentKind::continuum_sweep},
        {"oracle", ExperimentKind::oracle},
        {"validate", ExperimentKind::validate},
    };
    for (const auto& [name, kind] : commands) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON experiment config")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--backend", backend, "gaussian, fock or both")
            ->check(CLI::IsMember({"gaussian", "fock", "both"}));
        sub->add_option("--jobs", jobs, "worker threads (0: hardware concurrency)");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        ExperimentConfig cfg = load_config(config_path);
        const std::string sub = app.get_subcommands().front()->get_name();
        for (const auto& [name, kind] : commands)
            if (sub == name)
                require(cfg.kind == kind, "config",
                        std::string("config kind ") + to_string(cfg.kind) + " does not match subcommand " + sub);
        if (!backend.empty()) cfg.backend = parse_backend(backend);
        if (cfg.kind == ExperimentKind::continuum_sweep && cfg.backend != Backend::gaussian)
            require(cfg.continuum.dynamics == ContinuumDynamics::averaged, "config",
                    "the fock backend needs continuum.dynamics = averaged");
        if (out_dir.empty()) out_dir = cfg.output;
        require(!out_dir.empty(), "config", "no output directory (--out or config.output)");
        const RunResult r = run_experiment(cfg, out_dir, jobs);
        std::cout << r.manifest["result"].value("outputs", Json::array()).dump() << " -> " << out_dir
                  << '\n';
        return r.exit_code;
    } catch (const Error& e) {
        return fail(e.code(), e.what());
    } catch (const std::exception& e) {
        return fail("internal", e.what());
    }
}
