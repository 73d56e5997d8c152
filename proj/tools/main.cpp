#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "courtaudit/manifest.hpp"
#include "courtaudit/text_io.hpp"
#include "run_config.hpp"
#include "stages.hpp"

namespace fs = std::filesystem;
using courtaudit::cli::RunConfig;

namespace {

int run(const std::string& stage, const fs::path& config_file,
        const std::map<std::string, std::string>& overrides) {
    const RunConfig cfg = RunConfig::resolve(config_file, overrides);
    const fs::path out = cfg.text("io.output");
    if (out.empty())
        throw std::invalid_argument("no output directory; pass --output or set "
                                    "io.output in the config file");
    fs::create_directories(out);
    const courtaudit::RunLock lock(out);

    // the exact resolved configuration, for the record
    courtaudit::write_file_atomic(out / "run_config.ini", cfg.to_ini());

    try {
        courtaudit::cli::run_stage(stage, cfg, out);
    } catch (const std::exception& e) {
        nlohmann::json record;
        record["stage"] = stage;
        record["error"] = e.what();
        courtaudit::write_file_atomic(out / "error.json", record.dump(2) + "\n");
        std::cerr << stage << ": " << e.what() << '\n';
        return 1;
    }
    std::error_code ignored;
    fs::remove(out / "error.json", ignored);  // stale record from a failed run
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"judicial decision record auditing pipeline"};
    app.require_subcommand(1);

    std::string config_file;
    std::map<std::string, std::string> overrides;
    for (const auto& [name, description] : courtaudit::cli::stage_catalog()) {
        CLI::App* sub = app.add_subcommand(name, description);
        sub->add_option("--config", config_file, "key = value parameter file")
            ->check(CLI::ExistingFile);
        sub->add_option_function<std::string>(
            "--output", [&overrides](const std::string& v) { overrides["io.output"] = v; },
            "directory for this stage's artifacts");
        for (const auto& spec : RunConfig::specs()) {
            if (spec.key == "io.output") continue;
            sub->add_option_function<std::string>(
                "--" + spec.key,
                [&overrides, key = spec.key](const std::string& v) { overrides[key] = v; },
                spec.help);
        }
    }

    CLI11_PARSE(app, argc, argv);

    try {
        return run(app.get_subcommands().front()->get_name(), config_file, overrides);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
