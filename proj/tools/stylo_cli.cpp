// stylo: command-line driver for the stylometric change pipeline.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "stylo/common.hpp"
#include "stylo/pipeline.hpp"

namespace {

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("stylo");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    const char* env = std::getenv("STYLO_LOG");
    const std::string level = env ? env : "warn";
    if (level == "error") spdlog::set_level(spdlog::level::err);
    else if (level == "info") spdlog::set_level(spdlog::level::info);
    else if (level == "debug") spdlog::set_level(spdlog::level::debug);
    else spdlog::set_level(spdlog::level::warn);
}

} // namespace

int main(int argc, char** argv) {
    setup_logging();

    CLI::App app{"Stylometric change analysis around the LLM release boundary"};
    std::string command;
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;

    std::string cmd_help = "one of:";
    for (const auto& c : stylo::pipeline_commands()) cmd_help += " " + c;
    app.add_option("command", command, cmd_help)->required()->check(CLI::IsMember(stylo::pipeline_commands()));
    app.add_option("--config", config_path, "JSON run configuration (defaults when omitted)");
    app.add_option("--out", out_dir, "run directory")->required();
    app.add_option("--seed", seed, "override the main seed");
    app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        auto cfg = config_path.empty() ? stylo::RunConfig::from_json(nlohmann::json::object())
                                       : stylo::RunConfig::load(config_path);
        if (seed) cfg.seeds.main = *seed;
        if (jobs) cfg.jobs = *jobs;
        stylo::run_command(command, cfg, out_dir);
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return stylo::exit_code_for(e);
    }
    return 0;
}
