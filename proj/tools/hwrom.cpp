// hwrom: run and replay organization-formation scenarios.
#include "hwrom/org/snapshot.hpp"
#include "hwrom/scenario/runner.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <regex>

namespace
{
    using namespace hwrom;

    void configure_logging()
    {
        auto logger = spdlog::stderr_color_mt("hwrom");
        spdlog::set_default_logger(logger);
        spdlog::set_pattern("[%l] %v");
        const char* env = std::getenv("HWROM_LOG_LEVEL");
        const std::string level = env ? env : "info";
        if (level == "error")
            spdlog::set_level(spdlog::level::err);
        else if (level == "debug")
            spdlog::set_level(spdlog::level::debug);
        else
            spdlog::set_level(spdlog::level::info);
    }

    bool write_text(const std::string& path, const std::string& text)
    {
        std::ofstream out(path, std::ios::binary);
        out << text;
        return static_cast<bool>(out);
    }

    std::string with_seed_suffix(const std::string& path, std::uint64_t seed)
    {
        const auto dot = path.rfind('.');
        const auto slash = path.rfind('/');
        const std::string suffix = ".seed" + std::to_string(seed);
        if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        {
            return path + suffix;
        }
        return path.substr(0, dot) + suffix + path.substr(dot);
    }

    struct RunArgs
    {
        std::string config;
        std::optional<std::uint64_t> seed;
        std::optional<Tick> ticks;
        std::vector<std::string> fails;
        std::string log;
        std::string snapshot;
        std::string metrics;
        unsigned batch = 0;
    };

    int write_outputs(const RunArgs& args, const scenario::RunOutcome& out, bool suffix)
    {
        const auto seed = out.log.header.seed;
        auto path = [&](const std::string& p) { return suffix ? with_seed_suffix(p, seed) : p; };
        if (!args.log.empty() && !write_text(path(args.log), scenario::render_log(out.log)))
        {
            spdlog::error("cannot write log {}", path(args.log));
            return 2;
        }
        if (!args.snapshot.empty() && !write_text(path(args.snapshot), org::canonical_dump(out.final_org) + "\n"))
        {
            spdlog::error("cannot write snapshot {}", path(args.snapshot));
            return 2;
        }
        const std::string metrics = scenario::to_json(out.metrics).dump(2);
        if (!args.metrics.empty() && !write_text(path(args.metrics), metrics + "\n"))
        {
            spdlog::error("cannot write metrics {}", path(args.metrics));
            return 2;
        }
        std::cout << metrics << "\n";
        if (out.exit_code != 0)
        {
            spdlog::error("seed {}: mission failed: {}", seed, out.failure);
        }
        else
        {
            spdlog::info("seed {}: mission complete ({} records)", seed, out.log.records.size());
        }
        return out.exit_code;
    }

    int run_command(const RunArgs& args)
    {
        std::string text;
        scenario::ScenarioConfig cfg;
        scenario::RunOverrides overrides;
        try
        {
            text = scenario::read_file(args.config);
            cfg = scenario::parse_config(text, args.config);
            static const std::regex fail_re(R"(^([^@]+)@(\d+)$)");
            for (const auto& f : args.fails)
            {
                std::smatch m;
                if (!std::regex_match(f, m, fail_re))
                {
                    throw scenario::ConfigError("--fail", 0, 0, "expected ROBOT@TICK, got '" + f + "'");
                }
                overrides.fails.emplace_back(RobotId(m[1].str()), std::stoll(m[2].str()));
            }
        }
        catch (const scenario::ConfigError& e)
        {
            std::cerr << e.what() << "\n";
            return 2;
        }
        overrides.seed = args.seed;
        overrides.ticks = args.ticks;

        try
        {
            if (args.batch <= 1)
            {
                return write_outputs(args, scenario::run_scenario(cfg, text, args.config, overrides), false);
            }
            const std::uint64_t first = args.seed.value_or(cfg.seed);
            std::vector<std::future<scenario::RunOutcome>> jobs;
            for (unsigned i = 0; i < args.batch; ++i)
            {
                auto o = overrides;
                o.seed = first + i;
                jobs.push_back(std::async(std::launch::async,
                                          [&cfg, &text, &args, o] { return scenario::run_scenario(cfg, text, args.config, o); }));
            }
            int worst = 0;
            for (auto& j : jobs)
            {
                worst = std::max(worst, write_outputs(args, j.get(), true));
            }
            return worst;
        }
        catch (const scenario::ConfigError& e)
        {
            std::cerr << e.what() << "\n";
            return 2;
        }
    }

    int replay_command(const std::string& path)
    {
        std::string text;
        try
        {
            text = scenario::read_file(path);
        }
        catch (const scenario::ConfigError& e)
        {
            std::cerr << e.what() << "\n";
            return 2;
        }
        const auto result = scenario::replay_log(text);
        (result.exit_code == 0 ? std::cout : std::cerr) << result.message << "\n";
        return result.exit_code;
    }
}

int main(int argc, char** argv)
{
    configure_logging();
    CLI::App app{"Hierarchical robot organization formation simulator"};
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Run a scenario config");
    run_cmd->add_option("config", run.config, "Scenario config (YAML or JSON)")->required();
    run_cmd->add_option("--seed", run.seed, "Override the config seed");
    run_cmd->add_option("--ticks", run.ticks, "Override max ticks");
    run_cmd->add_option("--fail", run.fails, "Inject a robot failure, ROBOT@TICK (repeatable)");
    run_cmd->add_option("--log", run.log, "Write the JSONL event log here");
    run_cmd->add_option("--snapshot", run.snapshot, "Write the final organization snapshot here");
    run_cmd->add_option("--metrics", run.metrics, "Write run metrics JSON here");
    run_cmd->add_option("--batch", run.batch, "Run N consecutive seeds concurrently");

    std::string replay_path;
    auto* replay_cmd = app.add_subcommand("replay", "Re-execute a log and verify every record");
    replay_cmd->add_option("log", replay_path, "JSONL event log")->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    if (*run_cmd)
    {
        return run_command(run);
    }
    return replay_command(replay_path);
}
