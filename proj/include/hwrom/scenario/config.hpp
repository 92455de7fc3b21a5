#pragma once

#include "hwrom/formation/engine.hpp"
#include "hwrom/pursuit/world.hpp"
#include "hwrom/simnet/network.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hwrom::scenario
{
    // Thrown for unreadable, malformed or inconsistent configs. what() is
    // "source:line:column: message" (line/column 1-based, 0 when unknown).
    class ConfigError : public std::runtime_error
    {
    public:
        ConfigError(const std::string& source, int line, int column, const std::string& message);
        int line() const noexcept { return line_; }
        int column() const noexcept { return column_; }

    private:
        int line_;
        int column_;
    };

    struct RobotSpec
    {
        org::CooperativeRobot robot;
        std::optional<pursuit::Cell> position;
        int speed = 1;
        int radius = 3;
    };

    struct EvaderSpec
    {
        EvaderId id;
        std::optional<pursuit::Cell> position;
        int speed = 1;
        std::string policy = "flee";
    };

    struct PursuitBlock
    {
        pursuit::Grid grid;
        pursuit::PursuitParams params;
        int capture_quorum = 2;
        bool random_placement = false;
        std::vector<EvaderSpec> evaders;
    };

    struct ScriptedEvent
    {
        enum class Kind
        {
            Fail,
            Withdraw,
            Join,
        };
        Tick at = 0;
        Kind kind = Kind::Fail;
        RobotId robot;
        formation::WithdrawReason reason = formation::WithdrawReason::Unwilling;
        std::optional<RobotSpec> joiner;
    };

    struct ScenarioConfig
    {
        std::uint64_t seed = 0;
        Tick max_ticks = 200;
        formation::Config formation;
        simnet::NetConfig net;
        // When false the network seed follows the run seed.
        bool net_seed_set = false;
        std::vector<RobotSpec> robots;
        std::optional<org::TaskNode> task;
        Tick task_at = 0;
        std::optional<PursuitBlock> pursuit;
        std::vector<ScriptedEvent> events;
    };

    // Accepts YAML or JSON text.
    ScenarioConfig parse_config(const std::string& text, const std::string& source = "<config>");
    ScenarioConfig load_config(const std::filesystem::path& path);
    std::string read_file(const std::filesystem::path& path);
}
