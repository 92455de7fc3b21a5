#pragma once

#include "hwrom/scenario/config.hpp"
#include "hwrom/scenario/event_log.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hwrom::scenario
{
    struct RunOverrides
    {
        std::optional<std::uint64_t> seed;
        std::optional<Tick> ticks;
        std::vector<std::pair<RobotId, Tick>> fails;
    };

    nlohmann::json to_json(const RunOverrides& o);
    RunOverrides overrides_from_json(const nlohmann::json& j);

    struct RunMetrics
    {
        std::uint64_t formation_rounds = 0;
        std::uint64_t messages_sent = 0;
        std::uint64_t messages_delivered = 0;
        std::uint64_t messages_dropped = 0;
        std::uint64_t messages_rejected = 0;
        std::uint64_t re_auctions = 0;
        std::uint64_t failures_handled = 0;
        std::uint64_t missions_completed = 0;
        std::map<RobotId, Rational> utilities;
        std::vector<std::pair<EvaderId, Tick>> capture_ticks;
        std::optional<Tick> completion_tick;
        std::string snapshot_hash;

        friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
    };

    nlohmann::json to_json(const RunMetrics& m);

    struct RunOutcome
    {
        int exit_code = 0;
        std::string failure;
        RunMetrics metrics;
        EventLog log;
        org::Organization final_org;
    };

    /// Deterministic function of (config text, overrides). Throws
    /// ConfigError for override errors such as an unknown --fail robot.
    RunOutcome run_scenario(const ScenarioConfig& cfg, const std::string& config_text, const std::string& source,
                            const RunOverrides& overrides = {},
                            const simnet::Simulation::DeliveryObserver& observer = {});
    RunOutcome run_scenario_text(const std::string& config_text, const std::string& source,
                                 const RunOverrides& overrides = {},
                                 const simnet::Simulation::DeliveryObserver& observer = {});

    RunMetrics metrics_from_log(const EventLog& log);

    struct ReplayResult
    {
        // 0 identical, 1 divergent, 2 malformed.
        int exit_code = 0;
        std::optional<std::uint64_t> divergent_seq;
        std::string message;
    };

    ReplayResult replay_log(const std::string& log_text);
}
