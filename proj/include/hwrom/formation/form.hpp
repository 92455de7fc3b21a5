#pragma once

#include "hwrom/formation/engine.hpp"
#include "hwrom/simnet/simulation.hpp"

#include <string>
#include <variant>
#include <vector>

namespace hwrom::formation
{
    struct FormationError
    {
        enum class Kind
        {
            Unfillable,
            NoRobots,
            InvalidTask,
        };
        Kind kind = Kind::Unfillable;
        std::string detail;
    };

    std::string_view to_string(FormationError::Kind k);

    using FormResult = std::variant<org::Organization, FormationError>;

    struct FormRun
    {
        FormResult result;
        std::vector<simnet::TraceRecord> trace;
        simnet::NetStats stats;
    };

    // Runs the auction protocol on an event-driven network (no tick
    // records) until the organization is formed or formation fails.
    // `observer` sees every delivered message (instrumentation only).
    FormRun form_traced(const org::TaskNode& task, const std::vector<org::CooperativeRobot>& robots,
                        const Config& cfg = {}, const simnet::NetConfig& net = {},
                        const simnet::Simulation::DeliveryObserver& observer = {});

    FormResult form(const org::TaskNode& task, const std::vector<org::CooperativeRobot>& robots,
                    const Config& cfg = {}, const simnet::NetConfig& net = {});
}
