#pragma once

#include "hwrom/org/organization.hpp"
#include "hwrom/rules/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hwrom::testing
{
    // A small formation problem: task tree, robots and constraints.
    struct Instance
    {
        org::TaskNode task;
        std::vector<org::CooperativeRobot> robots;
        std::vector<rules::ConstraintRelation> constraints;
        rules::RuleSet rules = rules::standard_rules();
    };

    // <= 6 robots, <= 5 tasks, random capabilities and Parallel pairs.
    // Rewards are large enough that no capable robot ever declines on price,
    // so feasibility is purely a capability/structure question.
    Instance random_instance(std::uint64_t seed);

    org::CooperativeRobot make_robot(const std::string& id, std::vector<org::Capability> caps);
    org::CooperativeRobot organizer_robot(const std::string& id, std::vector<org::Capability> extra = {});
    org::Capability cap(org::CapabilityKind kind, std::int64_t magnitude, std::string subkind = "");
    org::CapabilityRequirement need(org::CapabilityKind kind, std::int64_t minimum, std::string subkind = "");
    org::TaskNode atomic_task(const std::string& id, std::int64_t reward, std::vector<org::CapabilityRequirement> reqs = {});
}
