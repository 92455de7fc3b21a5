#pragma once

#include "hwrom/org/organization.hpp"

#include <json.hpp>

#include <string>

namespace hwrom::org
{
    // Canonical snapshot form. Object keys sort lexicographically (nlohmann
    // default map) and array order is the structural order, so equal
    // organizations dump to equal bytes.
    nlohmann::json to_json(const Capability& cap);
    nlohmann::json to_json(const CapabilityRequirement& req);
    nlohmann::json to_json(const CooperativeRobot& robot);
    nlohmann::json to_json(const TaskNode& task);
    nlohmann::json to_json(const OrgNode& node);
    nlohmann::json to_json(const Organization& org);

    std::string canonical_dump(const Organization& org);

    // fnv1a64 of canonical_dump, hex.
    std::string snapshot_hash(const Organization& org);
}
