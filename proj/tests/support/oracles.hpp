#pragma once

#include "tests/support/instances.hpp"

#include "hwrom/market/market.hpp"
#include "hwrom/simnet/simulation.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace hwrom::testing
{
    // Brute force over every task -> robot map. A map is feasible when each
    // holder meets its role requirements (composite and root tasks also need
    // Organization and Communication), each robot's tasks form one downward
    // parent-child path, and no robot holds both ends of a Parallel pair
    // while ParallelExclusion is in force.
    std::optional<std::map<TaskId, RobotId>> brute_force_assignment(const Instance& inst);

    // Lexicographic argmin over (price, bidder).
    std::optional<RobotId> argmin_price_id(const std::vector<market::Bid>& bids);

    // Fold of set intersection over the leaf rule sets under `node`.
    std::set<std::string> fold_leaf_rules(const org::OrgNode& node);

    // Replays award/completion/release records and reports every Bid sent
    // by a robot that still had an open execution win.
    std::vector<std::string> locked_bid_violations(const std::vector<simnet::TraceRecord>& trace);
}
