#pragma once

#include "hwrom/common/ids.hpp"
#include "hwrom/common/rational.hpp"
#include "hwrom/org/organization.hpp"
#include "hwrom/rules/rules.hpp"

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace hwrom::market
{
    struct Announcement
    {
        TaskId id_task;
        Rational reward{0};
        std::vector<org::CapabilityRequirement> required_capabilities;
        int round = 0;
        Tick deadline = 0;
        // Robot running the auction; empty for the external task source.
        RobotId auctioneer;
        // Unique per announcement so stale closes and bids can be detected.
        std::uint64_t epoch = 0;
    };

    struct Bid
    {
        RobotId bidder;
        TaskId id_task;
        Rational price{0};
        Rational computed_cost{0};
        int round = 0;
        std::uint64_t epoch = 0;
        Tick sent_at = 0;
    };

    struct Decline
    {
        std::string reason;
    };

    using BidResult = std::variant<Bid, Decline>;

    struct Policy
    {
        Rational margin{1, 10};
        Rational escalation{1, 4};
        int max_reward_rounds = 3;
        int max_total_rounds = 5;
    };

    // Cost of `robot` carrying out the announced task; nullopt means the
    // robot cannot (for instance a zero-speed pursuer).
    using CostFn = std::function<std::optional<Rational>(const org::CooperativeRobot&, const Announcement&)>;

    struct ScenarioContext
    {
        Policy policy;
        CostFn cost;
        // When set, compute_bid enforces the winner-lock precondition.
        const rules::AuctionHistory* history = nullptr;
        Tick now = 0;
    };

    // work x sum(minimum / magnitude) over the requirements; requirements
    // with zero minimum cost nothing. nullopt if a requirement is unmet.
    std::optional<Rational> generic_cost(const org::CooperativeRobot& robot,
                                         const std::vector<org::CapabilityRequirement>& required,
                                         const Rational& work = Rational(1));

    BidResult compute_bid(const org::CooperativeRobot& robot, const Announcement& ann, const ScenarioContext& ctx);

    // Least price wins; ties go to the lowest bidder id.
    std::optional<RobotId> select_winner(const std::vector<Bid>& bids);

    // Bids ordered by (price, bidder): the winner first, then runners-up.
    std::vector<Bid> rank_bids(std::vector<Bid> bids);

    struct Redecompose
    {
        Announcement next;
    };

    struct GiveUp
    {
        int rounds = 0;
    };

    using Adjustment = std::variant<Announcement, Redecompose, GiveUp>;

    // Called after a round with no winner. Rounds below max_reward_rounds
    // escalate the reward by (1 + escalation); rounds below max_total_rounds
    // ask the leader to re-split the task (reward kept, round advanced);
    // afterwards the task is given up.
    Adjustment adjust_tactics(const Announcement& ann, const Policy& policy);
}

#include <json.hpp>

namespace hwrom::market
{
    // Wire form used as message payload; rationals travel as exact strings.
    nlohmann::json to_json(const Announcement& ann);
    nlohmann::json to_json(const Bid& bid);
    Announcement announcement_from_json(const nlohmann::json& j);
    Bid bid_from_json(const nlohmann::json& j);
}
