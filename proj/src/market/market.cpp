#include "hwrom/market/market.hpp"

#include "hwrom/common/error.hpp"

#include <algorithm>

namespace hwrom::market
{
    std::optional<Rational> generic_cost(const org::CooperativeRobot& robot,
                                         const std::vector<org::CapabilityRequirement>& required,
                                         const Rational& work)
    {
        Rational total{0};
        for (const auto& req : required)
        {
            auto magnitude = robot.satisfies(req);
            if (!magnitude)
            {
                return std::nullopt;
            }
            total += req.minimum / *magnitude;
        }
        return total * work;
    }

    BidResult compute_bid(const org::CooperativeRobot& robot, const Announcement& ann, const ScenarioContext& ctx)
    {
        if (ctx.history != nullptr && rules::winner_locked(*ctx.history, robot.id, ctx.now))
        {
            throw Error(Errc::LockedBidder, robot.id.str() + " bid on " + ann.id_task.str() + " while locked");
        }
        if (!robot.dominates(ann.required_capabilities))
        {
            return Decline{"missing capability"};
        }
        std::optional<Rational> cost =
            ctx.cost ? ctx.cost(robot, ann) : generic_cost(robot, ann.required_capabilities);
        if (!cost)
        {
            return Decline{"cannot perform"};
        }
        if (*cost > ann.reward)
        {
            return Decline{"cost exceeds reward"};
        }
        Rational price = *cost * (Rational(1) + ctx.policy.margin);
        price = std::min(price, ann.reward);
        return Bid{robot.id, ann.id_task, price, *cost, ann.round, ann.epoch, ctx.now};
    }

    std::vector<Bid> rank_bids(std::vector<Bid> bids)
    {
        std::stable_sort(bids.begin(), bids.end(), [](const Bid& a, const Bid& b) {
            if (a.price != b.price)
            {
                return a.price < b.price;
            }
            return a.bidder < b.bidder;
        });
        return bids;
    }

    std::optional<RobotId> select_winner(const std::vector<Bid>& bids)
    {
        if (bids.empty())
        {
            return std::nullopt;
        }
        for (const auto& b : bids)
        {
            if (b.id_task != bids.front().id_task || b.round != bids.front().round)
            {
                throw Error(Errc::MixedTaskBids, "bids reference " + bids.front().id_task.str() + " and " +
                                                     b.id_task.str());
            }
        }
        const Bid* best = &bids.front();
        for (const auto& b : bids)
        {
            if (b.price < best->price || (b.price == best->price && b.bidder < best->bidder))
            {
                best = &b;
            }
        }
        return best->bidder;
    }

    Adjustment adjust_tactics(const Announcement& ann, const Policy& policy)
    {
        if (ann.round >= policy.max_total_rounds)
        {
            return GiveUp{ann.round + 1};
        }
        Announcement next = ann;
        next.round = ann.round + 1;
        if (ann.round >= policy.max_reward_rounds)
        {
            return Redecompose{next};
        }
        next.reward = ann.reward * (Rational(1) + policy.escalation);
        return next;
    }
}

#include "hwrom/org/snapshot.hpp"

namespace hwrom::market
{
    using nlohmann::json;

    json to_json(const Announcement& ann)
    {
        json reqs = json::array();
        for (const auto& r : ann.required_capabilities)
        {
            reqs.push_back(org::to_json(r));
        }
        return json{{"task", ann.id_task.str()},   {"reward", to_string(ann.reward)},
                    {"required", reqs},            {"round", ann.round},
                    {"deadline", ann.deadline},    {"auctioneer", ann.auctioneer.str()},
                    {"epoch", ann.epoch}};
    }

    json to_json(const Bid& bid)
    {
        return json{{"bidder", bid.bidder.str()},
                    {"task", bid.id_task.str()},
                    {"price", to_string(bid.price)},
                    {"cost", to_string(bid.computed_cost)},
                    {"round", bid.round},
                    {"epoch", bid.epoch},
                    {"sent_at", bid.sent_at}};
    }

    Announcement announcement_from_json(const json& j)
    {
        Announcement ann;
        ann.id_task = TaskId(j.at("task").get<std::string>());
        ann.reward = parse_rational(j.at("reward").get<std::string>());
        for (const auto& r : j.at("required"))
        {
            org::CapabilityRequirement req;
            auto kind = org::capability_kind_from_string(r.at("kind").get<std::string>());
            if (!kind)
            {
                throw Error(Errc::InvalidArgument, "capability kind " + r.at("kind").dump());
            }
            req.kind = *kind;
            req.subkind = r.at("subkind").get<std::string>();
            req.minimum = parse_rational(r.at("min").get<std::string>());
            ann.required_capabilities.push_back(std::move(req));
        }
        ann.round = j.at("round").get<int>();
        ann.deadline = j.at("deadline").get<Tick>();
        ann.auctioneer = RobotId(j.at("auctioneer").get<std::string>());
        ann.epoch = j.at("epoch").get<std::uint64_t>();
        return ann;
    }

    Bid bid_from_json(const json& j)
    {
        Bid bid;
        bid.bidder = RobotId(j.at("bidder").get<std::string>());
        bid.id_task = TaskId(j.at("task").get<std::string>());
        bid.price = parse_rational(j.at("price").get<std::string>());
        bid.computed_cost = parse_rational(j.at("cost").get<std::string>());
        bid.round = j.at("round").get<int>();
        bid.epoch = j.at("epoch").get<std::uint64_t>();
        bid.sent_at = j.at("sent_at").get<Tick>();
        return bid;
    }
}
