#include "hwrom/simnet/network.hpp"

#include "hwrom/common/error.hpp"
#include "hwrom/common/hash.hpp"
#include "hwrom/formation/engine.hpp"

namespace hwrom::simnet
{
    namespace
    {
        constexpr std::uint64_t kDropStream = 0x64726f70ULL;

        void collect(const org::OrgNode& node, std::map<RobotId, std::set<NodeId>>& teams, std::set<RobotId>& leaders)
        {
            if (!node.leaf() && node.id_robot)
            {
                leaders.insert(*node.id_robot);
                for (const auto& child : node.children)
                {
                    if (child.id_robot)
                    {
                        teams[*child.id_robot].insert(node.id_ros);
                    }
                }
            }
            for (const auto& child : node.children)
            {
                collect(child, teams, leaders);
            }
        }
    }

    const std::set<std::string>& protocol_kinds()
    {
        static const std::set<std::string> kinds{"announce", "bid", "award", "revoke", "done"};
        return kinds;
    }

    std::string_view to_string(RejectReason r)
    {
        switch (r)
        {
        case RejectReason::CrossTeamViolation: return "CrossTeamViolation";
        case RejectReason::InterfaceMismatch: return "InterfaceMismatch";
        case RejectReason::UnknownRecipient: return "UnknownRecipient";
        }
        return "CrossTeamViolation";
    }

    Topology::Topology(const org::Organization& org)
    {
        collect(org.root, teams_, leaders_);
        for (const auto& r : org.robots)
        {
            robots_.emplace(r.id, r);
        }
    }

    Topology::Topology(const formation::FormationState& state)
    {
        auto bound = [](const formation::TaskRecord& r) {
            return r.holder && (r.status == org::TaskStatus::Assigned || r.status == org::TaskStatus::Completed);
        };
        std::set<RobotId> holding;
        for (const auto& [id, rec] : state.tasks)
        {
            if (!bound(rec))
            {
                continue;
            }
            holding.insert(*rec.holder);
            if (!rec.composite())
            {
                continue;
            }
            const NodeId team("T:" + id.str());
            leaders_.insert(*rec.holder);
            teams_[*rec.holder].insert(team);
            for (const auto& c : rec.children)
            {
                const auto& child = state.tasks.at(c);
                if (bound(child))
                {
                    teams_[*child.holder].insert(team);
                }
            }
        }
        for (const auto& [id, entry] : state.robots)
        {
            if (entry.available() || holding.count(id))
            {
                robots_.emplace(id, entry.robot);
            }
        }
    }

    bool Topology::share_team(const RobotId& a, const RobotId& b) const
    {
        auto ia = teams_.find(a);
        auto ib = teams_.find(b);
        if (ia == teams_.end() || ib == teams_.end())
        {
            return false;
        }
        for (const auto& t : ia->second)
        {
            if (ib->second.count(t))
            {
                return true;
            }
        }
        return false;
    }

    bool Topology::may_talk(const RobotId& from, const RobotId& to) const
    {
        if (from == to || from == formation::kEnvironment || to == formation::kEnvironment)
        {
            return true;
        }
        if (!affiliated(from) || !affiliated(to))
        {
            return true;
        }
        return share_team(from, to) || (leader(from) && leader(to));
    }

    const org::CooperativeRobot* Topology::robot(const RobotId& r) const
    {
        auto it = robots_.find(r);
        return it == robots_.end() ? nullptr : &it->second;
    }

    RouteResult route(const NetConfig& net, const Message& msg, const Topology& topo, const std::set<RobotId>& down)
    {
        if (down.count(msg.from))
        {
            throw Error(Errc::DeadSender, msg.from.str());
        }
        if (down.count(msg.to))
        {
            return Drop{};
        }
        const bool env_from = msg.from == formation::kEnvironment;
        const bool env_to = msg.to == formation::kEnvironment;
        const auto* sender = topo.robot(msg.from);
        const auto* recipient = topo.robot(msg.to);
        if ((!env_to && recipient == nullptr) || (!env_from && sender == nullptr))
        {
            return Reject{RejectReason::UnknownRecipient};
        }
        if ((sender && !sender->accepts(msg.kind)) || (recipient && !recipient->accepts(msg.kind)))
        {
            return Reject{RejectReason::InterfaceMismatch};
        }
        if (!topo.may_talk(msg.from, msg.to))
        {
            return Reject{RejectReason::CrossTeamViolation};
        }
        if (msg.from != msg.to && net.drop_rate > 0.0 &&
            unit_interval(counter_random(net.seed, kDropStream, msg.seq)) < net.drop_rate)
        {
            return Drop{};
        }
        return Deliver{msg.sent_at + net.latency};
    }

    RouteResult route(const NetConfig& net, const Message& msg, const org::Organization& org,
                      const std::set<RobotId>& down)
    {
        return route(net, msg, Topology(org), down);
    }
}
