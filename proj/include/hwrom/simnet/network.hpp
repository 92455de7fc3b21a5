#pragma once

#include "hwrom/common/ids.hpp"
#include "hwrom/org/organization.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <variant>

namespace hwrom::formation
{
    struct FormationState;
}

namespace hwrom::simnet
{
    struct Message
    {
        RobotId from;
        RobotId to;
        std::string kind;
        nlohmann::json payload;
        Tick sent_at = 0;
        // Network-wide send counter; keys the drop generator.
        std::uint64_t seq = 0;
    };

    struct NetConfig
    {
        Tick latency = 1;
        double drop_rate = 0.0;
        std::uint64_t seed = 0;
    };

    // Message kinds spoken by the formation protocol.
    const std::set<std::string>& protocol_kinds();

    enum class RejectReason
    {
        CrossTeamViolation,
        InterfaceMismatch,
        UnknownRecipient,
    };

    std::string_view to_string(RejectReason r);

    struct Deliver
    {
        Tick at = 0;
    };

    struct Reject
    {
        RejectReason reason;
    };

    struct Drop
    {
    };

    using RouteResult = std::variant<Deliver, Reject, Drop>;

    // Team structure. A team is a bound composite task: its holder leads it
    // and the holders of its bound children are members.
    class Topology
    {
    public:
        Topology() = default;
        // From a rendered snapshot; teams hidden under an unbound ancestor
        // are not visible here.
        explicit Topology(const org::Organization& org);
        // From live engine state; every bound composite counts.
        explicit Topology(const formation::FormationState& state);

        bool affiliated(const RobotId& r) const { return teams_.count(r) > 0; }
        bool leader(const RobotId& r) const { return leaders_.count(r) > 0; }
        bool share_team(const RobotId& a, const RobotId& b) const;
        // Pool robots, same-team pairs and leader pairs may talk.
        bool may_talk(const RobotId& from, const RobotId& to) const;
        const org::CooperativeRobot* robot(const RobotId& r) const;

    private:
        std::map<RobotId, std::set<NodeId>> teams_;
        std::set<RobotId> leaders_;
        std::map<RobotId, org::CooperativeRobot> robots_;
    };

    /// Throws Error(DeadSender) when the sender is in `down`; a recipient in
    /// `down` yields Drop. Robots absent from the organization (other than
    /// the environment) are unknown.
    RouteResult route(const NetConfig& net, const Message& msg, const Topology& topo,
                      const std::set<RobotId>& down = {});
    RouteResult route(const NetConfig& net, const Message& msg, const org::Organization& org,
                      const std::set<RobotId>& down = {});
}
