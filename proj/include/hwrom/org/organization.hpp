#pragma once

#include "hwrom/common/ids.hpp"
#include "hwrom/common/rational.hpp"
#include "hwrom/rules/types.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace hwrom::org
{
    enum class CapabilityKind
    {
        Moving,
        Action,
        Sensing,
        Communication,
        Organization,
        Learning,
    };

    std::string_view to_string(CapabilityKind k);
    std::optional<CapabilityKind> capability_kind_from_string(std::string_view s);

    struct Capability
    {
        CapabilityKind kind = CapabilityKind::Action;
        std::string subkind;
        Rational magnitude{0};

        friend bool operator==(const Capability&, const Capability&) = default;
    };

    /// A requirement is met by a capability of the same kind with positive
    /// magnitude >= minimum. An empty subkind accepts any subkind.
    struct CapabilityRequirement
    {
        CapabilityKind kind = CapabilityKind::Action;
        std::string subkind;
        Rational minimum{0};

        friend bool operator==(const CapabilityRequirement&, const CapabilityRequirement&) = default;
    };

    struct CooperativeRobot
    {
        RobotId id;
        std::vector<Capability> capabilities;
        std::map<std::string, std::int64_t> resources;
        std::set<std::string> interface;
        // Behavior norms the robot itself abides by; leaves of an
        // organization carry these as their local rule set.
        rules::RuleSet rules;

        /// Best magnitude satisfying `req`, or nullopt when unmet.
        std::optional<Rational> satisfies(const CapabilityRequirement& req) const;
        bool dominates(const std::vector<CapabilityRequirement>& reqs) const;
        bool accepts(std::string_view message_kind) const;
    };

    enum class TaskStatus
    {
        Unassigned,
        Announced,
        Assigned,
        Completed,
        Failed,
    };

    std::string_view to_string(TaskStatus s);

    struct TaskNode
    {
        TaskId id;
        std::vector<CapabilityRequirement> required_capabilities;
        Rational reward{0};
        std::vector<TaskNode> subtasks;
        TaskStatus status = TaskStatus::Unassigned;

        // Execution time once the organization is formed (generic missions).
        Tick duration = 1;
        // Effort multiplier for the generic cost model.
        Rational work{1};
        // Alternative decompositions the leader may switch to on Redecompose.
        std::vector<std::vector<TaskNode>> alternatives;

        bool atomic() const noexcept { return subtasks.empty(); }
    };

    const TaskNode* find_task(const TaskNode& root, const TaskId& id);
    TaskNode* find_task(TaskNode& root, const TaskId& id);
    std::size_t count_tasks(const TaskNode& root);

    struct OrgNode
    {
        NodeId id_ros;
        std::optional<RobotId> id_robot;
        int level_i = 0;
        int pos_j = 0;
        std::vector<OrgNode> children;
        std::vector<TaskId> goals;
        std::vector<rules::ConstraintRelation> constraints;
        rules::RuleSet rules;
        Rational utility{0};

        bool leaf() const noexcept { return children.empty(); }
    };

    enum class RelationKind
    {
        Control,
        Cooperation,
    };

    struct Relation
    {
        RobotId from;
        RobotId to;
        RelationKind kind = RelationKind::Control;

        friend auto operator<=>(const Relation&, const Relation&) = default;
        friend bool operator==(const Relation&, const Relation&) = default;
    };

    /// Holder and agreed price of an awarded task.
    struct Award
    {
        RobotId holder;
        Rational price{0};
    };

    struct Organization
    {
        std::vector<CooperativeRobot> robots;
        OrgNode root;
        std::vector<Relation> relations;
        // True while formation is still running; unbound leaders are legal then.
        bool forming = false;
        std::optional<TaskNode> mission;
        std::map<TaskId, Award> awards;
    };

    const OrgNode* find_node(const OrgNode& root, const NodeId& id);

    int level_of(const Organization& org, const NodeId& node);
    std::optional<RobotId> leader_of(const Organization& org, const NodeId& node);
    std::set<RobotId> members(const Organization& org, const NodeId& node);

    struct Violation
    {
        std::string kind;
        std::string path;
        std::string detail;
    };

    using ValidationReport = std::vector<Violation>;

    ValidationReport validate(const Organization& org);

    struct Payout
    {
        TaskId task;
        Rational amount{0};
    };

    /// Credits assignees and leaders for completed tasks and returns the
    /// per-robot delta. Atomic task: holder += payout. Composite task: holder
    /// += payout - sum of the agreed prices of its awarded subtasks (may be
    /// negative). Node utilities are updated in place.
    std::map<RobotId, Rational> settle_utilities(Organization& org, const std::vector<Payout>& completed);
}
