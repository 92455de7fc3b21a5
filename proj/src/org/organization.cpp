#include "hwrom/org/organization.hpp"

#include "hwrom/common/error.hpp"

#include <algorithm>
#include <array>
#include <functional>

namespace hwrom::org
{
    namespace
    {
        constexpr std::array<std::pair<CapabilityKind, std::string_view>, 6> kKindNames{{
            {CapabilityKind::Moving, "Moving"},
            {CapabilityKind::Action, "Action"},
            {CapabilityKind::Sensing, "Sensing"},
            {CapabilityKind::Communication, "Communication"},
            {CapabilityKind::Organization, "Organization"},
            {CapabilityKind::Learning, "Learning"},
        }};

        const OrgNode& require_node(const Organization& org, const NodeId& id)
        {
            const OrgNode* node = find_node(org.root, id);
            if (node == nullptr)
            {
                throw Error(Errc::UnknownNode, id.str());
            }
            return *node;
        }

        void collect_members(const OrgNode& node, std::set<RobotId>& out)
        {
            if (node.id_robot)
            {
                out.insert(*node.id_robot);
            }
            for (const auto& child : node.children)
            {
                collect_members(child, out);
            }
        }

        OrgNode* find_goal_node(OrgNode& node, const TaskId& task)
        {
            if (std::find(node.goals.begin(), node.goals.end(), task) != node.goals.end())
            {
                return &node;
            }
            for (auto& child : node.children)
            {
                if (OrgNode* hit = find_goal_node(child, task))
                {
                    return hit;
                }
            }
            return nullptr;
        }
    }

    std::string_view to_string(CapabilityKind k)
    {
        for (const auto& [kind, name] : kKindNames)
        {
            if (kind == k)
            {
                return name;
            }
        }
        return "Action";
    }

    std::optional<CapabilityKind> capability_kind_from_string(std::string_view s)
    {
        for (const auto& [kind, name] : kKindNames)
        {
            if (name == s)
            {
                return kind;
            }
        }
        return std::nullopt;
    }

    std::string_view to_string(TaskStatus s)
    {
        switch (s)
        {
        case TaskStatus::Unassigned: return "Unassigned";
        case TaskStatus::Announced: return "Announced";
        case TaskStatus::Assigned: return "Assigned";
        case TaskStatus::Completed: return "Completed";
        case TaskStatus::Failed: return "Failed";
        }
        return "Unassigned";
    }

    std::optional<Rational> CooperativeRobot::satisfies(const CapabilityRequirement& req) const
    {
        std::optional<Rational> best;
        for (const auto& cap : capabilities)
        {
            if (cap.kind != req.kind || (!req.subkind.empty() && cap.subkind != req.subkind))
            {
                continue;
            }
            if (cap.magnitude <= 0 || cap.magnitude < req.minimum)
            {
                continue;
            }
            if (!best || cap.magnitude > *best)
            {
                best = cap.magnitude;
            }
        }
        return best;
    }

    bool CooperativeRobot::dominates(const std::vector<CapabilityRequirement>& reqs) const
    {
        return std::all_of(reqs.begin(), reqs.end(), [&](const auto& r) { return satisfies(r).has_value(); });
    }

    bool CooperativeRobot::accepts(std::string_view message_kind) const
    {
        return interface.count(std::string(message_kind)) > 0;
    }

    const TaskNode* find_task(const TaskNode& root, const TaskId& id)
    {
        if (root.id == id)
        {
            return &root;
        }
        for (const auto& sub : root.subtasks)
        {
            if (const TaskNode* hit = find_task(sub, id))
            {
                return hit;
            }
        }
        return nullptr;
    }

    TaskNode* find_task(TaskNode& root, const TaskId& id)
    {
        return const_cast<TaskNode*>(find_task(static_cast<const TaskNode&>(root), id));
    }

    std::size_t count_tasks(const TaskNode& root)
    {
        std::size_t n = 1;
        for (const auto& sub : root.subtasks)
        {
            n += count_tasks(sub);
        }
        return n;
    }

    const OrgNode* find_node(const OrgNode& root, const NodeId& id)
    {
        if (root.id_ros == id)
        {
            return &root;
        }
        for (const auto& child : root.children)
        {
            if (const OrgNode* hit = find_node(child, id))
            {
                return hit;
            }
        }
        return nullptr;
    }

    int level_of(const Organization& org, const NodeId& node)
    {
        // Depth is recomputed from the tree rather than trusting level_i.
        std::function<int(const OrgNode&, int)> depth = [&](const OrgNode& n, int d) -> int {
            if (n.id_ros == node)
            {
                return d;
            }
            for (const auto& child : n.children)
            {
                if (int hit = depth(child, d + 1); hit >= 0)
                {
                    return hit;
                }
            }
            return -1;
        };
        const int d = depth(org.root, 0);
        if (d < 0)
        {
            throw Error(Errc::UnknownNode, node.str());
        }
        return d;
    }

    std::optional<RobotId> leader_of(const Organization& org, const NodeId& node)
    {
        return require_node(org, node).id_robot;
    }

    std::set<RobotId> members(const Organization& org, const NodeId& node)
    {
        std::set<RobotId> out;
        collect_members(require_node(org, node), out);
        return out;
    }

    ValidationReport validate(const Organization& org)
    {
        ValidationReport report;
        auto add = [&](std::string kind, std::string path, std::string detail) {
            report.push_back({std::move(kind), std::move(path), std::move(detail)});
        };

        if (org.robots.empty())
        {
            add("EmptyOrganization", "robots", "organization has no robots");
        }
        std::set<RobotId> robot_ids;
        for (const auto& r : org.robots)
        {
            if (!robot_ids.insert(r.id).second)
            {
                add("DuplicateRobotId", "robots", r.id.str());
            }
        }

        if (org.root.level_i != 0)
        {
            add("RootLevelNonZero", "root", "level " + std::to_string(org.root.level_i));
        }

        std::set<NodeId> node_ids;
        std::map<RobotId, int> leaf_count;
        std::map<RobotId, std::set<int>> robot_levels;
        std::set<std::pair<RobotId, RobotId>> control_pairs;

        std::function<void(const OrgNode&, const std::string&, bool)> walk =
            [&](const OrgNode& n, const std::string& path, bool is_root) {
                if (!node_ids.insert(n.id_ros).second)
                {
                    add("DuplicateNodeId", path, n.id_ros.str());
                }
                if (n.id_robot)
                {
                    robot_levels[*n.id_robot].insert(n.level_i);
                    if (!robot_ids.count(*n.id_robot))
                    {
                        add("UnknownRobot", path, n.id_robot->str());
                    }
                }
                if (n.leaf())
                {
                    if (n.id_robot)
                    {
                        ++leaf_count[*n.id_robot];
                    }
                    else if (!(is_root && org.forming))
                    {
                        add(is_root ? "UnboundLeader" : "UnboundLeaf", path, n.id_ros.str());
                    }
                }
                else
                {
                    if (!n.id_robot)
                    {
                        if (!org.forming)
                        {
                            add("UnboundLeader", path, n.id_ros.str());
                        }
                    }
                    else if (n.children.front().id_robot != n.id_robot)
                    {
                        add("LeaderMismatch", path,
                            "leader " + n.id_robot->str() + " is not bound to children[0]");
                    }
                }
                for (std::size_t k = 0; k < n.children.size(); ++k)
                {
                    const auto& child = n.children[k];
                    const std::string child_path = path + "/" + std::to_string(k);
                    if (child.level_i != n.level_i + 1)
                    {
                        add("LevelMismatch", child_path,
                            "level " + std::to_string(child.level_i) + " under parent level " +
                                std::to_string(n.level_i));
                    }
                    if (child.pos_j != static_cast<int>(k))
                    {
                        add("PositionMismatch", child_path, "pos " + std::to_string(child.pos_j));
                    }
                    if (n.id_robot && child.id_robot && *child.id_robot != *n.id_robot)
                    {
                        control_pairs.insert({*n.id_robot, *child.id_robot});
                    }
                    walk(child, child_path, false);
                }
            };
        walk(org.root, "root", true);

        for (const auto& [robot, count] : leaf_count)
        {
            if (count > 1)
            {
                add("RobotInTwoTeams", "root", robot.str() + " bound to " + std::to_string(count) + " leaves");
            }
        }

        for (const auto& rel : org.relations)
        {
            const std::string label = rel.from.str() + "->" + rel.to.str();
            if (!robot_ids.count(rel.from) || !robot_ids.count(rel.to))
            {
                add("RelationOutsideRobots", "relations", label);
                continue;
            }
            if (rel.kind == RelationKind::Cooperation)
            {
                const auto& la = robot_levels[rel.from];
                const auto& lb = robot_levels[rel.to];
                const bool shared =
                    std::any_of(la.begin(), la.end(), [&](int level) { return lb.count(level) > 0; });
                if (!shared)
                {
                    add("CrossLevelCooperation", "relations", label);
                }
            }
            else if (!control_pairs.count({rel.from, rel.to}))
            {
                add("ControlEdgeMismatch", "relations", label);
            }
        }
        return report;
    }

    std::map<RobotId, Rational> settle_utilities(Organization& org, const std::vector<Payout>& completed)
    {
        std::map<RobotId, Rational> delta;
        if (completed.empty())
        {
            return delta;
        }
        if (!org.mission)
        {
            throw Error(Errc::UnknownTask, completed.front().task.str());
        }
        for (const auto& payout : completed)
        {
            const TaskNode* task = find_task(*org.mission, payout.task);
            if (task == nullptr)
            {
                throw Error(Errc::UnknownTask, payout.task.str());
            }
            auto award = org.awards.find(payout.task);
            if (award == org.awards.end())
            {
                throw Error(Errc::TaskNotAssigned, payout.task.str());
            }
            Rational credit = payout.amount;
            if (!task->atomic())
            {
                for (const auto& sub : task->subtasks)
                {
                    if (auto it = org.awards.find(sub.id); it != org.awards.end())
                    {
                        credit -= it->second.price;
                    }
                }
            }
            delta[award->second.holder] += credit;
            if (OrgNode* node = find_goal_node(org.root, payout.task))
            {
                node->utility += credit;
            }
        }
        return delta;
    }
}
