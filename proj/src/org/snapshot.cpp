#include "hwrom/org/snapshot.hpp"

#include "hwrom/common/hash.hpp"

#include <algorithm>

namespace hwrom::org
{
    using hwrom::to_string;
    using nlohmann::json;

    namespace
    {
        json rules_json(const rules::RuleSet& set)
        {
            json ids = json::array();
            for (const auto& r : set.rules)
            {
                ids.push_back(r.id);
            }
            return json{{"scope", set.scope == rules::Scope::Local ? "Local" : "Whole"}, {"rules", ids}};
        }
    }

    json to_json(const Capability& cap)
    {
        return json{{"kind", to_string(cap.kind)}, {"subkind", cap.subkind}, {"magnitude", to_string(cap.magnitude)}};
    }

    json to_json(const CapabilityRequirement& req)
    {
        return json{{"kind", to_string(req.kind)}, {"subkind", req.subkind}, {"min", to_string(req.minimum)}};
    }

    json to_json(const CooperativeRobot& robot)
    {
        json caps = json::array();
        for (const auto& c : robot.capabilities)
        {
            caps.push_back(to_json(c));
        }
        json iface = json::array();
        for (const auto& k : robot.interface)
        {
            iface.push_back(k);
        }
        return json{{"id", robot.id.str()},
                    {"capabilities", caps},
                    {"resources", robot.resources},
                    {"interface", iface},
                    {"rules", rules_json(robot.rules)}};
    }

    json to_json(const TaskNode& task)
    {
        json reqs = json::array();
        for (const auto& r : task.required_capabilities)
        {
            reqs.push_back(to_json(r));
        }
        json subs = json::array();
        for (const auto& s : task.subtasks)
        {
            subs.push_back(to_json(s));
        }
        return json{{"id", task.id.str()},
                    {"reward", to_string(task.reward)},
                    {"required", reqs},
                    {"status", to_string(task.status)},
                    {"subtasks", subs}};
    }

    json to_json(const OrgNode& node)
    {
        json children = json::array();
        for (const auto& c : node.children)
        {
            children.push_back(to_json(c));
        }
        json goals = json::array();
        for (const auto& g : node.goals)
        {
            goals.push_back(g.str());
        }
        json constraints = json::array();
        for (const auto& c : node.constraints)
        {
            constraints.push_back({{"a", c.a.str()}, {"b", c.b.str()}, {"kind", rules::to_string(c.kind)}});
        }
        return json{{"id_ros", node.id_ros.str()},
                    {"id_robot", node.id_robot ? json(node.id_robot->str()) : json(nullptr)},
                    {"level", node.level_i},
                    {"pos", node.pos_j},
                    {"children", children},
                    {"goals", goals},
                    {"constraints", constraints},
                    {"rules", rules_json(node.rules)},
                    {"utility", to_string(node.utility)}};
    }

    json to_json(const Organization& org)
    {
        std::vector<const CooperativeRobot*> robots;
        for (const auto& r : org.robots)
        {
            robots.push_back(&r);
        }
        std::sort(robots.begin(), robots.end(), [](auto* a, auto* b) { return a->id < b->id; });
        json rj = json::array();
        for (const auto* r : robots)
        {
            rj.push_back(to_json(*r));
        }
        auto relations = org.relations;
        std::sort(relations.begin(), relations.end());
        json rel = json::array();
        for (const auto& r : relations)
        {
            rel.push_back({{"from", r.from.str()},
                           {"to", r.to.str()},
                           {"kind", r.kind == RelationKind::Control ? "Control" : "Cooperation"}});
        }
        json awards = json::object();
        for (const auto& [task, award] : org.awards)
        {
            awards[task.str()] = {{"holder", award.holder.str()}, {"price", to_string(award.price)}};
        }
        return json{{"forming", org.forming},
                    {"robots", rj},
                    {"relations", rel},
                    {"root", to_json(org.root)},
                    {"mission", org.mission ? to_json(*org.mission) : json(nullptr)},
                    {"awards", awards}};
    }

    std::string canonical_dump(const Organization& org)
    {
        return to_json(org).dump();
    }

    std::string snapshot_hash(const Organization& org)
    {
        return hex64(fnv1a64(canonical_dump(org)));
    }
}
