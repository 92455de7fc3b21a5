#include "tests/support/instances.hpp"

#include <random>

namespace hwrom::testing
{
    using org::CapabilityKind;

    org::Capability cap(CapabilityKind kind, std::int64_t magnitude, std::string subkind)
    {
        return {kind, std::move(subkind), Rational(magnitude)};
    }

    org::CapabilityRequirement need(CapabilityKind kind, std::int64_t minimum, std::string subkind)
    {
        return {kind, std::move(subkind), Rational(minimum)};
    }

    org::CooperativeRobot make_robot(const std::string& id, std::vector<org::Capability> caps)
    {
        org::CooperativeRobot r;
        r.id = RobotId(id);
        r.capabilities = std::move(caps);
        r.interface = {"announce", "bid", "award", "revoke", "done"};
        r.rules = rules::standard_rules();
        return r;
    }

    org::CooperativeRobot organizer_robot(const std::string& id, std::vector<org::Capability> extra)
    {
        extra.push_back(cap(CapabilityKind::Organization, 1));
        extra.push_back(cap(CapabilityKind::Communication, 1));
        return make_robot(id, std::move(extra));
    }

    org::TaskNode atomic_task(const std::string& id, std::int64_t reward, std::vector<org::CapabilityRequirement> reqs)
    {
        org::TaskNode t;
        t.id = TaskId(id);
        t.reward = reward;
        t.required_capabilities = std::move(reqs);
        return t;
    }

    namespace
    {
        org::TaskNode* node_at(org::TaskNode& root, const std::vector<std::size_t>& path)
        {
            org::TaskNode* n = &root;
            for (auto i : path)
            {
                n = &n->subtasks[i];
            }
            return n;
        }
    }

    Instance random_instance(std::uint64_t seed)
    {
        std::mt19937_64 rng(seed);
        auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
        auto chance = [&](double p) { return std::bernoulli_distribution(p)(rng); };
        const CapabilityKind skills[] = {CapabilityKind::Moving, CapabilityKind::Action, CapabilityKind::Sensing};

        Instance inst;
        const int n_robots = uniform(1, 6);
        for (int i = 0; i < n_robots; ++i)
        {
            std::vector<org::Capability> caps;
            if (chance(0.5)) caps.push_back(cap(CapabilityKind::Organization, uniform(1, 2)));
            if (chance(0.6)) caps.push_back(cap(CapabilityKind::Communication, uniform(1, 2)));
            for (auto k : skills)
            {
                if (chance(0.5)) caps.push_back(cap(k, uniform(1, 3)));
            }
            inst.robots.push_back(make_robot("R" + std::to_string(i + 1), std::move(caps)));
        }

        const int n_tasks = uniform(1, 5);
        auto random_reqs = [&] {
            std::vector<org::CapabilityRequirement> reqs;
            for (auto k : skills)
            {
                if (chance(0.35)) reqs.push_back(need(k, uniform(1, 3)));
            }
            return reqs;
        };
        inst.task = atomic_task("t0", 100, random_reqs());
        std::vector<std::vector<std::size_t>> paths{{}};
        std::vector<TaskId> ids{inst.task.id};
        for (int i = 1; i < n_tasks; ++i)
        {
            const auto parent = paths[static_cast<std::size_t>(uniform(0, static_cast<int>(paths.size()) - 1))];
            org::TaskNode* p = node_at(inst.task, parent);
            auto child = atomic_task("t" + std::to_string(i), 100, random_reqs());
            ids.push_back(child.id);
            p->subtasks.push_back(std::move(child));
            auto path = parent;
            path.push_back(p->subtasks.size() - 1);
            paths.push_back(path);
        }

        const int n_pairs = uniform(0, 2);
        for (int i = 0; i < n_pairs && ids.size() > 1; ++i)
        {
            const auto a = static_cast<std::size_t>(uniform(0, static_cast<int>(ids.size()) - 1));
            const auto b = static_cast<std::size_t>(uniform(0, static_cast<int>(ids.size()) - 1));
            if (a != b)
            {
                inst.constraints.push_back({ids[a], ids[b], rules::ConstraintKind::Parallel});
            }
        }
        if (chance(0.2))
        {
            inst.rules.rules.erase(*rules::standard_rule("parallel-exclusion"));
        }
        return inst;
    }
}
