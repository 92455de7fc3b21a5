#include "hwrom/formation/form.hpp"

#include <set>

namespace hwrom::formation
{
    namespace
    {
        // Generous bound on event time: every auction round takes at most
        // deadline + latency ticks and rounds are finite.
        constexpr Tick kHorizon = 1'000'000;

        bool valid_tree(const org::TaskNode& task, std::set<TaskId>& seen)
        {
            if (task.id.empty() || !seen.insert(task.id).second || task.reward < 0)
            {
                return false;
            }
            for (const auto& sub : task.subtasks)
            {
                if (!valid_tree(sub, seen))
                {
                    return false;
                }
            }
            return true;
        }
    }

    std::string_view to_string(FormationError::Kind k)
    {
        switch (k)
        {
        case FormationError::Kind::Unfillable: return "Unfillable";
        case FormationError::Kind::NoRobots: return "NoRobots";
        case FormationError::Kind::InvalidTask: return "InvalidTask";
        }
        return "Unfillable";
    }

    FormRun form_traced(const org::TaskNode& task, const std::vector<org::CooperativeRobot>& robots,
                        const Config& cfg, const simnet::NetConfig& net,
                        const simnet::Simulation::DeliveryObserver& observer)
    {
        std::set<TaskId> seen;
        if (!valid_tree(task, seen))
        {
            return {FormationError{FormationError::Kind::InvalidTask, task.id.str()}, {}, {}};
        }
        if (robots.empty())
        {
            return {FormationError{FormationError::Kind::NoRobots, "no robots"}, {}, {}};
        }
        Config run_cfg = cfg;
        simnet::Simulation sim(robots, run_cfg, net);
        if (observer)
        {
            sim.set_delivery_observer(observer);
        }
        sim.schedule(0, TaskArrived{task, std::nullopt});
        sim.run_events(kHorizon, [](const FormationState& s) {
            return s.phase == Phase::Formed || s.phase == Phase::Failed || s.phase == Phase::Completed;
        });
        FormRun out{FormationError{}, sim.trace(), sim.stats()};
        const auto& st = sim.state();
        if (st.phase == Phase::Formed || st.phase == Phase::Completed)
        {
            out.result = organization(st, sim.config());
        }
        else
        {
            out.result = FormationError{FormationError::Kind::Unfillable, st.failure.value_or("formation stalled")};
        }
        return out;
    }

    FormResult form(const org::TaskNode& task, const std::vector<org::CooperativeRobot>& robots, const Config& cfg,
                    const simnet::NetConfig& net)
    {
        return form_traced(task, robots, cfg, net).result;
    }
}
