#include "hwrom/pursuit/world.hpp"

#include "hwrom/common/error.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>

namespace hwrom::pursuit
{
    namespace
    {
        int sign(int v) noexcept { return (v > 0) - (v < 0); }

        void apply_capture(WorldState& world)
        {
            for (const auto& [id, ev] : world.evaders)
            {
                if (world.captured.count(id))
                {
                    continue;
                }
                int near = 0;
                for (const auto& [rid, p] : world.robots)
                {
                    if (p.alive && chebyshev(p.pos, ev.pos) <= 1)
                    {
                        ++near;
                    }
                }
                if (near >= world.capture_quorum)
                {
                    world.captured.insert(id);
                }
            }
        }

        const std::string kRootPrefix = "catch:";
    }

    int chebyshev(Cell a, Cell b) noexcept { return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y)); }

    Cell Grid::clamp(Cell c) const noexcept
    {
        return {std::clamp(c.x, 0, width - 1), std::clamp(c.y, 0, height - 1)};
    }

    std::vector<Detection> sense(const WorldState& world, const RobotId& robot)
    {
        auto it = world.robots.find(robot);
        if (it == world.robots.end())
        {
            throw Error(Errc::UnknownRobot, robot.str());
        }
        std::vector<Detection> out;
        if (!it->second.alive)
        {
            return out;
        }
        for (const auto& [id, ev] : world.evaders)
        {
            if (!world.captured.count(id) && chebyshev(it->second.pos, ev.pos) <= it->second.radius)
            {
                out.push_back({robot, id, ev.pos, world.tick});
            }
        }
        return out;
    }

    std::optional<RobotId> elect_organizer(const std::vector<Detection>& detections)
    {
        const Detection* best = nullptr;
        for (const auto& d : detections)
        {
            if (!best || d.tick < best->tick || (d.tick == best->tick && d.robot < best->robot))
            {
                best = &d;
            }
        }
        return best ? std::optional<RobotId>(best->robot) : std::nullopt;
    }

    const std::vector<Cell>& surround_offsets()
    {
        static const std::vector<Cell> offsets{{-1, 0}, {1, 0}, {0, -1}, {0, 1}, {-1, -1}, {1, -1}, {-1, 1}, {1, 1}};
        return offsets;
    }

    Cell predict(const WorldState& world, const EvaderId& evader)
    {
        const Evader& ev = world.evaders.at(evader);
        return world.grid.clamp({ev.pos.x + ev.speed * ev.heading.x, ev.pos.y + ev.speed * ev.heading.y});
    }

    PursuitPlan plan_pursuit(const WorldState& world, const RobotId& organizer, const EvaderId& evader,
                             const PursuitParams& params)
    {
        if (!world.evaders.count(evader) || world.captured.count(evader))
        {
            throw Error(Errc::EvaderUnknown, evader.str());
        }
        if (params.k < 1 || params.k > static_cast<int>(surround_offsets().size()))
        {
            throw Error(Errc::InvalidArgument, "k must be in [1, 8]");
        }
        PursuitPlan plan{organizer, evader, predict(world, evader), {}};
        for (int i = 0; i < params.k; ++i)
        {
            const Cell off = surround_offsets()[static_cast<std::size_t>(i)];
            const Cell target{plan.predicted.x + off.x, plan.predicted.y + off.y};
            if (world.grid.contains(target))
            {
                plan.subgoals.push_back({off, target, params.required_speed, params.base_reward});
            }
        }
        return plan;
    }

    Rational robot_cost(const WorldState& world, const RobotId& robot, Cell subgoal)
    {
        auto it = world.robots.find(robot);
        if (it == world.robots.end())
        {
            throw Error(Errc::UnknownRobot, robot.str());
        }
        if (it->second.speed <= 0)
        {
            throw Error(Errc::ZeroSpeed, robot.str());
        }
        return Rational(chebyshev(it->second.pos, subgoal), it->second.speed);
    }

    WorldState tick_world(WorldState world, const std::map<RobotId, Cell>& assignments)
    {
        for (const auto& [id, target] : assignments)
        {
            auto it = world.robots.find(id);
            if (it == world.robots.end() || !it->second.alive)
            {
                continue;
            }
            Pursuer& p = it->second;
            const Cell goal = world.grid.clamp(target);
            for (int s = 0; s < p.speed && p.pos != goal; ++s)
            {
                p.pos = {p.pos.x + sign(goal.x - p.pos.x), p.pos.y + sign(goal.y - p.pos.y)};
            }
        }

        // An evader cornered by the pursuers' moves is caught before it steps.
        apply_capture(world);
        for (auto& [id, ev] : world.evaders)
        {
            if (world.captured.count(id))
            {
                continue;
            }
            Cell best = ev.pos;
            int best_score = std::numeric_limits<int>::min();
            for (int x = ev.pos.x - ev.speed; x <= ev.pos.x + ev.speed; ++x)
            {
                for (int y = ev.pos.y - ev.speed; y <= ev.pos.y + ev.speed; ++y)
                {
                    const Cell c{x, y};
                    if (!world.grid.contains(c))
                    {
                        continue;
                    }
                    int score = std::numeric_limits<int>::max();
                    for (const auto& [rid, p] : world.robots)
                    {
                        if (p.alive)
                        {
                            score = std::min(score, chebyshev(c, p.pos));
                        }
                    }
                    // Cells are visited in (x, y) order, so strict > keeps the lowest.
                    if (score > best_score)
                    {
                        best_score = score;
                        best = c;
                    }
                }
            }
            ev.heading = {sign(best.x - ev.pos.x), sign(best.y - ev.pos.y)};
            ev.pos = best;
        }

        apply_capture(world);
        ++world.tick;
        return world;
    }

    TaskId subgoal_task_id(const EvaderId& evader, Cell offset)
    {
        return TaskId(evader.str() + "/" + std::to_string(offset.x) + "," + std::to_string(offset.y));
    }

    std::optional<Cell> subgoal_offset(const TaskId& task)
    {
        const std::string& s = task.str();
        const auto slash = s.rfind('/');
        const auto comma = s.rfind(',');
        if (slash == std::string::npos || comma == std::string::npos || comma < slash)
        {
            return std::nullopt;
        }
        try
        {
            return Cell{std::stoi(s.substr(slash + 1, comma - slash - 1)), std::stoi(s.substr(comma + 1))};
        }
        catch (const std::exception&)
        {
            return std::nullopt;
        }
    }

    org::TaskNode mission_for(const PursuitPlan& plan)
    {
        org::TaskNode root;
        root.id = TaskId(kRootPrefix + plan.evader.str());
        root.duration = 0;
        root.reward = 0;
        for (const auto& sg : plan.subgoals)
        {
            org::TaskNode sub;
            sub.id = subgoal_task_id(plan.evader, sg.offset);
            sub.required_capabilities = {{org::CapabilityKind::Moving, "", Rational(sg.required_speed)}};
            sub.reward = sg.reward;
            sub.duration = 0;
            root.reward += sg.reward;
            root.subtasks.push_back(std::move(sub));
        }
        return root;
    }
}
