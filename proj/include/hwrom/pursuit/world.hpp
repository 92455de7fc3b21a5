#pragma once

#include "hwrom/common/ids.hpp"
#include "hwrom/common/rational.hpp"
#include "hwrom/org/organization.hpp"

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace hwrom::pursuit
{
    struct Cell
    {
        int x = 0;
        int y = 0;

        friend auto operator<=>(const Cell&, const Cell&) = default;
        friend bool operator==(const Cell&, const Cell&) = default;
    };

    int chebyshev(Cell a, Cell b) noexcept;

    struct Grid
    {
        int width = 10;
        int height = 10;

        bool contains(Cell c) const noexcept { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; }
        Cell clamp(Cell c) const noexcept;
    };

    struct Pursuer
    {
        Cell pos;
        int speed = 1;
        int radius = 3;
        bool alive = true;
    };

    struct Evader
    {
        Cell pos;
        int speed = 1;
        std::string policy = "flee";
        // Last movement direction, each component in {-1, 0, 1}.
        Cell heading;
    };

    struct WorldState
    {
        Grid grid;
        std::map<RobotId, Pursuer> robots;
        std::map<EvaderId, Evader> evaders;
        Tick tick = 0;
        std::set<EvaderId> captured;
        int capture_quorum = 2;
    };

    struct Detection
    {
        RobotId robot;
        EvaderId evader;
        Cell pos;
        Tick tick = 0;
    };

    /// Evaders within the robot's sensing radius, ordered by id. A dead
    /// robot senses nothing. Throws Error(UnknownRobot).
    std::vector<Detection> sense(const WorldState& world, const RobotId& robot);

    /// Earliest detection wins, then the lowest robot id.
    std::optional<RobotId> elect_organizer(const std::vector<Detection>& detections);

    struct Subgoal
    {
        // Offset from the predicted evader cell; identifies the slot.
        Cell offset;
        Cell target;
        int required_speed = 1;
        Rational reward{0};
    };

    struct PursuitParams
    {
        int k = 4;
        Rational base_reward{10};
        int required_speed = 1;
    };

    struct PursuitPlan
    {
        RobotId organizer;
        EvaderId evader;
        Cell predicted;
        std::vector<Subgoal> subgoals;
    };

    // Surround offsets in slot order: -x, +x, -y, +y, then the diagonals.
    const std::vector<Cell>& surround_offsets();

    Cell predict(const WorldState& world, const EvaderId& evader);

    /// Throws Error(EvaderUnknown) for an unknown or captured evader.
    PursuitPlan plan_pursuit(const WorldState& world, const RobotId& organizer, const EvaderId& evader,
                             const PursuitParams& params = {});

    /// Chebyshev distance over speed. Throws Error(UnknownRobot) or
    /// Error(ZeroSpeed).
    Rational robot_cost(const WorldState& world, const RobotId& robot, Cell subgoal);

    /// Moves assigned robots, applies the capture rule, moves the remaining
    /// evaders, then applies the capture rule again.
    WorldState tick_world(WorldState world, const std::map<RobotId, Cell>& assignments);

    // Mission tree for one evader: a composite capture task with one atomic
    // subgoal task per plan slot.
    org::TaskNode mission_for(const PursuitPlan& plan);
    TaskId subgoal_task_id(const EvaderId& evader, Cell offset);
    std::optional<Cell> subgoal_offset(const TaskId& task);
}
