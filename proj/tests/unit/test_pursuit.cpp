#include "hwrom/common/error.hpp"
#include "hwrom/pursuit/world.hpp"

#include <doctest.h>

using namespace hwrom;
using namespace hwrom::pursuit;

namespace
{
    WorldState world_with(std::map<std::string, Pursuer> robots, std::map<std::string, Evader> evaders)
    {
        WorldState w;
        for (auto& [id, p] : robots)
        {
            w.robots[RobotId(id)] = p;
        }
        for (auto& [id, e] : evaders)
        {
            w.evaders[EvaderId(id)] = e;
        }
        return w;
    }

    std::set<Cell> targets(const PursuitPlan& p)
    {
        std::set<Cell> out;
        for (const auto& s : p.subgoals)
        {
            out.insert(s.target);
        }
        return out;
    }

    Evader still(Cell at) { return Evader{at, 0, "flee", {0, 0}}; }
}

TEST_CASE("sense uses the Chebyshev radius")
{
    SUBCASE("same cell, radius 1")
    {
        auto w = world_with({{"R1", {{3, 3}, 1, 1, true}}}, {{"e1", still({3, 3})}});
        auto d = sense(w, RobotId("R1"));
        REQUIRE(d.size() == 1);
        CHECK(d[0].evader == EvaderId("e1"));
        CHECK(d[0].pos == Cell{3, 3});
    }
    SUBCASE("radius boundary")
    {
        auto w = world_with({{"R1", {{0, 0}, 1, 3, true}}}, {{"in", still({3, 2})}, {"out", still({4, 0})}});
        auto d = sense(w, RobotId("R1"));
        REQUIRE(d.size() == 1);
        CHECK(d[0].evader == EvaderId("in"));
    }
    SUBCASE("two evaders come back ordered by id")
    {
        auto w = world_with({{"R1", {{5, 5}, 1, 3, true}}}, {{"zeta", still({5, 6})}, {"alpha", still({4, 5})}});
        w.tick = 7;
        auto d = sense(w, RobotId("R1"));
        REQUIRE(d.size() == 2);
        CHECK(d[0].evader == EvaderId("alpha"));
        CHECK(d[1].evader == EvaderId("zeta"));
        CHECK(d[0].tick == 7);
    }
    SUBCASE("captured evaders and dead robots")
    {
        auto w = world_with({{"R1", {{5, 5}, 1, 3, true}}, {"R2", {{5, 5}, 1, 3, false}}}, {{"e1", still({5, 6})}});
        CHECK(sense(w, RobotId("R2")).empty());
        w.captured.insert(EvaderId("e1"));
        CHECK(sense(w, RobotId("R1")).empty());
        CHECK_THROWS_AS(sense(w, RobotId("R9")), Error);
    }
}

TEST_CASE("elect_organizer picks the earliest detection, then the lowest id")
{
    const EvaderId e{"e1"};
    CHECK(elect_organizer({{RobotId("R2"), e, {}, 5}, {RobotId("R7"), e, {}, 3}}) == RobotId("R7"));
    CHECK(elect_organizer({{RobotId("R2"), e, {}, 3}, {RobotId("R1"), e, {}, 3}}) == RobotId("R1"));
    CHECK_FALSE(elect_organizer({}).has_value());
}

TEST_CASE("plan_pursuit surrounds the predicted cell")
{
    SUBCASE("stationary evader mid-grid")
    {
        auto w = world_with({}, {{"e1", still({5, 5})}});
        auto p = plan_pursuit(w, RobotId("R1"), EvaderId("e1"));
        CHECK(p.predicted == Cell{5, 5});
        CHECK(targets(p) == std::set<Cell>{{4, 5}, {6, 5}, {5, 4}, {5, 6}});
        REQUIRE(p.subgoals.size() == 4);
        CHECK(p.subgoals[0].offset == Cell{-1, 0});
        CHECK(p.subgoals[0].reward == 10);
    }
    SUBCASE("corner clips to two subgoals")
    {
        auto w = world_with({}, {{"e1", still({0, 0})}});
        auto p = plan_pursuit(w, RobotId("R1"), EvaderId("e1"));
        CHECK(targets(p) == std::set<Cell>{{1, 0}, {0, 1}});
    }
    SUBCASE("moving evader is led by one step")
    {
        auto w = world_with({}, {{"e1", Evader{{5, 5}, 1, "flee", {1, 0}}}});
        auto p = plan_pursuit(w, RobotId("R1"), EvaderId("e1"));
        CHECK(p.predicted == Cell{6, 5});
        CHECK(targets(p) == std::set<Cell>{{5, 5}, {7, 5}, {6, 4}, {6, 6}});
    }
    SUBCASE("k selects how many slots")
    {
        auto w = world_with({}, {{"e1", still({5, 5})}});
        CHECK(plan_pursuit(w, RobotId("R1"), EvaderId("e1"), {8, 10, 1}).subgoals.size() == 8);
        CHECK(plan_pursuit(w, RobotId("R1"), EvaderId("e1"), {2, 10, 1}).subgoals.size() == 2);
        CHECK_THROWS_AS(plan_pursuit(w, RobotId("R1"), EvaderId("e1"), {9, 10, 1}), Error);
        CHECK_THROWS_AS(plan_pursuit(w, RobotId("R1"), EvaderId("e1"), {0, 10, 1}), Error);
    }
    SUBCASE("unknown evader")
    {
        auto w = world_with({}, {});
        CHECK_THROWS_AS(plan_pursuit(w, RobotId("R1"), EvaderId("e1")), Error);
    }
}

TEST_CASE("robot_cost is distance over speed")
{
    auto w = world_with({{"R1", {{0, 0}, 2, 3, true}}, {"R0", {{1, 1}, 0, 3, true}}}, {});
    CHECK(robot_cost(w, RobotId("R1"), {0, 0}) == 0);
    CHECK(robot_cost(w, RobotId("R1"), {4, 0}) == 2);
    CHECK(robot_cost(w, RobotId("R1"), {3, 1}) == Rational(3, 2));
    CHECK_THROWS_AS(robot_cost(w, RobotId("R0"), {4, 0}), Error);
    CHECK_THROWS_AS(robot_cost(w, RobotId("R9"), {4, 0}), Error);
}

TEST_CASE("tick_world")
{
    SUBCASE("without pursuers the evader takes the lowest reachable cell")
    {
        auto w = world_with({}, {{"e1", Evader{{5, 5}, 1, "flee", {}}}});
        auto next = tick_world(w, {});
        CHECK(next.evaders.at(EvaderId("e1")).pos == Cell{4, 4});
        CHECK(next.evaders.at(EvaderId("e1")).heading == Cell{-1, -1});
        CHECK(next.tick == 1);
        CHECK(tick_world(w, {}).evaders.at(EvaderId("e1")).pos == next.evaders.at(EvaderId("e1")).pos);
    }
    SUBCASE("the evader moves away from the nearest pursuer")
    {
        auto w = world_with({{"R1", {{2, 5}, 1, 3, true}}}, {{"e1", Evader{{5, 5}, 1, "flee", {}}}});
        auto next = tick_world(w, {});
        CHECK(next.evaders.at(EvaderId("e1")).pos.x == 6);
    }
    SUBCASE("two robots adjacent after moving capture the evader")
    {
        auto w = world_with({{"R1", {{3, 5}, 1, 3, true}}, {"R2", {{7, 5}, 1, 3, true}}},
                            {{"e1", still({5, 5})}});
        auto next = tick_world(w, {{RobotId("R1"), {4, 5}}, {RobotId("R2"), {6, 5}}});
        CHECK(next.robots.at(RobotId("R1")).pos == Cell{4, 5});
        CHECK(next.robots.at(RobotId("R2")).pos == Cell{6, 5});
        CHECK(next.captured.count(EvaderId("e1")) == 1);
    }
    SUBCASE("one adjacent robot is below quorum")
    {
        auto w = world_with({{"R1", {{4, 5}, 1, 3, true}}}, {{"e1", still({5, 5})}});
        CHECK(tick_world(w, {}).captured.empty());
    }
    SUBCASE("dead robots neither move nor count")
    {
        auto w = world_with({{"R1", {{4, 5}, 1, 3, true}}, {"R2", {{6, 5}, 1, 3, false}}}, {{"e1", still({5, 5})}});
        auto next = tick_world(w, {{RobotId("R2"), {0, 0}}});
        CHECK(next.robots.at(RobotId("R2")).pos == Cell{6, 5});
        CHECK(next.captured.empty());
    }
    SUBCASE("fast robots move several cells and stop on the target")
    {
        auto w = world_with({{"R1", {{0, 0}, 3, 3, true}}}, {});
        CHECK(tick_world(w, {{RobotId("R1"), {2, 1}}}).robots.at(RobotId("R1")).pos == Cell{2, 1});
        CHECK(tick_world(w, {{RobotId("R1"), {9, 0}}}).robots.at(RobotId("R1")).pos == Cell{3, 0});
    }
}

TEST_CASE("mission layout")
{
    auto w = world_with({}, {{"e1", still({5, 5})}});
    auto plan = plan_pursuit(w, RobotId("R1"), EvaderId("e1"));
    auto m = mission_for(plan);
    CHECK(m.subtasks.size() == 4);
    CHECK(m.reward == 40);
    for (const auto& s : m.subtasks)
    {
        CHECK(s.atomic());
        REQUIRE(subgoal_offset(s.id).has_value());
    }
    CHECK(subgoal_offset(subgoal_task_id(EvaderId("e1"), {-1, 1})) == Cell{-1, 1});
    CHECK_FALSE(subgoal_offset(TaskId("plain")).has_value());
    CHECK(chebyshev({0, 0}, {3, -4}) == 4);
    CHECK(Grid{10, 10}.clamp({-2, 12}) == Cell{0, 9});
}
