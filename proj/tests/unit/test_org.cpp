#include "hwrom/common/error.hpp"
#include "hwrom/org/organization.hpp"
#include "hwrom/org/snapshot.hpp"
#include "tests/support/instances.hpp"

#include <doctest.h>

#include <algorithm>

using namespace hwrom;
using namespace hwrom::org;
using hwrom::testing::organizer_robot;
using hwrom::testing::make_robot;

namespace
{
    OrgNode leaf(const std::string& id, const std::string& robot, int level, int pos)
    {
        OrgNode n;
        n.id_ros = NodeId(id);
        n.id_robot = RobotId(robot);
        n.level_i = level;
        n.pos_j = pos;
        return n;
    }

    OrgNode team(const std::string& id, const std::string& leader, int level, int pos, std::vector<OrgNode> kids)
    {
        OrgNode n;
        n.id_ros = NodeId(id);
        n.id_robot = RobotId(leader);
        n.level_i = level;
        n.pos_j = pos;
        n.children = std::move(kids);
        return n;
    }

    // Society: root led by L, team A (L, R3) and team B (B, R8).
    Organization two_teams()
    {
        Organization o;
        for (const char* id : {"L", "R3", "B", "R8"})
        {
            o.robots.push_back(organizer_robot(id));
        }
        auto a = team("A", "L", 1, 0, {leaf("A0", "L", 2, 0), leaf("A1", "R3", 2, 1)});
        auto b = team("B", "B", 1, 1, {leaf("B0", "B", 2, 0), leaf("B1", "R8", 2, 1)});
        o.root = team("root", "L", 0, 0, {a, b});
        o.relations = {{RobotId("L"), RobotId("B"), RelationKind::Control},
                       {RobotId("L"), RobotId("R3"), RelationKind::Control},
                       {RobotId("B"), RobotId("R8"), RelationKind::Control}};
        return o;
    }

    bool has_kind(const ValidationReport& r, const std::string& kind)
    {
        return std::any_of(r.begin(), r.end(), [&](const Violation& v) { return v.kind == kind; });
    }
}

TEST_CASE("level_of counts depth from the root")
{
    const auto o = two_teams();
    CHECK(level_of(o, NodeId("root")) == 0);
    CHECK(level_of(o, NodeId("A")) == 1);
    CHECK(level_of(o, NodeId("B1")) == 2);
    CHECK_THROWS_AS(level_of(o, NodeId("nope")), Error);
}

TEST_CASE("leader_of is the children[0] robot, the leaf robot, or null mid-formation")
{
    auto o = two_teams();
    CHECK(leader_of(o, NodeId("A1")) == RobotId("R3"));
    CHECK(leader_of(o, NodeId("B")) == RobotId("B"));
    o.root.children[1].id_robot.reset();
    CHECK_FALSE(leader_of(o, NodeId("B")).has_value());
}

TEST_CASE("members collects the subtree")
{
    const auto o = two_teams();
    CHECK(members(o, NodeId("A0")) == std::set<RobotId>{RobotId("L")});
    CHECK(members(o, NodeId("A")).size() == 2);
    // Flat traversal oracle for the root.
    std::set<RobotId> flat;
    for (const auto& r : o.robots)
    {
        flat.insert(r.id);
    }
    CHECK(members(o, NodeId("root")) == flat);
    CHECK_THROWS_AS(members(o, NodeId("ghost")), Error);
}

TEST_CASE("team of leader plus two members has three ids")
{
    Organization o;
    for (const char* id : {"R1", "R2", "R3"})
    {
        o.robots.push_back(make_robot(id, {}));
    }
    o.root = team("T", "R1", 0, 0, {leaf("l0", "R1", 1, 0), leaf("l1", "R2", 1, 1), leaf("l2", "R3", 1, 2)});
    CHECK(members(o, NodeId("T")).size() == 3);
    CHECK(validate(o).empty());
}

TEST_CASE("validate accepts well-formed organizations")
{
    CHECK(validate(two_teams()).empty());

    Organization single;
    single.robots.push_back(organizer_robot("R1"));
    single.root = leaf("root", "R1", 0, 0);
    CHECK(validate(single).empty());
}

TEST_CASE("validate reports each structural violation")
{
    SUBCASE("duplicate robot id")
    {
        auto o = two_teams();
        o.robots.push_back(make_robot("R3", {}));
        CHECK(has_kind(validate(o), "DuplicateRobotId"));
    }
    SUBCASE("empty organization")
    {
        Organization o;
        o.root.id_ros = NodeId("root");
        CHECK(has_kind(validate(o), "EmptyOrganization"));
    }
    SUBCASE("cooperation across levels 1 and 2")
    {
        Organization o;
        for (const char* id : {"L", "R3", "B", "R8"})
        {
            o.robots.push_back(organizer_robot(id));
        }
        // R3 is a level-1 leaf, R8 a level-2 leaf under team B.
        auto b = team("B", "B", 1, 2, {leaf("B0", "B", 2, 0), leaf("B1", "R8", 2, 1)});
        o.root = team("root", "L", 0, 0, {leaf("L0", "L", 1, 0), leaf("L1", "R3", 1, 1), b});
        o.relations = {{RobotId("R3"), RobotId("R8"), RelationKind::Cooperation}};
        auto report = validate(o);
        CHECK(has_kind(report, "CrossLevelCooperation"));
        CHECK(report.size() == 1);
    }
    SUBCASE("level and position mismatch")
    {
        auto o = two_teams();
        o.root.children[0].children[1].level_i = 5;
        o.root.children[1].pos_j = 7;
        auto report = validate(o);
        CHECK(has_kind(report, "LevelMismatch"));
        CHECK(has_kind(report, "PositionMismatch"));
    }
    SUBCASE("leader not bound to children[0]")
    {
        auto o = two_teams();
        std::swap(o.root.children[1].children[0], o.root.children[1].children[1]);
        o.root.children[1].children[0].pos_j = 0;
        o.root.children[1].children[1].pos_j = 1;
        CHECK(has_kind(validate(o), "LeaderMismatch"));
    }
    SUBCASE("robot bound to two leaves")
    {
        auto o = two_teams();
        o.root.children[1].children[1].id_robot = RobotId("R3");
        CHECK(has_kind(validate(o), "RobotInTwoTeams"));
    }
    SUBCASE("unbound leader outside formation, allowed while forming")
    {
        auto o = two_teams();
        o.root.children[1].id_robot.reset();
        CHECK(has_kind(validate(o), "UnboundLeader"));
        o.forming = true;
        CHECK_FALSE(has_kind(validate(o), "UnboundLeader"));
    }
    SUBCASE("control edge that the tree does not justify")
    {
        auto o = two_teams();
        o.relations.push_back({RobotId("R3"), RobotId("R8"), RelationKind::Control});
        CHECK(has_kind(validate(o), "ControlEdgeMismatch"));
    }
    SUBCASE("root level must be zero and node ids unique")
    {
        auto o = two_teams();
        o.root.level_i = 1;
        o.root.children[1].id_ros = NodeId("A");
        auto report = validate(o);
        CHECK(has_kind(report, "RootLevelNonZero"));
        CHECK(has_kind(report, "DuplicateNodeId"));
    }
}

TEST_CASE("capability satisfaction uses kind, subkind and minimum")
{
    auto r = make_robot("R1", {{CapabilityKind::Moving, "wheel", Rational(2)}, {CapabilityKind::Sensing, "", Rational(0)}});
    CHECK(r.satisfies({CapabilityKind::Moving, "", Rational(1)}) == Rational(2));
    CHECK(r.satisfies({CapabilityKind::Moving, "wheel", Rational(2)}).has_value());
    CHECK_FALSE(r.satisfies({CapabilityKind::Moving, "leg", Rational(1)}).has_value());
    CHECK_FALSE(r.satisfies({CapabilityKind::Moving, "", Rational(3)}).has_value());
    // Zero magnitude never counts.
    CHECK_FALSE(r.satisfies({CapabilityKind::Sensing, "", Rational(0)}).has_value());
    CHECK(r.accepts("bid"));
    CHECK_FALSE(r.accepts("gossip"));
}

namespace
{
    Organization settled_pair()
    {
        Organization o;
        for (const char* id : {"L", "A", "B"})
        {
            o.robots.push_back(organizer_robot(id));
        }
        TaskNode root;
        root.id = TaskId("T");
        root.reward = 10;
        root.subtasks = {hwrom::testing::atomic_task("a", 5), hwrom::testing::atomic_task("b", 5)};
        o.mission = root;
        o.root = team("T:T", "L", 0, 0, {leaf("L:L@T", "L", 1, 0), leaf("L:A@T", "A", 1, 1), leaf("L:B@T", "B", 1, 2)});
        o.root.goals = {TaskId("T")};
        o.root.children[1].goals = {TaskId("a")};
        o.root.children[2].goals = {TaskId("b")};
        o.awards = {{TaskId("T"), {RobotId("L"), Rational(0)}},
                    {TaskId("a"), {RobotId("A"), Rational(3)}},
                    {TaskId("b"), {RobotId("B"), Rational(4)}}};
        return o;
    }
}

TEST_CASE("settle_utilities pays members their price and the leader the margin")
{
    auto o = settled_pair();
    const auto delta = settle_utilities(o, {{TaskId("a"), Rational(3)}, {TaskId("b"), Rational(4)}, {TaskId("T"), Rational(10)}});
    CHECK(delta.at(RobotId("A")) == 3);
    CHECK(delta.at(RobotId("B")) == 4);
    CHECK(delta.at(RobotId("L")) == 3);
    CHECK(o.root.utility == 3);
    CHECK(o.root.children[1].utility == 3);
    // Conservation: total paid equals the external reward.
    Rational total = 0;
    for (const auto& [r, v] : delta)
    {
        total += v;
    }
    CHECK(total == 10);
}

TEST_CASE("settle_utilities edge cases")
{
    auto o = settled_pair();
    CHECK(settle_utilities(o, {}).empty());
    CHECK_THROWS_AS(settle_utilities(o, {{TaskId("zzz"), Rational(1)}}), Error);
    o.awards.erase(TaskId("b"));
    try
    {
        settle_utilities(o, {{TaskId("b"), Rational(1)}});
        FAIL("expected TaskNotAssigned");
    }
    catch (const Error& e)
    {
        CHECK(e.code() == Errc::TaskNotAssigned);
    }

    Organization single;
    single.robots.push_back(organizer_robot("R1"));
    single.root = leaf("T:t", "R1", 0, 0);
    single.root.goals = {TaskId("t")};
    single.mission = hwrom::testing::atomic_task("t", 10);
    single.awards = {{TaskId("t"), {RobotId("R1"), Rational(10)}}};
    const auto d = settle_utilities(single, {{TaskId("t"), Rational(10)}});
    CHECK(d.size() == 1);
    CHECK(d.at(RobotId("R1")) == 10);
}

TEST_CASE("snapshot hash is stable under robot order and sensitive to content")
{
    auto a = two_teams();
    auto b = two_teams();
    std::reverse(b.robots.begin(), b.robots.end());
    std::reverse(b.relations.begin(), b.relations.end());
    CHECK(snapshot_hash(a) == snapshot_hash(b));
    b.root.children[0].utility = 1;
    CHECK(snapshot_hash(a) != snapshot_hash(b));
}
