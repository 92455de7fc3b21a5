#include "hwrom/rules/rules.hpp"
#include "tests/support/oracles.hpp"

#include <doctest.h>

using namespace hwrom;
using namespace hwrom::rules;

namespace
{
    const TaskId t1{"t1"}, t2{"t2"}, t3{"t3"};
    const RobotId r1{"R1"}, r2{"R2"};

    Rule custom(const std::string& id) { return Rule{id, Category::Custom, Predicate::Custom}; }

    org::OrgNode leaf_with(std::set<Rule> rules)
    {
        org::OrgNode n;
        n.id_robot = RobotId("x");
        n.rules.rules = std::move(rules);
        return n;
    }
}

TEST_CASE("check_assignment flags Parallel pairs only")
{
    const auto rules = standard_rules();
    SUBCASE("parallel pair held together")
    {
        auto check = check_assignment(rules, {{t1, t2, ConstraintKind::Parallel}}, {{r1, {t1, t2}}});
        REQUIRE(check.violations.size() == 1);
        CHECK(check.violations[0].robot == r1);
        CHECK_FALSE(check.ok());
    }
    SUBCASE("sequence pair held together is fine")
    {
        CHECK(check_assignment(rules, {{t1, t2, ConstraintKind::Sequence}}, {{r1, {t1, t2}}}).ok());
    }
    SUBCASE("empty assignment")
    {
        CHECK(check_assignment(rules, {{t1, t2, ConstraintKind::Parallel}}, {}).ok());
    }
    SUBCASE("parallel pair split across robots")
    {
        CHECK(check_assignment(rules, {{t1, t2, ConstraintKind::Parallel}}, {{r1, {t1}}, {r2, {t2}}}).ok());
    }
    SUBCASE("without the parallel-exclusion norm nothing is flagged")
    {
        RuleSet relaxed = rules;
        relaxed.rules.erase(*standard_rule("parallel-exclusion"));
        CHECK(check_assignment(relaxed, {{t1, t2, ConstraintKind::Parallel}}, {{r1, {t1, t2}}}).ok());
    }
    SUBCASE("priority pairs become orderings, not violations")
    {
        auto check = check_assignment(rules, {{t2, t1, ConstraintKind::Priority}}, {{r1, {t1, t2}}});
        CHECK(check.ok());
        REQUIRE(check.orderings.size() == 1);
        CHECK(check.orderings[0].before == t2);
        CHECK(check.orderings[0].after == t1);
    }
}

TEST_CASE("check_assignment is monotone in the assignment")
{
    const std::vector<ConstraintRelation> cs{{t1, t2, ConstraintKind::Parallel}, {t2, t3, ConstraintKind::Parallel}};
    const auto rules = standard_rules();
    std::map<RobotId, std::set<TaskId>> a{{r1, {t1, t2}}};
    const auto before = check_assignment(rules, cs, a).violations.size();
    a[r1].insert(t3);
    CHECK(check_assignment(rules, cs, a).violations.size() >= before);
}

TEST_CASE("whole_rules intersects over children")
{
    const Rule A = custom("A"), B = custom("B"), C = custom("C");
    SUBCASE("leaf is identity")
    {
        CHECK(whole_rules(leaf_with({A, B})).rules == std::set<Rule>{A, B});
    }
    SUBCASE("overlapping children")
    {
        org::OrgNode n;
        n.children = {leaf_with({A, B}), leaf_with({B, C})};
        const auto w = whole_rules(n);
        CHECK(w.rules == std::set<Rule>{B});
        CHECK(w.scope == Scope::Whole);
    }
    SUBCASE("disjoint children")
    {
        org::OrgNode n;
        n.children = {leaf_with({A}), leaf_with({C})};
        CHECK(whole_rules(n).rules.empty());
    }
    SUBCASE("nested teams agree with the fold oracle and shrink upward")
    {
        org::OrgNode inner;
        inner.children = {leaf_with({A, B, C}), leaf_with({A, B})};
        org::OrgNode top;
        top.children = {inner, leaf_with({A, C})};
        std::set<std::string> ids;
        for (const auto& r : whole_rules(top).rules)
        {
            ids.insert(r.id);
        }
        CHECK(ids == hwrom::testing::fold_leaf_rules(top));
        for (const auto& r : whole_rules(top).rules)
        {
            CHECK(whole_rules(inner).rules.count(r) == 1);
        }
    }
}

TEST_CASE("forming_preference orders by member count then member ids")
{
    SUBCASE("counts 4,2,3")
    {
        std::vector<FormingCandidate> c{{"a", 4, {}}, {"b", 2, {}}, {"c", 3, {}}};
        CHECK(forming_preference(c) == std::vector<std::size_t>{1, 2, 0});
    }
    SUBCASE("single candidate")
    {
        CHECK(forming_preference({{"only", 1, {"R1"}}}) == std::vector<std::size_t>{0});
    }
    SUBCASE("equal counts fall back to the member-id vector")
    {
        std::vector<FormingCandidate> c{{"x", 3, {"R3", "R1", "R2"}}, {"y", 3, {"R1", "R2", "R4"}}};
        // Sorted {R1,R2,R3} < {R1,R2,R4}.
        CHECK(forming_preference(c) == std::vector<std::size_t>{0, 1});
        std::swap(c[0], c[1]);
        CHECK(forming_preference(c) == std::vector<std::size_t>{1, 0});
    }
    SUBCASE("empty")
    {
        CHECK(forming_preference({}).empty());
    }
}

TEST_CASE("winner_locked follows wins and completions")
{
    AuctionHistory h;
    CHECK_FALSE(winner_locked(h, r1, 5));
    h.record_win(r1, t1, 3);
    h.record_completion(r1, t1, 7);
    CHECK_FALSE(winner_locked(h, r1, 2));
    CHECK(winner_locked(h, r1, 3));
    CHECK(winner_locked(h, r1, 5));
    CHECK_FALSE(winner_locked(h, r1, 8));
    CHECK_FALSE(winner_locked(h, r2, 5));
}

TEST_CASE("coordination wins and releases do not leave a lock")
{
    AuctionHistory h;
    h.record_win(r1, t1, 1, false);
    CHECK_FALSE(winner_locked(h, r1, 2));
    h.record_win(r1, t2, 2, true);
    CHECK(winner_locked(h, r1, 4));
    h.record_release(r1, t2, 4);
    CHECK_FALSE(winner_locked(h, r1, 5));
    // A second win on the same task re-locks.
    h.record_win(r1, t2, 6, true);
    CHECK(winner_locked(h, r1, 6));
}

TEST_CASE("rule vocabulary round trips")
{
    for (const auto& r : standard_rules().rules)
    {
        CHECK(standard_rule(r.id) == r);
    }
    CHECK_FALSE(standard_rule("no-such-rule").has_value());
    CHECK(constraint_kind_from_string("Parallel") == ConstraintKind::Parallel);
    CHECK_FALSE(constraint_kind_from_string("Sideways").has_value());
    ConstraintRelation p{t1, t2, ConstraintKind::Priority};
    CHECK(p.relates(t1, t2));
    CHECK_FALSE(p.relates(t2, t1));
    ConstraintRelation q{t1, t2, ConstraintKind::Parallel};
    CHECK(q.relates(t2, t1));
}
