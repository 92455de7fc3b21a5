#pragma once

#include "hwrom/org/organization.hpp"
#include "hwrom/rules/types.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace hwrom::rules
{
    struct AssignmentViolation
    {
        RobotId robot;
        TaskId a;
        TaskId b;
        ConstraintKind kind = ConstraintKind::Parallel;
    };

    struct RequiredOrdering
    {
        RobotId robot;
        TaskId before;
        TaskId after;
    };

    struct AssignmentCheck
    {
        std::vector<AssignmentViolation> violations;
        // Priority pairs co-held by one robot: legal, but the executor must
        // run `before` first.
        std::vector<RequiredOrdering> orderings;

        bool ok() const noexcept { return violations.empty(); }
    };

    // A Parallel pair held by one robot is a violation when the rule set
    // carries the parallel-exclusion norm. Sequence and SameTask never are.
    AssignmentCheck check_assignment(const RuleSet& rules,
                                     const std::vector<ConstraintRelation>& constraints,
                                     const std::map<RobotId, std::set<TaskId>>& assignment);

    // Leaf: its own rules. Internal node: intersection over children.
    RuleSet whole_rules(const org::OrgNode& node);

    struct FormingCandidate
    {
        std::string label;
        std::size_t member_count = 0;
        std::vector<std::string> member_ids;
    };

    // Indices of `candidates`, fewest members first; ties by the
    // lexicographically smaller sorted member-id vector, then input order.
    std::vector<std::size_t> forming_preference(const std::vector<FormingCandidate>& candidates);

    enum class HistoryKind
    {
        Win,
        Completion,
        Release,
    };

    struct HistoryEntry
    {
        HistoryKind kind = HistoryKind::Win;
        RobotId robot;
        TaskId task;
        Tick tick = 0;
        // Wins of atomic tasks lock the bidder; coordination wins (leading a
        // composite task) do not.
        bool execution = true;
    };

    // Append-only; entries are expected in nondecreasing tick order.
    class AuctionHistory
    {
    public:
        void record_win(const RobotId& robot, const TaskId& task, Tick at, bool execution = true);
        void record_completion(const RobotId& robot, const TaskId& task, Tick at);
        // Revocation or withdrawal: ends a lock without completing the task.
        void record_release(const RobotId& robot, const TaskId& task, Tick at);

        const std::vector<HistoryEntry>& entries() const noexcept { return entries_; }

    private:
        std::vector<HistoryEntry> entries_;
    };

    // True iff `robot` has an execution win at or before `at` that is not
    // closed by a later completion/release at or before `at`.
    bool winner_locked(const AuctionHistory& history, const RobotId& robot, Tick at);
}
