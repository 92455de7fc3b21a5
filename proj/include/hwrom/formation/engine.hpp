#pragma once

#include "hwrom/market/market.hpp"
#include "hwrom/org/organization.hpp"
#include "hwrom/rules/rules.hpp"

#include <json.hpp>

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace hwrom::formation
{
    /// Sender/recipient id of the external task source that runs the
    /// championship auction for a mission's root task.
    inline const RobotId kEnvironment{"env"};

    enum class WithdrawReason
    {
        Unwilling,
        EnvironmentChanged,
        Failure,
    };

    std::string_view to_string(WithdrawReason r);

    // ---- events -----------------------------------------------------------

    struct TaskArrived
    {
        org::TaskNode task;
        // Pre-elected root holder (pursuit organizer); otherwise the root is
        // auctioned among organizer-capable robots.
        std::optional<RobotId> organizer;
    };

    // An announcement reached `robot`; the robot decides whether to bid.
    struct AnnouncementReceived
    {
        RobotId robot;
        market::Announcement announcement;
    };

    struct BidSubmitted
    {
        market::Bid bid;
    };

    struct AuctionClosed
    {
        TaskId task;
        std::uint64_t epoch = 0;
    };

    // exec_epoch 0 is an external completion (e.g. evader captured) and
    // completes the whole subtree; otherwise it must match the execution
    // started for the current award.
    struct TaskCompleted
    {
        TaskId task;
        std::uint64_t exec_epoch = 0;
    };

    struct RobotWithdrew
    {
        RobotId robot;
        WithdrawReason reason = WithdrawReason::Unwilling;
    };

    struct RobotFailed
    {
        RobotId robot;
    };

    struct RobotJoined
    {
        org::CooperativeRobot robot;
    };

    struct TickEvent
    {
    };

    using Event = std::variant<TaskArrived, AnnouncementReceived, BidSubmitted, AuctionClosed, TaskCompleted,
                               RobotWithdrew, RobotFailed, RobotJoined, TickEvent>;

    std::string_view event_name(const Event& ev);

    // Events are totally ordered by (tick, seq).
    struct Stamped
    {
        Tick tick = 0;
        std::uint64_t seq = 0;
        Event event;
    };

    // ---- state ------------------------------------------------------------

    struct RobotEntry
    {
        org::CooperativeRobot robot;
        bool alive = true;
        bool withdrawn = false;

        bool available() const noexcept { return alive && !withdrawn; }
    };

    struct TaskRecord
    {
        // Task definition without subtasks; the tree shape lives in parent/children.
        org::TaskNode spec;
        std::optional<TaskId> parent;
        std::vector<TaskId> children;
        int depth = 0;
        org::TaskStatus status = org::TaskStatus::Unassigned;
        std::optional<RobotId> holder;
        Rational price{0};
        // Current offer and round; escalated by adjust_tactics.
        Rational reward{0};
        int round = 0;
        std::uint64_t award_id = 0;
        std::uint64_t exec_epoch = 0;
        bool started = false;

        bool composite() const noexcept { return !children.empty(); }
    };

    struct OpenAuction
    {
        market::Announcement announcement;
        std::vector<market::Bid> bids;
    };

    // One award choice; runners-up are kept for backtracking.
    struct Decision
    {
        TaskId task;
        std::uint64_t award_id = 0;
        std::vector<market::Bid> ranked;
        std::size_t chosen = 0;
    };

    enum class Phase
    {
        Idle,
        Forming,
        Formed,
        Completed,
        Failed,
    };

    std::string_view to_string(Phase p);

    struct FormationState
    {
        Tick now = 0;
        std::uint64_t last_seq = 0;
        bool started = false;
        // Depth of the deepest task currently under auction.
        int level = 0;
        Phase phase = Phase::Idle;
        std::map<RobotId, RobotEntry> robots;
        std::map<TaskId, TaskRecord> tasks;
        // DFS order of the mission tree; drives deterministic iteration.
        std::vector<TaskId> task_order;
        std::optional<TaskId> root;
        std::deque<TaskId> pending;
        std::map<TaskId, OpenAuction> active_auctions;
        rules::AuctionHistory history;
        std::vector<Decision> decisions;
        std::uint64_t next_epoch = 1;
        std::uint64_t next_award = 1;
        std::map<RobotId, Rational> utilities;
        std::optional<org::Organization> settled;
        int missions_completed = 0;
        std::optional<std::string> failure;
    };

    struct Config
    {
        market::Policy policy;
        Tick deadline_ticks = 3;
        // Norms enforced by the engine (standard set by default).
        rules::RuleSet rules = rules::standard_rules();
        std::vector<rules::ConstraintRelation> constraints;
        // Overrides the generic cost model (pursuit installs a distance cost).
        market::CostFn cost;
    };

    // ---- outputs ----------------------------------------------------------

    struct Outbound
    {
        RobotId from;
        RobotId to;
        std::string kind;
        nlohmann::json payload;
    };

    struct Timer
    {
        Tick at = 0;
        Event event;
    };

    // One log record; the simulation stamps tick/seq/state hash.
    struct Record
    {
        std::string event;
        std::optional<TaskId> task;
        std::optional<RobotId> robot;
        std::optional<int> round;
        nlohmann::json detail = nlohmann::json::object();
    };

    struct Effects
    {
        std::vector<Outbound> messages;
        std::vector<Timer> timers;
        std::vector<Record> records;
    };

    struct StepResult
    {
        FormationState state;
        Effects effects;
    };

    // ---- operations -------------------------------------------------------

    FormationState initial_state(const std::vector<org::CooperativeRobot>& robots);

    /// Pure transition. Throws Error(ProtocolViolation) when the event is
    /// not after the last processed (tick, seq); impossible in-protocol
    /// events (unknown auction, locked bidder) are logged and ignored.
    StepResult step(FormationState state, const Stamped& event, const Config& cfg);

    StepResult handle_withdrawal(FormationState state, const RobotId& robot, WithdrawReason reason,
                                 const Config& cfg);
    StepResult reelect_leader(FormationState state, const TaskId& node_task, const Config& cfg);
    /// Throws Error(DuplicateRobotId) for a known id.
    StepResult handle_join(FormationState state, const org::CooperativeRobot& robot, const Config& cfg);

    // Requirements an announcement for `task` carries: the task's own plus
    // Organization and Communication for the root and composite tasks.
    std::vector<org::CapabilityRequirement> role_requirements(const FormationState& state, const TaskId& task);

    enum class Eligibility
    {
        Eligible,
        Unavailable,
        Locked,
        Affiliated,
        ParallelConflict,
        Incapable,
    };

    std::string_view to_string(Eligibility e);

    // Whether `robot` may take `task` right now: available, unlocked, not
    // committed elsewhere in the organization, capability-feasible, and no
    // Parallel conflict with what it already holds.
    Eligibility eligibility(const FormationState& state, const RobotId& robot, const TaskId& task,
                            const Config& cfg);

    // Derived organization view of the current state.
    org::Organization organization(const FormationState& state, const Config& cfg);

    // Robot holding each task that currently has a holder.
    std::map<TaskId, RobotId> holders(const FormationState& state);

    // Hash of the canonical state serialization (for log records).
    std::string state_hash(const FormationState& state);
}
