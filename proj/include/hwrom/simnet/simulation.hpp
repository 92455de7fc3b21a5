#pragma once

#include "hwrom/formation/engine.hpp"
#include "hwrom/simnet/network.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

namespace hwrom::simnet
{
    // One line of the event trace.
    struct TraceRecord
    {
        Tick tick = 0;
        std::uint64_t seq = 0;
        std::string event;
        std::optional<TaskId> task;
        std::optional<RobotId> robot;
        std::optional<int> round;
        nlohmann::json detail = nlohmann::json::object();
        // State hash after the transition that produced the record.
        std::string state;

        friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
    };

    nlohmann::json to_json(const TraceRecord& r);
    TraceRecord trace_record_from_json(const nlohmann::json& j);

    struct NetStats
    {
        std::uint64_t sent = 0;
        std::uint64_t delivered = 0;
        std::uint64_t dropped = 0;
        std::uint64_t rejected = 0;
    };

    using QueueItem = std::variant<formation::Event, Message>;

    // Ordered by (tick, class, insertion); Tick events lead their tick.
    class EventQueue
    {
    public:
        void push(Tick at, QueueItem item);
        bool empty() const noexcept { return items_.empty(); }
        Tick next_tick() const { return std::get<0>(items_.begin()->first); }
        std::pair<Tick, QueueItem> pop();
        std::size_t size() const noexcept { return items_.size(); }

    private:
        std::map<std::tuple<Tick, int, std::uint64_t>, QueueItem> items_;
        std::uint64_t inserted_ = 0;
    };

    class Simulation
    {
    public:
        // Called at the start of every tick, before queued events of that tick.
        using TickHook = std::function<void(Simulation&, Tick)>;

        Simulation(const std::vector<org::CooperativeRobot>& robots, formation::Config cfg, NetConfig net = {});

        /// Throws Error(PastTick) when `at` precedes the current tick.
        void schedule(Tick at, formation::Event event);
        /// Throws Error(UnknownRobot) or Error(PastTick).
        void inject_failure(const RobotId& robot, Tick at);

        void set_tick_hook(TickHook hook) { hook_ = std::move(hook); }
        // Sees every message just before it reaches its recipient.
        using DeliveryObserver = std::function<void(const Message&, const formation::FormationState&)>;
        void set_delivery_observer(DeliveryObserver obs) { observer_ = std::move(obs); }
        // Ends run() after the current tick's events.
        void request_stop() noexcept { stop_ = true; }

        // Advances tick by tick up to `until`, emitting a Tick record each tick.
        void run(Tick until);
        // Processes queued events without tick records until the queue is
        // empty, `stop` returns true, or the next event lies past `limit`.
        void run_events(Tick limit, const std::function<bool(const formation::FormationState&)>& stop = {});

        const formation::FormationState& state() const noexcept { return state_; }
        const formation::Config& config() const noexcept { return cfg_; }
        const std::vector<TraceRecord>& trace() const noexcept { return trace_; }
        const NetStats& stats() const noexcept { return stats_; }
        Tick now() const noexcept { return now_; }

        // Appends a record that did not come from the engine (scenario layer).
        void note(std::string event, std::optional<TaskId> task, std::optional<RobotId> robot,
                  nlohmann::json detail = nlohmann::json::object());

    private:
        void process(Tick at, QueueItem item);
        void apply(const formation::Event& event);
        void deliver(const Message& msg);
        void emit(formation::Effects fx);

        formation::FormationState state_;
        formation::Config cfg_;
        NetConfig net_;
        EventQueue queue_;
        TickHook hook_;
        DeliveryObserver observer_;
        bool stop_ = false;
        std::vector<TraceRecord> trace_;
        NetStats stats_;
        Tick now_ = 0;
        std::uint64_t input_seq_ = 0;
        std::uint64_t message_seq_ = 0;
    };
}
