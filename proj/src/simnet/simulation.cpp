#include "hwrom/simnet/simulation.hpp"

#include "hwrom/common/error.hpp"

namespace hwrom::simnet
{
    using nlohmann::json;

    json to_json(const TraceRecord& r)
    {
        json j;
        j["tick"] = r.tick;
        j["seq"] = r.seq;
        j["event"] = r.event;
        j["task"] = r.task ? json(r.task->str()) : json(nullptr);
        j["robot"] = r.robot ? json(r.robot->str()) : json(nullptr);
        j["round"] = r.round ? json(*r.round) : json(nullptr);
        j["detail"] = r.detail;
        j["state"] = r.state;
        return j;
    }

    TraceRecord trace_record_from_json(const json& j)
    {
        TraceRecord r;
        r.tick = j.at("tick").get<Tick>();
        r.seq = j.at("seq").get<std::uint64_t>();
        r.event = j.at("event").get<std::string>();
        if (!j.at("task").is_null())
        {
            r.task = TaskId(j.at("task").get<std::string>());
        }
        if (!j.at("robot").is_null())
        {
            r.robot = RobotId(j.at("robot").get<std::string>());
        }
        if (!j.at("round").is_null())
        {
            r.round = j.at("round").get<int>();
        }
        r.detail = j.at("detail");
        r.state = j.at("state").get<std::string>();
        return r;
    }

    void EventQueue::push(Tick at, QueueItem item)
    {
        const bool tick = std::holds_alternative<formation::Event>(item) &&
                          std::holds_alternative<formation::TickEvent>(std::get<formation::Event>(item));
        items_.emplace(std::make_tuple(at, tick ? 0 : 1, inserted_++), std::move(item));
    }

    std::pair<Tick, QueueItem> EventQueue::pop()
    {
        auto node = items_.extract(items_.begin());
        return {std::get<0>(node.key()), std::move(node.mapped())};
    }

    Simulation::Simulation(const std::vector<org::CooperativeRobot>& robots, formation::Config cfg, NetConfig net)
        : state_(formation::initial_state(robots)), cfg_(std::move(cfg)), net_(net)
    {
    }

    void Simulation::schedule(Tick at, formation::Event event)
    {
        if (at < now_)
        {
            throw Error(Errc::PastTick, "tick " + std::to_string(at) + " precedes " + std::to_string(now_));
        }
        queue_.push(at, std::move(event));
    }

    void Simulation::inject_failure(const RobotId& robot, Tick at)
    {
        if (!state_.robots.count(robot))
        {
            throw Error(Errc::UnknownRobot, robot.str());
        }
        schedule(at, formation::RobotFailed{robot});
    }

    void Simulation::note(std::string event, std::optional<TaskId> task, std::optional<RobotId> robot, json detail)
    {
        trace_.push_back({now_, trace_.size(), std::move(event), std::move(task), std::move(robot), std::nullopt,
                          std::move(detail), formation::state_hash(state_)});
    }

    void Simulation::run(Tick until)
    {
        stop_ = false;
        while (true)
        {
            while (!queue_.empty() && queue_.next_tick() <= now_)
            {
                auto [at, item] = queue_.pop();
                process(at, std::move(item));
            }
            if (now_ >= until || stop_)
            {
                break;
            }
            ++now_;
            note("Tick", std::nullopt, std::nullopt);
            if (hook_)
            {
                hook_(*this, now_);
            }
            apply(formation::TickEvent{});
        }
    }

    void Simulation::run_events(Tick limit, const std::function<bool(const formation::FormationState&)>& stop)
    {
        while (!queue_.empty() && queue_.next_tick() <= limit)
        {
            if (stop && stop(state_))
            {
                return;
            }
            auto [at, item] = queue_.pop();
            process(at, std::move(item));
        }
    }

    void Simulation::process(Tick at, QueueItem item)
    {
        now_ = std::max(now_, at);
        if (auto* msg = std::get_if<Message>(&item))
        {
            deliver(*msg);
        }
        else
        {
            apply(std::get<formation::Event>(item));
        }
    }

    void Simulation::apply(const formation::Event& event)
    {
        formation::Stamped stamped{now_, ++input_seq_, event};
        auto result = formation::step(std::move(state_), stamped, cfg_);
        state_ = std::move(result.state);
        emit(std::move(result.effects));
    }

    void Simulation::deliver(const Message& msg)
    {
        const json detail{{"from", msg.from.str()}, {"to", msg.to.str()}, {"kind", msg.kind}, {"msg", msg.seq}};
        if (msg.to != formation::kEnvironment)
        {
            auto it = state_.robots.find(msg.to);
            if (it == state_.robots.end() || !it->second.available())
            {
                ++stats_.dropped;
                json d = detail;
                d["reason"] = "recipient down";
                note("Drop", std::nullopt, msg.to, std::move(d));
                return;
            }
        }
        // Teams may have changed while the message was in flight.
        if (!Topology(state_).may_talk(msg.from, msg.to))
        {
            ++stats_.rejected;
            json d = detail;
            d["reason"] = std::string(to_string(RejectReason::CrossTeamViolation));
            note("Reject", std::nullopt, msg.to, std::move(d));
            return;
        }
        ++stats_.delivered;
        if (observer_)
        {
            observer_(msg, state_);
        }
        note("Deliver", std::nullopt, msg.to, detail);
        if (msg.kind == "announce" && msg.to != formation::kEnvironment)
        {
            apply(formation::AnnouncementReceived{msg.to, market::announcement_from_json(msg.payload)});
        }
        else if (msg.kind == "bid")
        {
            apply(formation::BidSubmitted{market::bid_from_json(msg.payload)});
        }
    }

    void Simulation::emit(formation::Effects fx)
    {
        const std::string hash = formation::state_hash(state_);
        for (auto& r : fx.records)
        {
            trace_.push_back({now_, trace_.size(), std::move(r.event), std::move(r.task), std::move(r.robot), r.round,
                              std::move(r.detail), hash});
        }
        for (auto& t : fx.timers)
        {
            queue_.push(std::max(t.at, now_), std::move(t.event));
        }
        if (fx.messages.empty())
        {
            return;
        }
        const Topology topo(state_);
        std::set<RobotId> down;
        for (const auto& [id, entry] : state_.robots)
        {
            if (!entry.available())
            {
                down.insert(id);
            }
        }
        auto log = [&](const char* event, const Message& m, json extra) {
            json d{{"from", m.from.str()}, {"to", m.to.str()}, {"kind", m.kind}, {"msg", m.seq}};
            d.update(extra);
            trace_.push_back({now_, trace_.size(), event, std::nullopt, m.to, std::nullopt, std::move(d), hash});
        };
        for (auto& out : fx.messages)
        {
            Message msg{out.from, out.to, std::move(out.kind), std::move(out.payload), now_, ++message_seq_};
            ++stats_.sent;
            if (msg.to != formation::kEnvironment && down.count(msg.to))
            {
                ++stats_.dropped;
                log("Drop", msg, {{"reason", "recipient down"}});
                continue;
            }
            RouteResult result;
            try
            {
                result = route(net_, msg, topo, down);
            }
            catch (const Error& e)
            {
                ++stats_.rejected;
                log("Reject", msg, {{"reason", std::string(errc_name(e.code()))}});
                continue;
            }
            if (const auto* d = std::get_if<Deliver>(&result))
            {
                queue_.push(d->at, std::move(msg));
            }
            else if (const auto* r = std::get_if<Reject>(&result))
            {
                ++stats_.rejected;
                log("Reject", msg, {{"reason", std::string(to_string(r->reason))}});
            }
            else
            {
                ++stats_.dropped;
                log("Drop", msg, {{"reason", "random"}});
            }
        }
    }
}
