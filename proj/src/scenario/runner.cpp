#include "hwrom/scenario/runner.hpp"

#include "hwrom/common/error.hpp"
#include "hwrom/common/hash.hpp"
#include "hwrom/org/snapshot.hpp"

#include <spdlog/spdlog.h>

#include <memory>
#include <set>

namespace hwrom::scenario
{
    using nlohmann::json;

    namespace
    {
        constexpr std::uint64_t kPlacementStream = 0x706c616365ULL;
        constexpr Tick kRetryDelay = 5;

        org::CapabilityRequirement organizer_req(org::CapabilityKind k)
        {
            return {k, "", Rational(1)};
        }

        bool organizer_capable(const org::CooperativeRobot& r)
        {
            return r.dominates({organizer_req(org::CapabilityKind::Organization),
                                organizer_req(org::CapabilityKind::Communication)});
        }

        // Robots without a declared Moving capability move at their speed.
        org::CooperativeRobot with_motion(const RobotSpec& spec)
        {
            org::CooperativeRobot r = spec.robot;
            const bool has_moving = std::any_of(r.capabilities.begin(), r.capabilities.end(),
                                                [](const auto& c) { return c.kind == org::CapabilityKind::Moving; });
            if (!has_moving)
            {
                r.capabilities.push_back({org::CapabilityKind::Moving, "", Rational(spec.speed)});
            }
            return r;
        }

        struct PursuitRuntime
        {
            PursuitBlock block;
            pursuit::WorldState world;
            std::map<TaskId, pursuit::Cell> targets;
            std::optional<EvaderId> active;
            std::optional<TaskId> active_root;
            std::map<EvaderId, std::map<RobotId, Tick>> first_seen;
            std::vector<std::pair<EvaderId, Tick>> captures;
            std::map<RobotId, RobotSpec> join_specs;
            Tick retry_after = 0;
        };

        void place_randomly(PursuitRuntime& rt, std::uint64_t seed)
        {
            std::set<pursuit::Cell> used;
            std::uint64_t counter = 0;
            const auto area = static_cast<std::uint64_t>(rt.world.grid.width) * rt.world.grid.height;
            auto draw = [&]() {
                for (;;)
                {
                    const std::uint64_t v = counter_random(seed, kPlacementStream, counter++);
                    const auto idx = v % area;
                    pursuit::Cell c{static_cast<int>(idx % rt.world.grid.width),
                                    static_cast<int>(idx / rt.world.grid.width)};
                    if (used.insert(c).second || used.size() >= area)
                    {
                        return c;
                    }
                }
            };
            for (auto& [id, p] : rt.world.robots)
            {
                p.pos = draw();
            }
            for (auto& [id, e] : rt.world.evaders)
            {
                e.pos = draw();
            }
        }

        void pursuit_tick(PursuitRuntime& rt, simnet::Simulation& sim, Tick t)
        {
            const auto& st = sim.state();
            auto& world = rt.world;
            for (const auto& [id, entry] : st.robots)
            {
                auto it = world.robots.find(id);
                if (it == world.robots.end())
                {
                    pursuit::Pursuer p;
                    if (auto js = rt.join_specs.find(id); js != rt.join_specs.end())
                    {
                        p.pos = world.grid.clamp(js->second.position.value_or(pursuit::Cell{0, 0}));
                        p.speed = js->second.speed;
                        p.radius = js->second.radius;
                    }
                    it = world.robots.emplace(id, p).first;
                }
                it->second.alive = entry.available();
            }

            using formation::Phase;
            if (rt.active && st.phase == Phase::Failed)
            {
                sim.note("MissionAbandoned", rt.active_root, std::nullopt, {{"evader", rt.active->str()}});
                rt.active.reset();
                rt.active_root.reset();
                rt.targets.clear();
                rt.retry_after = t + kRetryDelay;
            }

            std::map<RobotId, pursuit::Cell> assignments;
            if (rt.active && rt.active_root && st.tasks.count(*rt.active_root))
            {
                const pursuit::Cell predicted = pursuit::predict(world, *rt.active);
                for (const auto& task : st.tasks.at(*rt.active_root).children)
                {
                    auto off = pursuit::subgoal_offset(task);
                    if (!off)
                    {
                        continue;
                    }
                    pursuit::Cell target{predicted.x + off->x, predicted.y + off->y};
                    if (!world.grid.contains(target))
                    {
                        target = predicted;
                    }
                    rt.targets[task] = target;
                    const auto& rec = st.tasks.at(task);
                    if (rec.status == org::TaskStatus::Assigned && rec.holder && world.robots.count(*rec.holder) &&
                        world.robots.at(*rec.holder).alive)
                    {
                        assignments[*rec.holder] = target;
                    }
                }
            }

            const auto before = world.captured;
            world = pursuit::tick_world(std::move(world), assignments);
            world.tick = t;
            if (spdlog::should_log(spdlog::level::debug))
            {
                std::string line;
                for (const auto& [id, p] : world.robots)
                {
                    line += fmt::format(" {}({},{})", id.str(), p.pos.x, p.pos.y);
                }
                for (const auto& [id, e] : world.evaders)
                {
                    line += fmt::format(" {}({},{})", id.str(), e.pos.x, e.pos.y);
                }
                spdlog::debug("tick {}:{}", t, line);
            }
            for (const auto& e : world.captured)
            {
                if (before.count(e))
                {
                    continue;
                }
                rt.captures.emplace_back(e, t);
                sim.note("Capture", rt.active == e ? rt.active_root : std::nullopt, std::nullopt,
                         {{"evader", e.str()}, {"tick", t}});
                if (rt.active == e)
                {
                    sim.schedule(t, formation::TaskCompleted{*rt.active_root, 0});
                    rt.active.reset();
                    rt.active_root.reset();
                    rt.targets.clear();
                }
            }

            for (const auto& [id, p] : world.robots)
            {
                if (!p.alive || !organizer_capable(st.robots.at(id).robot))
                {
                    continue;
                }
                for (const auto& d : pursuit::sense(world, id))
                {
                    rt.first_seen[d.evader].emplace(id, t);
                }
            }

            const bool busy = st.phase == Phase::Forming || st.phase == Phase::Formed;
            if (!rt.active && !busy && t >= rt.retry_after)
            {
                std::optional<std::pair<Tick, EvaderId>> pick;
                std::vector<pursuit::Detection> detections;
                for (const auto& [e, seen] : rt.first_seen)
                {
                    if (world.captured.count(e))
                    {
                        continue;
                    }
                    for (const auto& [r, at] : seen)
                    {
                        if (world.robots.at(r).alive && (!pick || std::make_pair(at, e) < *pick))
                        {
                            pick = std::make_pair(at, e);
                        }
                    }
                }
                if (pick)
                {
                    for (const auto& [r, at] : rt.first_seen.at(pick->second))
                    {
                        if (world.robots.at(r).alive)
                        {
                            detections.push_back({r, pick->second, {}, at});
                        }
                    }
                    const auto organizer = pursuit::elect_organizer(detections);
                    const auto plan = pursuit::plan_pursuit(world, *organizer, pick->second, rt.block.params);
                    if (!plan.subgoals.empty())
                    {
                        const auto tree = pursuit::mission_for(plan);
                        for (const auto& sg : plan.subgoals)
                        {
                            rt.targets[pursuit::subgoal_task_id(plan.evader, sg.offset)] = sg.target;
                        }
                        rt.active = plan.evader;
                        rt.active_root = tree.id;
                        sim.note("Plan", tree.id, plan.organizer,
                                 {{"evader", plan.evader.str()},
                                  {"predicted", {plan.predicted.x, plan.predicted.y}},
                                  {"subgoals", plan.subgoals.size()}});
                        sim.schedule(t, formation::TaskArrived{tree, plan.organizer});
                    }
                }
            }

            if (world.captured.size() == world.evaders.size() && !rt.active)
            {
                sim.request_stop();
            }
        }

        void count_protocol(const std::vector<simnet::TraceRecord>& records, RunMetrics& m)
        {
            std::set<TaskId> announced;
            for (const auto& r : records)
            {
                if (r.event == "TaskArrived")
                {
                    announced.clear();
                }
                else if (r.event == "AuctionClosed")
                {
                    ++m.formation_rounds;
                }
                else if (r.event == "Announce" && r.task)
                {
                    if (!announced.insert(*r.task).second)
                    {
                        ++m.re_auctions;
                    }
                }
                else if (r.event == "RobotFailed" || r.event == "RobotWithdrew")
                {
                    ++m.failures_handled;
                }
                else if (r.event == "MissionComplete")
                {
                    ++m.missions_completed;
                    m.completion_tick = r.tick;
                }
            }
        }
    }

    json to_json(const RunOverrides& o)
    {
        json j = json::object();
        if (o.seed)
        {
            j["seed"] = *o.seed;
        }
        if (o.ticks)
        {
            j["ticks"] = *o.ticks;
        }
        json fails = json::array();
        for (const auto& [r, t] : o.fails)
        {
            fails.push_back({{"robot", r.str()}, {"at", t}});
        }
        j["fails"] = fails;
        return j;
    }

    RunOverrides overrides_from_json(const json& j)
    {
        RunOverrides o;
        if (j.contains("seed"))
        {
            o.seed = j.at("seed").get<std::uint64_t>();
        }
        if (j.contains("ticks"))
        {
            o.ticks = j.at("ticks").get<Tick>();
        }
        for (const auto& f : j.value("fails", json::array()))
        {
            o.fails.emplace_back(RobotId(f.at("robot").get<std::string>()), f.at("at").get<Tick>());
        }
        return o;
    }

    json to_json(const RunMetrics& m)
    {
        json util = json::object();
        for (const auto& [r, u] : m.utilities)
        {
            util[r.str()] = to_string(u);
        }
        json captures = json::array();
        for (const auto& [e, t] : m.capture_ticks)
        {
            captures.push_back({{"evader", e.str()}, {"tick", t}});
        }
        return json{{"formation_rounds", m.formation_rounds},
                    {"messages_sent", m.messages_sent},
                    {"messages_delivered", m.messages_delivered},
                    {"messages_dropped", m.messages_dropped},
                    {"messages_rejected", m.messages_rejected},
                    {"re_auctions", m.re_auctions},
                    {"failures_handled", m.failures_handled},
                    {"missions_completed", m.missions_completed},
                    {"utilities", util},
                    {"capture_ticks", captures},
                    {"completion_tick", m.completion_tick ? json(*m.completion_tick) : json(nullptr)},
                    {"snapshot_hash", m.snapshot_hash}};
    }

    RunOutcome run_scenario(const ScenarioConfig& config, const std::string& config_text, const std::string& source,
                            const RunOverrides& overrides, const simnet::Simulation::DeliveryObserver& observer)
    {
        ScenarioConfig cfg = config;
        const std::uint64_t seed = overrides.seed.value_or(cfg.seed);
        if (!cfg.net_seed_set)
        {
            cfg.net.seed = seed;
        }
        const Tick ticks = overrides.ticks.value_or(cfg.max_ticks);

        std::vector<org::CooperativeRobot> robots;
        std::shared_ptr<PursuitRuntime> rt;
        if (cfg.pursuit)
        {
            rt = std::make_shared<PursuitRuntime>();
            rt->block = *cfg.pursuit;
            rt->world.grid = cfg.pursuit->grid;
            rt->world.capture_quorum = cfg.pursuit->capture_quorum;
            for (const auto& spec : cfg.robots)
            {
                robots.push_back(with_motion(spec));
                rt->world.robots[spec.robot.id] =
                    pursuit::Pursuer{spec.position.value_or(pursuit::Cell{}), spec.speed, spec.radius, true};
            }
            for (const auto& e : cfg.pursuit->evaders)
            {
                rt->world.evaders[e.id] = pursuit::Evader{e.position.value_or(pursuit::Cell{}), e.speed, e.policy, {}};
            }
            if (cfg.pursuit->random_placement)
            {
                place_randomly(*rt, seed);
            }
            cfg.formation.cost = [rt](const org::CooperativeRobot& r,
                                      const market::Announcement& a) -> std::optional<Rational> {
                auto it = rt->targets.find(a.id_task);
                if (it == rt->targets.end())
                {
                    return market::generic_cost(r, a.required_capabilities);
                }
                try
                {
                    return pursuit::robot_cost(rt->world, r.id, it->second);
                }
                catch (const Error&)
                {
                    return std::nullopt;
                }
            };
        }
        else
        {
            for (const auto& spec : cfg.robots)
            {
                robots.push_back(spec.robot);
            }
        }

        simnet::Simulation sim(robots, cfg.formation, cfg.net);
        if (observer)
        {
            sim.set_delivery_observer(observer);
        }
        for (const auto& ev : cfg.events)
        {
            switch (ev.kind)
            {
            case ScriptedEvent::Kind::Fail:
                sim.schedule(ev.at, formation::RobotFailed{ev.robot});
                break;
            case ScriptedEvent::Kind::Withdraw:
                sim.schedule(ev.at, formation::RobotWithdrew{ev.robot, ev.reason});
                break;
            case ScriptedEvent::Kind::Join:
                if (rt)
                {
                    rt->join_specs[ev.robot] = *ev.joiner;
                    sim.schedule(ev.at, formation::RobotJoined{with_motion(*ev.joiner)});
                }
                else
                {
                    sim.schedule(ev.at, formation::RobotJoined{ev.joiner->robot});
                }
                break;
            }
        }
        for (const auto& [robot, at] : overrides.fails)
        {
            try
            {
                sim.inject_failure(robot, at);
            }
            catch (const Error& e)
            {
                throw ConfigError("--fail", 0, 0, e.what());
            }
        }

        if (rt)
        {
            sim.set_tick_hook([rt](simnet::Simulation& s, Tick t) { pursuit_tick(*rt, s, t); });
        }
        else
        {
            sim.schedule(cfg.task_at, formation::TaskArrived{*cfg.task, std::nullopt});
            sim.set_tick_hook([](simnet::Simulation& s, Tick) {
                const auto phase = s.state().phase;
                if (phase == formation::Phase::Completed || phase == formation::Phase::Failed)
                {
                    s.request_stop();
                }
            });
        }
        spdlog::debug("running {} for up to {} ticks (seed {})", source, ticks, seed);
        sim.run(ticks);

        RunOutcome out;
        const auto& st = sim.state();
        out.final_org = st.settled && st.phase == formation::Phase::Completed ? *st.settled
                                                                               : formation::organization(st, sim.config());
        const std::string snapshot = org::snapshot_hash(out.final_org);
        sim.note("Snapshot", st.root, std::nullopt, {{"hash", snapshot}});

        bool success = false;
        if (rt)
        {
            success = rt->world.captured.size() == rt->world.evaders.size();
            if (!success)
            {
                out.failure = "evaders remain after " + std::to_string(sim.now()) + " ticks";
            }
        }
        else
        {
            success = st.phase == formation::Phase::Completed;
            if (!success)
            {
                out.failure = st.failure.value_or("mission incomplete after " + std::to_string(sim.now()) + " ticks");
            }
        }
        out.exit_code = success ? 0 : 1;

        const auto& stats = sim.stats();
        auto& m = out.metrics;
        count_protocol(sim.trace(), m);
        m.messages_sent = stats.sent;
        m.messages_delivered = stats.delivered;
        m.messages_dropped = stats.dropped;
        m.messages_rejected = stats.rejected;
        m.utilities = st.utilities;
        if (rt)
        {
            m.capture_ticks = rt->captures;
        }
        m.snapshot_hash = snapshot;

        out.log.header.config_hash = hex64(fnv1a64(config_text));
        out.log.header.seed = seed;
        out.log.header.source = source;
        out.log.header.config_text = config_text;
        out.log.header.overrides = to_json(overrides);
        out.log.records = sim.trace();
        out.log.footer.records = out.log.records.size();
        out.log.footer.trace_hash = trace_hash(out.log.records);
        out.log.footer.in_flight = stats.sent - stats.delivered - stats.dropped - stats.rejected;
        out.log.footer.exit_code = out.exit_code;
        return out;
    }

    RunOutcome run_scenario_text(const std::string& config_text, const std::string& source,
                                 const RunOverrides& overrides, const simnet::Simulation::DeliveryObserver& observer)
    {
        return run_scenario(parse_config(config_text, source), config_text, source, overrides, observer);
    }

    RunMetrics metrics_from_log(const EventLog& log)
    {
        RunMetrics m;
        count_protocol(log.records, m);
        for (const auto& r : log.records)
        {
            if (r.event == "Deliver")
            {
                ++m.messages_delivered;
            }
            else if (r.event == "Drop")
            {
                ++m.messages_dropped;
            }
            else if (r.event == "Reject")
            {
                ++m.messages_rejected;
            }
            else if (r.event == "Settle" && r.robot)
            {
                m.utilities[*r.robot] += parse_rational(r.detail.at("amount").get<std::string>());
            }
            else if (r.event == "Capture")
            {
                m.capture_ticks.emplace_back(EvaderId(r.detail.at("evader").get<std::string>()),
                                             r.detail.at("tick").get<Tick>());
            }
            else if (r.event == "Snapshot")
            {
                m.snapshot_hash = r.detail.at("hash").get<std::string>();
            }
        }
        m.messages_sent = m.messages_delivered + m.messages_dropped + m.messages_rejected + log.footer.in_flight;
        return m;
    }

    ReplayResult replay_log(const std::string& log_text)
    {
        EventLog logged;
        RunOutcome rerun;
        try
        {
            logged = parse_log(log_text);
            rerun = run_scenario_text(logged.header.config_text, logged.header.source,
                                      overrides_from_json(logged.header.overrides));
        }
        catch (const LogFormatError& e)
        {
            return {2, std::nullopt, std::string("malformed log: ") + e.what()};
        }
        catch (const ConfigError& e)
        {
            return {2, std::nullopt, std::string("embedded config invalid: ") + e.what()};
        }
        catch (const json::exception& e)
        {
            return {2, std::nullopt, std::string("malformed log header: ") + e.what()};
        }
        const auto& a = logged.records;
        const auto& b = rerun.log.records;
        const std::size_t n = std::min(a.size(), b.size());
        for (std::size_t i = 0; i < n; ++i)
        {
            if (!(a[i] == b[i]))
            {
                return {1, a[i].seq, "divergence at seq " + std::to_string(a[i].seq) + " (" + a[i].event + ")"};
            }
        }
        if (a.size() != b.size())
        {
            return {1, n, "divergence at seq " + std::to_string(n) + ": trace length differs"};
        }
        if (logged.footer.exit_code != rerun.exit_code)
        {
            return {1, std::nullopt, "exit code differs"};
        }
        return {0, std::nullopt, "replay identical (" + std::to_string(a.size()) + " records)"};
    }
}
