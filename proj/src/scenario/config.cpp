#include "hwrom/scenario/config.hpp"

#include "hwrom/simnet/network.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

namespace hwrom::scenario
{
    namespace
    {
        std::string format_error(const std::string& source, int line, int column, const std::string& message)
        {
            return source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + message;
        }

        class Reader
        {
        public:
            explicit Reader(std::string source) : source_(std::move(source)) {}

            [[noreturn]] void fail(const YAML::Node& at, const std::string& message) const
            {
                const auto mark = at.Mark();
                const bool known = mark.line >= 0;
                throw ConfigError(source_, known ? mark.line + 1 : 0, known ? mark.column + 1 : 0, message);
            }

            YAML::Node require(const YAML::Node& map, const char* key) const
            {
                if (!map.IsMap())
                {
                    fail(map, "expected a mapping");
                }
                YAML::Node v = map[key];
                if (!v)
                {
                    fail(map, std::string("missing required key '") + key + "'");
                }
                return v;
            }

            void known_keys(const YAML::Node& map, std::initializer_list<std::string_view> keys) const
            {
                if (!map.IsMap())
                {
                    fail(map, "expected a mapping");
                }
                for (const auto& kv : map)
                {
                    const auto name = kv.first.as<std::string>();
                    if (std::find(keys.begin(), keys.end(), name) == keys.end())
                    {
                        fail(kv.first, "unknown key '" + name + "'");
                    }
                }
            }

            std::string str(const YAML::Node& n) const
            {
                if (!n.IsScalar())
                {
                    fail(n, "expected a scalar");
                }
                return n.Scalar();
            }

            template <class T>
            T num(const YAML::Node& n) const
            {
                try
                {
                    if (!n.IsScalar())
                    {
                        fail(n, "expected a number");
                    }
                    return n.as<T>();
                }
                catch (const YAML::Exception&)
                {
                    fail(n, "expected a number, got '" + n.Scalar() + "'");
                }
            }

            bool boolean(const YAML::Node& n) const
            {
                try
                {
                    return n.as<bool>();
                }
                catch (const YAML::Exception&)
                {
                    fail(n, "expected true or false");
                }
            }

            Rational rational(const YAML::Node& n) const
            {
                try
                {
                    return parse_rational(str(n));
                }
                catch (const std::invalid_argument&)
                {
                    fail(n, "expected a rational number, got '" + n.Scalar() + "'");
                }
            }

            pursuit::Cell cell(const YAML::Node& n) const
            {
                if (!n.IsSequence() || n.size() != 2)
                {
                    fail(n, "expected [x, y]");
                }
                return {num<int>(n[0]), num<int>(n[1])};
            }

            org::Capability capability(const YAML::Node& n) const
            {
                known_keys(n, {"kind", "subkind", "magnitude"});
                org::Capability c;
                c.kind = kind(require(n, "kind"));
                if (n["subkind"])
                {
                    c.subkind = str(n["subkind"]);
                }
                c.magnitude = rational(require(n, "magnitude"));
                if (c.magnitude < 0)
                {
                    fail(n["magnitude"], "magnitude must be non-negative");
                }
                return c;
            }

            org::CapabilityRequirement requirement(const YAML::Node& n) const
            {
                known_keys(n, {"kind", "subkind", "minimum"});
                org::CapabilityRequirement r;
                r.kind = kind(require(n, "kind"));
                if (n["subkind"])
                {
                    r.subkind = str(n["subkind"]);
                }
                r.minimum = n["minimum"] ? rational(n["minimum"]) : Rational(0);
                return r;
            }

            org::CapabilityKind kind(const YAML::Node& n) const
            {
                auto k = org::capability_kind_from_string(str(n));
                if (!k)
                {
                    fail(n, "unknown capability kind '" + n.Scalar() + "'");
                }
                return *k;
            }

            rules::RuleSet rule_set(const YAML::Node& n) const
            {
                if (!n.IsSequence())
                {
                    fail(n, "expected a list of rules");
                }
                rules::RuleSet set;
                for (const auto& item : n)
                {
                    if (item.IsScalar())
                    {
                        auto r = rules::standard_rule(item.Scalar());
                        if (!r)
                        {
                            fail(item, "unknown rule '" + item.Scalar() + "'");
                        }
                        set.rules.insert(*r);
                        continue;
                    }
                    known_keys(item, {"id", "category", "predicate"});
                    rules::Rule r;
                    r.id = str(require(item, "id"));
                    auto cat = rules::category_from_string(str(require(item, "category")));
                    auto pred = rules::predicate_from_string(str(require(item, "predicate")));
                    if (!cat)
                    {
                        fail(item["category"], "unknown rule category");
                    }
                    if (!pred)
                    {
                        fail(item["predicate"], "unknown rule predicate");
                    }
                    r.category = *cat;
                    r.predicate = *pred;
                    set.rules.insert(r);
                }
                return set;
            }

            RobotSpec robot(const YAML::Node& n) const
            {
                known_keys(n, {"id", "capabilities", "resources", "interface", "rules", "position", "speed",
                               "radius"});
                RobotSpec spec;
                spec.robot.id = RobotId(str(require(n, "id")));
                if (spec.robot.id.empty() || spec.robot.id.str() == "env")
                {
                    fail(n["id"], "robot id must be non-empty and not 'env'");
                }
                if (auto caps = n["capabilities"])
                {
                    if (!caps.IsSequence())
                    {
                        fail(caps, "expected a list of capabilities");
                    }
                    for (const auto& c : caps)
                    {
                        spec.robot.capabilities.push_back(capability(c));
                    }
                }
                if (auto res = n["resources"])
                {
                    if (!res.IsMap())
                    {
                        fail(res, "expected a mapping of resource amounts");
                    }
                    for (const auto& kv : res)
                    {
                        spec.robot.resources[kv.first.as<std::string>()] = num<std::int64_t>(kv.second);
                    }
                }
                if (auto iface = n["interface"])
                {
                    if (!iface.IsSequence())
                    {
                        fail(iface, "expected a list of message kinds");
                    }
                    for (const auto& k : iface)
                    {
                        spec.robot.interface.insert(str(k));
                    }
                }
                else
                {
                    spec.robot.interface = simnet::protocol_kinds();
                }
                spec.robot.rules = n["rules"] ? rule_set(n["rules"]) : rules::standard_rules();
                if (n["position"])
                {
                    spec.position = cell(n["position"]);
                }
                if (n["speed"])
                {
                    spec.speed = num<int>(n["speed"]);
                    if (spec.speed < 0)
                    {
                        fail(n["speed"], "speed must be non-negative");
                    }
                }
                if (n["radius"])
                {
                    spec.radius = num<int>(n["radius"]);
                }
                return spec;
            }

            org::TaskNode task(const YAML::Node& n) const
            {
                known_keys(n, {"id", "reward", "requires", "subtasks", "duration", "work", "alternatives"});
                org::TaskNode t;
                t.id = TaskId(str(require(n, "id")));
                t.reward = rational(require(n, "reward"));
                if (t.reward < 0)
                {
                    fail(n["reward"], "reward must be non-negative");
                }
                if (auto reqs = n["requires"])
                {
                    if (!reqs.IsSequence())
                    {
                        fail(reqs, "expected a list of requirements");
                    }
                    for (const auto& r : reqs)
                    {
                        t.required_capabilities.push_back(requirement(r));
                    }
                }
                if (auto subs = n["subtasks"])
                {
                    if (!subs.IsSequence())
                    {
                        fail(subs, "expected a list of subtasks");
                    }
                    for (const auto& s : subs)
                    {
                        t.subtasks.push_back(task(s));
                    }
                }
                if (n["duration"])
                {
                    t.duration = num<Tick>(n["duration"]);
                }
                if (n["work"])
                {
                    t.work = rational(n["work"]);
                }
                if (auto alts = n["alternatives"])
                {
                    if (!alts.IsSequence())
                    {
                        fail(alts, "expected a list of alternative decompositions");
                    }
                    for (const auto& alt : alts)
                    {
                        if (!alt.IsSequence())
                        {
                            fail(alt, "an alternative is a list of subtasks");
                        }
                        std::vector<org::TaskNode> option;
                        for (const auto& s : alt)
                        {
                            option.push_back(task(s));
                        }
                        t.alternatives.push_back(std::move(option));
                    }
                }
                return t;
            }

            ScenarioConfig config(const YAML::Node& root) const
            {
                known_keys(root, {"seed", "max_ticks", "policy", "net", "rules", "constraints", "robots", "task",
                                  "task_at", "pursuit", "events"});
                ScenarioConfig cfg;
                if (root["seed"])
                {
                    cfg.seed = num<std::uint64_t>(root["seed"]);
                }
                if (root["max_ticks"])
                {
                    cfg.max_ticks = num<Tick>(root["max_ticks"]);
                    if (cfg.max_ticks < 0)
                    {
                        fail(root["max_ticks"], "max_ticks must be non-negative");
                    }
                }
                if (auto p = root["policy"])
                {
                    known_keys(p, {"margin", "escalation", "max_reward_rounds", "max_total_rounds", "deadline_ticks"});
                    auto& pol = cfg.formation.policy;
                    if (p["margin"]) pol.margin = rational(p["margin"]);
                    if (p["escalation"]) pol.escalation = rational(p["escalation"]);
                    if (p["max_reward_rounds"]) pol.max_reward_rounds = num<int>(p["max_reward_rounds"]);
                    if (p["max_total_rounds"]) pol.max_total_rounds = num<int>(p["max_total_rounds"]);
                    if (p["deadline_ticks"]) cfg.formation.deadline_ticks = num<Tick>(p["deadline_ticks"]);
                    if (pol.margin < 0 || pol.escalation < 0)
                    {
                        fail(p, "margin and escalation must be non-negative");
                    }
                    if (cfg.formation.deadline_ticks < 1)
                    {
                        fail(p["deadline_ticks"], "deadline_ticks must be at least 1");
                    }
                }
                if (auto net = root["net"])
                {
                    known_keys(net, {"latency", "drop_rate", "seed"});
                    if (net["latency"]) cfg.net.latency = num<Tick>(net["latency"]);
                    if (net["drop_rate"]) cfg.net.drop_rate = num<double>(net["drop_rate"]);
                    if (net["seed"])
                    {
                        cfg.net.seed = num<std::uint64_t>(net["seed"]);
                        cfg.net_seed_set = true;
                    }
                    if (cfg.net.drop_rate < 0.0 || cfg.net.drop_rate > 1.0)
                    {
                        fail(net["drop_rate"], "drop_rate must lie in [0, 1]");
                    }
                    if (cfg.net.latency < 1)
                    {
                        fail(net["latency"], "latency must be at least 1");
                    }
                }
                if (root["rules"])
                {
                    cfg.formation.rules = rule_set(root["rules"]);
                    cfg.formation.rules.scope = rules::Scope::Whole;
                }
                std::vector<std::pair<rules::ConstraintRelation, YAML::Node>> constraints;
                if (auto cs = root["constraints"])
                {
                    if (!cs.IsSequence())
                    {
                        fail(cs, "expected a list of constraints");
                    }
                    for (const auto& c : cs)
                    {
                        known_keys(c, {"a", "b", "kind"});
                        auto kind = rules::constraint_kind_from_string(str(require(c, "kind")));
                        if (!kind)
                        {
                            fail(c["kind"], "unknown constraint kind '" + c["kind"].Scalar() + "'");
                        }
                        rules::ConstraintRelation rel{TaskId(str(require(c, "a"))), TaskId(str(require(c, "b"))),
                                                      *kind};
                        constraints.emplace_back(rel, c);
                        cfg.formation.constraints.push_back(rel);
                    }
                }

                std::set<RobotId> ids;
                auto robots = require(root, "robots");
                if (!robots.IsSequence())
                {
                    fail(robots, "expected a list of robots");
                }
                for (const auto& r : robots)
                {
                    auto spec = robot(r);
                    if (!ids.insert(spec.robot.id).second)
                    {
                        fail(r["id"], "duplicate robot id '" + spec.robot.id.str() + "'");
                    }
                    cfg.robots.push_back(std::move(spec));
                }

                if (root["task"])
                {
                    cfg.task = task(root["task"]);
                }
                if (root["task_at"])
                {
                    cfg.task_at = num<Tick>(root["task_at"]);
                }
                if (auto p = root["pursuit"])
                {
                    known_keys(p, {"grid", "k", "base_reward", "required_speed", "capture_quorum",
                                   "random_placement", "evaders"});
                    PursuitBlock block;
                    if (p["grid"])
                    {
                        auto g = cell(p["grid"]);
                        if (g.x < 1 || g.y < 1)
                        {
                            fail(p["grid"], "grid dimensions must be positive");
                        }
                        block.grid = {g.x, g.y};
                    }
                    if (p["k"])
                    {
                        block.params.k = num<int>(p["k"]);
                        if (block.params.k < 1 || block.params.k > 8)
                        {
                            fail(p["k"], "k must lie in [1, 8]");
                        }
                    }
                    if (p["base_reward"]) block.params.base_reward = rational(p["base_reward"]);
                    if (p["required_speed"]) block.params.required_speed = num<int>(p["required_speed"]);
                    if (p["capture_quorum"]) block.capture_quorum = num<int>(p["capture_quorum"]);
                    if (p["random_placement"]) block.random_placement = boolean(p["random_placement"]);
                    std::set<EvaderId> evader_ids;
                    for (const auto& e : require(p, "evaders"))
                    {
                        known_keys(e, {"id", "position", "speed", "policy"});
                        EvaderSpec spec;
                        spec.id = EvaderId(str(require(e, "id")));
                        if (!evader_ids.insert(spec.id).second)
                        {
                            fail(e["id"], "duplicate evader id");
                        }
                        if (e["position"]) spec.position = cell(e["position"]);
                        if (e["speed"]) spec.speed = num<int>(e["speed"]);
                        if (e["policy"])
                        {
                            spec.policy = str(e["policy"]);
                            if (spec.policy != "flee")
                            {
                                fail(e["policy"], "unsupported evader policy '" + spec.policy + "'");
                            }
                        }
                        if (!block.random_placement && !spec.position)
                        {
                            fail(e, "evader needs a position unless random_placement is set");
                        }
                        if (spec.position && !block.grid.contains(*spec.position))
                        {
                            fail(e["position"], "evader position outside the grid");
                        }
                        block.evaders.push_back(std::move(spec));
                    }
                    for (std::size_t i = 0; i < cfg.robots.size(); ++i)
                    {
                        const auto& spec = cfg.robots[i];
                        if (!block.random_placement && !spec.position)
                        {
                            fail(robots[i], "pursuit robot needs a position unless random_placement is set");
                        }
                        if (spec.position && !block.grid.contains(*spec.position))
                        {
                            fail(robots[i]["position"], "robot position outside the grid");
                        }
                    }
                    cfg.pursuit = std::move(block);
                }
                if (cfg.task && cfg.pursuit)
                {
                    fail(root, "a config has either a task tree or a pursuit block, not both");
                }
                if (!cfg.task && !cfg.pursuit)
                {
                    fail(root, "a config needs a task tree or a pursuit block");
                }
                if (cfg.task)
                {
                    std::set<TaskId> task_ids;
                    collect_ids(*cfg.task, task_ids, root["task"]);
                    for (const auto& [rel, node] : constraints)
                    {
                        for (const auto& id : {rel.a, rel.b})
                        {
                            if (!task_ids.count(id))
                            {
                                fail(node, "constraint references unknown task '" + id.str() + "'");
                            }
                        }
                    }
                }

                std::set<RobotId> known = ids;
                if (auto evs = root["events"])
                {
                    if (!evs.IsSequence())
                    {
                        fail(evs, "expected a list of events");
                    }
                    for (const auto& e : evs)
                    {
                        known_keys(e, {"at", "fail", "withdraw", "reason", "join"});
                        ScriptedEvent ev;
                        ev.at = num<Tick>(require(e, "at"));
                        if (ev.at < 0)
                        {
                            fail(e["at"], "event tick must be non-negative");
                        }
                        const int kinds = (e["fail"] ? 1 : 0) + (e["withdraw"] ? 1 : 0) + (e["join"] ? 1 : 0);
                        if (kinds != 1)
                        {
                            fail(e, "an event has exactly one of fail, withdraw, join");
                        }
                        if (e["join"])
                        {
                            ev.kind = ScriptedEvent::Kind::Join;
                            ev.joiner = robot(e["join"]);
                            ev.robot = ev.joiner->robot.id;
                            known.insert(ev.robot);
                        }
                        else
                        {
                            const bool is_fail = static_cast<bool>(e["fail"]);
                            ev.kind = is_fail ? ScriptedEvent::Kind::Fail : ScriptedEvent::Kind::Withdraw;
                            const YAML::Node who = is_fail ? e["fail"] : e["withdraw"];
                            ev.robot = RobotId(str(who));
                            if (!known.count(ev.robot))
                            {
                                fail(who, "event references unknown robot '" + ev.robot.str() + "'");
                            }
                            if (e["reason"])
                            {
                                const auto reason = str(e["reason"]);
                                if (reason == "Unwilling")
                                    ev.reason = formation::WithdrawReason::Unwilling;
                                else if (reason == "EnvironmentChanged")
                                    ev.reason = formation::WithdrawReason::EnvironmentChanged;
                                else
                                    fail(e["reason"], "reason must be Unwilling or EnvironmentChanged");
                            }
                        }
                        cfg.events.push_back(std::move(ev));
                    }
                }
                if (!cfg.net_seed_set)
                {
                    cfg.net.seed = cfg.seed;
                }
                return cfg;
            }

            void collect_ids(const org::TaskNode& t, std::set<TaskId>& ids, const YAML::Node& at) const
            {
                if (!ids.insert(t.id).second)
                {
                    fail(at, "duplicate task id '" + t.id.str() + "'");
                }
                for (const auto& s : t.subtasks)
                {
                    collect_ids(s, ids, at);
                }
                for (const auto& alt : t.alternatives)
                {
                    for (const auto& s : alt)
                    {
                        collect_ids(s, ids, at);
                    }
                }
            }

        private:
            std::string source_;
        };
    }

    ConfigError::ConfigError(const std::string& source, int line, int column, const std::string& message)
        : std::runtime_error(format_error(source, line, column, message)), line_(line), column_(column)
    {
    }

    ScenarioConfig parse_config(const std::string& text, const std::string& source)
    {
        YAML::Node root;
        try
        {
            root = YAML::Load(text);
        }
        catch (const YAML::ParserException& e)
        {
            throw ConfigError(source, e.mark.line + 1, e.mark.column + 1, e.msg);
        }
        if (!root || !root.IsMap())
        {
            throw ConfigError(source, 1, 1, "top level must be a mapping");
        }
        Reader reader(source);
        try
        {
            return reader.config(root);
        }
        catch (const YAML::Exception& e)
        {
            throw ConfigError(source, e.mark.line + 1, e.mark.column + 1, e.msg);
        }
    }

    std::string read_file(const std::filesystem::path& path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
        {
            throw ConfigError(path.string(), 0, 0, "cannot open file");
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    ScenarioConfig load_config(const std::filesystem::path& path)
    {
        return parse_config(read_file(path), path.string());
    }
}
