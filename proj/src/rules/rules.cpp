#include "hwrom/rules/rules.hpp"

#include <algorithm>
#include <array>
#include <numeric>

namespace hwrom::rules
{
    namespace
    {
        constexpr std::array<std::pair<Category, std::string_view>, 5> kCategoryNames{{
            {Category::StructureDesign, "StructureDesign"},
            {Category::OrgForming, "OrgForming"},
            {Category::Bidding, "Bidding"},
            {Category::Selection, "Selection"},
            {Category::Custom, "Custom"},
        }};

        constexpr std::array<std::pair<Predicate, std::string_view>, 6> kPredicateNames{{
            {Predicate::ParallelExclusion, "ParallelExclusion"},
            {Predicate::PreferFewerMembers, "PreferFewerMembers"},
            {Predicate::WinnerLock, "WinnerLock"},
            {Predicate::LeastReward, "LeastReward"},
            {Predicate::CapabilityFeasibility, "CapabilityFeasibility"},
            {Predicate::Custom, "Custom"},
        }};

        constexpr std::array<std::pair<ConstraintKind, std::string_view>, 6> kConstraintNames{{
            {ConstraintKind::Priority, "Priority"},
            {ConstraintKind::SameTask, "SameTask"},
            {ConstraintKind::Parallel, "Parallel"},
            {ConstraintKind::Sequence, "Sequence"},
            {ConstraintKind::ResourceConflict, "ResourceConflict"},
            {ConstraintKind::ActionDependency, "ActionDependency"},
        }};

        template <typename E, std::size_t N>
        std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E value)
        {
            for (const auto& [e, name] : table)
            {
                if (e == value)
                {
                    return name;
                }
            }
            return table.front().second;
        }

        template <typename E, std::size_t N>
        std::optional<E> value_of(const std::array<std::pair<E, std::string_view>, N>& table, std::string_view s)
        {
            for (const auto& [e, name] : table)
            {
                if (name == s)
                {
                    return e;
                }
            }
            return std::nullopt;
        }

        const std::array<Rule, 5>& standard_table()
        {
            static const std::array<Rule, 5> table{{
                {"parallel-exclusion", Category::StructureDesign, Predicate::ParallelExclusion},
                {"fewer-members", Category::OrgForming, Predicate::PreferFewerMembers},
                {"winner-lock", Category::Bidding, Predicate::WinnerLock},
                {"least-reward", Category::Selection, Predicate::LeastReward},
                {"capability-feasibility", Category::Custom, Predicate::CapabilityFeasibility},
            }};
            return table;
        }
    }

    std::string_view to_string(Category c) { return name_of(kCategoryNames, c); }
    std::string_view to_string(Predicate p) { return name_of(kPredicateNames, p); }
    std::string_view to_string(ConstraintKind k) { return name_of(kConstraintNames, k); }
    std::optional<Category> category_from_string(std::string_view s) { return value_of(kCategoryNames, s); }
    std::optional<Predicate> predicate_from_string(std::string_view s) { return value_of(kPredicateNames, s); }
    std::optional<ConstraintKind> constraint_kind_from_string(std::string_view s)
    {
        return value_of(kConstraintNames, s);
    }

    bool RuleSet::contains(Predicate p) const
    {
        return std::any_of(rules.begin(), rules.end(), [&](const Rule& r) { return r.predicate == p; });
    }

    bool RuleSet::contains_id(std::string_view id) const
    {
        return std::any_of(rules.begin(), rules.end(), [&](const Rule& r) { return r.id == id; });
    }

    RuleSet standard_rules()
    {
        RuleSet set;
        for (const auto& r : standard_table())
        {
            set.rules.insert(r);
        }
        return set;
    }

    std::optional<Rule> standard_rule(std::string_view name)
    {
        for (const auto& r : standard_table())
        {
            if (r.id == name || to_string(r.predicate) == name)
            {
                return r;
            }
        }
        return std::nullopt;
    }

    bool ConstraintRelation::relates(const TaskId& x, const TaskId& y) const
    {
        switch (kind)
        {
        case ConstraintKind::Priority:
        case ConstraintKind::ActionDependency:
            return a == x && b == y;
        default:
            return (a == x && b == y) || (a == y && b == x);
        }
    }

    AssignmentCheck check_assignment(const RuleSet& rules,
                                     const std::vector<ConstraintRelation>& constraints,
                                     const std::map<RobotId, std::set<TaskId>>& assignment)
    {
        AssignmentCheck out;
        const bool exclusive = rules.contains(Predicate::ParallelExclusion);
        for (const auto& [robot, tasks] : assignment)
        {
            for (const auto& c : constraints)
            {
                if (c.a == c.b || !tasks.count(c.a) || !tasks.count(c.b))
                {
                    continue;
                }
                if (c.kind == ConstraintKind::Parallel && exclusive)
                {
                    out.violations.push_back({robot, c.a, c.b, c.kind});
                }
                else if (c.kind == ConstraintKind::Priority)
                {
                    out.orderings.push_back({robot, c.a, c.b});
                }
            }
        }
        return out;
    }

    RuleSet whole_rules(const org::OrgNode& node)
    {
        if (node.leaf())
        {
            return RuleSet{node.rules.rules, Scope::Local};
        }
        RuleSet acc = whole_rules(node.children.front());
        for (std::size_t k = 1; k < node.children.size() && !acc.rules.empty(); ++k)
        {
            const RuleSet next = whole_rules(node.children[k]);
            std::set<Rule> kept;
            std::set_intersection(acc.rules.begin(), acc.rules.end(), next.rules.begin(), next.rules.end(),
                                  std::inserter(kept, kept.end()));
            acc.rules = std::move(kept);
        }
        acc.scope = Scope::Whole;
        return acc;
    }

    std::vector<std::size_t> forming_preference(const std::vector<FormingCandidate>& candidates)
    {
        std::vector<std::vector<std::string>> sorted_ids;
        sorted_ids.reserve(candidates.size());
        for (const auto& c : candidates)
        {
            auto ids = c.member_ids;
            std::sort(ids.begin(), ids.end());
            sorted_ids.push_back(std::move(ids));
        }
        std::vector<std::size_t> order(candidates.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (candidates[a].member_count != candidates[b].member_count)
            {
                return candidates[a].member_count < candidates[b].member_count;
            }
            return sorted_ids[a] < sorted_ids[b];
        });
        return order;
    }

    void AuctionHistory::record_win(const RobotId& robot, const TaskId& task, Tick at, bool execution)
    {
        entries_.push_back({HistoryKind::Win, robot, task, at, execution});
    }

    void AuctionHistory::record_completion(const RobotId& robot, const TaskId& task, Tick at)
    {
        entries_.push_back({HistoryKind::Completion, robot, task, at, true});
    }

    void AuctionHistory::record_release(const RobotId& robot, const TaskId& task, Tick at)
    {
        entries_.push_back({HistoryKind::Release, robot, task, at, true});
    }

    bool winner_locked(const AuctionHistory& history, const RobotId& robot, Tick at)
    {
        // task -> number of open execution wins
        std::map<TaskId, int> open;
        for (const auto& e : history.entries())
        {
            if (e.robot != robot)
            {
                continue;
            }
            if (e.kind == HistoryKind::Win)
            {
                if (e.execution && e.tick <= at)
                {
                    ++open[e.task];
                }
            }
            else if (e.tick <= at)
            {
                if (auto it = open.find(e.task); it != open.end() && it->second > 0)
                {
                    --it->second;
                }
            }
        }
        return std::any_of(open.begin(), open.end(), [](const auto& kv) { return kv.second > 0; });
    }
}
