#pragma once

#include "hwrom/common/ids.hpp"

#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace hwrom::rules
{
    enum class Category
    {
        StructureDesign,
        OrgForming,
        Bidding,
        Selection,
        Custom,
    };

    // Closed rule vocabulary. Custom rules carry no engine semantics; they
    // only take part in scoping (whole_rules).
    enum class Predicate
    {
        ParallelExclusion,
        PreferFewerMembers,
        WinnerLock,
        LeastReward,
        CapabilityFeasibility,
        Custom,
    };

    struct Rule
    {
        std::string id;
        Category category = Category::Custom;
        Predicate predicate = Predicate::Custom;

        friend auto operator<=>(const Rule&, const Rule&) = default;
        friend bool operator==(const Rule&, const Rule&) = default;
    };

    enum class Scope
    {
        Local,
        Whole,
    };

    struct RuleSet
    {
        std::set<Rule> rules;
        Scope scope = Scope::Local;

        bool contains(Predicate p) const;
        bool contains_id(std::string_view id) const;

        friend bool operator==(const RuleSet&, const RuleSet&) = default;
    };

    /// The standard norms: parallel exclusion, fewer-members preference,
    /// winner lock, least-reward selection and capability feasibility.
    RuleSet standard_rules();

    /// Looks a standard rule up by its id or predicate name; nullopt for
    /// unknown names.
    std::optional<Rule> standard_rule(std::string_view name);

    enum class ConstraintKind
    {
        Priority,
        SameTask,
        Parallel,
        Sequence,
        ResourceConflict,
        ActionDependency,
    };

    struct ConstraintRelation
    {
        TaskId a;
        TaskId b;
        ConstraintKind kind = ConstraintKind::Parallel;

        // Parallel/Sequence/SameTask match either orientation; Priority and
        // ActionDependency are directed (a before b).
        bool relates(const TaskId& x, const TaskId& y) const;

        friend bool operator==(const ConstraintRelation&, const ConstraintRelation&) = default;
    };

    std::string_view to_string(Category c);
    std::string_view to_string(Predicate p);
    std::string_view to_string(ConstraintKind k);
    std::optional<Category> category_from_string(std::string_view s);
    std::optional<Predicate> predicate_from_string(std::string_view s);
    std::optional<ConstraintKind> constraint_kind_from_string(std::string_view s);
}
