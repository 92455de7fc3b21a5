#pragma once

#include <compare>
#include <functional>
#include <ostream>
#include <string>
#include <utility>

namespace hwrom
{
    /// Opaque, totally ordered identifier. Tag keeps robot, task and node
    /// ids from being mixed up. Every tie-break in the engine resolves to
    /// the lowest id under this ordering.
    template <typename Tag>
    class Id
    {
    public:
        Id() = default;
        explicit Id(std::string value) : value_(std::move(value)) {}

        const std::string& str() const noexcept { return value_; }
        bool empty() const noexcept { return value_.empty(); }

        friend auto operator<=>(const Id&, const Id&) = default;
        friend bool operator==(const Id&, const Id&) = default;

        friend std::ostream& operator<<(std::ostream& os, const Id& id) { return os << id.value_; }

    private:
        std::string value_;
    };

    struct RobotTag;
    struct TaskTag;
    struct NodeTag;
    struct EvaderTag;

    using RobotId = Id<RobotTag>;
    using TaskId = Id<TaskTag>;
    using NodeId = Id<NodeTag>;
    using EvaderId = Id<EvaderTag>;

    /// Simulation time in whole ticks.
    using Tick = std::int64_t;
}

template <typename Tag>
struct std::hash<hwrom::Id<Tag>>
{
    std::size_t operator()(const hwrom::Id<Tag>& id) const noexcept { return std::hash<std::string>{}(id.str()); }
};
