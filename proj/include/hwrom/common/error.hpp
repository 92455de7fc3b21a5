#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hwrom
{
    enum class Errc
    {
        UnknownNode,
        UnknownTask,
        UnknownRobot,
        TaskNotAssigned,
        DuplicateRobotId,
        EmptyOrganization,
        LockedBidder,
        MixedTaskBids,
        ProtocolViolation,
        DeadSender,
        PastTick,
        ZeroSpeed,
        EvaderUnknown,
        InvalidArgument,
    };

    std::string_view errc_name(Errc code) noexcept;

    class Error : public std::runtime_error
    {
    public:
        Error(Errc code, const std::string& what)
            : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code)
        {
        }

        Errc code() const noexcept { return code_; }

    private:
        Errc code_;
    };

    inline std::string_view errc_name(Errc code) noexcept
    {
        switch (code)
        {
        case Errc::UnknownNode: return "UnknownNode";
        case Errc::UnknownTask: return "UnknownTask";
        case Errc::UnknownRobot: return "UnknownRobot";
        case Errc::TaskNotAssigned: return "TaskNotAssigned";
        case Errc::DuplicateRobotId: return "DuplicateRobotId";
        case Errc::EmptyOrganization: return "EmptyOrganization";
        case Errc::LockedBidder: return "LockedBidder";
        case Errc::MixedTaskBids: return "MixedTaskBids";
        case Errc::ProtocolViolation: return "ProtocolViolation";
        case Errc::DeadSender: return "DeadSender";
        case Errc::PastTick: return "PastTick";
        case Errc::ZeroSpeed: return "ZeroSpeed";
        case Errc::EvaderUnknown: return "EvaderUnknown";
        case Errc::InvalidArgument: return "InvalidArgument";
        }
        return "Unknown";
    }
}
