#pragma once

#include "hwrom/simnet/simulation.hpp"

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <vector>

namespace hwrom::scenario
{
    inline constexpr const char* kLogFormat = "hwrom-log/1";

    struct LogHeader
    {
        std::string config_hash;
        std::uint64_t seed = 0;
        std::string source;
        std::string config_text;
        nlohmann::json overrides = nlohmann::json::object();
    };

    struct LogFooter
    {
        std::uint64_t records = 0;
        std::string trace_hash;
        std::uint64_t in_flight = 0;
        int exit_code = 0;
    };

    struct EventLog
    {
        LogHeader header;
        std::vector<simnet::TraceRecord> records;
        LogFooter footer;
    };

    // Malformed or truncated log; line() is 1-based.
    class LogFormatError : public std::runtime_error
    {
    public:
        LogFormatError(std::size_t line, const std::string& message);
        std::size_t line() const noexcept { return line_; }

    private:
        std::size_t line_;
    };

    std::string trace_hash(const std::vector<simnet::TraceRecord>& records);

    // JSON Lines: header, one line per record, End footer.
    std::string render_log(const EventLog& log);
    EventLog parse_log(const std::string& text);
}
