#include "hwrom/scenario/event_log.hpp"

#include "hwrom/common/hash.hpp"

#include <sstream>

namespace hwrom::scenario
{
    using nlohmann::json;

    LogFormatError::LogFormatError(std::size_t line, const std::string& message)
        : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line)
    {
    }

    std::string trace_hash(const std::vector<simnet::TraceRecord>& records)
    {
        std::uint64_t h = fnv1a64("");
        for (const auto& r : records)
        {
            h = fnv1a64(simnet::to_json(r).dump(), h);
        }
        return hex64(h);
    }

    std::string render_log(const EventLog& log)
    {
        std::string out;
        json header{{"type", "header"},
                    {"format", kLogFormat},
                    {"config_hash", log.header.config_hash},
                    {"seed", log.header.seed},
                    {"source", log.header.source},
                    {"config", log.header.config_text},
                    {"overrides", log.header.overrides}};
        out += header.dump() + "\n";
        for (const auto& r : log.records)
        {
            out += simnet::to_json(r).dump() + "\n";
        }
        json footer{{"type", "end"},
                    {"records", log.footer.records},
                    {"trace_hash", log.footer.trace_hash},
                    {"in_flight", log.footer.in_flight},
                    {"exit", log.footer.exit_code}};
        out += footer.dump() + "\n";
        return out;
    }

    EventLog parse_log(const std::string& text)
    {
        EventLog log;
        std::istringstream in(text);
        std::string line;
        std::size_t n = 0;
        bool have_header = false;
        bool have_footer = false;
        while (std::getline(in, line))
        {
            ++n;
            if (line.empty())
            {
                continue;
            }
            if (have_footer)
            {
                throw LogFormatError(n, "content after End footer");
            }
            json j;
            try
            {
                j = json::parse(line);
            }
            catch (const json::parse_error& e)
            {
                throw LogFormatError(n, std::string("not valid JSON: ") + e.what());
            }
            try
            {
                if (!have_header)
                {
                    if (j.value("type", "") != "header" || j.value("format", "") != kLogFormat)
                    {
                        throw LogFormatError(n, "missing log header");
                    }
                    log.header.config_hash = j.at("config_hash").get<std::string>();
                    log.header.seed = j.at("seed").get<std::uint64_t>();
                    log.header.source = j.at("source").get<std::string>();
                    log.header.config_text = j.at("config").get<std::string>();
                    log.header.overrides = j.at("overrides");
                    have_header = true;
                }
                else if (j.contains("type") && j["type"] == "end")
                {
                    log.footer.records = j.at("records").get<std::uint64_t>();
                    log.footer.trace_hash = j.at("trace_hash").get<std::string>();
                    log.footer.in_flight = j.at("in_flight").get<std::uint64_t>();
                    log.footer.exit_code = j.at("exit").get<int>();
                    have_footer = true;
                }
                else
                {
                    log.records.push_back(simnet::trace_record_from_json(j));
                }
            }
            catch (const json::exception& e)
            {
                throw LogFormatError(n, std::string("bad field: ") + e.what());
            }
        }
        if (!have_header)
        {
            throw LogFormatError(n, "empty log");
        }
        if (!have_footer)
        {
            throw LogFormatError(n, "truncated log: no End footer");
        }
        if (log.footer.records != log.records.size())
        {
            throw LogFormatError(n, "footer record count does not match");
        }
        return log;
    }
}
