#include "hwrom/common/rational.hpp"

#include <charconv>
#include <stdexcept>

namespace hwrom
{
    namespace
    {
        std::int64_t parse_int(std::string_view digits, std::string_view whole)
        {
            std::int64_t out = 0;
            const auto* first = digits.data();
            const auto* last = digits.data() + digits.size();
            auto [ptr, ec] = std::from_chars(first, last, out);
            if (ec != std::errc{} || ptr != last || digits.empty())
            {
                throw std::invalid_argument("not a rational: '" + std::string(whole) + "'");
            }
            return out;
        }
    }

    Rational parse_rational(std::string_view text)
    {
        const std::string_view whole = text;
        while (!text.empty() && text.front() == ' ')
        {
            text.remove_prefix(1);
        }
        while (!text.empty() && text.back() == ' ')
        {
            text.remove_suffix(1);
        }
        if (auto slash = text.find('/'); slash != std::string_view::npos)
        {
            const auto num = parse_int(text.substr(0, slash), whole);
            const auto den = parse_int(text.substr(slash + 1), whole);
            if (den == 0)
            {
                throw std::invalid_argument("zero denominator: '" + std::string(whole) + "'");
            }
            return Rational(num, den);
        }
        if (auto dot = text.find('.'); dot != std::string_view::npos)
        {
            bool negative = !text.empty() && text.front() == '-';
            std::string_view int_part = text.substr(negative ? 1 : 0, dot - (negative ? 1 : 0));
            std::string_view frac_part = text.substr(dot + 1);
            if (frac_part.empty() || frac_part.size() > 12)
            {
                throw std::invalid_argument("unsupported decimal: '" + std::string(whole) + "'");
            }
            std::int64_t scale = 1;
            for (std::size_t i = 0; i < frac_part.size(); ++i)
            {
                scale *= 10;
            }
            const std::int64_t ip = int_part.empty() ? 0 : parse_int(int_part, whole);
            const std::int64_t fp = parse_int(frac_part, whole);
            if (ip < 0 || fp < 0)
            {
                throw std::invalid_argument("not a rational: '" + std::string(whole) + "'");
            }
            Rational value(ip * scale + fp, scale);
            return negative ? -value : value;
        }
        return Rational(parse_int(text, whole));
    }

    std::string to_string(const Rational& value)
    {
        if (value.denominator() == 1)
        {
            return std::to_string(value.numerator());
        }
        return std::to_string(value.numerator()) + "/" + std::to_string(value.denominator());
    }

    double to_double(const Rational& value)
    {
        return static_cast<double>(value.numerator()) / static_cast<double>(value.denominator());
    }
}
