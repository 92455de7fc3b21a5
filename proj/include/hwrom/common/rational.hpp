#pragma once

#include <boost/rational.hpp>
#include <boost/version.hpp>

#include <cstdint>
#include <string>
#include <string_view>

namespace hwrom
{
    /// Exact reward/cost arithmetic. All auction comparisons and settlement
    /// sums go through this type so replays are bit-identical.
    using Rational = boost::rational<std::int64_t>;

    /// Parses "3", "-2", "11/5" or a finite decimal such as "2.25".
    /// Throws std::invalid_argument on anything else.
    Rational parse_rational(std::string_view text);

    /// Canonical text: "n" for integers, "n/d" otherwise.
    std::string to_string(const Rational& value);

    /// Lossy conversion for display and probability thresholds only.
    double to_double(const Rational& value);
}

#if BOOST_VERSION < 107500
// Boost < 1.75 recurses forever on rational == integer under C++20 rewritten
// comparisons. Exact-match overloads win over its member templates.
namespace boost
{
#define HWROM_RATIONAL_EQ(INT)                                                                                       \
    inline bool operator==(const rational<std::int64_t>& a, INT b) { return a == rational<std::int64_t>(b); }      \
    inline bool operator==(INT b, const rational<std::int64_t>& a) { return a == rational<std::int64_t>(b); }      \
    inline bool operator!=(const rational<std::int64_t>& a, INT b) { return !(a == rational<std::int64_t>(b)); }   \
    inline bool operator!=(INT b, const rational<std::int64_t>& a) { return !(a == rational<std::int64_t>(b)); }
    HWROM_RATIONAL_EQ(int)
    HWROM_RATIONAL_EQ(long)
    HWROM_RATIONAL_EQ(long long)
#undef HWROM_RATIONAL_EQ
}
#endif
