#include "hwrom/common/error.hpp"
#include "hwrom/common/hash.hpp"
#include "hwrom/common/ids.hpp"
#include "hwrom/common/rational.hpp"

#include <doctest.h>

#include <set>

using namespace hwrom;

TEST_CASE("parse_rational accepts integers, fractions and decimals")
{
    CHECK(parse_rational("3") == Rational(3));
    CHECK(parse_rational("-2") == Rational(-2));
    CHECK(parse_rational("11/5") == Rational(11, 5));
    CHECK(parse_rational("2.25") == Rational(9, 4));
    CHECK(parse_rational("0.1") == Rational(1, 10));
    CHECK(to_string(Rational(6, 4)) == "3/2");
    CHECK(to_string(Rational(4)) == "4");
}

TEST_CASE("parse_rational rejects junk")
{
    for (const char* bad : {"", "abc", "1/0", "1.2.3", "3/", "/3", "1e5"})
    {
        CAPTURE(bad);
        CHECK_THROWS_AS(parse_rational(bad), std::invalid_argument);
    }
}

TEST_CASE("counter_random depends only on its key")
{
    const auto a = counter_random(42, 1, 7);
    CHECK(counter_random(42, 1, 7) == a);
    CHECK(counter_random(42, 1, 8) != a);
    CHECK(counter_random(43, 1, 7) != a);
    CHECK(counter_random(42, 2, 7) != a);
    for (std::uint64_t i = 0; i < 1000; ++i)
    {
        const double u = unit_interval(counter_random(1, 2, i));
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("fnv1a64 matches published vectors")
{
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("ids compare by string and error names carry the code")
{
    std::set<RobotId> ids{RobotId("R2"), RobotId("R1"), RobotId("R10")};
    CHECK(ids.begin()->str() == "R1");
    const Error e(Errc::UnknownRobot, "R9");
    CHECK(e.code() == Errc::UnknownRobot);
    CHECK(std::string(e.what()) == "UnknownRobot: R9");
}
