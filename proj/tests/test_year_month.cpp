#include "metalcast/errors.hpp"
#include "metalcast/series.hpp"
#include "metalcast/year_month.hpp"

#include <gtest/gtest.h>

using namespace metalcast;

TEST(YearMonth, ParsesBothLayouts) {
    EXPECT_EQ(YearMonth::parse("2012-03"), YearMonth(2012, 3));
    EXPECT_EQ(YearMonth::parse("201203"), YearMonth(2012, 3));
    EXPECT_EQ(YearMonth(1999, 12).str(), "1999-12");
    EXPECT_EQ(YearMonth::from_yyyymm(200001).str(), "2000-01");
}

TEST(YearMonth, RejectsMalformedText) {
    EXPECT_THROW(YearMonth::parse("2012-13"), Error);
    EXPECT_THROW(YearMonth::parse("12-03"), Error);
    EXPECT_THROW(YearMonth::parse("abcd-ef"), Error);
}

TEST(YearMonth, ArithmeticCrossesYearBoundaries) {
    const YearMonth nov{2011, 11};
    EXPECT_EQ(nov + 2, YearMonth(2012, 1));
    EXPECT_EQ(YearMonth(2012, 1) - 13, YearMonth(2010, 12));
    EXPECT_EQ(YearMonth(2012, 4) - YearMonth(2011, 4), 12);
    EXPECT_LT(nov, YearMonth(2011, 12));
}

TEST(MonthlySeries, SliceAndCoverage) {
    MonthlySeries s{{2020, 1}, {1, 2, 3, 4, 5}};
    EXPECT_EQ(s.last(), YearMonth(2020, 5));
    EXPECT_DOUBLE_EQ(s.at({2020, 3}), 3.0);
    EXPECT_FALSE(s.find({2019, 12}).has_value());
    auto mid = s.slice({2020, 2}, {2020, 4});
    EXPECT_EQ(mid.start, YearMonth(2020, 2));
    EXPECT_EQ(mid.values, (std::vector<double>{2, 3, 4}));
    EXPECT_THROW((void)s.slice({2020, 4}, {2020, 6}), CoverageError);
    EXPECT_THROW((void)s.at({2021, 1}), CoverageError);
    auto t = s.tail(2);
    EXPECT_EQ(t.start, YearMonth(2020, 4));
    EXPECT_EQ(s.tail(10), s);
}
