#include <gtest/gtest.h>

#include "cyclecast/month.hpp"
#include "test_support.hpp"

namespace cc = cyclecast;

TEST(Month, ParsesBothShapes) {
  cc::Month m;
  ASSERT_TRUE(cc::try_parse_month("1959-01-01", m));
  EXPECT_EQ(m, cc::make_month(1959, 1));
  ASSERT_TRUE(cc::try_parse_month("2020-06", m));
  EXPECT_EQ(m, cc::make_month(2020, 6));
}

TEST(Month, RejectsBadShapes) {
  cc::Month m;
  EXPECT_FALSE(cc::try_parse_month("1959-01-15", m));
  EXPECT_FALSE(cc::try_parse_month("1959-13-01", m));
  EXPECT_FALSE(cc::try_parse_month("1959/01/01", m));
  EXPECT_FALSE(cc::try_parse_month("59-01-01", m));
  EXPECT_FALSE(cc::try_parse_month("", m));
  EXPECT_ERROR_KIND(cc::parse_month("abc"), cc::ErrorKind::MalformedRow);
}

TEST(Month, Arithmetic) {
  EXPECT_EQ(cc::add_months(cc::make_month(1959, 11), 3), cc::make_month(1960, 2));
  EXPECT_EQ(cc::add_months(cc::make_month(1960, 2), -3), cc::make_month(1959, 11));
  EXPECT_EQ(cc::months_between(cc::kCanonicalStart, cc::kCanonicalEnd), 737);
  for (int i = -30; i < 30; ++i)
    EXPECT_EQ(cc::month_index(cc::month_from_index(cc::month_index(cc::kCanonicalStart) + i)),
              cc::month_index(cc::kCanonicalStart) + i);
}

TEST(Month, Formatting) {
  EXPECT_EQ(cc::format_month(cc::make_month(1959, 3)), "1959-03");
  EXPECT_EQ(cc::format_fred_date(cc::make_month(2020, 12)), "2020-12-01");
}
