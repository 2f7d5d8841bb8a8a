#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "dmn/csv_io.h"
#include "dmn/date.h"

using namespace dmn;

TEST(Date, ParsesAndFormatsIso) {
  const Date d = Date::parse("1995-01-03");
  EXPECT_EQ(d.year(), 1995);
  EXPECT_EQ(d.to_string(), "1995-01-03");
  EXPECT_EQ(Date::parse("1995-01-03T00:00:00"), d);
  EXPECT_EQ(Date::parse("1995-01-03 16:00"), d);
  EXPECT_EQ(d.add_days(1).to_string(), "1995-01-04");
  EXPECT_LT(d, d.add_days(1));
}

TEST(Date, RejectsMalformed) {
  EXPECT_THROW(Date::parse("1995-13-01"), std::invalid_argument);
  EXPECT_THROW(Date::parse("1995-02-30"), std::invalid_argument);
  EXPECT_THROW(Date::parse("yesterday"), std::invalid_argument);
  EXPECT_THROW(Date::parse(""), std::invalid_argument);
}

TEST(Date, Weekends) {
  EXPECT_TRUE(Date::from_ymd(2024, 6, 1).is_weekend());   // Saturday
  EXPECT_TRUE(Date::from_ymd(2024, 6, 2).is_weekend());   // Sunday
  EXPECT_FALSE(Date::from_ymd(2024, 6, 3).is_weekend());  // Monday
}

TEST(Csv, SplitTrimsFields) {
  const auto f = csv::split(" a, b ,c\r");
  ASSERT_EQ(f.size(), 3u);
  EXPECT_EQ(f[0], "a");
  EXPECT_EQ(f[1], "b");
  EXPECT_EQ(f[2], "c");
}

TEST(Csv, NumbersRoundTrip) {
  for (double v : {0.1, -3.25e-7, 123456.789, 1.0 / 3.0}) {
    EXPECT_EQ(*csv::parse_double(csv::format(v)), v);
  }
  EXPECT_EQ(csv::format(std::numeric_limits<double>::quiet_NaN()), "");
  EXPECT_FALSE(csv::parse_double("abc").has_value());
  EXPECT_FALSE(csv::parse_double("").has_value());
}

TEST(Csv, DataErrorCarriesRow) {
  const DataError e("bad price", 7);
  EXPECT_EQ(e.row(), 7u);
  EXPECT_NE(std::string(e.what()).find("row 7"), std::string::npos);
}
