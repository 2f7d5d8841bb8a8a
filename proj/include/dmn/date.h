#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace dmn {

/// Calendar date held as a day count since 1970-01-01.
class Date {
 public:
  constexpr Date() = default;
  explicit constexpr Date(std::chrono::sys_days d)
      : serial_(d.time_since_epoch().count()) {}

  static Date from_ymd(int year, unsigned month, unsigned day);

  /// Parses `YYYY-MM-DD`; a trailing `T...` or space-separated time part is ignored.
  /// Throws std::invalid_argument on malformed or impossible dates.
  static Date parse(std::string_view iso);

  std::chrono::sys_days sys_days() const {
    return std::chrono::sys_days{std::chrono::days{serial_}};
  }
  std::chrono::year_month_day ymd() const { return std::chrono::year_month_day{sys_days()}; }
  int year() const { return static_cast<int>(ymd().year()); }
  int serial() const { return serial_; }
  bool is_weekend() const;

  Date add_days(int n) const { return Date{sys_days() + std::chrono::days{n}}; }

  std::string to_string() const;

  auto operator<=>(const Date&) const = default;

 private:
  int serial_ = 0;
};

}  // namespace dmn
