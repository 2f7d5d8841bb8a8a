#include "dmn/date.h"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace dmn {

namespace {

template <typename T>
bool parse_number(std::string_view text, T& out) {
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

Date Date::from_ymd(int year, unsigned month, unsigned day) {
  const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                        std::chrono::day{day}};
  if (!ymd.ok()) {
    throw std::invalid_argument("invalid calendar date " + std::to_string(year) + "-" +
                                std::to_string(month) + "-" + std::to_string(day));
  }
  return Date{std::chrono::sys_days{ymd}};
}

Date Date::parse(std::string_view iso) {
  if (auto cut = iso.find_first_of("T "); cut != std::string_view::npos) {
    iso = iso.substr(0, cut);
  }
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') {
    throw std::invalid_argument("expected ISO-8601 date YYYY-MM-DD, got '" + std::string(iso) + "'");
  }
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  if (!parse_number(iso.substr(0, 4), y) || !parse_number(iso.substr(5, 2), m) ||
      !parse_number(iso.substr(8, 2), d)) {
    throw std::invalid_argument("expected ISO-8601 date YYYY-MM-DD, got '" + std::string(iso) + "'");
  }
  return from_ymd(y, m, d);
}

bool Date::is_weekend() const {
  const std::chrono::weekday wd{sys_days()};
  return wd == std::chrono::Saturday || wd == std::chrono::Sunday;
}

std::string Date::to_string() const {
  const auto d = ymd();
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

}  // namespace dmn
