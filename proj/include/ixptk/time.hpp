#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ixptk {

struct CivilDate {
  int year = 1970;
  int month = 1;
  int day = 1;
};

// Days since 1970-01-01 (proleptic Gregorian), Howard Hinnant's algorithm.
inline std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline CivilDate civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return CivilDate{static_cast<int>(y + (m <= 2)), static_cast<int>(m),
                   static_cast<int>(d)};
}

// ISO weekday, 1 = Monday .. 7 = Sunday. 1970-01-01 was a Thursday.
inline int iso_weekday_from_days(std::int64_t z) {
  const int wd = static_cast<int>(((z + 4) % 7 + 7) % 7);  // 0 = Sunday
  return wd == 0 ? 7 : wd;
}

struct WeekBucket {
  int iso_year = 0;
  int iso_week = 0;
  auto operator<=>(const WeekBucket&) const = default;
};

inline WeekBucket week_of_day(std::int64_t days) {
  // The ISO week is the one containing this day's Thursday.
  const std::int64_t thursday = days + (4 - iso_weekday_from_days(days));
  const int year = civil_from_days(thursday).year;
  const std::int64_t jan1 = days_from_civil(year, 1, 1);
  return WeekBucket{year, static_cast<int>((thursday - jan1) / 7 + 1)};
}

inline WeekBucket week_of(std::int64_t epoch_seconds) {
  std::int64_t days = epoch_seconds / 86400;
  if (epoch_seconds < 0 && epoch_seconds % 86400 != 0) --days;
  return week_of_day(days);
}

inline std::string to_string(const WeekBucket& week) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-W%02d", week.iso_year, week.iso_week);
  return buf;
}

inline std::int64_t epoch_days(std::int64_t epoch_seconds) {
  std::int64_t days = epoch_seconds / 86400;
  if (epoch_seconds < 0 && epoch_seconds % 86400 != 0) --days;
  return days;
}

// "2014-06-22"
inline std::string format_date(std::int64_t epoch_seconds) {
  const CivilDate c = civil_from_days(epoch_days(epoch_seconds));
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", c.year, c.month, c.day);
  return buf;
}

// "20140622", the collector's partition key format.
inline std::string format_yyyymmdd(std::int64_t epoch_seconds) {
  const CivilDate c = civil_from_days(epoch_days(epoch_seconds));
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d%02d%02d", c.year, c.month, c.day);
  return buf;
}

inline bool is_yyyymmdd(std::string_view s) {
  if (s.size() != 8) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  int y = (s[0] - '0') * 1000 + (s[1] - '0') * 100 + (s[2] - '0') * 10 + (s[3] - '0');
  int m = (s[4] - '0') * 10 + (s[5] - '0');
  int d = (s[6] - '0') * 10 + (s[7] - '0');
  if (m < 1 || m > 12 || d < 1 || d > 31) return false;
  CivilDate round = civil_from_days(days_from_civil(y, m, d));
  return round.year == y && round.month == m && round.day == d;
}

// "2014-06-22T05:00:00Z" (or without Z) -> epoch seconds. Throws on malformed.
inline std::int64_t parse_utc_timestamp(std::string_view text) {
  auto fail = [&] {
    throw std::runtime_error("bad UTC timestamp '" + std::string(text) +
                             "' (want YYYY-MM-DDTHH:MM:SSZ)");
  };
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  auto read = [&](size_t pos, size_t len, int& out) {
    auto sub = text.substr(pos, len);
    auto [p, ec] = std::from_chars(sub.data(), sub.data() + sub.size(), out);
    if (ec != std::errc{} || p != sub.data() + sub.size()) fail();
  };
  if (text.size() < 19) fail();
  if (text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
      text[13] != ':' || text[16] != ':')
    fail();
  read(0, 4, y);
  read(5, 2, mo);
  read(8, 2, d);
  read(11, 2, h);
  read(14, 2, mi);
  read(17, 2, s);
  if (text.size() == 20 && text[19] != 'Z') fail();
  if (text.size() > 20) fail();
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 60) fail();
  return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
}

inline std::string format_utc_timestamp(std::int64_t epoch_seconds) {
  const std::int64_t days = epoch_days(epoch_seconds);
  const CivilDate c = civil_from_days(days);
  std::int64_t rem = epoch_seconds - days * 86400;
  char buf[24];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", c.year, c.month,
                c.day, static_cast<int>(rem / 3600), static_cast<int>(rem / 60 % 60),
                static_cast<int>(rem % 60));
  return buf;
}

// Locale-independent fixed-point formatting for CSV output.
inline std::string format_fixed(double value, int precision) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, value,
                               std::chars_format::fixed, precision);
  if (ec != std::errc{}) throw std::logic_error("format_fixed: value out of range");
  return std::string(buf, p);
}

}  // namespace ixptk
