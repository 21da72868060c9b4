#pragma once

#include <chrono>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace exfake {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numeric argument fell outside its documented domain.
class InvalidRange : public Error {
 public:
  using Error::Error;
};

// A feed, registry, dataset, model or store file could not be loaded.
class LoadError : public Error {
 public:
  using Error::Error;
};

// A record failed schema validation.
class ValidationError : public Error {
 public:
  using Error::Error;
};

using Timestamp = std::chrono::sys_seconds;
using Duration = std::chrono::seconds;

// Accepts "YYYY-MM-DDTHH:MM:SS" with an optional 'Z' or "+HH:MM"/"-HH:MM"
// suffix; a space may replace the 'T'. Throws ValidationError otherwise.
inline Timestamp parse_timestamp(std::string_view text) {
  auto fail = [&]() -> Timestamp {
    throw ValidationError("unparseable timestamp: '" + std::string(text) + "'");
  };
  if (text.size() < 19) return fail();
  auto digits = [&](std::size_t pos, std::size_t n, int& out) {
    out = 0;
    for (std::size_t i = pos; i < pos + n; ++i) {
      if (text[i] < '0' || text[i] > '9') return false;
      out = out * 10 + (text[i] - '0');
    }
    return true;
  };
  int year, month, day, hour, minute, second;
  if (!digits(0, 4, year) || text[4] != '-' || !digits(5, 2, month) ||
      text[7] != '-' || !digits(8, 2, day) ||
      (text[10] != 'T' && text[10] != ' ') || !digits(11, 2, hour) ||
      text[13] != ':' || !digits(14, 2, minute) || text[16] != ':' ||
      !digits(17, 2, second)) {
    return fail();
  }
  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{year},
                           std::chrono::month{static_cast<unsigned>(month)},
                           std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok() || hour > 23 || minute > 59 || second > 60) return fail();

  int offset_minutes = 0;
  std::string_view rest = text.substr(19);
  if (rest == "Z" || rest.empty()) {
    // UTC
  } else if (rest.size() == 6 && (rest[0] == '+' || rest[0] == '-') &&
             rest[3] == ':') {
    int oh, om;
    if (!digits(20, 2, oh) || !digits(23, 2, om)) return fail();
    offset_minutes = (oh * 60 + om) * (rest[0] == '+' ? 1 : -1);
  } else {
    return fail();
  }
  return sys_days{ymd} + hours{hour} + minutes{minute} + seconds{second} -
         minutes{offset_minutes};
}

// Always UTC, "YYYY-MM-DDTHH:MM:SSZ".
inline std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto day_point = floor<days>(t);
  const year_month_day ymd{day_point};
  const hh_mm_ss hms{t - day_point};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ",
                static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

}  // namespace exfake
