#include "parkcast/grid.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "parkcast/errors.hpp"

namespace parkcast {

double parse_hhmm(const std::string& text) {
  bool negative = false;
  const char* s = text.c_str();
  if (*s == '-') {
    negative = true;
    ++s;
  }
  int hh = 0;
  int mm = 0;
  char tail = 0;
  if (std::sscanf(s, "%d:%d%c", &hh, &mm, &tail) != 2 || hh < 0 || mm < 0 ||
      mm > 59) {
    throw InvalidConfig("expected a time as hh:mm, got '" + text + "'");
  }
  const double minutes = 60.0 * hh + mm;
  return (negative ? -minutes : minutes) / 1440.0;
}

std::string format_hhmm(double day_fraction) {
  const bool negative = day_fraction < 0;
  long long minutes =
      static_cast<long long>(std::llround(std::fabs(day_fraction) * 1440.0));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%02lld:%02lld", negative ? "-" : "",
                minutes / 60, minutes % 60);
  return buf;
}

int slot_of_hhmm(const std::string& text) {
  const double f = parse_hhmm(text);
  const double raw = f * kSlotsPerDay;
  const int slot = static_cast<int>(std::lround(raw));
  if (std::fabs(raw - slot) > 1e-9 || slot < 1 || slot > kSlotsPerDay) {
    throw InvalidConfig("time '" + text +
                        "' is not a 30-minute slot boundary in [00:30, 24:00]");
  }
  return slot;
}

}  // namespace parkcast
