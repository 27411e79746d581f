#pragma once

#include <string>

namespace parkcast {

/// Number of 30-minute slots per day.
inline constexpr int kSlotsPerDay = 48;

/// Slot i in {1..48} maps to the end of its interval: t = i/48 of a unit day.
inline constexpr double grid_time(int slot) {
  return static_cast<double>(slot) / kSlotsPerDay;
}

/// Parses "hh:mm" into a unit-day fraction (06:56 -> 416/1440).
/// Hours may exceed 23; a leading '-' negates. Throws InvalidConfig.
double parse_hhmm(const std::string& text);

/// Formats a unit-day fraction as "hh:mm", rounding to the nearest minute.
/// Hours are not wrapped at 24, mirroring out-of-support parameters verbatim.
std::string format_hhmm(double day_fraction);

/// Slot whose interval ends at the given "hh:mm" wall-clock time (07:00 -> 14).
/// The time must land on a 30-minute boundary in [00:30, 24:00].
int slot_of_hhmm(const std::string& text);

}  // namespace parkcast
