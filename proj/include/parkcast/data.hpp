#pragma once

#include <chrono>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "parkcast/grid.hpp"

namespace parkcast {

enum class DayClass { Weekday, Friday, Weekend };

const char* to_string(DayClass c);
DayClass day_class_from_string(const std::string& text);  // throws InvalidConfig

/// Mon-Thu -> Weekday, Fri -> Friday, Sat/Sun -> Weekend.
DayClass day_class_of(std::chrono::sys_days date);

enum class Normalisation { None, Area, Max };
enum class BaselineMode { None, SubtractDayMin };

struct RawSample {
  std::chrono::sys_seconds ts;
  long occupancy = 0;
};

/// One station's samples in strictly increasing time order.
struct RawSeries {
  std::string station;
  std::vector<RawSample> samples;
};

/// One complete day of 48 slot values plus the bookkeeping needed to map
/// normalised values back to counts (original = offset + scale * value).
struct OccupancyProfile {
  std::string station;
  std::chrono::sys_days date{};
  DayClass day_class = DayClass::Weekday;
  std::vector<double> values;  // exactly kSlotsPerDay
  Normalisation normalisation = Normalisation::None;
  double baseline_offset = 0.0;
  double scale = 1.0;
  bool interpolated = false;
};

struct DroppedDay {
  std::string station;
  std::chrono::sys_days date{};
  std::string reason;
};

/// Station -> excluded dates with reasons, loaded from JSON of the shape
/// {"Station": [{"date": "2020-03-16", "reason": "lockdown"}, ...]}.
class ExclusionList {
 public:
  static ExclusionList from_json(std::istream& in);
  void add(const std::string& station, std::chrono::sys_days date,
           const std::string& reason);
  const std::string* find(const std::string& station,
                          std::chrono::sys_days date) const;
  std::size_t size() const;

 private:
  std::map<std::string, std::map<std::chrono::sys_days, std::string>> by_station_;
};

struct SliceResult {
  std::vector<OccupancyProfile> profiles;
  std::vector<DroppedDay> dropped;
};

struct SplitResult {
  std::vector<OccupancyProfile> train;
  std::vector<OccupancyProfile> test;
};

/// Parses "YYYY-MM-DD"; throws ParseError with the given line number.
std::chrono::sys_days parse_date(const std::string& text, long line = 0);

/// Parses ISO-8601 "YYYY-MM-DDTHH:MM[:SS]" (space also accepted).
std::chrono::sys_seconds parse_timestamp(const std::string& text, long line = 0);

std::string format_date(std::chrono::sys_days date);
std::string format_timestamp(std::chrono::sys_seconds ts);

/// Reads `station,timestamp,occupancy` CSV with a header row. Timestamps
/// must be strictly increasing per station and land on 30-minute
/// boundaries; occupancy must be a non-negative integer. Returns one
/// series per station, sorted by station name.
std::vector<RawSeries> ingest_csv(std::istream& in);

/// Cuts a series into complete calendar days of 48 slots. A sample at
/// hh:mm belongs to slot hh*2+mm/30 of its date; a sample at exactly
/// midnight is slot 48 of the previous date. Gaps of at most max_gap_slots
/// consecutive missing slots are interpolated (flagging the profile);
/// longer gaps drop the day with a reason. Days on the exclusion list are
/// dropped with the listed reason.
SliceResult slice_days(const RawSeries& series, const ExclusionList& exclusions,
                       int max_gap_slots = 2);

/// Applies the baseline then rescales in place: Area divides by the slot
/// sum, Max by the maximum. Records offset/scale for denormalisation.
/// Throws DegenerateProfile when the profile has no usable mass.
void normalise(OccupancyProfile& profile, Normalisation mode,
               BaselineMode baseline);

/// Inverse of normalise: back to raw counts.
OccupancyProfile denormalised(const OccupancyProfile& profile);

/// Splits per station by date: the final `test_weeks` calendar weeks of
/// each station's coverage form the test set. Throws InsufficientData when
/// any requested day class would have fewer than 5 training profiles.
SplitResult split_train_test(std::span<const OccupancyProfile> profiles,
                             int test_weeks = 3,
                             std::span<const DayClass> required_classes = {});

/// Profiles of one station and day class, ordered by date.
std::vector<OccupancyProfile> select_profiles(
    std::span<const OccupancyProfile> profiles, const std::string& station,
    DayClass day_class);

/// Largest raw slot value across the given profiles (denormalised scale).
double max_occupancy(std::span<const OccupancyProfile> profiles);

}  // namespace parkcast
