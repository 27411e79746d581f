#include "parkcast/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "parkcast/errors.hpp"
#include "parkcast/log.hpp"

namespace parkcast {

using std::chrono::sys_days;
using std::chrono::sys_seconds;

const char* to_string(DayClass c) {
  switch (c) {
    case DayClass::Weekday: return "weekday";
    case DayClass::Friday: return "friday";
    case DayClass::Weekend: return "weekend";
  }
  return "?";
}

DayClass day_class_from_string(const std::string& text) {
  if (text == "weekday") return DayClass::Weekday;
  if (text == "friday") return DayClass::Friday;
  if (text == "weekend") return DayClass::Weekend;
  throw InvalidConfig("unknown day class '" + text +
                      "' (expected weekday|friday|weekend)");
}

DayClass day_class_of(sys_days date) {
  const std::chrono::weekday wd{date};
  const unsigned iso = wd.iso_encoding();  // Mon=1 .. Sun=7
  if (iso <= 4) return DayClass::Weekday;
  if (iso == 5) return DayClass::Friday;
  return DayClass::Weekend;
}

sys_days parse_date(const std::string& text, long line) {
  int y = 0, m = 0, d = 0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%d-%d-%d%c", &y, &m, &d, &tail) != 3) {
    throw ParseError("expected date as YYYY-MM-DD, got '" + text + "'", line);
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{unsigned(m)},
                                        std::chrono::day{unsigned(d)}};
  if (!ymd.ok()) {
    throw ParseError("invalid calendar date '" + text + "'", line);
  }
  return sys_days{ymd};
}

sys_seconds parse_timestamp(const std::string& text, long line) {
  int y = 0, mo = 0, d = 0, hh = 0, mi = 0, ss = 0;
  char sep = 0, tail = 0;
  const int got = std::sscanf(text.c_str(), "%d-%d-%d%c%d:%d:%d%c", &y, &mo, &d,
                              &sep, &hh, &mi, &ss, &tail);
  if ((got != 6 && got != 7) || (sep != 'T' && sep != ' ') || hh < 0 ||
      hh > 23 || mi < 0 || mi > 59 || ss < 0 || ss > 59) {
    throw ParseError("expected timestamp as YYYY-MM-DDTHH:MM[:SS], got '" +
                     text + "'", line);
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{unsigned(mo)},
                                        std::chrono::day{unsigned(d)}};
  if (!ymd.ok()) {
    throw ParseError("invalid calendar date in '" + text + "'", line);
  }
  return sys_days{ymd} + std::chrono::hours{hh} + std::chrono::minutes{mi} +
         std::chrono::seconds{ss};
}

std::string format_date(sys_days date) {
  const std::chrono::year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()));
  return buf;
}

std::string format_timestamp(sys_seconds ts) {
  const sys_days day = std::chrono::floor<std::chrono::days>(ts);
  const auto tod = std::chrono::hh_mm_ss{ts - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%sT%02lld:%02lld:%02lld",
                format_date(day).c_str(),
                static_cast<long long>(tod.hours().count()),
                static_cast<long long>(tod.minutes().count()),
                static_cast<long long>(tod.seconds().count()));
  return buf;
}

namespace {

std::vector<std::string> split_csv_row(const std::string& row) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(row);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!row.empty() && row.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<RawSeries> ingest_csv(std::istream& in) {
  std::map<std::string, RawSeries> by_station;
  std::string row;
  long line = 0;
  bool header_seen = false;
  while (std::getline(in, row)) {
    ++line;
    const std::string stripped = trim(row);
    if (stripped.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      if (stripped.find("station") != std::string::npos &&
          stripped.find("timestamp") != std::string::npos) {
        continue;  // header row
      }
    }
    const auto fields = split_csv_row(stripped);
    if (fields.size() != 3) {
      throw ParseError("expected 3 fields station,timestamp,occupancy", line);
    }
    const std::string station = trim(fields[0]);
    if (station.empty()) {
      throw ParseError("empty station name", line);
    }
    const sys_seconds ts = parse_timestamp(trim(fields[1]), line);
    const std::string occ_text = trim(fields[2]);
    long occ = 0;
    char tail = 0;
    if (std::sscanf(occ_text.c_str(), "%ld%c", &occ, &tail) != 1) {
      throw ParseError("occupancy must be an integer, got '" + occ_text + "'",
                       line);
    }
    if (occ < 0) {
      throw NegativeOccupancy("occupancy must be non-negative, got " + occ_text,
                              line);
    }
    const auto total_seconds = ts.time_since_epoch().count();
    if (total_seconds % (30 * 60) != 0) {
      throw ParseError("timestamp not on a 30-minute boundary: '" +
                       trim(fields[1]) + "'", line);
    }
    auto& series = by_station[station];
    series.station = station;
    if (!series.samples.empty() && ts <= series.samples.back().ts) {
      throw NonMonotonicTimestamps(
          "timestamps must be strictly increasing per station ('" + station +
          "')", line);
    }
    series.samples.push_back(RawSample{ts, occ});
  }
  std::vector<RawSeries> out;
  out.reserve(by_station.size());
  for (auto& [name, series] : by_station) {
    (void)name;
    out.push_back(std::move(series));
  }
  return out;
}

ExclusionList ExclusionList::from_json(std::istream& in) {
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("exclusion list is not valid JSON: ") + e.what(), 0);
  }
  if (!doc.is_object()) {
    throw ParseError("exclusion list must be a JSON object keyed by station", 0);
  }
  ExclusionList out;
  for (const auto& [station, entries] : doc.items()) {
    if (!entries.is_array()) {
      throw ParseError("exclusions for '" + station + "' must be an array", 0);
    }
    for (const auto& entry : entries) {
      const sys_days date = parse_date(entry.at("date").get<std::string>());
      const std::string reason = entry.value("reason", std::string{"excluded"});
      out.add(station, date, reason);
    }
  }
  return out;
}

void ExclusionList::add(const std::string& station, sys_days date,
                        const std::string& reason) {
  by_station_[station][date] = reason;
}

const std::string* ExclusionList::find(const std::string& station,
                                       sys_days date) const {
  const auto it = by_station_.find(station);
  if (it == by_station_.end()) return nullptr;
  const auto jt = it->second.find(date);
  if (jt == it->second.end()) return nullptr;
  return &jt->second;
}

std::size_t ExclusionList::size() const {
  std::size_t n = 0;
  for (const auto& [station, dates] : by_station_) {
    (void)station;
    n += dates.size();
  }
  return n;
}

namespace {

struct DaySlots {
  std::vector<double> values;
  std::vector<bool> present;
  DaySlots() : values(kSlotsPerDay, 0.0), present(kSlotsPerDay, false) {}
};

/// Fills gaps of at most max_gap consecutive missing slots. Interior gaps
/// interpolate linearly between the bracketing samples; gaps touching a day
/// edge are flat-filled from the nearest sample. Returns false when a gap
/// exceeds max_gap, reporting its length.
bool fill_gaps(DaySlots& day, int max_gap, int* worst_gap) {
  *worst_gap = 0;
  int i = 0;
  while (i < kSlotsPerDay) {
    if (day.present[i]) {
      ++i;
      continue;
    }
    int j = i;
    while (j < kSlotsPerDay && !day.present[j]) ++j;
    const int gap = j - i;
    *worst_gap = std::max(*worst_gap, gap);
    if (gap > max_gap) return false;
    const int left = i - 1;   // may be -1
    const int right = j;      // may be kSlotsPerDay
    for (int k = i; k < j; ++k) {
      if (left < 0 && right >= kSlotsPerDay) return false;  // empty day
      if (left < 0) {
        day.values[k] = day.values[right];
      } else if (right >= kSlotsPerDay) {
        day.values[k] = day.values[left];
      } else {
        const double w = static_cast<double>(k - left) / (right - left);
        day.values[k] = day.values[left] * (1.0 - w) + day.values[right] * w;
      }
    }
    i = j;
  }
  return true;
}

}  // namespace

SliceResult slice_days(const RawSeries& series, const ExclusionList& exclusions,
                       int max_gap_slots) {
  std::map<sys_days, DaySlots> days;
  for (const auto& sample : series.samples) {
    const sys_days day = std::chrono::floor<std::chrono::days>(sample.ts);
    const auto since_midnight = sample.ts - day;
    const long minutes = std::chrono::duration_cast<std::chrono::minutes>(since_midnight).count();
    sys_days profile_day = day;
    int slot;  // 1-based end-of-interval slot
    if (minutes == 0) {
      profile_day = day - std::chrono::days{1};
      slot = kSlotsPerDay;
    } else {
      slot = static_cast<int>(minutes / 30);
    }
    auto& d = days[profile_day];
    d.values[slot - 1] = static_cast<double>(sample.occupancy);
    d.present[slot - 1] = true;
  }

  SliceResult out;
  for (auto& [date, slots] : days) {
    if (const std::string* reason = exclusions.find(series.station, date)) {
      out.dropped.push_back({series.station, date, *reason});
      continue;
    }
    const int n_present =
        static_cast<int>(std::count(slots.present.begin(), slots.present.end(), true));
    if (n_present == 0) continue;
    int worst_gap = 0;
    if (!fill_gaps(slots, max_gap_slots, &worst_gap)) {
      out.dropped.push_back(
          {series.station, date,
           "gap of " + std::to_string(worst_gap) + " slots exceeds " +
               std::to_string(max_gap_slots)});
      continue;
    }
    OccupancyProfile p;
    p.station = series.station;
    p.date = date;
    p.day_class = day_class_of(date);
    p.values = slots.values;
    p.interpolated = n_present < kSlotsPerDay;
    out.profiles.push_back(std::move(p));
  }
  return out;
}

void normalise(OccupancyProfile& profile, Normalisation mode,
               BaselineMode baseline) {
  if (profile.normalisation != Normalisation::None) {
    throw InvalidParams("normalise: profile is already normalised");
  }
  if (profile.values.size() != static_cast<std::size_t>(kSlotsPerDay)) {
    throw LengthMismatch("normalise: profile must have 48 slots");
  }
  if (mode == Normalisation::None) return;

  double offset = 0.0;
  if (baseline == BaselineMode::SubtractDayMin) {
    const auto [lo, hi] =
        std::minmax_element(profile.values.begin(), profile.values.end());
    if (*lo == *hi) {
      throw DegenerateProfile("normalise: day '" + format_date(profile.date) +
                              "' is constant; nothing left after baseline");
    }
    offset = *lo;
    for (double& v : profile.values) v -= offset;
  }

  double scale;
  if (mode == Normalisation::Area) {
    scale = 0.0;
    for (const double v : profile.values) scale += v;
  } else {
    scale = *std::max_element(profile.values.begin(), profile.values.end());
  }
  if (!(scale > 0.0)) {
    throw DegenerateProfile("normalise: day '" + format_date(profile.date) +
                            "' has no positive mass");
  }
  for (double& v : profile.values) v /= scale;
  profile.baseline_offset = offset;
  profile.scale = scale;
  profile.normalisation = mode;
}

OccupancyProfile denormalised(const OccupancyProfile& profile) {
  OccupancyProfile out = profile;
  if (profile.normalisation == Normalisation::None) return out;
  for (double& v : out.values) v = profile.baseline_offset + profile.scale * v;
  out.baseline_offset = 0.0;
  out.scale = 1.0;
  out.normalisation = Normalisation::None;
  return out;
}

SplitResult split_train_test(std::span<const OccupancyProfile> profiles,
                             int test_weeks,
                             std::span<const DayClass> required_classes) {
  if (profiles.empty()) {
    throw InsufficientData("split: no profiles");
  }
  if (test_weeks < 1) {
    throw InvalidConfig("split: test_weeks must be >= 1");
  }
  std::map<std::string, sys_days> last_date;
  for (const auto& p : profiles) {
    auto [it, inserted] = last_date.emplace(p.station, p.date);
    if (!inserted && p.date > it->second) it->second = p.date;
  }

  SplitResult out;
  for (const auto& p : profiles) {
    // Test window: the final test_weeks*7 calendar days of the station.
    const sys_days cutoff =
        last_date.at(p.station) - std::chrono::days{7 * test_weeks - 1};
    if (p.date >= cutoff) {
      out.test.push_back(p);
    } else {
      out.train.push_back(p);
    }
  }

  static constexpr DayClass kAll[] = {DayClass::Weekday, DayClass::Friday,
                                      DayClass::Weekend};
  std::span<const DayClass> check =
      required_classes.empty() ? std::span<const DayClass>{kAll} : required_classes;
  std::set<std::string> stations;
  for (const auto& p : profiles) stations.insert(p.station);
  for (const auto& station : stations) {
    for (const DayClass c : check) {
      long n = std::count_if(out.train.begin(), out.train.end(),
                             [&](const OccupancyProfile& p) {
                               return p.station == station && p.day_class == c;
                             });
      if (n < 5) {
        throw InsufficientData("split: station '" + station + "' keeps only " +
                               std::to_string(n) + " " +
                               to_string(c) + " training profiles (need 5)");
      }
    }
  }
  return out;
}

std::vector<OccupancyProfile> select_profiles(
    std::span<const OccupancyProfile> profiles, const std::string& station,
    DayClass day_class) {
  std::vector<OccupancyProfile> out;
  for (const auto& p : profiles) {
    if (p.station == station && p.day_class == day_class) out.push_back(p);
  }
  std::sort(out.begin(), out.end(),
            [](const OccupancyProfile& a, const OccupancyProfile& b) {
              return a.date < b.date;
            });
  return out;
}

double max_occupancy(std::span<const OccupancyProfile> profiles) {
  double best = 0.0;
  for (const auto& p : profiles) {
    if (p.normalisation == Normalisation::None) {
      for (const double v : p.values) best = std::max(best, v);
    } else {
      for (const double v : p.values) {
        best = std::max(best, p.baseline_offset + p.scale * v);
      }
    }
  }
  return best;
}

}  // namespace parkcast
