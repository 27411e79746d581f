#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "parkcast/data.hpp"
#include "parkcast/models.hpp"

namespace parkcast {

/// SplitMix64 step; the seed-derivation primitive for per-day streams.
std::uint64_t splitmix64(std::uint64_t state);

/// Derived stream seed for (master, station, day, stream).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t station,
                          std::uint64_t day, std::uint64_t stream);

struct SimDayConfig {
  TnParams params;
  int demand = 400;  // cars arriving over the day
  std::optional<long> capacity;
  long initial_occupancy = 0;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

struct SimDay {
  /// Observed slot values: noiseless counts when noise_sigma == 0,
  /// otherwise counts plus Gaussian noise floored at zero.
  std::vector<double> values;
  /// Noiseless counts (may dip below zero; the process does not pair each
  /// car's departure to its arrival).
  std::vector<double> raw;
  long rejected = 0;
  int negative_slots = 0;
  bool saturated = false;
  /// Sorted event times, exposed for independent replay.
  std::vector<double> arrivals;
  std::vector<double> departures;
};

/// One day of the counting process: demand arrival times ~ the arrival
/// distribution, as many departure times ~ the departure distribution,
/// occupancy(t) = initial + #arrivals<=t - #departures<=t. With a capacity,
/// an arrival into a full park is rejected and cancels the next departure
/// after the rejection time, keeping the end-of-day balance. Deterministic
/// in (config, seed).
SimDay simulate_day(const SimDayConfig& config);

struct StationSim {
  std::string name;
  TnParams weekday;
  TnParams friday;
  TnParams weekend;
  int demand_weekday = 400;
  int demand_friday = 340;
  int demand_weekend = 60;
  std::optional<long> capacity;
  long initial_occupancy = 10;
  double noise_sigma = 0.0;
};

struct CorpusConfig {
  std::vector<StationSim> stations;
  std::chrono::sys_days start_date;
  int weeks = 12;
  std::uint64_t seed = 0;
  bool inject_anomalies = false;
  int jobs = 0;
};

struct CorpusDay {
  std::chrono::sys_days date{};
  DayClass day_class = DayClass::Weekday;
  int demand = 0;
  long rejected = 0;
  int negative_slots = 0;
  bool saturated = false;
  std::string anomaly;  // "", "sensor_stuck", "holiday_flat"
  std::vector<long> occupancy;  // emitted integer counts, clamped at 0
};

struct CorpusStation {
  StationSim config;
  std::vector<CorpusDay> days;
};

struct Corpus {
  std::vector<CorpusStation> stations;
  std::chrono::sys_days start_date{};
  int weeks = 0;
  std::uint64_t seed = 0;
};

/// Simulates stations x weeks of days; day slots are filled in parallel
/// into pre-sized storage, so output ordering and bytes are independent of
/// the schedule.
Corpus simulate_corpus(const CorpusConfig& config);

/// Serial reference for simulate_corpus.
Corpus simulate_corpus_serial(const CorpusConfig& config);

/// Ingest-format CSV (station,timestamp,occupancy), stations in order,
/// byte-stable for a fixed corpus.
void write_corpus_csv(const Corpus& corpus, std::ostream& out);

/// Ground-truth JSON: per-station parameters, demand, capacity, and per-day
/// rejected counts / anomalies.
void write_corpus_sidecar(const Corpus& corpus, std::ostream& out);

/// Deterministic family of synthetic stations; half get a binding capacity.
std::vector<StationSim> default_station_set(int n_stations, std::uint64_t seed);

}  // namespace parkcast
