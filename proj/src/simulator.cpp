#include "parkcast/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include <json.hpp>

#include "parkcast/errors.hpp"
#include "parkcast/parallel.hpp"

namespace parkcast {

std::uint64_t splitmix64(std::uint64_t state) {
  std::uint64_t z = state + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t station,
                          std::uint64_t day, std::uint64_t stream) {
  std::uint64_t s = splitmix64(master ^ 0xa076'1d64'78bd'642fULL);
  s = splitmix64(s ^ station);
  s = splitmix64(s ^ day);
  return splitmix64(s ^ stream);
}

namespace {

double uniform53(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Portable standard-normal draw (Box-Muller, one value per call).
double gauss(std::mt19937_64& gen) {
  double u1 = uniform53(gen);
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  const double u2 = uniform53(gen);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace

SimDay simulate_day(const SimDayConfig& config) {
  if (config.demand < 0) {
    throw InvalidParams("simulate_day: demand must be non-negative");
  }
  if (config.capacity && *config.capacity < config.initial_occupancy) {
    throw InvalidParams("simulate_day: capacity below initial occupancy");
  }
  const TruncNorm arrival_dist(config.params.mu_a, config.params.sigma_a);
  const TruncNorm departure_dist(config.params.mu_d, config.params.sigma_d);
  const std::size_t m = static_cast<std::size_t>(config.demand);

  SimDay day;
  day.arrivals = arrival_dist.sample(m, derive_seed(config.seed, 0, 0, 1));
  day.departures = departure_dist.sample(m, derive_seed(config.seed, 0, 0, 2));
  std::sort(day.arrivals.begin(), day.arrivals.end());
  std::sort(day.departures.begin(), day.departures.end());

  day.raw.assign(kSlotsPerDay, 0.0);
  long occ = config.initial_occupancy;
  long pending_cancel = 0;
  std::size_t ai = 0, di = 0;
  int slot = 1;
  const auto fill_slots_until = [&](double t) {
    while (slot <= kSlotsPerDay && grid_time(slot) < t) {
      day.raw[slot - 1] = static_cast<double>(occ);
      ++slot;
    }
  };
  while (ai < m || di < m) {
    // Departures win ties so a space frees up before a same-time arrival.
    const bool take_departure =
        di < m && (ai >= m || day.departures[di] <= day.arrivals[ai]);
    const double t = take_departure ? day.departures[di] : day.arrivals[ai];
    fill_slots_until(t);
    if (take_departure) {
      ++di;
      if (pending_cancel > 0) {
        --pending_cancel;
      } else {
        --occ;
      }
    } else {
      ++ai;
      if (config.capacity && occ >= *config.capacity) {
        ++day.rejected;
        ++pending_cancel;
        day.saturated = true;
      } else {
        ++occ;
        if (config.capacity && occ >= *config.capacity) day.saturated = true;
      }
    }
  }
  fill_slots_until(2.0);  // remaining slots hold the final level

  for (const double v : day.raw) {
    if (v < 0.0) ++day.negative_slots;
  }

  day.values = day.raw;
  if (config.noise_sigma > 0.0) {
    std::mt19937_64 gen(derive_seed(config.seed, 0, 0, 3));
    for (double& v : day.values) {
      v = std::max(0.0, v + config.noise_sigma * gauss(gen));
    }
  }
  return day;
}

namespace {

const TnParams& params_for(const StationSim& s, DayClass c) {
  switch (c) {
    case DayClass::Weekday: return s.weekday;
    case DayClass::Friday: return s.friday;
    case DayClass::Weekend: return s.weekend;
  }
  return s.weekday;
}

int demand_for(const StationSim& s, DayClass c) {
  switch (c) {
    case DayClass::Weekday: return s.demand_weekday;
    case DayClass::Friday: return s.demand_friday;
    case DayClass::Weekend: return s.demand_weekend;
  }
  return s.demand_weekday;
}

CorpusDay make_corpus_day(const CorpusConfig& config, std::size_t station_idx,
                          std::size_t day_idx) {
  const StationSim& station = config.stations[station_idx];
  const auto date =
      config.start_date + std::chrono::days{static_cast<int>(day_idx)};
  const DayClass day_class = day_class_of(date);

  CorpusDay out;
  out.date = date;
  out.day_class = day_class;

  // Anomaly days: two deterministic picks per station when requested.
  const std::size_t n_days = static_cast<std::size_t>(config.weeks) * 7;
  if (config.inject_anomalies && n_days >= 4) {
    const std::uint64_t pick = derive_seed(config.seed, station_idx, 0, 99);
    const std::size_t stuck_day = pick % n_days;
    std::size_t flat_day = splitmix64(pick) % n_days;
    if (flat_day == stuck_day) flat_day = (flat_day + 1) % n_days;
    if (day_idx == stuck_day) out.anomaly = "sensor_stuck";
    if (day_idx == flat_day) out.anomaly = "holiday_flat";
  }

  SimDayConfig day_config;
  day_config.params = params_for(station, day_class);
  day_config.demand = demand_for(station, day_class);
  day_config.capacity = station.capacity;
  day_config.initial_occupancy = station.initial_occupancy;
  day_config.noise_sigma = station.noise_sigma;
  day_config.seed = derive_seed(config.seed, station_idx, day_idx, 0);
  if (out.anomaly == "holiday_flat") {
    day_config.demand = std::max(3, day_config.demand / 20);
  }

  const SimDay sim = simulate_day(day_config);
  out.demand = day_config.demand;
  out.rejected = sim.rejected;
  out.negative_slots = sim.negative_slots;
  out.saturated = sim.saturated;
  out.occupancy.resize(kSlotsPerDay);
  for (int i = 0; i < kSlotsPerDay; ++i) {
    out.occupancy[i] = std::max(0L, std::lround(sim.values[i]));
  }
  if (out.anomaly == "sensor_stuck") {
    // A stuck counter repeats one mid-morning reading all day.
    const long stuck_value = out.occupancy[15];
    std::fill(out.occupancy.begin(), out.occupancy.end(), stuck_value);
  }
  return out;
}

Corpus run_corpus(const CorpusConfig& config, bool parallel) {
  if (config.weeks < 1 || config.stations.empty()) {
    throw InvalidParams("simulate_corpus: needs >= 1 week and >= 1 station");
  }
  const std::size_t n_days = static_cast<std::size_t>(config.weeks) * 7;
  Corpus corpus;
  corpus.start_date = config.start_date;
  corpus.weeks = config.weeks;
  corpus.seed = config.seed;
  corpus.stations.resize(config.stations.size());
  for (std::size_t s = 0; s < config.stations.size(); ++s) {
    corpus.stations[s].config = config.stations[s];
    corpus.stations[s].days.resize(n_days);
  }

  const std::size_t total = config.stations.size() * n_days;
  const auto fill = [&](std::size_t index) {
    const std::size_t s = index / n_days;
    const std::size_t d = index % n_days;
    corpus.stations[s].days[d] = make_corpus_day(config, s, d);
  };
  if (parallel) {
    parallel_for(total, config.jobs, fill);
  } else {
    serial_for(total, fill);
  }
  return corpus;
}

}  // namespace

Corpus simulate_corpus(const CorpusConfig& config) {
  return run_corpus(config, true);
}

Corpus simulate_corpus_serial(const CorpusConfig& config) {
  return run_corpus(config, false);
}

void write_corpus_csv(const Corpus& corpus, std::ostream& out) {
  out << "station,timestamp,occupancy\n";
  for (const auto& station : corpus.stations) {
    for (const auto& day : station.days) {
      for (int slot = 1; slot <= kSlotsPerDay; ++slot) {
        const auto ts = std::chrono::sys_seconds{day.date} +
                        std::chrono::minutes{30 * slot};
        out << station.config.name << ',' << format_timestamp(ts) << ','
            << day.occupancy[slot - 1] << '\n';
      }
    }
  }
}

namespace {

nlohmann::json params_to_json(const TnParams& p) {
  return nlohmann::json{{"mu_a", p.mu_a},
                        {"sigma_a", p.sigma_a},
                        {"mu_d", p.mu_d},
                        {"sigma_d", p.sigma_d}};
}

}  // namespace

void write_corpus_sidecar(const Corpus& corpus, std::ostream& out) {
  nlohmann::json doc;
  doc["seed"] = corpus.seed;
  doc["start_date"] = format_date(corpus.start_date);
  doc["weeks"] = corpus.weeks;
  doc["stations"] = nlohmann::json::array();
  for (const auto& station : corpus.stations) {
    nlohmann::json s;
    s["name"] = station.config.name;
    s["params"] = {{"weekday", params_to_json(station.config.weekday)},
                   {"friday", params_to_json(station.config.friday)},
                   {"weekend", params_to_json(station.config.weekend)}};
    s["demand"] = {{"weekday", station.config.demand_weekday},
                   {"friday", station.config.demand_friday},
                   {"weekend", station.config.demand_weekend}};
    if (station.config.capacity) {
      s["capacity"] = *station.config.capacity;
    } else {
      s["capacity"] = nullptr;
    }
    s["initial_occupancy"] = station.config.initial_occupancy;
    s["noise_sigma"] = station.config.noise_sigma;
    s["days"] = nlohmann::json::array();
    for (const auto& day : station.days) {
      nlohmann::json d;
      d["date"] = format_date(day.date);
      d["day_class"] = to_string(day.day_class);
      d["demand"] = day.demand;
      d["rejected"] = day.rejected;
      d["saturated"] = day.saturated;
      d["negative_slots"] = day.negative_slots;
      if (!day.anomaly.empty()) d["anomaly"] = day.anomaly;
      s["days"].push_back(std::move(d));
    }
    doc["stations"].push_back(std::move(s));
  }
  out << doc.dump(2) << '\n';
}

std::vector<StationSim> default_station_set(int n_stations,
                                            std::uint64_t seed) {
  if (n_stations < 1) {
    throw InvalidParams("default_station_set: needs at least one station");
  }
  const auto jitter = [&](std::uint64_t k, double lo, double hi) {
    const double u =
        static_cast<double>(derive_seed(seed, k, 0, 7) >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
  };
  std::vector<StationSim> out;
  out.reserve(n_stations);
  for (int i = 0; i < n_stations; ++i) {
    StationSim s;
    char name[16];
    std::snprintf(name, sizeof name, "synth%02d", i + 1);
    s.name = name;
    const std::uint64_t k = static_cast<std::uint64_t>(i);
    TnParams base;
    base.mu_a = jitter(k * 8 + 0, 0.28, 0.33);
    base.sigma_a = jitter(k * 8 + 1, 0.035, 0.06);
    base.mu_d = jitter(k * 8 + 2, 0.76, 0.82);
    base.sigma_d = jitter(k * 8 + 3, 0.08, 0.14);
    s.weekday = base;
    s.friday = base;
    s.friday.mu_d = base.mu_d - 0.04;  // people leave earlier on Fridays
    s.weekend = base;
    s.weekend.mu_a = base.mu_a + 0.10;
    s.weekend.sigma_a = base.sigma_a * 2.0;
    s.weekend.sigma_d = base.sigma_d * 1.5;
    s.demand_weekday = 400 + static_cast<int>(jitter(k * 8 + 4, 0.0, 400.0));
    s.demand_friday = static_cast<int>(0.85 * s.demand_weekday);
    s.demand_weekend = static_cast<int>(0.15 * s.demand_weekday);
    s.initial_occupancy = 5 + static_cast<long>(jitter(k * 8 + 5, 0.0, 15.0));
    s.noise_sigma = jitter(k * 8 + 6, 0.5, 2.0);
    if (i % 2 == 1) {
      // Every other station saturates on weekdays.
      s.capacity = s.initial_occupancy +
                   static_cast<long>(0.78 * s.demand_weekday);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace parkcast
