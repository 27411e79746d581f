#include "parkcast/serialize.hpp"

#include <ostream>
#include <istream>
#include <sstream>

#include <json.hpp>

#include "parkcast/errors.hpp"
#include "parkcast/grid.hpp"

namespace parkcast {

namespace {

using nlohmann::json;

json params_to_json(const TnParams& p) {
  return json{
      {"mu_a", p.mu_a},
      {"sigma_a", p.sigma_a},
      {"mu_d", p.mu_d},
      {"sigma_d", p.sigma_d},
      // Readable mirrors; the fractional fields above are authoritative.
      {"mu_a_hhmm", format_hhmm(p.mu_a)},
      {"sigma_a_hhmm", format_hhmm(p.sigma_a)},
      {"mu_d_hhmm", format_hhmm(p.mu_d)},
      {"sigma_d_hhmm", format_hhmm(p.sigma_d)},
  };
}

TnParams params_from_json(const json& j) {
  TnParams p;
  p.mu_a = j.at("mu_a").get<double>();
  p.sigma_a = j.at("sigma_a").get<double>();
  p.mu_d = j.at("mu_d").get<double>();
  p.sigma_d = j.at("sigma_d").get<double>();
  return p;
}

json fit_common_to_json(const TnFit& f) {
  return json{
      {"total_loss", f.total_loss}, {"loss_per_day", f.loss_per_day},
      {"beta2", f.beta2},           {"n_profiles", f.n_profiles},
      {"winner_start", f.winner_start},
      {"iterations", f.iterations}, {"converged", f.converged},
      {"non_interpretable", f.non_interpretable},
  };
}

template <typename Fit>
void fit_common_from_json(const json& j, Fit& f) {
  f.total_loss = j.at("total_loss").get<double>();
  f.loss_per_day = j.at("loss_per_day").get<double>();
  f.beta2 = j.at("beta2").get<double>();
  f.n_profiles = j.at("n_profiles").get<int>();
  f.winner_start = j.at("winner_start").get<int>();
  f.iterations = j.at("iterations").get<int>();
  f.converged = j.at("converged").get<bool>();
  f.non_interpretable = j.at("non_interpretable").get<bool>();
}

json parse_or_throw(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError("malformed model document");
  return j;
}

void check_model_tag(const json& j, const std::string& expected) {
  const std::string tag = j.value("model", "");
  if (tag != expected)
    throw ParseError("expected a '" + expected + "' model document, got '" +
                     tag + "'");
}

}  // namespace

std::string to_json(const TnDocument& doc) {
  json j{
      {"model", "tn"},
      {"station", doc.station},
      {"day_class", to_string(doc.day_class)},
      {"station_max", doc.station_max},
      {"params", params_to_json(doc.fit.params)},
      {"fit", fit_common_to_json(doc.fit)},
  };
  return j.dump(2) + "\n";
}

std::string to_json(const TnlDocument& doc) {
  // Keep date order; an object would re-sort keys lexicographically, which
  // happens to match ISO dates, but an array is unambiguous.
  json taus = json::array();
  for (const auto& [date, tau] : doc.fit.tau_per_day)
    taus.push_back(json{{"date", format_date(date)}, {"tau", tau}});

  TnFit common;
  common.total_loss = doc.fit.total_loss;
  common.loss_per_day = doc.fit.loss_per_day;
  common.beta2 = doc.fit.beta2;
  common.n_profiles = doc.fit.n_profiles;
  common.winner_start = doc.fit.winner_start;
  common.iterations = doc.fit.iterations;
  common.converged = doc.fit.converged;
  common.non_interpretable = doc.fit.non_interpretable;

  json j{
      {"model", "tnl"},
      {"station", doc.station},
      {"day_class", to_string(doc.day_class)},
      {"station_max", doc.station_max},
      {"capacity_proxy", doc.capacity_proxy},
      {"params", params_to_json(doc.fit.params)},
      {"mean_tau", doc.fit.mean_tau},
      {"tau_per_day", std::move(taus)},
      {"fit", fit_common_to_json(common)},
  };
  return j.dump(2) + "\n";
}

void write_document(std::ostream& out, const TnDocument& doc) {
  out << to_json(doc);
  if (!out) throw IoError("failed to write model document");
}

void write_document(std::ostream& out, const TnlDocument& doc) {
  out << to_json(doc);
  if (!out) throw IoError("failed to write model document");
}

std::string document_model_tag(const std::string& text) {
  return parse_or_throw(text).value("model", "");
}

TnDocument parse_tn_document(const std::string& text) {
  const json j = parse_or_throw(text);
  check_model_tag(j, "tn");
  TnDocument doc;
  try {
    doc.station = j.at("station").get<std::string>();
    doc.day_class = day_class_from_string(j.at("day_class").get<std::string>());
    doc.station_max = j.at("station_max").get<double>();
    doc.fit.params = params_from_json(j.at("params"));
    fit_common_from_json(j.at("fit"), doc.fit);
  } catch (const json::exception& e) {
    throw ParseError(std::string("model document: ") + e.what());
  }
  return doc;
}

TnlDocument parse_tnl_document(const std::string& text) {
  const json j = parse_or_throw(text);
  check_model_tag(j, "tnl");
  TnlDocument doc;
  try {
    doc.station = j.at("station").get<std::string>();
    doc.day_class = day_class_from_string(j.at("day_class").get<std::string>());
    doc.station_max = j.at("station_max").get<double>();
    doc.capacity_proxy = j.at("capacity_proxy").get<double>();
    doc.fit.params = params_from_json(j.at("params"));
    doc.fit.mean_tau = j.at("mean_tau").get<double>();
    for (const auto& entry : j.at("tau_per_day"))
      doc.fit.tau_per_day.emplace_back(
          parse_date(entry.at("date").get<std::string>()),
          entry.at("tau").get<double>());
    fit_common_from_json(j.at("fit"), doc.fit);
  } catch (const json::exception& e) {
    throw ParseError(std::string("model document: ") + e.what());
  }
  return doc;
}

namespace {
std::string slurp(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("failed to read model document");
  return buf.str();
}
}  // namespace

TnDocument read_tn_document(std::istream& in) {
  return parse_tn_document(slurp(in));
}

TnlDocument read_tnl_document(std::istream& in) {
  return parse_tnl_document(slurp(in));
}

}  // namespace parkcast
