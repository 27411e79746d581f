#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "parkcast/data.hpp"
#include "parkcast/fitting.hpp"

namespace parkcast {

// A fitted model plus the context needed to apply it later: which station
// and day class it belongs to and the training-set maximum used to rescale
// normalised curves back to vehicle counts.
struct TnDocument {
  std::string station;
  DayClass day_class = DayClass::Weekday;
  double station_max = 0.0;
  TnFit fit;
};

struct TnlDocument {
  std::string station;
  DayClass day_class = DayClass::Weekday;
  double station_max = 0.0;
  double capacity_proxy = 0.0;
  TnlFit fit;
};

std::string to_json(const TnDocument& doc);
std::string to_json(const TnlDocument& doc);

void write_document(std::ostream& out, const TnDocument& doc);
void write_document(std::ostream& out, const TnlDocument& doc);

// Peeks at the "model" tag without fully parsing the rest.
std::string document_model_tag(const std::string& text);

TnDocument read_tn_document(std::istream& in);
TnlDocument read_tnl_document(std::istream& in);
TnDocument parse_tn_document(const std::string& text);
TnlDocument parse_tnl_document(const std::string& text);

}  // namespace parkcast
