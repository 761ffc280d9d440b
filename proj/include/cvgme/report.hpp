#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cvgme/witnesses.hpp"

namespace cvgme {

// Scientific notation for nonzero |x| < 1e-4, plain decimal otherwise.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  if (x != 0.0 && std::abs(x) < 1e-4)
    std::snprintf(buf, sizeof buf, "%.10e", x);
  else
    std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline nlohmann::json to_json(const WitnessReport& r) {
  nlohmann::json params = r.params;
  params["direction"] = r.direction == Direction::Above ? "above" : "below";
  params["rigorous"] = r.rigorous;
  if (r.heuristic_error) params["heuristic_error"] = *r.heuristic_error;
  if (!r.kernel.empty()) params["kernel"] = r.kernel;
  nlohmann::json xi = nlohmann::json::array();
  for (cplx p : r.xi_points) xi.push_back({p.real(), p.imag()});
  return {{"witness", r.witness},
          {"family", r.family},
          {"params", params},
          {"value", r.value},
          {"threshold", r.threshold},
          {"rigorous_error", optional_json(r.rigorous_error)},
          {"stderr", optional_json(r.stderr_value)},
          {"certified", r.certified},
          {"n_settings", r.n_settings},
          {"seed", r.seed ? nlohmann::json(*r.seed) : nlohmann::json(nullptr)},
          {"xi_points", xi}};
}

inline WitnessReport report_from_json(const nlohmann::json& j) {
  WitnessReport r;
  r.witness = j.at("witness").get<std::string>();
  r.family = j.at("family").get<std::string>();
  r.params = j.at("params");
  r.value = j.at("value").get<double>();
  r.threshold = j.at("threshold").get<double>();
  if (!j.at("rigorous_error").is_null()) r.rigorous_error = j.at("rigorous_error").get<double>();
  if (!j.at("stderr").is_null()) r.stderr_value = j.at("stderr").get<double>();
  r.certified = j.at("certified").get<bool>();
  r.n_settings = j.at("n_settings").get<int>();
  if (!j.at("seed").is_null()) r.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& p : j.at("xi_points")) r.xi_points.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  if (r.params.contains("direction"))
    r.direction = r.params["direction"] == "below" ? Direction::Below : Direction::Above;
  if (r.params.contains("rigorous")) r.rigorous = r.params["rigorous"].get<bool>();
  if (r.params.contains("heuristic_error")) r.heuristic_error = r.params["heuristic_error"].get<double>();
  if (r.params.contains("kernel")) r.kernel = r.params["kernel"].get<std::string>();
  for (const char* k : {"direction", "rigorous", "heuristic_error", "kernel"}) r.params.erase(k);
  return r;
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add(const std::vector<std::string>& row) {
    if (row.size() != header_.size()) throw DomainError("CSV row width differs from header");
    rows_.push_back(row);
  }

  // x-value, witness value, threshold, violation, certified, plus any extra columns.
  void add_report(double x, const WitnessReport& r, const std::vector<std::string>& extra = {}) {
    std::vector<std::string> row{format_number(x), format_number(r.value), format_number(r.threshold),
                                 format_number(r.margin()), r.certified ? "true" : "false"};
    row.insert(row.end(), extra.begin(), extra.end());
    add(row);
  }

  static std::vector<std::string> report_header(const std::string& x_name,
                                                const std::vector<std::string>& extra = {}) {
    std::vector<std::string> h{x_name, "value", "threshold", "violation", "certified"};
    h.insert(h.end(), extra.begin(), extra.end());
    return h;
  }

  std::size_t size() const { return rows_.size(); }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  void write(std::ostream& os) const {
    auto line = [&](const std::vector<std::string>& v) {
      for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
      os << '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace cvgme
