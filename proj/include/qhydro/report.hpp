#pragma once

#include <map>
#include <string>
#include <vector>

namespace qhydro {

/// Named scalars, per-snapshot series and pass/fail verdicts for one run or
/// one snapshot. Keys are snake_case and flat.
struct DiagnosticsReport {
  std::map<std::string, double> scalars;
  std::map<std::string, std::vector<double>> series;
  std::map<std::string, bool> verdicts;
  std::map<std::string, std::string> notes;

  double scalar(const std::string& key) const { return scalars.at(key); }
  const std::vector<double>& get_series(const std::string& key) const { return series.at(key); }
  bool verdict(const std::string& key) const { return verdicts.at(key); }

  /// Copies every entry of `other` under `prefix` + key.
  void merge(const DiagnosticsReport& other, const std::string& prefix = "") {
    for (const auto& [k, v] : other.scalars) scalars[prefix + k] = v;
    for (const auto& [k, v] : other.series) series[prefix + k] = v;
    for (const auto& [k, v] : other.verdicts) verdicts[prefix + k] = v;
    for (const auto& [k, v] : other.notes) notes[prefix + k] = v;
  }
};

}  // namespace qhydro
