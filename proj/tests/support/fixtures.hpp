#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "dwi/ingest.hpp"

namespace fixture {

inline const std::vector<std::string>& indicator_codes() {
  static const std::vector<std::string> codes = {"SI.POV.GINI",       "SL.UEM.TOTL.ZS", "SP.DYN.LE00.IN",
                                                 "NY.GNP.PCAP.CD",    "FP.CPI.TOTL",    "SP.POP.TOTL",
                                                 "BX.KLT.DINV.CD.WD", "NY.GDP.MKTP.CD"};
  return codes;
}

// Fresh directory under the system temp path.
inline std::filesystem::path temp_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("dwi_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Writes World Bank wide-layout files plus manifest.ini. `cell(k, l, year)`
// returns the text placed in the cell (empty for a blank).
inline std::filesystem::path write_dataset(const std::filesystem::path& dir, const std::vector<std::string>& countries,
                                           int first, int last,
                                           const std::function<std::string(int, int, int)>& cell,
                                           const std::string& year_override = {}) {
  std::ofstream man(dir / "manifest.ini");
  man << "[panel]\nfirst_year = " << first << "\nlast_year = " << last << "\nhigh_gdp = " << countries.front()
      << "\n\n[countries]\n";
  for (const auto& c : countries) man << c << " = " << c << ".csv\n";
  man << "\n[indicators]\n";
  const auto& names = dwi::canonical_indicators();
  for (std::size_t k = 0; k < names.size(); ++k) man << names[k] << " = " << indicator_codes()[k] << "\n";
  for (std::size_t l = 0; l < countries.size(); ++l) {
    std::ofstream f(dir / (countries[l] + ".csv"));
    f << "\"Data Source\",\"World Development Indicators\",\n\n";
    f << "\"Country Name\",\"Country Code\",\"Indicator Name\",\"Indicator Code\"";
    for (int y = first; y <= last; ++y) f << ",\"" << (y == first && !year_override.empty() ? year_override : std::to_string(y)) << "\"";
    f << ",\n";
    for (std::size_t k = 0; k < names.size(); ++k) {
      f << "\"Country " << countries[l] << "\",\"" << countries[l] << "\",\"" << names[k] << "\",\""
        << indicator_codes()[k] << "\"";
      for (int y = first; y <= last; ++y) {
        const std::string v = cell(static_cast<int>(k), static_cast<int>(l), y);
        f << "," << (v.empty() ? "" : "\"" + v + "\"");
      }
      f << ",\n";
    }
  }
  return dir / "manifest.ini";
}

// Plausible positive values for every indicator.
inline std::string plausible(int k, int l, int y) {
  const double t = y - 1990;
  const double base[] = {35.0, 6.0, 70.0, 20000.0, 80.0, 5e7, 1e9, 1e12};
  const double v = base[k] * (1.0 + 0.05 * l) * (1.0 + 0.01 * t + 0.003 * ((k + l + y) % 5));
  return std::to_string(v);
}

}  // namespace fixture
