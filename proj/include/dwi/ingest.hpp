#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dwi {

// Canonical indicator names, in panel order. GDP is last so the first K-1 rows
// are the ones averaged into the wellbeing index.
inline const std::vector<std::string>& canonical_indicators() {
  static const std::vector<std::string> names = {
      "gini", "unemployment", "life_expectancy", "gni_per_capita", "cpi", "population", "fdi", "gdp"};
  return names;
}

// Indicator x country x year cube with a missingness mask.
class IndicatorPanel {
 public:
  IndicatorPanel() = default;
  IndicatorPanel(std::vector<std::string> indicators, std::vector<std::string> countries, std::vector<int> years);

  std::size_t num_indicators() const { return indicators_.size(); }
  std::size_t num_countries() const { return countries_.size(); }
  std::size_t num_years() const { return years_.size(); }

  const std::vector<std::string>& indicators() const { return indicators_; }
  const std::vector<std::string>& countries() const { return countries_; }
  const std::vector<int>& years() const { return years_; }

  double value(std::size_t k, std::size_t l, std::size_t t) const { return values_[offset(k, l, t)]; }
  bool missing(std::size_t k, std::size_t l, std::size_t t) const { return mask_[offset(k, l, t)] != 0; }
  void set(std::size_t k, std::size_t l, std::size_t t, double v);
  void set_missing(std::size_t k, std::size_t l, std::size_t t);
  // Overwrites a value while keeping the cell's missing flag (used by imputation).
  void fill(std::size_t k, std::size_t l, std::size_t t, double v) { values_[offset(k, l, t)] = v; }
  // After imputation every cell carries a usable value; the mask then records
  // which cells were filled rather than observed.
  bool imputed() const { return imputed_; }
  void set_imputed(bool v) { imputed_ = v; }
  bool has_value(std::size_t k, std::size_t l, std::size_t t) const { return imputed_ || !missing(k, l, t); }

  std::size_t indicator_index(std::string_view name) const;
  std::size_t country_index(std::string_view code) const;
  std::size_t missing_count() const;

  // True once gini/unemployment hold 100-gini and 100-unemployment.
  bool positive_transformed() const { return transformed_; }
  void set_positive_transformed(bool v) { transformed_ = v; }
  // Report label, e.g. "neg_gini" after the positivity transform.
  std::string display_name(std::size_t k) const;

 private:
  std::size_t offset(std::size_t k, std::size_t l, std::size_t t) const {
    return (k * countries_.size() + l) * years_.size() + t;
  }

  std::vector<std::string> indicators_;
  std::vector<std::string> countries_;
  std::vector<int> years_;
  std::vector<double> values_;
  std::vector<std::uint8_t> mask_;
  bool transformed_ = false;
  bool imputed_ = false;
};

struct CountryFile {
  std::string code;
  std::filesystem::path file;
};

struct PanelSchema {
  std::vector<CountryFile> countries;
  // Canonical name -> World Bank indicator code, in canonical order.
  std::vector<std::pair<std::string, std::string>> indicator_codes;
  int first_year = 1990;
  int last_year = 2020;
  // Indicators whose non-positive raw values are treated as missing.
  std::vector<std::string> nonpositive_missing;
  // Optional named country subset (the "high_gdp" universe).
  std::vector<std::string> high_gdp;
};

// Reads the INI manifest: [panel], [countries], [indicators]. Relative file
// names are resolved against the manifest's directory.
PanelSchema load_manifest(const std::filesystem::path& manifest);

// Loads one World Bank wide-layout CSV per country. Rows are matched on the
// "Indicator Code" column; leading metadata lines before the header are skipped.
IndicatorPanel load_panel(const std::filesystem::path& data_dir, const PanelSchema& schema);
IndicatorPanel load_panel(const std::filesystem::path& manifest);

// gini -> 100 - gini, unemployment -> 100 - unemployment. Applying it twice
// restores the original values.
IndicatorPanel transform_positive(const IndicatorPanel& panel);

struct ImputeOptions {
  int rank = 2;
  double tol = 1e-10;
  int max_iter = 5000;
};

struct ImputeResult {
  IndicatorPanel panel;
  int iterations = 0;
  bool converged = true;
  double last_change = 0.0;
  std::vector<std::string> warnings;
};

// Iterative rank-r SVD fill (EM-PCA) on the indicator x (country, year) unfolding.
// Rows are scaled by the RMS of their observed cells before the SVD so that
// indicators in dollars and in percent carry comparable weight.
ImputeResult impute_missing(const IndicatorPanel& panel, const ImputeOptions& options = {});

}  // namespace dwi
