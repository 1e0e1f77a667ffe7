#include "dwi/ingest.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dwi/csv.hpp"
#include "dwi/error.hpp"

namespace dwi {

IndicatorPanel::IndicatorPanel(std::vector<std::string> indicators, std::vector<std::string> countries,
                               std::vector<int> years)
    : indicators_(std::move(indicators)), countries_(std::move(countries)), years_(std::move(years)) {
  for (std::size_t t = 1; t < years_.size(); ++t)
    if (years_[t] != years_[t - 1] + 1) throw ValidationError("panel years must be contiguous and increasing");
  const std::size_t n = indicators_.size() * countries_.size() * years_.size();
  values_.assign(n, 0.0);
  mask_.assign(n, 1);
}

void IndicatorPanel::set(std::size_t k, std::size_t l, std::size_t t, double v) {
  values_[offset(k, l, t)] = v;
  mask_[offset(k, l, t)] = 0;
}

void IndicatorPanel::set_missing(std::size_t k, std::size_t l, std::size_t t) {
  values_[offset(k, l, t)] = 0.0;
  mask_[offset(k, l, t)] = 1;
}

std::size_t IndicatorPanel::indicator_index(std::string_view name) const {
  auto it = std::find(indicators_.begin(), indicators_.end(), name);
  if (it == indicators_.end()) throw SchemaError("panel has no indicator '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - indicators_.begin());
}

std::size_t IndicatorPanel::country_index(std::string_view code) const {
  auto it = std::find(countries_.begin(), countries_.end(), code);
  if (it == countries_.end()) throw SchemaError("panel has no country '" + std::string(code) + "'");
  return static_cast<std::size_t>(it - countries_.begin());
}

std::size_t IndicatorPanel::missing_count() const {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
}

std::string IndicatorPanel::display_name(std::size_t k) const {
  if (transformed_) {
    if (indicators_[k] == "gini") return "neg_gini";
    if (indicators_[k] == "unemployment") return "employment";
  }
  return indicators_[k];
}

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string trim(std::string s) {
  s.erase(0, s.find_first_not_of(" \t\r\xEF\xBB\xBF"));
  s.erase(s.find_last_not_of(" \t\r") + 1);
  return s;
}

int parse_year_header(const std::string& field, const std::string& file, std::size_t row, std::size_t col) {
  const std::string f = trim(field);
  bool ok = f.size() == 4 && std::all_of(f.begin(), f.end(), [](char c) { return c >= '0' && c <= '9'; });
  // World Bank bulk files sometimes label columns "1990 [YR1990]".
  if (!ok && f.size() > 4 && f.find(" [YR") == 4) return parse_year_header(f.substr(0, 4), file, row, col);
  if (!ok) throw ParseError(file, row, col, "invalid year header '" + f + "'");
  return std::stoi(f);
}

}  // namespace

PanelSchema load_manifest(const std::filesystem::path& manifest) {
  namespace pt = boost::property_tree;
  if (!std::filesystem::exists(manifest)) throw ValidationError("manifest not found: " + manifest.string());
  pt::ptree tree;
  try {
    pt::read_ini(manifest.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(manifest.string(), e.line(), 0, e.message());
  }
  PanelSchema schema;
  const auto base = manifest.parent_path();

  if (auto panel = tree.get_child_optional("panel")) {
    schema.first_year = panel->get("first_year", schema.first_year);
    schema.last_year = panel->get("last_year", schema.last_year);
    schema.nonpositive_missing = split_list(panel->get("nonpositive_missing", std::string{}));
    schema.high_gdp = split_list(panel->get("high_gdp", std::string{}));
  }
  if (schema.last_year < schema.first_year) throw SchemaError("manifest: last_year precedes first_year");

  auto countries = tree.get_child_optional("countries");
  if (!countries || countries->empty()) throw SchemaError("manifest: [countries] section is empty");
  for (const auto& [code, node] : *countries) {
    std::filesystem::path file = node.get_value<std::string>();
    if (file.is_relative()) file = base / file;
    schema.countries.push_back({code, file});
  }

  auto indicators = tree.get_child_optional("indicators");
  if (!indicators) throw SchemaError("manifest: missing [indicators] section");
  const auto& canon = canonical_indicators();
  std::vector<std::string> codes(canon.size());
  for (const auto& [name, node] : *indicators) {
    auto it = std::find(canon.begin(), canon.end(), name);
    if (it == canon.end()) throw SchemaError("manifest: unknown indicator name '" + name + "'");
    codes[static_cast<std::size_t>(it - canon.begin())] = node.get_value<std::string>();
  }
  for (std::size_t k = 0; k < canon.size(); ++k) {
    if (codes[k].empty()) throw SchemaError("manifest: no code given for indicator '" + canon[k] + "'");
    schema.indicator_codes.emplace_back(canon[k], codes[k]);
  }
  for (const auto& name : schema.nonpositive_missing)
    if (std::find(canon.begin(), canon.end(), name) == canon.end())
      throw SchemaError("manifest: unknown indicator name '" + name + "' in nonpositive_missing");
  for (const auto& code : schema.high_gdp)
    if (std::none_of(schema.countries.begin(), schema.countries.end(),
                     [&](const CountryFile& c) { return c.code == code; }))
      throw SchemaError("manifest: high_gdp lists unknown country '" + code + "'");
  return schema;
}

IndicatorPanel load_panel(const std::filesystem::path& data_dir, const PanelSchema& schema) {
  std::vector<std::string> names, countries;
  for (const auto& [name, code] : schema.indicator_codes) names.push_back(name);
  for (const auto& c : schema.countries) countries.push_back(c.code);
  std::vector<int> years;
  for (int y = schema.first_year; y <= schema.last_year; ++y) years.push_back(y);
  IndicatorPanel panel(names, countries, years);

  std::vector<bool> drop_nonpositive(names.size(), false);
  for (const auto& n : schema.nonpositive_missing) drop_nonpositive[panel.indicator_index(n)] = true;

  for (std::size_t l = 0; l < schema.countries.size(); ++l) {
    std::filesystem::path path = schema.countries[l].file;
    if (path.is_relative()) path = data_dir / path;
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    const std::string fname = path.filename().string();

    std::string line;
    std::size_t row = 0;
    std::vector<int> col_year;  // year per column, or -1
    bool header_seen = false;
    while (std::getline(in, line)) {
      ++row;
      if (trim(line).empty()) continue;
      auto fields = csv::split_record(line);
      if (!header_seen) {
        if (fields.size() < 4 || trim(fields[3]) != "Indicator Code") continue;
        header_seen = true;
        col_year.assign(fields.size(), -1);
        for (std::size_t c = 4; c < fields.size(); ++c) {
          if (trim(fields[c]).empty() && c + 1 == fields.size()) continue;  // trailing comma
          col_year[c] = parse_year_header(fields[c], fname, row, c + 1);
        }
        continue;
      }
      if (fields.size() != col_year.size())
        throw ParseError(fname, row, fields.size(),
                         "expected " + std::to_string(col_year.size()) + " fields, found " +
                             std::to_string(fields.size()));
      const std::string country_code = trim(fields[1]);
      if (country_code != schema.countries[l].code)
        throw SchemaError(fname + ":" + std::to_string(row) + ": country code '" + country_code +
                          "' does not match manifest entry '" + schema.countries[l].code + "'");
      const std::string indicator_code = trim(fields[3]);
      std::size_t k = names.size();
      for (std::size_t i = 0; i < schema.indicator_codes.size(); ++i)
        if (schema.indicator_codes[i].second == indicator_code) k = i;
      if (k == names.size()) continue;
      for (std::size_t c = 4; c < fields.size(); ++c) {
        const int y = col_year[c];
        if (y < schema.first_year || y > schema.last_year) continue;
        const auto t = static_cast<std::size_t>(y - schema.first_year);
        auto v = csv::parse_number(fields[c]);
        if (v && !(drop_nonpositive[k] && *v <= 0.0))
          panel.set(k, l, t, *v);
        else
          panel.set_missing(k, l, t);
      }
    }
    if (!header_seen) throw ParseError(fname, row, 4, "no header row with an 'Indicator Code' column");
  }
  return panel;
}

IndicatorPanel load_panel(const std::filesystem::path& manifest) {
  return load_panel(manifest.parent_path(), load_manifest(manifest));
}

IndicatorPanel transform_positive(const IndicatorPanel& panel) {
  IndicatorPanel out = panel;
  const std::size_t L = panel.num_countries(), T = panel.num_years();
  for (const char* name : {"gini", "unemployment"}) {
    const std::size_t k = panel.indicator_index(name);
    for (std::size_t l = 0; l < L; ++l)
      for (std::size_t t = 0; t < T; ++t) {
        if (!panel.has_value(k, l, t)) continue;
        const double v = panel.value(k, l, t);
        if (v < 0.0 || v > 100.0)
          throw DomainError(std::string(name) + " for " + panel.countries()[l] + " in " +
                            std::to_string(panel.years()[t]) + " is outside [0, 100]");
        out.fill(k, l, t, 100.0 - v);
      }
  }
  // Undoing the transform returns raw values, which need not be positive.
  if (panel.positive_transformed()) {
    out.set_positive_transformed(false);
    return out;
  }
  for (std::size_t k = 0; k < out.num_indicators(); ++k)
    for (std::size_t l = 0; l < L; ++l)
      for (std::size_t t = 0; t < T; ++t)
        if (out.has_value(k, l, t) && !(out.value(k, l, t) > 0.0))
          throw DomainError(out.display_name(k) + " for " + out.countries()[l] + " in " +
                            std::to_string(out.years()[t]) + " is not strictly positive");
  out.set_positive_transformed(true);
  return out;
}

ImputeResult impute_missing(const IndicatorPanel& panel, const ImputeOptions& options) {
  const std::size_t K = panel.num_indicators(), L = panel.num_countries(), T = panel.num_years();
  ImputeResult result{panel, 0, true, 0.0, {}};
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t l = 0; l < L; ++l) {
      std::size_t observed = 0;
      for (std::size_t t = 0; t < T; ++t) observed += panel.missing(k, l, t) ? 0 : 1;
      if (observed < 2)
        throw ValidationError("cannot impute " + panel.indicators()[k] + " for " + panel.countries()[l] + ": only " +
                              std::to_string(observed) + " observed value(s)");
    }
  result.panel.set_imputed(true);
  if (panel.missing_count() == 0) return result;
  if (options.rank < 1 || static_cast<std::size_t>(options.rank) >= K)
    throw ValidationError("imputation rank must be in [1, " + std::to_string(K - 1) + "]");
  if (!(options.tol > 0.0) || options.max_iter < 1) throw ValidationError("imputation tol and max_iter must be positive");

  const Eigen::Index cols = static_cast<Eigen::Index>(L * T);
  Eigen::MatrixXd X(static_cast<Eigen::Index>(K), cols);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> holes;
  Eigen::VectorXd scale(static_cast<Eigen::Index>(K));
  for (std::size_t k = 0; k < K; ++k) {
    double ss = 0.0;
    std::size_t n = 0;
    for (std::size_t l = 0; l < L; ++l)
      for (std::size_t t = 0; t < T; ++t)
        if (!panel.missing(k, l, t)) {
          ss += panel.value(k, l, t) * panel.value(k, l, t);
          ++n;
        }
    scale(static_cast<Eigen::Index>(k)) = ss > 0.0 ? std::sqrt(ss / static_cast<double>(n)) : 1.0;
    for (std::size_t l = 0; l < L; ++l) {
      double mean = 0.0;
      std::size_t m = 0;
      for (std::size_t t = 0; t < T; ++t)
        if (!panel.missing(k, l, t)) {
          mean += panel.value(k, l, t);
          ++m;
        }
      mean /= static_cast<double>(m);
      for (std::size_t t = 0; t < T; ++t) {
        const auto r = static_cast<Eigen::Index>(k), c = static_cast<Eigen::Index>(l * T + t);
        if (panel.missing(k, l, t)) {
          holes.emplace_back(r, c);
          X(r, c) = mean / scale(r);
        } else {
          X(r, c) = panel.value(k, l, t) / scale(r);
        }
      }
    }
  }

  Eigen::VectorXd fills(static_cast<Eigen::Index>(holes.size()));
  for (std::size_t i = 0; i < holes.size(); ++i) fills(static_cast<Eigen::Index>(i)) = X(holes[i].first, holes[i].second);

  const Eigen::Index r = options.rank;
  result.converged = false;
  for (int it = 1; it <= options.max_iter; ++it) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::MatrixXd low = svd.matrixU().leftCols(r) * svd.singularValues().head(r).asDiagonal() *
                                svd.matrixV().leftCols(r).transpose();
    Eigen::VectorXd next(fills.size());
    for (std::size_t i = 0; i < holes.size(); ++i) {
      next(static_cast<Eigen::Index>(i)) = low(holes[i].first, holes[i].second);
      X(holes[i].first, holes[i].second) = next(static_cast<Eigen::Index>(i));
    }
    const double denom = std::max(fills.norm(), 1e-300);
    result.last_change = (next - fills).norm() / denom;
    fills = next;
    result.iterations = it;
    if (result.last_change < options.tol) {
      result.converged = true;
      break;
    }
  }
  if (!result.converged)
    result.warnings.push_back("imputation stopped after " + std::to_string(result.iterations) +
                              " iterations with relative change " + std::to_string(result.last_change));

  for (const auto& [row, col] : holes) {
    const auto k = static_cast<std::size_t>(row), l = static_cast<std::size_t>(col) / T,
               t = static_cast<std::size_t>(col) % T;
    result.panel.fill(k, l, t, X(row, col) * scale(row));
  }
  return result;
}

}  // namespace dwi
