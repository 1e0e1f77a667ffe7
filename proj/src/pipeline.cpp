#include "dwi/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <json.hpp>
#include <numeric>
#include <set>
#include <sstream>

#include "dwi/csv.hpp"
#include "dwi/error.hpp"

namespace dwi {

using nlohmann::ordered_json;
using csv::format_number;

namespace {

std::string join(const std::vector<std::string>& v, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

std::string num(double v) { return format_number(v); }

ordered_json jnum(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

std::string line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) out += (i ? "," : "") + csv::quote_if_needed(fields[i]);
  return out + "\n";
}

std::vector<std::string> with_prefix(const std::string& stage, const std::vector<std::string>& msgs) {
  std::vector<std::string> out;
  for (const auto& m : msgs) out.push_back(stage + ": " + m);
  return out;
}

ordered_json nig_json(const NigParams& p) {
  return {{"alpha", p.alpha}, {"beta", p.beta}, {"delta", p.delta}, {"mu", p.mu}};
}

ordered_json model_json(const FittedVolModel& m) {
  return {{"family", family_name(m.family)},
          {"phi0", m.mean.phi0},
          {"theta1", m.mean.theta1},
          {"alpha0", m.vol.alpha0},
          {"alpha1", m.vol.alpha1},
          {"beta1", m.vol.beta1},
          {"leverage", m.vol.leverage},
          {"loglik", m.loglik},
          {"aic", m.aic},
          {"bic", m.bic},
          {"terminal_z", m.terminal.z},
          {"terminal_sigma2", m.terminal.sigma2},
          {"warnings", m.warnings}};
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw NumericalError("SHA-256 digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

void RunConfig::validate(bool stochastic) const {
  if (stochastic && !seed) throw ValidationError("a seed is required for stochastic stages (--seed)");
  for (double a : alphas)
    if (!(a > 0.0 && a < 0.5)) throw ValidationError("risk alpha levels must lie in (0, 0.5), got " + num(a));
  if (alphas.empty()) throw ValidationError("at least one risk alpha level is required");
  if (scenarios < 2) throw ValidationError("scenario count must be at least 2");
  if (!(eps_low > 0.0 && eps_low < 1.0)) throw ValidationError("eps_low must lie in (0, 1)");
  if (impute.rank < 1) throw ValidationError("imputation rank must be at least 1");
  if (!(impute.tol > 0.0)) throw ValidationError("imputation tolerance must be positive");
  if (gamma_points < 2) throw ValidationError("gamma grid needs at least 2 points");
  if (option_paths < 1000) throw ValidationError("option pricing needs at least 1000 paths");
  if (maturities.empty() || moneyness.empty()) throw ValidationError("option grid must not be empty");
  for (int t : maturities)
    if (t < 1) throw ValidationError("maturities must be at least 1");
  for (double m : moneyness)
    if (!(m > 0.0)) throw ValidationError("moneyness values must be positive");
  if (spot && !(*spot > 0.0)) throw ValidationError("spot must be positive");
  if (first_year && last_year && *first_year > *last_year) throw ValidationError("first year after last year");
  if (threads < 1) throw ValidationError("threads must be at least 1");
}

std::string RunConfig::canonical() const {
  std::ostringstream os;
  auto nums = [](const auto& v) {
    std::vector<std::string> s;
    for (auto x : v) s.push_back(num(static_cast<double>(x)));
    return join(s, ",");
  };
  std::vector<std::string> ms;
  for (auto m : measures) ms.push_back(measure_name(m));
  os << "data_dir=" << data_dir.generic_string() << "\n"
     << "countries=" << join(countries, ",") << "\n"
     << "first_year=" << (first_year ? std::to_string(*first_year) : "") << "\n"
     << "last_year=" << (last_year ? std::to_string(*last_year) : "") << "\n"
     << "impute_rank=" << impute.rank << "\nimpute_tol=" << num(impute.tol)
     << "\nimpute_max_iter=" << impute.max_iter << "\n"
     << "eps_low=" << num(eps_low) << "\n"
     << "scenarios=" << scenarios << "\n"
     << "seed=" << (seed ? std::to_string(*seed) : "") << "\n"
     << "alphas=" << nums(alphas) << "\n"
     << "alpha_risk_free=" << num(alpha_risk_free) << "\n"
     << "measures=" << join(ms, ",") << "\n"
     << "gamma_points=" << gamma_points << "\nallow_short=" << allow_short << "\n"
     << "option_asset=" << option_asset << "\nrisk_free=" << num(risk_free) << "\nlambda0=" << num(lambda0)
     << "\nspot=" << (spot ? num(*spot) : "") << "\noption_paths=" << option_paths << "\n"
     << "moneyness=" << nums(moneyness) << "\nmaturities=" << nums(maturities) << "\n";
  return os.str();
}

std::string RunConfig::hash() const { return sha256_hex(canonical()); }

ArtifactStore::ArtifactStore(std::filesystem::path dir, bool overwrite) : dir_(std::move(dir)), overwrite_(overwrite) {}

void ArtifactStore::write(const std::string& stage, const std::string& name, const std::string& content) {
  std::filesystem::create_directories(dir_);
  const auto path = dir_ / name;
  if (std::filesystem::exists(path) && !overwrite_)
    throw ValidationError("artifact " + path.string() + " already exists (use --overwrite to replace it)");
  const auto tmp = dir_ / (name + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + tmp.string());
    out << content;
    if (!out) throw ValidationError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
  if (name == "manifest.json") return;
  auto it = std::find_if(stages_.begin(), stages_.end(), [&](const auto& s) { return s.first == stage; });
  if (it == stages_.end()) {
    stages_.emplace_back(stage, std::map<std::string, std::string>{});
    it = std::prev(stages_.end());
  }
  it->second[name] = sha256_hex(content);
}

Pipeline::Pipeline(RunConfig cfg, bool stochastic) : cfg_(std::move(cfg)), store_(cfg_.output_dir, cfg_.overwrite) {
  cfg_.validate(stochastic);
}

const IndexStage& Pipeline::index() {
  if (index_) return *index_;
  IndexStage st;
  st.schema = load_manifest(cfg_.data_dir / "manifest.ini");
  if (!cfg_.countries.empty()) {
    std::vector<CountryFile> keep;
    for (const auto& code : cfg_.countries) {
      auto it = std::find_if(st.schema.countries.begin(), st.schema.countries.end(),
                             [&](const CountryFile& c) { return c.code == code; });
      if (it == st.schema.countries.end()) throw SchemaError("country " + code + " is not in the manifest");
      keep.push_back(*it);
    }
    st.schema.countries = keep;
    std::vector<std::string> hg;
    for (const auto& c : st.schema.high_gdp)
      if (std::find(cfg_.countries.begin(), cfg_.countries.end(), c) != cfg_.countries.end()) hg.push_back(c);
    st.schema.high_gdp = hg;
  }
  if (cfg_.first_year) st.schema.first_year = *cfg_.first_year;
  if (cfg_.last_year) st.schema.last_year = *cfg_.last_year;
  const auto raw = load_panel(std::filesystem::path{}, st.schema);  // file paths are already resolved
  st.imputation = impute_missing(transform_positive(raw), cfg_.impute);
  for (const auto& w : with_prefix("impute", st.imputation.warnings)) warnings_.push_back(w);
  st.series = build_index(st.imputation.panel, cfg_.eps_low);
  index_ = std::move(st);
  return *index_;
}

Eigen::MatrixXd Pipeline::historical_returns() { return index().series.log_returns.transpose(); }

std::vector<std::string> Pipeline::country_labels() {
  const auto& l = index().series.labels;
  return {l.begin(), l.end() - 1};
}

std::vector<std::string> Pipeline::high_gdp_labels() { return index().schema.high_gdp; }

const FitStage& Pipeline::fit() {
  if (fit_) return *fit_;
  const auto& s = index().series;
  FitStage st;
  st.labels = s.labels;
  for (Eigen::Index l = 0; l < s.log_returns.rows(); ++l) {
    const Eigen::VectorXd r = s.log_returns.row(l).transpose();
    try {
      st.selections.push_back(select_model({r.data(), static_cast<std::size_t>(r.size())}));
    } catch (const NumericalError& e) {
      throw ConvergenceError("series " + s.labels[static_cast<std::size_t>(l)] + ": " + e.what(), {}, 0.0);
    }
    for (const auto& w : st.selections.back().selected.warnings)
      warnings_.push_back("fit " + s.labels[static_cast<std::size_t>(l)] + ": " + w);
  }
  fit_ = std::move(st);
  return *fit_;
}

const MvNigFit& Pipeline::innovations() {
  if (innovations_) return *innovations_;
  const auto& f = fit();
  const auto n = static_cast<Eigen::Index>(f.selections.front().selected.residuals.size());
  Eigen::MatrixXd z(n, static_cast<Eigen::Index>(f.selections.size()));
  for (std::size_t j = 0; j < f.selections.size(); ++j) {
    const auto& res = f.selections[j].selected.residuals;
    for (Eigen::Index t = 0; t < n; ++t) z(t, static_cast<Eigen::Index>(j)) = res[static_cast<std::size_t>(t)];
  }
  innovations_ = mvnig_fit(z);
  for (const auto& w : with_prefix("mvnig", innovations_->warnings)) warnings_.push_back(w);
  return *innovations_;
}

const ScenarioMatrix& Pipeline::scenarios() {
  if (scenarios_) return *scenarios_;
  const auto& f = fit();
  std::vector<FittedVolModel> models;
  for (const auto& s : f.selections) models.push_back(s.selected);
  scenarios_ = forecast_year(models, f.labels, innovations().params, cfg_.scenarios,
                             derive_seed(*cfg_.seed, static_cast<std::uint64_t>(SeedStream::Scenarios)), cfg_.threads);
  return *scenarios_;
}

const RiskReport& Pipeline::historical_risk() {
  if (!hist_risk_) {
    const auto r = historical_returns();
    hist_risk_ = risk_report(r, index().series.labels, r.cols() - 1, "historical", cfg_.alphas);
  }
  return *hist_risk_;
}

const RiskReport& Pipeline::dynamic_risk() {
  if (!dyn_risk_) {
    const auto& s = scenarios();
    dyn_risk_ = risk_report(s.returns, s.labels, s.returns.cols() - 1, "dynamic", cfg_.alphas);
  }
  return *dyn_risk_;
}

const NigGarchFit& Pipeline::option_model() {
  if (option_model_) return *option_model_;
  const auto& s = index().series;
  const auto it = std::find(s.labels.begin(), s.labels.end(), cfg_.option_asset);
  if (it == s.labels.end()) throw ValidationError("option asset '" + cfg_.option_asset + "' is not a built series");
  const auto row = it - s.labels.begin();
  const Eigen::VectorXd r = s.log_returns.row(row).transpose();
  const double spot = cfg_.spot ? *cfg_.spot : s.asset_values(row, s.asset_values.cols() - 1);
  option_model_ = fit_nig_garch({r.data(), static_cast<std::size_t>(r.size())}, cfg_.risk_free, spot, cfg_.lambda0);
  // Bound a_t where the risk-neutral measure stops existing, so a single
  // explosive path does not end the run.
  option_model_->params.variance_cap = 0.999 * esscher_variance_limit(option_model_->params.nig, cfg_.lambda0);
  for (const auto& w : with_prefix("option model", option_model_->warnings)) warnings_.push_back(w);
  return *option_model_;
}

RiskNeutralPaths Pipeline::option_paths(int horizon) {
  return simulate_risk_neutral(option_model().params, horizon, cfg_.option_paths,
                               derive_seed(*cfg_.seed, static_cast<std::uint64_t>(SeedStream::Options)),
                               cfg_.threads);
}

const OptionStage& Pipeline::options() {
  if (options_) return *options_;
  OptionStage st;
  st.fit = option_model();
  st.paths = option_paths(*std::max_element(cfg_.maturities.begin(), cfg_.maturities.end()));
  st.surface = call_surface(st.paths, cfg_.moneyness, cfg_.maturities);
  if (st.paths.capped_steps)
    warnings_.push_back("options: conditional variance capped on " + std::to_string(st.paths.capped_steps) +
                        " path steps");
  options_ = std::move(st);
  return *options_;
}

FrontierTrace Pipeline::frontier(const std::string& sample, const std::string& universe, RiskMeasure m) {
  Eigen::MatrixXd r;
  if (sample == "historical") {
    r = historical_returns();
  } else if (sample == "dynamic") {
    r = scenarios().returns;
  } else {
    throw ValidationError("unknown sample '" + sample + "' (expected historical or dynamic)");
  }
  const auto countries = country_labels();
  std::vector<std::string> names;
  if (universe == "all") {
    names = countries;
  } else if (universe == "high-gdp") {
    names = high_gdp_labels();
    if (names.empty()) throw ValidationError("the manifest defines no high_gdp universe");
  } else {
    throw ValidationError("unknown universe '" + universe + "' (expected all or high-gdp)");
  }
  Eigen::MatrixXd sub(r.rows(), static_cast<Eigen::Index>(names.size()));
  for (std::size_t j = 0; j < names.size(); ++j) {
    const auto it = std::find(countries.begin(), countries.end(), names[j]);
    if (it == countries.end()) throw SchemaError("universe member " + names[j] + " is not a loaded country");
    sub.col(static_cast<Eigen::Index>(j)) = r.col(it - countries.begin());
  }
  std::vector<double> grid(cfg_.gamma_points);
  for (std::size_t i = 0; i < grid.size(); ++i)
    grid[i] = static_cast<double>(i) / static_cast<double>(cfg_.gamma_points);
  return trace_frontier(sub, names, m, grid, {cfg_.allow_short});
}

void Pipeline::emit_index() {
  const auto& st = index();
  const auto& s = st.series;
  std::string dwi = "country,year,value\n", asset = "series,year,value\n";
  for (std::size_t l = 0; l < s.labels.size(); ++l)
    for (std::size_t t = 0; t < s.years.size(); ++t) {
      const auto li = static_cast<Eigen::Index>(l), ti = static_cast<Eigen::Index>(t);
      const double d = l + 1 < s.labels.size() ? s.per_country_dwi(li, ti) : s.global_dwi(ti);
      dwi += line({s.labels[l], std::to_string(s.years[t]), num(d)});
      asset += line({s.labels[l], std::to_string(s.years[t]), num(s.asset_values(li, ti))});
    }
  ordered_json j;
  j["a"] = s.transform.a;
  j["b"] = s.transform.b;
  j["eps_low"] = s.transform.eps_low;
  j["dwi_min"] = s.transform.lo;
  j["dwi_max"] = s.transform.hi;
  j["imputation"] = {{"rank", cfg_.impute.rank},
                     {"iterations", st.imputation.iterations},
                     {"converged", st.imputation.converged},
                     {"last_change", st.imputation.last_change},
                     {"filled_cells", st.imputation.panel.missing_count()},
                     {"warnings", st.imputation.warnings}};
  store_.write("index", "dwi.csv", dwi);
  store_.write("index", "asset.csv", asset);
  store_.write("index", "index.json", j.dump(2) + "\n");
}

void Pipeline::emit_models() {
  const auto& f = fit();
  std::string out = "series,family,selected,loglik,aic,bic,n_params,phi0,theta1,alpha0,alpha1,beta1,leverage,notes\n";
  for (std::size_t l = 0; l < f.labels.size(); ++l) {
    const auto& sel = f.selections[l];
    for (const auto& m : sel.candidates) {
      const bool chosen = m.family == sel.selected.family;
      out += line({f.labels[l], family_name(m.family), chosen ? "1" : "0", num(m.loglik), num(m.aic), num(m.bic),
                   std::to_string(m.n_params), num(m.mean.phi0), num(m.mean.theta1), num(m.vol.alpha0),
                   num(m.vol.alpha1), num(m.vol.beta1), num(m.vol.leverage), join(m.warnings, "; ")});
    }
    for (const auto& fail : sel.failures)
      out += line({f.labels[l], fail.substr(0, fail.find(':')), "0", "NA", "NA", "NA", "NA", "NA", "NA", "NA", "NA",
                   "NA", "NA", fail});
  }
  store_.write("fit", "models.csv", out);
}

void Pipeline::emit_scenarios() {
  const auto& s = scenarios();
  std::string out = "scenario_id,series,value\n";
  out.reserve(static_cast<std::size_t>(s.returns.size()) * 32);
  for (Eigen::Index i = 0; i < s.returns.rows(); ++i)
    for (Eigen::Index j = 0; j < s.returns.cols(); ++j)
      out += std::to_string(i) + "," + s.labels[static_cast<std::size_t>(j)] + "," + num(s.returns(i, j)) + "\n";
  store_.write("scenarios", "scenarios.csv", out);
}

void Pipeline::emit_risk() {
  std::vector<std::string> header = {"sample", "series", "pearson"};
  const auto& alphas = cfg_.alphas;
  for (const char* m : {"var", "cvar", "covar", "coes", "coetl"})
    for (double a : alphas) header.push_back(std::string(m) + confidence_label(a));
  for (double a : alphas) header.push_back("tail" + confidence_label(a));
  header.push_back("notes");
  std::string out = line(header);
  for (const RiskReport* rep : {&historical_risk(), &dynamic_risk()}) {
    for (const auto& row : rep->rows) {
      std::vector<std::string> f = {rep->kind, row.series, num(row.pearson_r)};
      std::vector<std::string> notes;
      for (double v : row.var) f.push_back(num(v));
      for (double v : row.cvar) f.push_back(num(v));
      for (const auto& e : row.covar) f.push_back(num(e.value));
      for (const auto& e : row.coes) f.push_back(num(e.value));
      for (std::size_t a = 0; a < alphas.size(); ++a) {
        const auto& e = row.coetl[a];
        f.push_back(e ? num(e->value) : "NA");
        if (!e) notes.push_back("coetl" + confidence_label(alphas[a]) + ": empty joint tail");
      }
      for (std::size_t a = 0; a < alphas.size(); ++a) {
        f.push_back(std::to_string(row.covar[a].tail_size));
        for (const auto* e : {&row.covar[a], &row.coes[a]})
          if (!e->note.empty()) notes.push_back(e->note);
        if (row.coetl[a] && !row.coetl[a]->note.empty()) notes.push_back(row.coetl[a]->note);
      }
      std::vector<std::string> uniq;
      for (const auto& n : notes)
        if (std::find(uniq.begin(), uniq.end(), n) == uniq.end()) uniq.push_back(n);
      f.push_back(join(uniq, "; "));
      out += line(f);
    }
  }
  store_.write("risk", "risk_report.csv", out);
}

void Pipeline::emit_regressions() {
  struct Sample {
    std::string name;
    Eigen::MatrixXd r;
    std::vector<std::string> labels;
  };
  const std::vector<Sample> samples = {{"historical", historical_returns(), index().series.labels},
                                       {"dynamic", scenarios().returns, scenarios().labels}};
  std::string ranking = "sample,method,rank,series,slope\n";
  std::map<std::string, std::map<std::string, JensenAlpha>> alphas;
  for (const auto& s : samples) {
    std::string out = "series,method,intercept,slope,se_intercept,se_slope,p_intercept,p_slope,rmse,iterations,converged,notes\n";
    const Eigen::Index market = s.r.cols() - 1;
    const Eigen::VectorXd x = s.r.col(market);
    const std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
    std::vector<std::pair<std::string, std::vector<std::pair<double, std::string>>>> slopes = {{"OLS", {}},
                                                                                              {"RR", {}}};
    for (Eigen::Index l = 0; l < market; ++l) {
      const Eigen::VectorXd y = s.r.col(l);
      const std::span<const double> ys(y.data(), static_cast<std::size_t>(y.size()));
      const auto& name = s.labels[static_cast<std::size_t>(l)];
      const RegressionFit fits[] = {ols(ys, xs), robust_regression(ys, xs)};
      for (std::size_t k = 0; k < 2; ++k) {
        const auto& f = fits[k];
        const std::string method = k == 0 ? "OLS" : "RR";
        out += line({name, method, num(f.intercept), num(f.slope), num(f.se_intercept), num(f.se_slope),
                     num(f.p_intercept), num(f.p_slope), num(f.rmse), std::to_string(f.iterations),
                     f.converged ? "1" : "0", join(f.warnings, "; ")});
        slopes[k].second.emplace_back(f.slope, name);
      }
      alphas[name][s.name] = jensen_alpha(ys, xs, cfg_.alpha_risk_free);
    }
    for (auto& [method, v] : slopes) {
      std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
      for (std::size_t i = 0; i < v.size(); ++i)
        ranking += line({s.name, method, std::to_string(i + 1), v[i].second, num(v[i].first)});
    }
    store_.write("regress", "regression_" + s.name + ".csv", out);
  }
  store_.write("regress", "gradient_ranking.csv", ranking);
  std::string a = "series,alpha_historical,beta_historical,alpha_dynamic,beta_dynamic,risk_free\n";
  for (const auto& name : country_labels()) {
    const auto& h = alphas[name]["historical"];
    const auto& d = alphas[name]["dynamic"];
    a += line({name, num(h.alpha), num(h.beta), num(d.alpha), num(d.beta), num(cfg_.alpha_risk_free)});
  }
  store_.write("regress", "jensen_alpha.csv", a);
}

void Pipeline::emit_frontiers(const std::vector<RiskMeasure>& measures, const std::vector<std::string>& samples,
                              const std::vector<std::string>& universes) {
  const auto countries = country_labels();
  for (RiskMeasure m : measures) {
    std::vector<std::string> header = {"sample", "universe", "gamma", "return", "risk"};
    for (const auto& c : countries) header.push_back("w_" + c);
    std::string out = line(header);
    for (const auto& sample : samples) {
      if (m != RiskMeasure::Variance) {
        const double n = sample == "historical" ? static_cast<double>(historical_returns().rows())
                                                : static_cast<double>(cfg_.scenarios);
        if (n * measure_alpha(m) < 1.0) {
          warnings_.push_back("frontier: skipped " + measure_name(m) + " on the " + sample + " sample (" +
                              std::to_string(static_cast<long>(n)) + " observations, fewer than 1/alpha)");
          continue;
        }
      }
      for (const auto& u : universes) {
        const auto trace = frontier(sample, u, m);
        for (const auto& p : trace.points) {
          std::vector<std::string> f = {sample, u, num(p.gamma), num(p.expected_return), num(p.risk)};
          for (const auto& c : countries) {
            const auto it = std::find(trace.universe.begin(), trace.universe.end(), c);
            f.push_back(it == trace.universe.end() ? "0" : num(p.weights(it - trace.universe.begin())));
          }
          out += line(f);
          for (const auto& w : p.warnings) warnings_.push_back("frontier " + sample + "/" + u + ": " + w);
        }
      }
    }
    store_.write("frontier", "frontier_" + measure_name(m) + ".csv", out);
  }
}

void Pipeline::emit_surface() {
  const auto& o = options();
  std::string out = "T,M,strike,price,mc_standard_error,implied_vol,valid\n";
  for (const auto& c : o.surface.cells)
    out += line({std::to_string(c.maturity), num(c.moneyness), num(c.strike), num(c.price), num(c.mc_standard_error),
                 c.valid ? num(c.implied_vol) : "NA", c.valid ? "1" : "0"});
  store_.write("surface", "surface.csv", out);
}

void Pipeline::emit_report() {
  ordered_json j;
  const auto& s = index().series;
  j["series"] = s.labels;
  j["years"] = {s.years.front(), s.years.back()};
  j["transform"] = {{"a", s.transform.a}, {"b", s.transform.b}, {"eps_low", s.transform.eps_low}};
  ordered_json models = ordered_json::object();
  for (std::size_t l = 0; l < fit().labels.size(); ++l) models[fit().labels[l]] = model_json(fit().selections[l].selected);
  j["models"] = models;
  const auto& mv = innovations().params;
  ordered_json beta = ordered_json::array(), mu = ordered_json::array(), structure = ordered_json::array();
  for (Eigen::Index i = 0; i < mv.beta.size(); ++i) {
    beta.push_back(mv.beta(i));
    mu.push_back(mv.mu(i));
    ordered_json row = ordered_json::array();
    for (Eigen::Index k = 0; k < mv.structure.cols(); ++k) row.push_back(mv.structure(i, k));
    structure.push_back(row);
  }
  j["innovations"] = {{"alpha", mv.alpha}, {"delta", mv.delta}, {"beta", beta}, {"mu", mu}, {"structure", structure}};
  j["scenarios"] = {{"count", scenarios().returns.rows()}, {"provenance", scenarios().provenance}};
  const auto& o = options();
  j["option_model"] = {{"asset", cfg_.option_asset},
                       {"spot", o.fit.params.spot},
                       {"risk_free", o.fit.params.risk_free},
                       {"lambda0", o.fit.params.lambda0},
                       {"alpha0", o.fit.params.alpha0},
                       {"alpha1", o.fit.params.alpha1},
                       {"beta1", o.fit.params.beta1},
                       {"a1", o.fit.params.a1},
                       {"variance_cap", o.fit.params.variance_cap},
                       {"capped_steps", o.paths.capped_steps},
                       {"nig", nig_json(o.fit.params.nig)},
                       {"loglik", o.fit.loglik},
                       {"converged", o.fit.converged},
                       {"paths", o.paths.n_paths}};
  ordered_json theta = ordered_json::object();
  theta["first_step"] = jnum(esscher_theta(o.fit.params.nig, o.fit.params.a1, cfg_.risk_free, cfg_.lambda0));
  j["option_model"]["esscher_theta"] = theta;
  j["warnings"] = warnings_;
  store_.write("report", "report.json", j.dump(2) + "\n");
}

void Pipeline::emit_manifest(const std::string& failed_stage, const std::string& error) {
  ordered_json j;
  j["config_hash"] = cfg_.hash();
  j["seed"] = cfg_.seed ? ordered_json(*cfg_.seed) : ordered_json(nullptr);
  j["status"] = failed_stage.empty() ? "complete" : "failed";
  if (!failed_stage.empty()) {
    j["failed_stage"] = failed_stage;
    j["error"] = error;
  }
  ordered_json stages = ordered_json::array();
  for (const auto& [name, files] : store_.checksums()) {
    ordered_json f = ordered_json::object();
    for (const auto& [file, sum] : files) f[file] = sum;
    stages.push_back({{"stage", name}, {"artifacts", f}});
  }
  j["stages"] = stages;
  store_.write("manifest", "manifest.json", j.dump(2) + "\n");
}

void run_pipeline(const RunConfig& cfg) {
  Pipeline p(cfg, true);
  const std::vector<std::string> universes = {"all", "high-gdp"};
  const std::pair<const char*, std::function<void()>> stages[] = {
      {"index", [&] { p.emit_index(); }},
      {"fit", [&] { p.emit_models(); }},
      {"scenarios", [&] { p.emit_scenarios(); }},
      {"risk", [&] { p.emit_risk(); }},
      {"regress", [&] { p.emit_regressions(); }},
      {"frontier", [&] { p.emit_frontiers(cfg.measures, {"historical", "dynamic"}, universes); }},
      {"surface", [&] { p.emit_surface(); }},
      {"report", [&] { p.emit_report(); }},
  };
  for (const auto& [name, run] : stages) {
    auto fail = [&](const std::string& what) {
      try {
        p.emit_manifest(name, what);
      } catch (const std::exception&) {
      }
    };
    try {
      run();
    } catch (const ValidationError& e) {
      fail(e.what());
      throw ValidationError(std::string("stage ") + name + ": " + e.what());
    } catch (const NumericalError& e) {
      fail(e.what());
      throw NumericalError(std::string("stage ") + name + ": " + e.what());
    }
  }
  p.emit_manifest();
}

}  // namespace dwi
