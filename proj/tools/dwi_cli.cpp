#include <CLI11.hpp>

#include <chrono>
#include <iostream>

#include "dwi/error.hpp"
#include "dwi/pipeline.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

std::vector<std::string> expand(const std::string& value, const std::vector<std::string>& all) {
  if (value == "both" || value == "all-measures") return all;
  return {value};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dollar wellbeing index toolkit: index construction, volatility models, scenarios, tail risk, "
               "frontiers and option pricing"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "INI or TOML file with option defaults; command-line flags take precedence");

  dwi::RunConfig cfg;
  std::string data_dir = cfg.data_dir.string(), output_dir = cfg.output_dir.string();
  std::uint64_t seed = 0;
  int first_year = 0, last_year = 0;
  double spot = 0.0;
  std::vector<std::string> measures = {"variance", "cvar95", "cvar99"};

  app.add_option("--data-dir", data_dir, "Directory holding manifest.ini and the country CSVs")->capture_default_str();
  app.add_option("--output-dir", output_dir, "Directory for artifacts")->capture_default_str();
  app.add_flag("--overwrite", cfg.overwrite, "Replace existing artifacts");
  app.add_option("--threads", cfg.threads, "Worker threads (results do not depend on it)")->capture_default_str();
  auto* seed_opt = app.add_option("--seed", seed, "Root seed for every stochastic stage");
  app.add_option("--countries", cfg.countries, "Restrict to these country codes")->delimiter(',');
  auto* fy = app.add_option("--first-year", first_year, "First year to load");
  auto* ly = app.add_option("--last-year", last_year, "Last year to load");
  app.add_option("--impute-rank", cfg.impute.rank, "Rank of the SVD imputation")->capture_default_str();
  app.add_option("--impute-tol", cfg.impute.tol, "Relative change that stops imputation")->capture_default_str();
  app.add_option("--impute-max-iter", cfg.impute.max_iter, "Imputation iteration cap")->capture_default_str();
  app.add_option("--eps-low", cfg.eps_low, "Value of the exponential transform at the smallest DWI")
      ->capture_default_str();
  app.add_option("--scenarios", cfg.scenarios, "Number of one-year-ahead scenarios")->capture_default_str();
  app.add_option("--alphas", cfg.alphas, "Tail probabilities for the risk report")->delimiter(',');
  app.add_option("--alpha-risk-free", cfg.alpha_risk_free, "Benchmark rate for Jensen's alpha")
      ->capture_default_str();
  app.add_option("--gamma-points", cfg.gamma_points, "Points on the gamma grid [0, 1)")->capture_default_str();
  app.add_flag("--allow-short", cfg.allow_short, "Drop the no-short-sale constraint");
  app.add_option("--option-asset", cfg.option_asset, "Series the options are written on")->capture_default_str();
  app.add_option("--risk-free", cfg.risk_free, "Per-period risk-free rate for pricing")->capture_default_str();
  app.add_option("--lambda0", cfg.lambda0, "Market price of risk in the return drift")->capture_default_str();
  auto* spot_opt = app.add_option("--spot", spot, "Spot value (default: last value of the option asset)");
  app.add_option("--paths", cfg.option_paths, "Monte Carlo paths for pricing")->capture_default_str();
  app.add_option("--moneyness", cfg.moneyness, "Moneyness grid S/K for the surface")->delimiter(',');
  app.add_option("--maturities", cfg.maturities, "Maturities (periods) for the surface")->delimiter(',');

  auto* index_cmd = app.add_subcommand("index", "Index construction");
  index_cmd->require_subcommand(1);
  auto* index_build = index_cmd->add_subcommand("build", "Write dwi.csv, asset.csv and index.json");
  auto* fit_cmd = app.add_subcommand("fit", "Fit and compare volatility models; write models.csv");
  auto* scen_cmd = app.add_subcommand("scenarios", "Simulate one-year-ahead scenarios; write scenarios.csv");
  auto* risk_cmd = app.add_subcommand("risk", "Tail risk measures");
  risk_cmd->require_subcommand(1);
  auto* risk_report = risk_cmd->add_subcommand("report", "Write risk_report.csv for both samples");
  auto* regress_cmd = app.add_subcommand("regress", "OLS and robust regressions plus Jensen's alpha");

  auto* frontier_cmd = app.add_subcommand("frontier", "Efficient frontiers; write frontier_<measure>.csv");
  std::string measure = "all-measures", universe = "both", sample = "both";
  frontier_cmd->add_option("--measure", measure, "variance, cvar95, cvar99 or all-measures")
      ->check(CLI::IsMember({"variance", "cvar95", "cvar99", "all-measures"}))
      ->capture_default_str();
  frontier_cmd->add_option("--universe", universe, "all, high-gdp or both")
      ->check(CLI::IsMember({"all", "high-gdp", "both"}))
      ->capture_default_str();
  frontier_cmd->add_option("--sample", sample, "historical, dynamic or both")
      ->check(CLI::IsMember({"historical", "dynamic", "both"}))
      ->capture_default_str();

  auto* price_cmd = app.add_subcommand("price", "Price one European option by risk-neutral Monte Carlo");
  std::string kind = "call";
  double strike = 0.0;
  int maturity = 1;
  price_cmd->add_option("--kind", kind, "call or put")->check(CLI::IsMember({"call", "put"}))->capture_default_str();
  auto* strike_opt = price_cmd->add_option("--strike", strike, "Strike (default: spot)");
  price_cmd->add_option("--maturity", maturity, "Maturity in periods")->capture_default_str();

  auto* surface_cmd = app.add_subcommand("surface", "Call prices and implied vols over (T, M); write surface.csv");
  auto* run_all = app.add_subcommand("run-all", "Run every stage and write all artifacts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  cfg.data_dir = data_dir;
  cfg.output_dir = output_dir;
  if (seed_opt->count()) cfg.seed = seed;
  if (fy->count()) cfg.first_year = first_year;
  if (ly->count()) cfg.last_year = last_year;
  if (spot_opt->count()) cfg.spot = spot;
  cfg.measures.clear();
  for (const auto& m : expand(measure, measures)) cfg.measures.push_back(dwi::parse_measure(m));

  const auto start = std::chrono::steady_clock::now();
  std::string stage = "setup";
  try {
    if (*run_all) {
      stage = "run-all";
      dwi::run_pipeline(cfg);
    } else {
      const auto samples = expand(sample, {"historical", "dynamic"});
      const bool stochastic =
          *scen_cmd || *risk_report || *regress_cmd || *price_cmd || *surface_cmd ||
          (*frontier_cmd && std::find(samples.begin(), samples.end(), "dynamic") != samples.end());
      dwi::Pipeline p(cfg, stochastic);
      if (*index_build) stage = "index", p.emit_index();
      if (*fit_cmd) stage = "fit", p.emit_models();
      if (*scen_cmd) stage = "scenarios", p.emit_scenarios();
      if (*risk_report) stage = "risk", p.emit_risk();
      if (*regress_cmd) stage = "regress", p.emit_regressions();
      if (*frontier_cmd)
        stage = "frontier", p.emit_frontiers(cfg.measures, samples, expand(universe, {"all", "high-gdp"}));
      if (*surface_cmd) stage = "surface", p.emit_surface();
      if (*price_cmd) {
        stage = "price";
        const auto& m = p.option_model();
        const double k = strike_opt->count() ? strike : m.params.spot;
        const auto q = dwi::price_option(p.option_paths(maturity), dwi::parse_option_kind(kind), k, maturity);
        std::cout << "kind,strike,maturity,spot,price,mc_standard_error,paths\n"
                  << kind << "," << k << "," << maturity << "," << m.params.spot << "," << q.price << ","
                  << q.mc_standard_error << "," << q.path_count << "\n";
      } else {
        stage = "manifest";
        p.emit_manifest();
      }
      for (const auto& w : p.warnings()) std::cerr << "warning: " << w << "\n";
    }
  } catch (const dwi::ValidationError& e) {
    std::cerr << "error (" << stage << "): " << e.what() << "\n";
    return kExitValidation;
  } catch (const dwi::NumericalError& e) {
    std::cerr << "numerical failure (" << stage << "): " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error (" << stage << "): " << e.what() << "\n";
    return 1;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cerr << "done in " << secs << " s\n";
  return 0;
}
