#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dwi/analytics.hpp"
#include "dwi/index.hpp"
#include "dwi/ingest.hpp"
#include "dwi/nig.hpp"
#include "dwi/options.hpp"
#include "dwi/portfolio.hpp"
#include "dwi/risk.hpp"
#include "dwi/scenario.hpp"
#include "dwi/tsmodel.hpp"

namespace dwi {

struct RunConfig {
  std::filesystem::path data_dir = "data/worldbank";  // holds manifest.ini
  std::vector<std::string> countries;                 // empty: every country in the manifest
  std::optional<int> first_year;
  std::optional<int> last_year;
  ImputeOptions impute;
  double eps_low = 0.001;

  std::size_t scenarios = 10000;
  std::optional<std::uint64_t> seed;
  std::vector<double> alphas = {0.05, 0.01};

  double alpha_risk_free = 0.0;  // Jensen's alpha benchmark rate
  std::vector<RiskMeasure> measures = {RiskMeasure::Variance, RiskMeasure::Cvar95, RiskMeasure::Cvar99};
  std::size_t gamma_points = 100;
  bool allow_short = false;

  std::string option_asset = "global";
  double risk_free = 0.02;  // per period, for option pricing
  double lambda0 = 0.0;
  std::optional<double> spot;  // default: last value of the option asset
  std::size_t option_paths = 10000;
  std::vector<double> moneyness = default_moneyness_grid();
  std::vector<int> maturities = default_maturities();

  std::filesystem::path output_dir = "out";
  bool overwrite = false;
  unsigned threads = 1;

  // Throws ValidationError. `stochastic` demands a seed.
  void validate(bool stochastic) const;
  // Every setting that can change an artifact, in a fixed textual form.
  // Thread count, output directory and the overwrite flag are excluded.
  std::string canonical() const;
  std::string hash() const;  // SHA-256 of canonical()
};

std::string sha256_hex(const std::string& bytes);

// Seeds handed to each stochastic stage, derived from the root seed.
enum class SeedStream : std::uint64_t { Scenarios = 1, Options = 2 };

struct IndexStage {
  PanelSchema schema;
  ImputeResult imputation;
  IndexSeries series;
};

struct FitStage {
  std::vector<std::string> labels;  // countries followed by "global"
  std::vector<ModelSelection> selections;
};

struct OptionStage {
  NigGarchFit fit;
  RiskNeutralPaths paths;
  VolSurface surface;
};

// Artifacts are written once per output directory; an existing file is an
// error unless overwriting was requested.
class ArtifactStore {
 public:
  ArtifactStore(std::filesystem::path dir, bool overwrite);
  void write(const std::string& stage, const std::string& name, const std::string& content);
  const std::vector<std::pair<std::string, std::map<std::string, std::string>>>& checksums() const {
    return stages_;
  }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  bool overwrite_;
  std::vector<std::pair<std::string, std::map<std::string, std::string>>> stages_;
};

// Stage results are computed on first use and cached. Emitters write the
// stage's artifacts and record checksums for the manifest.
class Pipeline {
 public:
  Pipeline(RunConfig cfg, bool stochastic);

  const RunConfig& config() const { return cfg_; }
  const IndexStage& index();
  const FitStage& fit();
  const MvNigFit& innovations();
  const ScenarioMatrix& scenarios();
  const RiskReport& historical_risk();
  const RiskReport& dynamic_risk();
  const NigGarchFit& option_model();
  const OptionStage& options();
  // Risk-neutral paths from the option model, on the options seed stream.
  RiskNeutralPaths option_paths(int horizon);

  // Historical sample: (T-1) x 10 log returns, countries then global.
  Eigen::MatrixXd historical_returns();
  std::vector<std::string> country_labels();
  std::vector<std::string> high_gdp_labels();

  FrontierTrace frontier(const std::string& sample, const std::string& universe, RiskMeasure m);

  void emit_index();
  void emit_models();
  void emit_scenarios();
  void emit_risk();
  void emit_regressions();
  void emit_frontiers(const std::vector<RiskMeasure>& measures, const std::vector<std::string>& samples,
                      const std::vector<std::string>& universes);
  void emit_surface();
  void emit_report();
  // Writes manifest.json. `failed_stage` empty on success.
  void emit_manifest(const std::string& failed_stage = {}, const std::string& error = {});

  const std::vector<std::string>& warnings() const { return warnings_; }
  ArtifactStore& store() { return store_; }

 private:
  RunConfig cfg_;
  ArtifactStore store_;
  std::vector<std::string> warnings_;
  std::optional<IndexStage> index_;
  std::optional<FitStage> fit_;
  std::optional<MvNigFit> innovations_;
  std::optional<ScenarioMatrix> scenarios_;
  std::optional<RiskReport> hist_risk_, dyn_risk_;
  std::optional<NigGarchFit> option_model_;
  std::optional<OptionStage> options_;
};

// Full run: every stage in order, then report.json and manifest.json. A stage
// failure keeps what was already written, records the stage in the manifest
// and rethrows with the stage name prefixed.
void run_pipeline(const RunConfig& cfg);

}  // namespace dwi
