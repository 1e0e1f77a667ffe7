#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "dwi/nig.hpp"
#include "dwi/tsmodel.hpp"

namespace dwi {

struct ScenarioMatrix {
  std::vector<std::string> labels;
  Eigen::MatrixXd returns;  // S x series
  std::uint64_t seed = 0;
  std::vector<std::string> provenance;  // family and parameters per series
};

// One-step-ahead returns: R = phi0 + theta1 z_T + sqrt(s2_{T+1}) e, with the
// e-vectors drawn jointly from the multivariate NIG.
ScenarioMatrix forecast_year(const std::vector<FittedVolModel>& models, const std::vector<std::string>& labels,
                             const MvNigParams& innovations, std::size_t s_count, std::uint64_t seed,
                             unsigned threads = 1);

std::string describe_model(const FittedVolModel& m);

}  // namespace dwi
