#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "frameguard/stats/table.hpp"

namespace frameguard::stats {

struct OlsFit {
  std::shared_ptr<const DesignInfo> info;
  Eigen::VectorXd beta;
  Eigen::VectorXd se;
  Eigen::VectorXd t;
  Eigen::VectorXd p;
  Eigen::MatrixXd vcov;
  Eigen::VectorXd residuals;
  double r2 = 0.0;
  double adj_r2 = 0.0;
  double f_stat = 0.0;
  double f_p = 1.0;
  int df_model = 0;
  int df_resid = 0;
  double resid_se = 0.0;
  std::size_t n_obs = 0;
};

// Least squares through a Householder QR of the design. The first column must
// be the intercept. Throws FitError naming aliased columns on rank deficiency.
OlsFit fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<std::string>& names);
OlsFit fit_ols(const ModelSpec& spec, const DataTable& data);
OlsFit fit_ols(const Design& design);

}  // namespace frameguard::stats
