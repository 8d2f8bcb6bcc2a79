#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "frameguard/stats/table.hpp"

namespace frameguard::stats {

// Plain (fixed-effects) logistic regression by iteratively reweighted least squares.
struct LogisticFit {
  Eigen::VectorXd beta;
  Eigen::VectorXd se;
  Eigen::MatrixXd vcov;
  double loglik = 0.0;
  bool converged = false;
  int iterations = 0;
  bool separation = false;
};

LogisticFit fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int max_iter = 100);

struct GlmmOptions {
  double grad_tol = 1e-6;  // on the max-abs gradient of the log-likelihood
  int max_iter = 200;
  double init_sigma2 = 0.1;
  // Starting beta; defaults to the plain logistic estimate.
  std::optional<Eigen::VectorXd> init_beta;
  // Pin the random-intercept variance instead of estimating it.
  std::optional<double> fixed_sigma2;
};

// Random-intercept logistic GLMM fitted by maximising the Laplace-approximated
// marginal likelihood.
struct GlmmFit {
  std::shared_ptr<const DesignInfo> info;
  Eigen::VectorXd beta;
  Eigen::VectorXd se;
  Eigen::MatrixXd vcov;  // of beta
  double sigma2 = 0.0;
  double loglik = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
  std::size_t n_obs = 0;
  std::size_t n_groups = 0;
  std::vector<std::string> warnings;
  // Conditional modes of the random intercepts, per group label order.
  Eigen::VectorXd random_effects;
};

// Requires spec.grouping. Throws ValidationError when the response is not
// binary and FitError for singular designs. Non-convergence is reported via
// `converged`, not thrown.
GlmmFit fit_glmm_logit(const ModelSpec& spec, const DataTable& data, const GlmmOptions& opts = {});
GlmmFit fit_glmm_logit(const Design& design, const GlmmOptions& opts = {});

// Laplace approximation of the marginal log-likelihood at (beta, sigma),
// summed over groups of
//   log ∫ prod_j Bernoulli(y_j | x_j beta + b) N(b; 0, sigma^2) db.
double laplace_loglik(const Design& design, const Eigen::VectorXd& beta, double sigma);

}  // namespace frameguard::stats
