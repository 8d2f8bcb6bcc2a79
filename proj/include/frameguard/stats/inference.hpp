#pragma once

#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "frameguard/stats/glmm.hpp"
#include "frameguard/stats/ols.hpp"
#include "frameguard/stats/table.hpp"

namespace frameguard::stats {

enum class Link { Identity, Logit };

// Coefficients, their covariance and the design layout: what Wald tests and
// marginal means need from a fitted model.
struct ModelView {
  std::shared_ptr<const DesignInfo> info;
  Eigen::VectorXd beta;
  Eigen::MatrixXd vcov;
  Link link = Link::Identity;
};

ModelView view_of(const GlmmFit& fit);
ModelView view_of(const OlsFit& fit);

struct ChiSqTest {
  double statistic = 0.0;
  int df = 0;
  double p = 1.0;
};

// b' V^-1 b over the given coefficient block. Throws FitError when V is singular.
ChiSqTest wald_block(const Eigen::VectorXd& beta, const Eigen::MatrixXd& vcov, std::span<const int> columns);

// Wald chi-square over every coefficient of `term` (a factor name or an
// interaction "a:b"). Throws ValidationError for unknown terms.
ChiSqTest wald_type2(const ModelView& model, const std::string& term);
ChiSqTest wald_type2(const GlmmFit& fit, const std::string& term);
ChiSqTest wald_type2(const OlsFit& fit, const std::string& term);

// ---------------------------------------------------------------------------

enum class EmmWeighting { Equal, Proportional };

struct EmmLevel {
  std::string level;
  double estimate = 0.0;  // linear-predictor scale
  double se = 0.0;
  double response = 0.0;  // inverse link of estimate
  double lower = 0.0;     // 95% interval on the response scale
  double upper = 0.0;
  Eigen::RowVectorXd contrast;  // L such that estimate = L beta
};

struct EmmResult {
  std::string factor;
  Link link = Link::Identity;
  EmmWeighting weighting = EmmWeighting::Equal;
  std::vector<std::string> averaged_over;
  std::vector<EmmLevel> levels;
};

// For each level of `factor`, averages the linear predictor over the grid of
// the other factors' levels (random intercept at zero) and maps it through the
// inverse link; SE by the delta method on the averaged predictor.
EmmResult emmeans(const ModelView& model, const std::string& factor,
                  EmmWeighting weighting = EmmWeighting::Equal);

struct PairwiseComparison {
  std::string a;
  std::string b;
  double estimate = 0.0;  // difference of averaged linear predictors, a - b
  double se = 0.0;
  double z = 0.0;
  double odds_ratio = 1.0;  // exp(estimate); a ratio of means only under the logit link
  double ci_lower = 1.0;    // Tukey-adjusted 95% interval for odds_ratio
  double ci_upper = 1.0;
  double p_unadjusted = 1.0;
  double p_adjusted = 1.0;
};

// Contrast of two levels of an EMM table with Tukey adjustment for `k` means.
PairwiseComparison compare_levels(const EmmResult& emm, const ModelView& model, std::size_t a, std::size_t b,
                                  std::size_t k);

// Every pair (i < j) in level order.
std::vector<PairwiseComparison> pairwise_or(const EmmResult& emm, const ModelView& model);

// ---------------------------------------------------------------------------
// Studentized range with infinite degrees of freedom (k normal means).

// P(range of k iid standard normals <= q).
double ptukey(double q, std::size_t k);
// Upper tail 1 - ptukey(q, k).
double ptukey_upper(double q, std::size_t k);
// Quantile: ptukey(q, k) = prob.
double qtukey(double prob, std::size_t k);

double normal_two_sided_p(double z);
double chisq_upper(double statistic, double df);

}  // namespace frameguard::stats
