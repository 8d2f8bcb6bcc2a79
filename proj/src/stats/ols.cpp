#include "frameguard/stats/ols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "frameguard/error.hpp"

namespace frameguard::stats {

OlsFit fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<std::string>& names) {
  const auto n = X.rows();
  const auto p = X.cols();
  if (y.size() != n) throw ValidationError("OLS: response length differs from design rows");
  if (static_cast<Eigen::Index>(names.size()) != p) throw ValidationError("OLS: one name per column required");
  if (n <= p) throw FitError("OLS: need more observations than coefficients");
  auto aliased = aliased_columns(X, names);
  if (!aliased.empty()) {
    std::string list;
    for (const auto& a : aliased) list += (list.empty() ? "" : ", ") + a;
    throw FitError("OLS: design matrix is rank deficient; aliased columns: " + list);
  }

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
  const Eigen::MatrixXd R = qr.matrixQR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  const Eigen::VectorXd qty = (qr.householderQ().transpose() * y).head(p);

  OlsFit fit;
  fit.n_obs = static_cast<std::size_t>(n);
  fit.beta = R.triangularView<Eigen::Upper>().solve(qty);
  fit.residuals = y - X * fit.beta;
  fit.df_resid = static_cast<int>(n - p);
  fit.df_model = static_cast<int>(p - 1);

  const double sse = fit.residuals.squaredNorm();
  const double sigma2 = sse / fit.df_resid;
  fit.resid_se = std::sqrt(sigma2);

  // (X'X)^-1 = R^-1 R^-T
  const Eigen::MatrixXd Rinv =
      R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd xtx_inv = Rinv * Rinv.transpose();
  fit.vcov = sigma2 * xtx_inv;
  fit.se = fit.vcov.diagonal().cwiseSqrt();
  fit.t.resize(p);
  fit.p.resize(p);
  boost::math::students_t tdist(fit.df_resid);
  for (Eigen::Index j = 0; j < p; ++j) {
    if (fit.se(j) > 0.0) {
      fit.t(j) = fit.beta(j) / fit.se(j);
      fit.p(j) = 2.0 * boost::math::cdf(boost::math::complement(tdist, std::abs(fit.t(j))));
    } else {
      fit.t(j) = fit.beta(j) == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), fit.beta(j));
      fit.p(j) = fit.beta(j) == 0.0 ? 1.0 : 0.0;
    }
  }

  const double mean = y.mean();
  const double sst = (y.array() - mean).matrix().squaredNorm();
  if (sst > 0.0) {
    fit.r2 = std::clamp(1.0 - sse / sst, 0.0, 1.0);
  } else {
    fit.r2 = sse == 0.0 ? 1.0 : 0.0;
  }
  fit.adj_r2 = 1.0 - (1.0 - fit.r2) * static_cast<double>(n - 1) / fit.df_resid;
  if (fit.df_model > 0) {
    const double ssr = std::max(0.0, sst - sse);
    if (sse > 0.0) {
      fit.f_stat = (ssr / fit.df_model) / (sse / fit.df_resid);
      boost::math::fisher_f fdist(fit.df_model, fit.df_resid);
      fit.f_p = boost::math::cdf(boost::math::complement(fdist, fit.f_stat));
    } else {
      fit.f_stat = ssr > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
      fit.f_p = ssr > 0.0 ? 0.0 : 1.0;
    }
  }
  return fit;
}

OlsFit fit_ols(const Design& design) {
  auto fit = fit_ols(design.X, design.y, design.info->column_names);
  fit.info = design.info;
  return fit;
}

OlsFit fit_ols(const ModelSpec& spec, const DataTable& data) { return fit_ols(build_design(spec, data)); }

}  // namespace frameguard::stats
