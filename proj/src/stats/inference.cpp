#include "frameguard/stats/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "frameguard/error.hpp"

namespace frameguard::stats {

ModelView view_of(const GlmmFit& fit) { return {fit.info, fit.beta, fit.vcov, Link::Logit}; }
ModelView view_of(const OlsFit& fit) { return {fit.info, fit.beta, fit.vcov, Link::Identity}; }

double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::numbers::sqrt2); }

double chisq_upper(double statistic, double df) {
  if (statistic <= 0.0) return 1.0;
  boost::math::chi_squared dist(df);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

ChiSqTest wald_block(const Eigen::VectorXd& beta, const Eigen::MatrixXd& vcov, std::span<const int> columns) {
  if (columns.empty()) throw ValidationError("Wald test over an empty coefficient block");
  const auto m = static_cast<Eigen::Index>(columns.size());
  Eigen::VectorXd b(m);
  Eigen::MatrixXd V(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    b(i) = beta(columns[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < m; ++j) {
      V(i, j) = vcov(columns[static_cast<std::size_t>(i)], columns[static_cast<std::size_t>(j)]);
    }
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(V);
  if (!lu.isInvertible()) throw FitError("Wald test: singular covariance block");
  ChiSqTest out;
  out.statistic = b.dot(lu.solve(b));
  out.df = static_cast<int>(m);
  out.p = chisq_upper(out.statistic, out.df);
  return out;
}

ChiSqTest wald_type2(const ModelView& model, const std::string& term) {
  if (!model.info) throw ValidationError("model has no design information");
  const Term* t = model.info->find_term(term);
  if (!t || t->factors.empty()) throw ValidationError("no model term named '" + term + "'");
  return wald_block(model.beta, model.vcov, t->columns);
}

ChiSqTest wald_type2(const GlmmFit& fit, const std::string& term) { return wald_type2(view_of(fit), term); }
ChiSqTest wald_type2(const OlsFit& fit, const std::string& term) { return wald_type2(view_of(fit), term); }

// ---------------------------------------------------------------------------
// Marginal means

namespace {

double inverse_link(Link link, double eta) {
  if (link == Link::Identity) return eta;
  if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

constexpr double kZ975 = 1.959963984540054;

}  // namespace

EmmResult emmeans(const ModelView& model, const std::string& factor, EmmWeighting weighting) {
  if (!model.info) throw ValidationError("model has no design information");
  const auto& info = *model.info;
  const int target = info.factor_index(factor);
  if (target < 0) throw ValidationError("no factor named '" + factor + "' in the model");

  std::vector<int> others;
  std::size_t cells = 1;
  for (std::size_t f = 0; f < info.factors.size(); ++f) {
    if (static_cast<int>(f) == target) continue;
    others.push_back(static_cast<int>(f));
    cells *= info.factors[f].levels.size();
    if (cells > 1'000'000) throw ValidationError("emmeans: reference grid too large");
  }

  // Grid weights, indexed by mixed-radix cell number over `others`.
  std::vector<double> weights(cells, 1.0 / static_cast<double>(cells));
  if (weighting == EmmWeighting::Proportional && !others.empty()) {
    std::fill(weights.begin(), weights.end(), 0.0);
    const auto n = info.factors[static_cast<std::size_t>(target)].codes.size();
    for (std::size_t r = 0; r < n; ++r) {
      std::size_t cell = 0;
      for (int f : others) {
        const auto& fac = info.factors[static_cast<std::size_t>(f)];
        cell = cell * fac.levels.size() + static_cast<std::size_t>(fac.codes[r]);
      }
      weights[cell] += 1.0 / static_cast<double>(n);
    }
  }

  EmmResult out;
  out.factor = factor;
  out.link = model.link;
  out.weighting = weighting;
  for (int f : others) out.averaged_over.push_back(info.factors[static_cast<std::size_t>(f)].name);

  const auto& tf = info.factors[static_cast<std::size_t>(target)];
  std::vector<int> levels(info.factors.size(), 0);
  for (std::size_t l = 0; l < tf.levels.size(); ++l) {
    Eigen::RowVectorXd L = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(info.column_names.size()));
    levels[static_cast<std::size_t>(target)] = static_cast<int>(l);
    for (std::size_t cell = 0; cell < cells; ++cell) {
      if (weights[cell] == 0.0) continue;
      std::size_t rest = cell;
      for (auto it = others.rbegin(); it != others.rend(); ++it) {
        const auto& fac = info.factors[static_cast<std::size_t>(*it)];
        levels[static_cast<std::size_t>(*it)] = static_cast<int>(rest % fac.levels.size());
        rest /= fac.levels.size();
      }
      L += weights[cell] * info.encode(levels);
    }
    EmmLevel lvl;
    lvl.level = tf.levels[l];
    lvl.estimate = L.dot(model.beta);
    lvl.se = std::sqrt(std::max(0.0, (L * model.vcov * L.transpose())(0, 0)));
    lvl.response = inverse_link(model.link, lvl.estimate);
    lvl.lower = inverse_link(model.link, lvl.estimate - kZ975 * lvl.se);
    lvl.upper = inverse_link(model.link, lvl.estimate + kZ975 * lvl.se);
    lvl.contrast = std::move(L);
    out.levels.push_back(std::move(lvl));
  }
  return out;
}

PairwiseComparison compare_levels(const EmmResult& emm, const ModelView& model, std::size_t a, std::size_t b,
                                  std::size_t k) {
  if (a >= emm.levels.size() || b >= emm.levels.size()) throw ValidationError("compare_levels: level out of range");
  PairwiseComparison c;
  c.a = emm.levels[a].level;
  c.b = emm.levels[b].level;
  if (a == b) return c;
  const Eigen::RowVectorXd d = emm.levels[a].contrast - emm.levels[b].contrast;
  c.estimate = emm.levels[a].estimate - emm.levels[b].estimate;
  c.se = std::sqrt(std::max(0.0, (d * model.vcov * d.transpose())(0, 0)));
  c.odds_ratio = std::exp(c.estimate);
  if (c.se == 0.0) {
    c.z = c.estimate == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), c.estimate);
  } else {
    c.z = c.estimate / c.se;
  }
  c.p_unadjusted = normal_two_sided_p(c.z);
  c.p_adjusted = k < 2 ? c.p_unadjusted : ptukey_upper(std::numbers::sqrt2 * std::abs(c.z), k);
  const double crit = (k < 2 ? kZ975 * std::numbers::sqrt2 : qtukey(0.95, k)) / std::numbers::sqrt2;
  c.ci_lower = std::exp(c.estimate - crit * c.se);
  c.ci_upper = std::exp(c.estimate + crit * c.se);
  return c;
}

std::vector<PairwiseComparison> pairwise_or(const EmmResult& emm, const ModelView& model) {
  if (emm.levels.size() < 2) throw ValidationError("pairwise comparisons need at least two levels");
  std::vector<PairwiseComparison> out;
  const auto k = emm.levels.size();
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) out.push_back(compare_levels(emm, model, i, j, k));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Studentized range, infinite df:
//   P(R <= q) = k ∫ phi(z) [Phi(z) - Phi(z - q)]^(k-1) dz

namespace {

double phi(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
double Phi(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

template <class F>
double integrate_real_line(F f) {
  using boost::math::quadrature::gauss_kronrod;
  // Integrands here are negligible outside [-12, 12 + q]; splitting keeps the
  // adaptive rule away from the flat tails.
  double total = 0.0;
  const double edges[] = {-12.0, -4.0, -1.0, 0.0, 1.0, 2.0, 3.0, 4.0, 6.0, 9.0, 14.0, 22.0, 40.0};
  for (std::size_t i = 0; i + 1 < std::size(edges); ++i) {
    total += gauss_kronrod<double, 31>::integrate(f, edges[i], edges[i + 1], 12, 1e-14);
  }
  return total;
}

}  // namespace

double ptukey(double q, std::size_t k) { return 1.0 - ptukey_upper(q, k); }

double ptukey_upper(double q, std::size_t k) {
  if (k < 2) throw ValidationError("studentized range needs k >= 2");
  if (q <= 0.0) return 1.0;
  if (k == 2) return std::erfc(q / 2.0);  // |Z1 - Z2| ~ N(0, 2)
  const auto m = static_cast<int>(k - 1);
  // a^m - b^m = (a - b) sum_i a^i b^(m-1-i) with a = Phi(z), b = Phi(z) - Phi(z - q),
  // so a - b = Phi(z - q) is computed without cancellation.
  auto integrand = [&](double z) {
    const double a = Phi(z);
    const double lower = Phi(z - q);
    const double b = std::max(0.0, a - lower);
    double sum = 0.0;
    double ai = 1.0;
    for (int i = 0; i < m; ++i) {
      sum += ai * std::pow(b, m - 1 - i);
      ai *= a;
    }
    return phi(z) * lower * sum;
  };
  const double upper = static_cast<double>(k) * integrate_real_line(integrand);
  return std::clamp(upper, 0.0, 1.0);
}

double qtukey(double prob, std::size_t k) {
  if (!(prob > 0.0 && prob < 1.0)) throw ValidationError("qtukey: probability must lie in (0,1)");
  auto f = [&](double q) { return ptukey(q, k) - prob; };
  double lo = 0.0, hi = 1.0;
  while (f(hi) < 0.0) hi *= 2.0;
  boost::math::tools::eps_tolerance<double> tol(50);
  std::uintmax_t iters = 200;
  auto r = boost::math::tools::toms748_solve(f, lo, hi, tol, iters);
  return 0.5 * (r.first + r.second);
}

}  // namespace frameguard::stats
