#include "frameguard/stats/agreement.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "frameguard/error.hpp"

namespace frameguard::stats {

Contingency contingency(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw ValidationError("agreement: label vectors differ in length");
  Contingency t;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if ((a[i] != 0 && a[i] != 1) || (b[i] != 0 && b[i] != 1)) {
      throw ValidationError("agreement: labels must be 0/1");
    }
    ++t.counts[static_cast<std::size_t>(a[i])][static_cast<std::size_t>(b[i])];
  }
  return t;
}

double cohen_kappa(std::span<const int> a, std::span<const int> b) {
  if (a.empty()) throw ValidationError("cohen_kappa: empty input");
  const auto t = contingency(a, b);
  const double n = static_cast<double>(t.total());
  const double po = static_cast<double>(t.counts[0][0] + t.counts[1][1]) / n;
  const double a1 = static_cast<double>(t.counts[1][0] + t.counts[1][1]) / n;
  const double b1 = static_cast<double>(t.counts[0][1] + t.counts[1][1]) / n;
  const double pe = a1 * b1 + (1.0 - a1) * (1.0 - b1);
  if (pe >= 1.0) return 1.0;
  return (po - pe) / (1.0 - pe);
}

std::vector<double> midranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
  std::vector<double> ranks(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("spearman: vectors differ in length");
  if (a.size() < 2) throw ValidationError("spearman: need at least two observations");
  const auto ra = midranks(a);
  const auto rb = midranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) throw ValidationError("spearman: constant input");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double spearman_p(double rho, std::size_t n) {
  if (n < 3) return 1.0;
  if (std::abs(rho) >= 1.0) return 0.0;
  const double df = static_cast<double>(n - 2);
  const double t = rho * std::sqrt(df / (1.0 - rho * rho));
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

AgreementStats health_toxicity_agreement(std::span<const int> health_binary, std::span<const double> health_score,
                                         std::span<const double> toxicity, double toxicity_threshold) {
  if (health_binary.size() != toxicity.size() || health_score.size() != toxicity.size()) {
    throw ValidationError("agreement: health and toxicity vectors differ in length");
  }
  std::vector<int> non_toxic(toxicity.size());
  for (std::size_t i = 0; i < toxicity.size(); ++i) non_toxic[i] = toxicity[i] < toxicity_threshold ? 1 : 0;
  AgreementStats out;
  out.n = toxicity.size();
  out.table = contingency(health_binary, non_toxic);
  out.kappa = cohen_kappa(health_binary, non_toxic);
  out.spearman_rho = spearman(health_score, toxicity);
  out.spearman_p = spearman_p(out.spearman_rho, out.n);
  return out;
}

}  // namespace frameguard::stats
