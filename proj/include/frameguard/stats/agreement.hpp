#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace frameguard::stats {

// counts[a][b] for binary a, b.
struct Contingency {
  std::array<std::array<std::size_t, 2>, 2> counts{};
  std::size_t total() const noexcept { return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1]; }
};

Contingency contingency(std::span<const int> a, std::span<const int> b);

// Cohen's kappa from the 2x2 table. When chance agreement is 1 (both raters
// constant and identical) kappa is defined as 1. Throws ValidationError on
// length mismatch, empty input or non-binary labels.
double cohen_kappa(std::span<const int> a, std::span<const int> b);

// Average ranks (1-based), ties share the mean of their positions.
std::vector<double> midranks(std::span<const double> x);

// Pearson correlation of mid-ranks. Throws ValidationError on length mismatch,
// fewer than two values or a constant argument.
double spearman(std::span<const double> a, std::span<const double> b);

// Two-sided p-value of rho via t = rho sqrt((n-2)/(1-rho^2)) on n-2 df.
double spearman_p(double rho, std::size_t n);

struct AgreementStats {
  double kappa = 0.0;
  double spearman_rho = 0.0;
  double spearman_p = 1.0;
  Contingency table;
  std::size_t n = 0;
};

// Health vs toxicity: kappa between binary health and non-toxicity
// (toxicity < threshold), Spearman between the continuous health score and
// the toxicity score.
AgreementStats health_toxicity_agreement(std::span<const int> health_binary, std::span<const double> health_score,
                                         std::span<const double> toxicity, double toxicity_threshold = 0.5);

}  // namespace frameguard::stats
