#include "frameguard/stats/glmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "frameguard/error.hpp"

namespace frameguard::stats {

namespace {

// log(1 + exp(x)) without overflow.
double log1pexp(double x) {
  if (x > 35.0) return x;
  if (x < -35.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

double inv_logit(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void require_binary(const Eigen::VectorXd& y) {
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) != 0.0 && y(i) != 1.0) throw ValidationError("logistic response must be 0/1");
  }
}

}  // namespace

LogisticFit fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int max_iter) {
  require_binary(y);
  const auto p = X.cols();
  LogisticFit fit;
  fit.beta = Eigen::VectorXd::Zero(p);

  auto loglik = [&](const Eigen::VectorXd& b) {
    Eigen::VectorXd eta = X * b;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) ll += y(i) * eta(i) - log1pexp(eta(i));
    return ll;
  };

  double ll = loglik(fit.beta);
  Eigen::MatrixXd H(p, p);
  for (fit.iterations = 0; fit.iterations < max_iter; ++fit.iterations) {
    Eigen::VectorXd eta = X * fit.beta;
    Eigen::VectorXd mu = eta.unaryExpr([](double e) { return inv_logit(e); });
    Eigen::VectorXd w = mu.cwiseProduct((Eigen::VectorXd::Ones(mu.size()) - mu));
    Eigen::VectorXd grad = X.transpose() * (y - mu);
    H = X.transpose() * w.asDiagonal() * X;
    if (grad.cwiseAbs().maxCoeff() < 1e-10) {
      fit.converged = true;
      break;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    if (ldlt.info() != Eigen::Success) throw FitError("logistic regression: singular information matrix");
    Eigen::VectorXd step = ldlt.solve(grad);
    double t = 1.0;
    double next_ll = loglik(fit.beta + step);
    while (next_ll < ll - 1e-12 * std::abs(ll) && t > 1e-10) {
      t *= 0.5;
      next_ll = loglik(fit.beta + t * step);
    }
    fit.beta += t * step;
    ll = next_ll;
    if ((t * step).cwiseAbs().maxCoeff() < 1e-13) {
      fit.converged = true;
      break;
    }
  }
  fit.loglik = ll;
  Eigen::VectorXd eta = X * fit.beta;
  std::size_t saturated = 0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    if (std::abs(eta(i)) > 30.0) ++saturated;
  }
  fit.separation = !fit.converged || saturated > 0 || fit.beta.cwiseAbs().maxCoeff() > 15.0;
  fit.vcov = H.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  fit.se = fit.vcov.diagonal().cwiseSqrt();
  return fit;
}

// ---------------------------------------------------------------------------
// Laplace objective

namespace {

// Random intercept written as b = s * u with u ~ N(0, 1). Per group:
//   f(u) = sum_j [y_j eta_j - log(1 + exp(eta_j))] - u^2 / 2,  eta_j = x_j beta + s u
//   l    = f(u_hat) - 1/2 log(1 + s^2 W),  W = sum_j mu_j (1 - mu_j)
// The objective depends on s only through s^2, so s is optimised without
// constraint and sigma^2 = s^2 can reach zero.
class LaplaceObjective {
 public:
  explicit LaplaceObjective(const Design& d) : d_(d) {
    if (d.groups.size() != static_cast<std::size_t>(d.X.rows())) {
      throw ValidationError("GLMM requires a grouping column");
    }
    n_groups_ = d.group_labels.size();
    order_.resize(d.groups.size());
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      return d.groups[a] < d.groups[b];
    });
    offsets_.assign(n_groups_ + 1, 0);
    for (int g : d.groups) ++offsets_[static_cast<std::size_t>(g) + 1];
    for (std::size_t g = 0; g < n_groups_; ++g) offsets_[g + 1] += offsets_[g];
    u_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_groups_));
  }

  std::size_t n_groups() const noexcept { return n_groups_; }
  const Eigen::VectorXd& modes() const noexcept { return u_; }

  // Log-likelihood; fills d(l)/d(beta) and d(l)/ds when requested.
  double evaluate(const Eigen::VectorXd& beta, double s, Eigen::VectorXd* grad_beta, double* grad_s) {
    const auto p = beta.size();
    const Eigen::VectorXd eta = d_.X * beta;
    const Eigen::VectorXd& y = d_.y;
    double ll = 0.0;
    if (grad_beta) grad_beta->setZero(p);
    if (grad_s) *grad_s = 0.0;

    Eigen::VectorXd A(p), B(p), S(p);
    for (std::size_t g = 0; g < n_groups_; ++g) {
      const std::size_t lo = offsets_[g];
      const std::size_t hi = offsets_[g + 1];
      const double u = solve_mode(eta, s, lo, hi, u_(static_cast<Eigen::Index>(g)));
      u_(static_cast<Eigen::Index>(g)) = u;

      double f = -0.5 * u * u;
      double R = 0.0, W = 0.0, C = 0.0;
      if (grad_beta) {
        A.setZero();
        B.setZero();
        S.setZero();
      }
      for (std::size_t k = lo; k < hi; ++k) {
        const auto i = static_cast<Eigen::Index>(order_[k]);
        const double e = eta(i) + s * u;
        const double mu = inv_logit(e);
        const double w = mu * (1.0 - mu);
        f += y(i) * e - log1pexp(e);
        R += y(i) - mu;
        W += w;
        C += w * (1.0 - 2.0 * mu);
        if (grad_beta) {
          const auto x = d_.X.row(i).transpose();
          S += (y(i) - mu) * x;
          B += w * x;
          A += w * (1.0 - 2.0 * mu) * x;
        }
      }
      const double H = 1.0 + s * s * W;
      ll += f - 0.5 * std::log(H);
      if (grad_beta) *grad_beta += S - (0.5 / H) * (s * s) * (A - (s * s * C / H) * B);
      if (grad_s) {
        const double du_ds = (R - s * W * u) / H;
        const double dH_ds = 2.0 * s * W + s * s * C * (u + s * du_ds);
        *grad_s += R * u - 0.5 * dH_ds / H;
      }
    }
    return ll;
  }

 private:
  // Newton on the concave f(u); g(u) = s R(u) - u, g'(u) = -(1 + s^2 W(u)).
  double solve_mode(const Eigen::VectorXd& eta, double s, std::size_t lo, std::size_t hi, double u) const {
    if (s == 0.0) return 0.0;
    auto f_at = [&](double v) {
      double f = -0.5 * v * v;
      for (std::size_t k = lo; k < hi; ++k) {
        const auto i = static_cast<Eigen::Index>(order_[k]);
        const double e = eta(i) + s * v;
        f += d_.y(i) * e - log1pexp(e);
      }
      return f;
    };
    if (!std::isfinite(u)) u = 0.0;
    double fu = f_at(u);
    for (int it = 0; it < 100; ++it) {
      double R = 0.0, W = 0.0;
      for (std::size_t k = lo; k < hi; ++k) {
        const auto i = static_cast<Eigen::Index>(order_[k]);
        const double mu = inv_logit(eta(i) + s * u);
        R += d_.y(i) - mu;
        W += mu * (1.0 - mu);
      }
      const double g = s * R - u;
      const double step = g / (1.0 + s * s * W);
      double t = 1.0;
      double next = f_at(u + step);
      while (next < fu && t > 1e-8) {
        t *= 0.5;
        next = f_at(u + t * step);
      }
      u += t * step;
      fu = next;
      if (std::abs(t * step) < 1e-12 * (1.0 + std::abs(u))) break;
    }
    return u;
  }

  const Design& d_;
  std::size_t n_groups_ = 0;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> offsets_;
  Eigen::VectorXd u_;
};

// Minimises F(theta) = -loglik over the free parameters: beta, plus s when sigma
// is estimated.
class Problem {
 public:
  Problem(LaplaceObjective& obj, Eigen::Index p, std::optional<double> fixed_s)
      : obj_(obj), p_(p), fixed_s_(fixed_s) {}

  Eigen::Index dim() const noexcept { return fixed_s_ ? p_ : p_ + 1; }

  double operator()(const Eigen::VectorXd& theta, Eigen::VectorXd* grad) {
    const Eigen::VectorXd beta = theta.head(p_);
    const double s = fixed_s_ ? *fixed_s_ : theta(p_);
    Eigen::VectorXd gb;
    double gs = 0.0;
    const double ll = obj_.evaluate(beta, s, grad ? &gb : nullptr, grad && !fixed_s_ ? &gs : nullptr);
    if (grad) {
      grad->resize(dim());
      grad->head(p_) = -gb;
      if (!fixed_s_) (*grad)(p_) = -gs;
    }
    return -ll;
  }

  // Central differences of the analytic gradient, symmetrised.
  Eigen::MatrixXd hessian(const Eigen::VectorXd& theta, Eigen::Index dims) {
    Eigen::MatrixXd H(dims, dims);
    Eigen::VectorXd gp, gm;
    for (Eigen::Index j = 0; j < dims; ++j) {
      const double h = 1e-5 * std::max(1.0, std::abs(theta(j)));
      Eigen::VectorXd tp = theta, tm = theta;
      tp(j) += h;
      tm(j) -= h;
      (*this)(tp, &gp);
      (*this)(tm, &gm);
      H.col(j) = (gp.head(dims) - gm.head(dims)) / (2.0 * h);
    }
    (*this)(theta, &gp);  // restore cached modes at theta
    return 0.5 * (H + H.transpose());
  }

 private:
  LaplaceObjective& obj_;
  Eigen::Index p_;
  std::optional<double> fixed_s_;
};

struct BfgsResult {
  Eigen::VectorXd theta;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

BfgsResult bfgs(Problem& f, Eigen::VectorXd theta, double tol, int max_iter) {
  const Eigen::Index n = theta.size();
  Eigen::VectorXd g;
  double fx = f(theta, &g);

  Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(n, n);
  {
    Eigen::MatrixXd H0 = f.hessian(theta, n);
    Eigen::LLT<Eigen::MatrixXd> llt(H0);
    if (llt.info() == Eigen::Success) {
      Hinv = llt.solve(Eigen::MatrixXd::Identity(n, n));
    } else {
      Hinv /= std::max(1.0, g.cwiseAbs().maxCoeff());
    }
    fx = f(theta, &g);
  }

  BfgsResult r;
  for (r.iterations = 0; r.iterations < max_iter; ++r.iterations) {
    r.grad_norm = g.cwiseAbs().maxCoeff();
    if (r.grad_norm < tol) {
      r.converged = true;
      break;
    }
    Eigen::VectorXd dir = -Hinv * g;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      Hinv = Eigen::MatrixXd::Identity(n, n) / std::max(1.0, r.grad_norm);
      dir = -Hinv * g;
      slope = g.dot(dir);
    }

    double alpha = 1.0;
    Eigen::VectorXd next, g_next;
    double f_next = 0.0;
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings) {
      next = theta + alpha * dir;
      f_next = f(next, &g_next);
      if (std::isfinite(f_next)) {
        const bool armijo = f_next <= fx + 1e-4 * alpha * slope;
        // Close to the optimum the decrease is below the rounding noise of F;
        // accept steps that do not raise F beyond that noise and shrink the gradient.
        const bool flat = f_next <= fx + 1e-11 * (1.0 + std::abs(fx)) &&
                          g_next.cwiseAbs().maxCoeff() < r.grad_norm;
        if (armijo || flat) {
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) break;

    const Eigen::VectorXd s = next - theta;
    const Eigen::VectorXd yv = g_next - g;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      Hinv = (I - rho * s * yv.transpose()) * Hinv * (I - rho * yv * s.transpose()) + rho * s * s.transpose();
    }
    theta = next;
    fx = f_next;
    g = g_next;
  }
  r.grad_norm = g.cwiseAbs().maxCoeff();
  if (r.grad_norm < tol) r.converged = true;
  r.theta = theta;
  r.value = fx;
  return r;
}

}  // namespace

double laplace_loglik(const Design& design, const Eigen::VectorXd& beta, double sigma) {
  LaplaceObjective obj(design);
  return obj.evaluate(beta, sigma, nullptr, nullptr);
}

GlmmFit fit_glmm_logit(const Design& design, const GlmmOptions& opts) {
  require_binary(design.y);
  if (opts.fixed_sigma2 && *opts.fixed_sigma2 < 0.0) throw ValidationError("fixed sigma^2 must be >= 0");
  if (!(opts.init_sigma2 > 0.0)) throw ValidationError("initial sigma^2 must be positive");
  LaplaceObjective obj(design);
  const Eigen::Index p = design.X.cols();

  GlmmFit fit;
  fit.info = design.info;
  fit.n_obs = static_cast<std::size_t>(design.X.rows());
  fit.n_groups = obj.n_groups();

  Eigen::VectorXd beta0;
  if (opts.init_beta) {
    if (opts.init_beta->size() != p) throw ValidationError("init_beta has the wrong length");
    beta0 = *opts.init_beta;
  } else {
    auto start = fit_logistic(design.X, design.y);
    if (start.separation) fit.warnings.emplace_back("possible (quasi-)complete separation in the fixed effects");
    beta0 = start.beta;
  }

  std::optional<double> fixed_s;
  if (opts.fixed_sigma2) fixed_s = std::sqrt(*opts.fixed_sigma2);
  Problem problem(obj, p, fixed_s);
  Eigen::VectorXd theta(problem.dim());
  theta.head(p) = beta0;
  if (!fixed_s) theta(p) = std::sqrt(opts.init_sigma2);

  auto r = bfgs(problem, theta, opts.grad_tol, opts.max_iter);
  fit.converged = r.converged;
  fit.iterations = r.iterations;
  fit.gradient_norm = r.grad_norm;
  fit.beta = r.theta.head(p);
  const double s = fixed_s ? *fixed_s : r.theta(p);
  fit.sigma2 = s * s;
  fit.loglik = -problem(r.theta, nullptr);
  fit.random_effects = s * obj.modes();

  // Information for beta: full (beta, s) block when sigma is interior, beta
  // alone at the boundary or when sigma is pinned.
  const bool boundary = fixed_s || std::abs(s) < 1e-4;
  Eigen::MatrixXd H = problem.hessian(r.theta, boundary ? p : problem.dim());
  Eigen::FullPivLU<Eigen::MatrixXd> lu(H);
  if (!lu.isInvertible()) throw FitError("GLMM: singular information matrix at the optimum");
  Eigen::MatrixXd cov = lu.inverse();
  fit.vcov = 0.5 * (cov.topLeftCorner(p, p) + cov.topLeftCorner(p, p).transpose());
  fit.se = fit.vcov.diagonal().cwiseMax(0.0).cwiseSqrt();

  const double k = static_cast<double>(p + (fixed_s ? 0 : 1));
  fit.aic = 2.0 * k - 2.0 * fit.loglik;
  fit.bic = k * std::log(static_cast<double>(fit.n_obs)) - 2.0 * fit.loglik;

  if (!fit.converged) {
    fit.warnings.push_back("did not converge: max |gradient| " + std::to_string(r.grad_norm) + " after " +
                           std::to_string(r.iterations) + " iterations");
  }
  if (fit.beta.cwiseAbs().maxCoeff() > 15.0) fit.warnings.emplace_back("very large coefficients; check for separation");
  if (!boundary && fit.sigma2 < 1e-8) fit.warnings.emplace_back("random-intercept variance estimated at zero");
  return fit;
}

GlmmFit fit_glmm_logit(const ModelSpec& spec, const DataTable& data, const GlmmOptions& opts) {
  if (!spec.grouping) throw ValidationError("GLMM spec needs a grouping column");
  return fit_glmm_logit(build_design(spec, data), opts);
}

}  // namespace frameguard::stats
