#include "kurthbif/numerics.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace kurthbif {

namespace {

QuadratureRule build_gauss_legendre(int n) {
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Tricomi initial guess, then Newton on the three-term recurrence
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pn = n == 0 ? 1.0 : p1;
      const double pnm1 = p0;
      dp = n * (x * pn - pnm1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace

const QuadratureRule& gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<QuadratureRule>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[n];
  if (!slot) {
    if (n == 1) {
      slot = std::make_unique<QuadratureRule>();
      slot->nodes = Eigen::VectorXd::Zero(1);
      slot->weights = Eigen::VectorXd::Constant(1, 2.0);
    } else {
      slot = std::make_unique<QuadratureRule>(build_gauss_legendre(n));
    }
  }
  return *slot;
}

QuadratureRule gauss_jacobi(int n, double alpha, double beta) {
  if (n < 1) throw std::invalid_argument("gauss_jacobi: n must be >= 1");
  if (alpha <= -1.0 || beta <= -1.0) throw std::invalid_argument("gauss_jacobi: alpha, beta must exceed -1");
  const double ab = alpha + beta;
  Eigen::VectorXd diag(n);
  Eigen::VectorXd offdiag(std::max(n - 1, 0));
  for (int k = 0; k < n; ++k) {
    const double denom = (2.0 * k + ab) * (2.0 * k + ab + 2.0);
    diag[k] = denom == 0.0 ? (beta - alpha) / (ab + 2.0) : (beta * beta - alpha * alpha) / denom;
  }
  for (int k = 1; k < n; ++k) {
    const double t = 2.0 * k + ab;
    if (k == 1) {
      // (k + ab)/(t - 1) cancels analytically; the generic form is 0/0 when ab = -1
      offdiag[0] = std::sqrt(4.0 * (1.0 + alpha) * (1.0 + beta) / (t * t * (t + 1.0)));
      continue;
    }
    const double num = 4.0 * k * (k + alpha) * (k + beta) * (k + ab);
    offdiag[k - 1] = std::sqrt(num / (t * t * (t + 1.0) * (t - 1.0)));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, offdiag, Eigen::ComputeEigenvectors);
  const double mu0 = std::pow(2.0, ab + 1.0) * std::exp(std::lgamma(alpha + 1.0) + std::lgamma(beta + 1.0) -
                                                        std::lgamma(ab + 2.0));
  QuadratureRule rule;
  rule.nodes = solver.eigenvalues();
  rule.weights = mu0 * solver.eigenvectors().row(0).transpose().array().square();
  return rule;
}

std::vector<double> clip_breaks(double lo, double hi, std::vector<double> interior) {
  std::vector<double> out;
  out.reserve(interior.size() + 2);
  out.push_back(lo);
  for (double b : interior) {
    if (b > lo && b < hi) out.push_back(b);
  }
  out.push_back(hi);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Eigen::VectorXd chebyshev_nodes(double a, double b, int n) {
  Eigen::VectorXd x(n);
  for (int k = 0; k < n; ++k) {
    // ascending order: k = 0 is closest to a
    const double c = -std::cos((2.0 * k + 1.0) * std::numbers::pi / (2.0 * n));
    x[k] = 0.5 * (a + b) + 0.5 * (b - a) * c;
  }
  return x;
}

double chebyshev_eval(double a, double b, const Eigen::Ref<const Eigen::VectorXd>& values, double x) {
  const int n = static_cast<int>(values.size());
  const double t = (2.0 * x - a - b) / (b - a);
  double num = 0.0;
  double den = 0.0;
  for (int k = 0; k < n; ++k) {
    const double theta = (2.0 * k + 1.0) * std::numbers::pi / (2.0 * n);
    const double node = -std::cos(theta);
    const double diff = t - node;
    if (diff == 0.0) return values[k];
    // first-kind barycentric weights, sign alternates with k
    const double w = ((k % 2 == 0) ? 1.0 : -1.0) * std::sin(theta) / diff;
    num += w * values[k];
    den += w;
  }
  return num / den;
}

PiecewiseChebyshev::PiecewiseChebyshev(std::vector<double> breaks, int degree)
    : breaks_(std::move(breaks)), degree_(degree) {
  if (breaks_.size() < 2 || degree_ < 1) throw std::invalid_argument("PiecewiseChebyshev: bad layout");
}

std::vector<double> PiecewiseChebyshev::nodes() const {
  std::vector<double> out;
  out.reserve((breaks_.size() - 1) * degree_);
  for (std::size_t p = 0; p + 1 < breaks_.size(); ++p) {
    const Eigen::VectorXd x = chebyshev_nodes(breaks_[p], breaks_[p + 1], degree_);
    out.insert(out.end(), x.data(), x.data() + x.size());
  }
  return out;
}

void PiecewiseChebyshev::set_values(std::span<const double> values) {
  const std::size_t panels = breaks_.size() - 1;
  if (values.size() != panels * static_cast<std::size_t>(degree_)) {
    throw std::invalid_argument("PiecewiseChebyshev: value count does not match layout");
  }
  values_.assign(panels, Eigen::VectorXd(degree_));
  for (std::size_t p = 0; p < panels; ++p) {
    for (int k = 0; k < degree_; ++k) values_[p][k] = values[p * degree_ + k];
  }
}

double PiecewiseChebyshev::operator()(double x) const {
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
  std::size_t p = it == breaks_.begin() ? 0 : static_cast<std::size_t>(it - breaks_.begin()) - 1;
  p = std::min(p, values_.size() - 1);
  return chebyshev_eval(breaks_[p], breaks_[p + 1], values_[p], x);
}

}  // namespace kurthbif
