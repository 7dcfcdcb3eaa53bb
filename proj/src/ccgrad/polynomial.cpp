#include "pcmpc/ccgrad/polynomial.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace pcmpc::ccgrad {

int Polynomial::degree() const {
  const double big = c.size() ? c.cwiseAbs().maxCoeff() : 0.0;
  for (Eigen::Index k = c.size() - 1; k >= 0; --k)
    if (std::abs(c[k]) > 1e-14 * big && c[k] != 0.0) return static_cast<int>(k);
  return -1;
}

double Polynomial::operator()(double t) const {
  double v = 0.0;
  for (Eigen::Index k = c.size() - 1; k >= 0; --k) v = v * t + c[k];
  return v;
}

double Polynomial::derivative(double t) const {
  double v = 0.0;
  for (Eigen::Index k = c.size() - 1; k >= 1; --k) v = v * t + k * c[k];
  return v;
}

double Polynomial::scale(double t) const {
  double v = 0.0;
  const double a = std::abs(t);
  for (Eigen::Index k = c.size() - 1; k >= 0; --k) v = v * a + std::abs(c[k]);
  return v;
}

double Polynomial::derivative_scale(double t) const {
  double v = 0.0;
  const double a = std::abs(t);
  for (Eigen::Index k = c.size() - 1; k >= 1; --k) v = v * a + k * std::abs(c[k]);
  return v;
}

Polynomial interpolate_chebyshev(const std::function<double(double)>& f, int degree,
                                 double half_width) {
  const int n = degree + 1;
  Eigen::MatrixXd V(n, n);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const double tau = n == 1 ? 0.0 : std::cos(M_PI * (2.0 * i + 1.0) / (2.0 * n));
    y[i] = f(half_width * tau);
    double p = 1.0;
    for (int k = 0; k < n; ++k) {
      V(i, k) = p;
      p *= tau;
    }
  }
  Polynomial poly;
  poly.c = V.colPivHouseholderQr().solve(y);
  double s = 1.0;
  for (int k = 0; k < n; ++k) {
    poly.c[k] /= s;
    s *= half_width;
  }
  return poly;
}

namespace {

// Diagonal similarity scaling by powers of two (Parlett-Reinsch).
void balance(Eigen::MatrixXd& A) {
  const int n = static_cast<int>(A.rows());
  bool done = false;
  while (!done) {
    done = true;
    for (int i = 0; i < n; ++i) {
      double r = 0.0, c = 0.0;
      for (int j = 0; j < n; ++j)
        if (j != i) {
          c += std::abs(A(j, i));
          r += std::abs(A(i, j));
        }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / 2.0, f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= 2.0;
        c *= 4.0;
      }
      g = r * 2.0;
      while (c > g) {
        f /= 2.0;
        c /= 4.0;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        A.row(i) /= f;
        A.col(i) *= f;
      }
    }
  }
}

}  // namespace

RootResult real_roots(const Polynomial& p, double lower, double upper, double root_tol,
                      double dedup_tol) {
  RootResult res;
  const int d = p.degree();
  if (d <= 0) return res;
  std::vector<double> cand;
  if (d == 1) {
    cand.push_back(-p.c[0] / p.c[1]);
  } else {
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(d, d);
    for (int i = 1; i < d; ++i) C(i, i - 1) = 1.0;
    for (int i = 0; i < d; ++i) C(i, d - 1) = -p.c[i] / p.c[d];
    balance(C);
    Eigen::EigenSolver<Eigen::MatrixXd> es(C, false);
    if (es.info() != Eigen::Success) {
      res.ok = false;
      res.reason = "eigenvalue iteration did not converge";
      return res;
    }
    for (int i = 0; i < d; ++i) {
      const auto z = es.eigenvalues()[i];
      // Near-real pairs are kept so that tangencies are caught below.
      if (std::abs(z.imag()) <= 1e-6 * std::max(1.0, std::abs(z.real()))) cand.push_back(z.real());
    }
  }
  for (double& r : cand) {
    for (int it = 0; it < 4; ++it) {
      const double dv = p.derivative(r);
      if (dv == 0.0) break;
      const double step = p(r) / dv;
      const double next = r - step;
      if (std::abs(p(next)) >= std::abs(p(r))) break;
      r = next;
    }
  }
  std::sort(cand.begin(), cand.end());
  for (double r : cand) {
    if (!(r > lower && r < upper)) continue;
    const double sc = std::max(p.scale(r), 1e-300);
    if (std::abs(p(r)) > root_tol * sc) continue;
    if (std::abs(p.derivative(r)) <= std::sqrt(root_tol) * p.derivative_scale(r)) {
      res.ok = false;
      res.reason = "repeated root";
      return res;
    }
    if (!res.roots.empty() && r - res.roots.back() < dedup_tol) {
      res.ok = false;
      res.reason = "roots closer than dedup tolerance";
      return res;
    }
    res.roots.push_back(r);
  }
  return res;
}

}  // namespace pcmpc::ccgrad
