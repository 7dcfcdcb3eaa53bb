#include "pcmpc/nlp/qp.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Cholesky>

#include "pcmpc/common/error.hpp"

namespace pcmpc::nlp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Rows in the form n_i' x >= c_i.
struct Rows {
  Eigen::MatrixXd N;  // n x m (columns are normals)
  Eigen::VectorXd c;
};

bool add_constraint(Eigen::MatrixXd& R, Eigen::MatrixXd& J, Eigen::VectorXd& d, int& iq, double& r_norm) {
  const int n = static_cast<int>(d.size());
  for (int j = n - 1; j >= iq + 1; --j) {
    double cc = d[j - 1], ss = d[j];
    const double h = std::hypot(cc, ss);
    if (h == 0.0) continue;
    d[j] = 0.0;
    ss /= h;
    cc /= h;
    if (cc < 0.0) {
      cc = -cc;
      ss = -ss;
      d[j - 1] = -h;
    } else {
      d[j - 1] = h;
    }
    const double xny = ss / (1.0 + cc);
    for (int k = 0; k < n; ++k) {
      const double t1 = J(k, j - 1), t2 = J(k, j);
      J(k, j - 1) = t1 * cc + t2 * ss;
      J(k, j) = xny * (t1 + J(k, j - 1)) - t2;
    }
  }
  ++iq;
  for (int i = 0; i < iq; ++i) R(i, iq - 1) = d[i];
  if (std::abs(d[iq - 1]) <= std::numeric_limits<double>::epsilon() * r_norm) return false;
  r_norm = std::max(r_norm, std::abs(d[iq - 1]));
  return true;
}

void delete_constraint(Eigen::MatrixXd& R, Eigen::MatrixXd& J, std::vector<int>& active,
                       Eigen::VectorXd& u, int& iq, int l) {
  const int n = static_cast<int>(J.rows());
  int qq = -1;
  for (int i = 0; i < iq; ++i)
    if (active[i] == l) {
      qq = i;
      break;
    }
  if (qq < 0) return;
  for (int i = qq; i < iq - 1; ++i) {
    active[i] = active[i + 1];
    u[i] = u[i + 1];
    R.col(i) = R.col(i + 1);
  }
  active[iq - 1] = active[iq];
  u[iq - 1] = u[iq];
  active[iq] = -1;
  u[iq] = 0.0;
  R.col(iq - 1).setZero();
  --iq;
  if (iq == 0) return;
  for (int j = qq; j < iq; ++j) {
    double cc = R(j, j), ss = R(j + 1, j);
    const double h = std::hypot(cc, ss);
    if (h == 0.0) continue;
    cc /= h;
    ss /= h;
    R(j + 1, j) = 0.0;
    if (cc < 0.0) {
      R(j, j) = -h;
      cc = -cc;
      ss = -ss;
    } else {
      R(j, j) = h;
    }
    const double xny = ss / (1.0 + cc);
    for (int k = j + 1; k < iq; ++k) {
      const double t1 = R(j, k), t2 = R(j + 1, k);
      R(j, k) = t1 * cc + t2 * ss;
      R(j + 1, k) = xny * (t1 + R(j, k)) - t2;
    }
    for (int k = 0; k < n; ++k) {
      const double t1 = J(k, j), t2 = J(k, j + 1);
      J(k, j) = t1 * cc + t2 * ss;
      J(k, j + 1) = xny * (J(k, j) + t1) - t2;
    }
  }
}

}  // namespace

QpResult solve_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const Eigen::MatrixXd& A,
                  const Eigen::VectorXd& b, const Eigen::VectorXd& lower,
                  const Eigen::VectorXd& upper, int max_iter) {
  const int n = static_cast<int>(g.size());
  if (H.rows() != n || H.cols() != n) throw DimensionError("solve_qp: H shape");
  if (A.rows() != b.size() || (A.rows() > 0 && A.cols() != n)) throw DimensionError("solve_qp: A shape");
  if ((lower.size() && lower.size() != n) || (upper.size() && upper.size() != n))
    throw DimensionError("solve_qp: bound size");

  // Stack general rows and finite bounds as n' x >= c.
  std::vector<std::pair<int, int>> origin;  // (kind 0 row / 1 lower / 2 upper, index)
  for (int i = 0; i < A.rows(); ++i) origin.emplace_back(0, i);
  for (int j = 0; j < n; ++j) {
    if (lower.size() && std::isfinite(lower[j])) origin.emplace_back(1, j);
    if (upper.size() && std::isfinite(upper[j])) origin.emplace_back(2, j);
  }
  const int m = static_cast<int>(origin.size());
  Rows rows{Eigen::MatrixXd::Zero(n, m), Eigen::VectorXd::Zero(m)};
  for (int i = 0; i < m; ++i) {
    const auto [kind, k] = origin[i];
    if (kind == 0) {
      rows.N.col(i) = -A.row(k).transpose();
      rows.c[i] = -b[k];
    } else if (kind == 1) {
      rows.N(k, i) = 1.0;
      rows.c[i] = lower[k];
    } else {
      rows.N(k, i) = -1.0;
      rows.c[i] = -upper[k];
    }
  }
  if (max_iter <= 0) max_iter = 50 * (n + m) + 100;

  QpResult res;
  Eigen::LLT<Eigen::MatrixXd> llt(H);
  if (llt.info() != Eigen::Success) {
    res.status = QpStatus::NotConvex;
    return res;
  }
  const Eigen::MatrixXd L = llt.matrixL();
  Eigen::MatrixXd J = L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n)).transpose();
  Eigen::VectorXd x = -llt.solve(g);
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n, n);
  double r_norm = 1.0;
  std::vector<int> active(n + 1, -1);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n + 1);
  std::vector<char> is_active(m, 0);
  int iq = 0;
  Eigen::VectorXd d(n), z(n), r(n + 1);
  const double eps = 1e-12;

  auto finish = [&](QpStatus st) {
    res.status = st;
    res.x = x;
    res.objective = 0.5 * x.dot(H * x) + g.dot(x);
    res.lambda = Eigen::VectorXd::Zero(A.rows());
    res.lambda_lower = Eigen::VectorXd::Zero(n);
    res.lambda_upper = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < iq; ++i) {
      const auto [kind, k] = origin[active[i]];
      (kind == 0 ? res.lambda : kind == 1 ? res.lambda_lower : res.lambda_upper)[k] = u[i];
    }
    return res;
  };

  for (int it = 0; it < max_iter; ++it) {
    res.iterations = it + 1;
    // Step 1: most violated constraint (lowest index on ties).
    int p = -1;
    double worst = 0.0;
    for (int i = 0; i < m; ++i) {
      if (is_active[i]) continue;
      const double s = rows.N.col(i).dot(x) - rows.c[i];
      const double scale = 1.0 + std::abs(rows.c[i]);
      if (s < -eps * scale && s < worst) {
        worst = s;
        p = i;
      }
    }
    if (p < 0) return finish(QpStatus::Optimal);
    u[iq] = 0.0;
    // Step 2: move along the dual/primal direction until p is satisfied.
    while (true) {
      if (++it > max_iter) return finish(QpStatus::MaxIter);
      const Eigen::VectorXd np = rows.N.col(p);
      d = J.transpose() * np;
      z.setZero();
      for (int j = iq; j < n; ++j) z += J.col(j) * d[j];
      for (int i = iq - 1; i >= 0; --i) {
        double s = d[i];
        for (int k = i + 1; k < iq; ++k) s -= R(i, k) * r[k];
        r[i] = s / R(i, i);
      }
      double t1 = kInf;
      int l = -1;
      for (int k = 0; k < iq; ++k)
        if (r[k] > 0.0 && u[k] / r[k] < t1) {
          t1 = u[k] / r[k];
          l = active[k];
        }
      const double sp = np.dot(x) - rows.c[p];
      double t2 = kInf;
      const double zn = z.dot(np);
      if (z.norm() > eps && zn > 0.0) t2 = -sp / zn;
      const double t = std::min(t1, t2);
      if (!std::isfinite(t)) return finish(QpStatus::Infeasible);
      if (!std::isfinite(t2)) {
        for (int k = 0; k < iq; ++k) u[k] -= t * r[k];
        u[iq] += t;
        is_active[l] = 0;
        delete_constraint(R, J, active, u, iq, l);
        continue;
      }
      x += t * z;
      for (int k = 0; k < iq; ++k) u[k] -= t * r[k];
      u[iq] += t;
      if (t == t2) {
        d = J.transpose() * np;
        if (!add_constraint(R, J, d, iq, r_norm)) {
          // Numerically dependent: treat as satisfied.
          --iq;
          u[iq] = 0.0;
          break;
        }
        active[iq - 1] = p;
        is_active[p] = 1;
        break;
      }
      is_active[l] = 0;
      delete_constraint(R, J, active, u, iq, l);
    }
  }
  return finish(QpStatus::MaxIter);
}

}  // namespace pcmpc::nlp
