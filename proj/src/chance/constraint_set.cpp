#include "pcmpc/chance/constraint_set.hpp"

#include <cmath>

#include "pcmpc/common/error.hpp"

namespace pcmpc::chance {

int ConstraintFunction::degree() const {
  int d = 0;
  for (const auto& t : terms) {
    int s = 0;
    for (auto [l, p] : t.powers) s += p;
    d = std::max(d, s);
  }
  return d;
}

double ConstraintFunction::eval(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  double g = constant;
  for (const auto& t : terms) {
    double v = t.coeff;
    for (auto [l, p] : t.powers) v *= std::pow(x[l], p);
    g += v;
  }
  return g;
}

Eigen::VectorXd ConstraintFunction::gradient(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(x.size());
  for (const auto& t : terms) {
    for (std::size_t a = 0; a < t.powers.size(); ++a) {
      const auto [la, pa] = t.powers[a];
      if (pa == 0) continue;
      double v = t.coeff * pa * std::pow(x[la], pa - 1);
      for (std::size_t b = 0; b < t.powers.size(); ++b)
        if (b != a) v *= std::pow(x[t.powers[b].first], t.powers[b].second);
      grad[la] += v;
    }
  }
  return grad;
}

ConstraintFunction ConstraintFunction::affine(int time, int state, double scale, double offset) {
  ConstraintFunction g;
  g.time = time;
  g.constant = offset;
  g.terms.push_back({scale, {{state, 1}}});
  return g;
}

ConstraintSet::ConstraintSet(polychaos::BasisPtr basis, int n_states)
    : basis_(std::move(basis)), n_states_(n_states) {
  if (!basis_ || n_states < 1) throw DimensionError("ConstraintSet: need a basis and states");
}

int ConstraintSet::add_time(double t) {
  for (std::size_t i = 0; i < times_.size(); ++i)
    if (times_[i] == t) return static_cast<int>(i);
  times_.push_back(t);
  return static_cast<int>(times_.size()) - 1;
}

void ConstraintSet::add(ConstraintFunction g) {
  if (g.time < 0 || g.time >= static_cast<int>(times_.size()))
    throw DimensionError("ConstraintSet::add: unknown constraint time");
  for (const auto& t : g.terms)
    for (auto [l, p] : t.powers)
      if (l < 0 || l >= n_states_ || p < 0) throw DimensionError("ConstraintSet::add: bad state power");
  g_.push_back(std::move(g));
}

void ConstraintSet::check(const std::vector<Eigen::VectorXd>& X) const {
  if (X.size() != times_.size()) throw DimensionError("ConstraintSet: one coefficient vector per time");
  for (const auto& x : X)
    if (x.size() != static_cast<Eigen::Index>(n_states_) * basis_->size())
      throw DimensionError("ConstraintSet: coefficient vector size mismatch");
}

Eigen::VectorXd ConstraintSet::states_at(const std::vector<Eigen::VectorXd>& X, int t,
                                         const Eigen::Ref<const Eigen::VectorXd>& psi) const {
  const int n = basis_->size();
  Eigen::VectorXd x(n_states_);
  for (int l = 0; l < n_states_; ++l) x[l] = X[t].segment(static_cast<Eigen::Index>(l) * n, n).dot(psi);
  return x;
}

Eigen::VectorXd ConstraintSet::eval(const std::vector<Eigen::VectorXd>& X,
                                    const Eigen::Ref<const Eigen::VectorXd>& xi) const {
  check(X);
  const Eigen::VectorXd psi = basis_->eval(xi);
  Eigen::VectorXd g(size());
  for (int i = 0; i < size(); ++i) g[i] = g_[i].eval(states_at(X, g_[i].time, psi));
  return g;
}

Eigen::MatrixXd ConstraintSet::eval_rows(const std::vector<Eigen::VectorXd>& X,
                                         const Eigen::Ref<const Eigen::MatrixXd>& psi_rows) const {
  check(X);
  const int n = basis_->size();
  if (psi_rows.cols() != n) throw DimensionError("ConstraintSet::eval_rows: Psi width mismatch");
  std::vector<Eigen::MatrixXd> states(times_.size());
  for (std::size_t t = 0; t < times_.size(); ++t) {
    const Eigen::Map<const Eigen::MatrixXd> C(X[t].data(), n, n_states_);
    states[t] = psi_rows * C;
  }
  Eigen::MatrixXd G(psi_rows.rows(), size());
  for (Eigen::Index r = 0; r < psi_rows.rows(); ++r)
    for (int i = 0; i < size(); ++i) G(r, i) = g_[i].eval(states[g_[i].time].row(r).transpose());
  return G;
}

Eigen::VectorXd ConstraintSet::gradient(int i, const std::vector<Eigen::VectorXd>& X,
                                        const Eigen::Ref<const Eigen::VectorXd>& psi) const {
  const int n = basis_->size();
  const auto x = states_at(X, g_[i].time, psi);
  const auto dg = g_[i].gradient(x);
  Eigen::VectorXd out(static_cast<Eigen::Index>(n_states_) * n);
  for (int l = 0; l < n_states_; ++l) out.segment(static_cast<Eigen::Index>(l) * n, n) = dg[l] * psi;
  return out;
}

}  // namespace pcmpc::chance
