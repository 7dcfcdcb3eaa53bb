#include "pcmpc/ccgrad/gradient.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include "pcmpc/common/error.hpp"
#include "pcmpc/common/parallel.hpp"

namespace pcmpc::ccgrad {

using polychaos::Family;

SliceBuilder::SliceBuilder(const chance::ConstraintSet& cs, const std::vector<Eigen::VectorXd>& X,
                           int slice_var)
    : cs_(cs), X_(X), v_(slice_var) {
  if (v_ < 0 || v_ >= cs.basis().n_xi()) throw DimensionError("slice variable out of range");
  cs.check(X);
}

int SliceBuilder::degree(int i) const {
  const int d = cs_.basis().order() * cs_.functions()[i].degree();
  if (d > 64) throw SizeError("slice polynomial degree overflow");
  return d;
}

std::vector<Polynomial> SliceBuilder::slices(const Eigen::Ref<const Eigen::VectorXd>& xi) const {
  const auto& basis = cs_.basis();
  const auto& idx = basis.indices();
  const int n = basis.size();
  const int P = basis.order();
  const int ns = cs_.n_states();
  const Family fam = basis.family(v_);

  Eigen::MatrixXd table(P + 1, basis.n_xi());
  basis.univariate_table(xi, table);
  Eigen::VectorXd base(n);
  std::vector<int> mv(n);
  for (int k = 0; k < n; ++k) {
    double b = 1.0;
    mv[k] = 0;
    for (auto [dim, ord] : idx.nonzeros(k)) {
      if (dim == v_)
        mv[k] = ord;
      else
        b *= table(ord, dim);
    }
    base[k] = b;
  }
  // State expansions restricted to the slice: coefficient of phi_m(t).
  const int nt = static_cast<int>(cs_.times().size());
  std::vector<Eigen::MatrixXd> cm(nt, Eigen::MatrixXd::Zero(P + 1, ns));
  std::vector<std::vector<bool>> used(nt, std::vector<bool>(ns, false));
  for (const auto& g : cs_.functions())
    for (const auto& t : g.terms)
      for (auto [l, p] : t.powers) used[g.time][l] = true;
  for (int t = 0; t < nt; ++t)
    for (int l = 0; l < ns; ++l) {
      if (!used[t][l]) continue;
      const double* x = X_[t].data() + static_cast<std::size_t>(l) * n;
      for (int k = 0; k < n; ++k) cm[t](mv[k], l) += x[k] * base[k];
    }
  const double hw = fam == Family::Hermite ? 2.0 : 1.0;
  std::vector<Polynomial> out;
  out.reserve(cs_.size());
  Eigen::VectorXd phi(P + 1);
  Eigen::VectorXd state(ns);
  for (int i = 0; i < cs_.size(); ++i) {
    const auto& g = cs_.functions()[i];
    auto f = [&](double tt) {
      polychaos::eval_polys(fam, P, tt, phi);
      state = cm[g.time].transpose() * phi;
      return g.eval(state);
    };
    out.push_back(interpolate_chebyshev(f, degree(i), hw));
  }
  return out;
}

double SliceBuilder::direct(int i, const Eigen::Ref<const Eigen::VectorXd>& xi, double t) const {
  Eigen::VectorXd z = xi;
  z[v_] = t;
  const auto& g = cs_.functions()[i];
  return g.eval(cs_.states_at(X_, g.time, cs_.basis().eval(z)));
}

Polynomial univariate_slice(const chance::ConstraintSet& cs, int i,
                            const std::vector<Eigen::VectorXd>& X,
                            const Eigen::Ref<const Eigen::VectorXd>& xi, int slice_var) {
  return SliceBuilder(cs, X, slice_var).slices(xi).at(i);
}

std::optional<RootVector> find_integration_limits(const std::vector<Polynomial>& slices,
                                                  double lower, double upper,
                                                  const GradConfig& cfg, std::string* reason) {
  std::vector<std::pair<double, int>> all;
  for (std::size_t i = 0; i < slices.size(); ++i) {
    const auto r = real_roots(slices[i], lower, upper, cfg.root_tol, cfg.dedup_tol);
    if (!r.ok) {
      if (reason) *reason = r.reason;
      return std::nullopt;
    }
    for (double v : r.roots) all.emplace_back(v, static_cast<int>(i));
  }
  std::sort(all.begin(), all.end());
  RootVector rv;
  rv.limits.push_back(lower);
  rv.owner.push_back(-1);
  for (std::size_t q = 0; q < all.size(); ++q) {
    if (q > 0 && all[q].first - all[q - 1].first < cfg.dedup_tol) {
      if (reason) *reason = "roots of different constraints coincide";
      return std::nullopt;
    }
    rv.limits.push_back(all[q].first);
    rv.owner.push_back(all[q].second);
  }
  rv.limits.push_back(upper);
  rv.owner.push_back(-1);
  return rv;
}

namespace {

double midpoint(double a, double b) {
  const bool fa = std::isfinite(a), fb = std::isfinite(b);
  if (fa && fb) return 0.5 * (a + b);
  if (fa) return a + 1.0;
  if (fb) return b - 1.0;
  return 0.0;
}

struct Engine {
  const chance::ConstraintSet& cs;
  const std::vector<Eigen::VectorXd>& X;
  const polychaos::SampleMatrix& samples;
  const GradConfig& cfg;
  SliceBuilder builder;
  Family fam;
  double lower, upper;
  std::vector<Eigen::Index> offset;  // start of each time block in the stacked gradient
  Eigen::Index total = 0;

  Engine(const chance::ConstraintSet& c, const std::vector<Eigen::VectorXd>& x,
         const polychaos::SampleMatrix& s, const GradConfig& g)
      : cs(c), X(x), samples(s), cfg(g), builder(c, x, g.slice_var) {
    if (s.n_xi() != c.basis().n_xi()) throw DimensionError("ccgrad: sample dimension mismatch");
    fam = c.basis().family(g.slice_var);
    lower = polychaos::support_lower(fam);
    upper = polychaos::support_upper(fam);
    for (const auto& v : X) {
      offset.push_back(total);
      total += v.size();
    }
  }

  // Returns false when the sample is discarded. grad holds [route A; route B].
  bool process(int j, double& p, Eigen::VectorXd* grad, RootVector* keep) const {
    const Eigen::VectorXd xi = samples.row(j).transpose();
    const auto sl = builder.slices(xi);
    auto rv = find_integration_limits(sl, lower, upper, cfg);
    if (!rv) return false;
    const auto& L = rv->limits;
    const int ni = static_cast<int>(L.size()) - 1;
    std::vector<int> I(ni);
    p = 0.0;
    for (int q = 0; q < ni; ++q) {
      const double m = midpoint(L[q], L[q + 1]);
      bool ok = true;
      for (const auto& s : sl) ok = ok && s(m) <= 0.0;
      I[q] = ok ? 1 : 0;
      if (ok) p += polychaos::standard_cdf(fam, L[q + 1]) - polychaos::standard_cdf(fam, L[q]);
    }
    if (grad) {
      // d[q] = pdf(r_q) * dr_q/dX for interior limits; bounds contribute zero.
      std::vector<Eigen::VectorXd> d(ni + 1);
      std::vector<Eigen::Index> off(ni + 1, 0);
      for (int q = 1; q < ni; ++q) {
        const int c = rv->owner[q];
        const double r = L[q];
        Eigen::VectorXd z = xi;
        z[cfg.slice_var] = r;
        const Eigen::VectorXd psi = cs.basis().eval(z);
        d[q] = -(polychaos::standard_pdf(fam, r) / sl[c].derivative(r)) * cs.gradient(c, X, psi);
        off[q] = offset[cs.functions()[c].time];
      }
      // Route A: sum over intervals of I_q (upper-limit term - lower-limit term).
      for (int q = 0; q < ni; ++q) {
        if (!I[q]) continue;
        if (q + 1 < ni) grad->segment(off[q + 1], d[q + 1].size()) += d[q + 1];
        if (q > 0) grad->segment(off[q], d[q].size()) -= d[q];
      }
      // Route B: per-root jump of the indicator.
      for (int q = 1; q < ni; ++q) {
        const int jump = I[q - 1] - I[q];
        if (jump != 0) grad->segment(total + off[q], d[q].size()) += jump * d[q];
      }
    }
    if (keep) *keep = std::move(*rv);
    return true;
  }
};

}  // namespace

namespace {

constexpr int kBlock = 64;

struct Accumulated {
  Eigen::VectorXd grad;
  double p = 0.0;
  int kept = 0;
  std::vector<std::optional<RootVector>> roots;
};

Accumulated run(const Engine& eng, bool want_grad, bool want_roots) {
  const int N = eng.samples.rows();
  const int nb = (N + kBlock - 1) / kBlock;
  const Eigen::Index len = want_grad ? 2 * eng.total : 0;
  std::vector<Eigen::VectorXd> bgrad(nb, Eigen::VectorXd::Zero(len));
  std::vector<double> p(N, 0.0);
  std::vector<char> kept(N, 0);
  Accumulated acc;
  if (want_roots) acc.roots.resize(N);
  parallel_for(nb, [&](std::size_t b0, std::size_t b1) {
    for (std::size_t b = b0; b < b1; ++b) {
      const std::size_t s0 = b * kBlock, s1 = std::min<std::size_t>(N, s0 + kBlock);
      auto body = [&](std::size_t j, Eigen::Ref<Eigen::VectorXd> out) {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(len);
        RootVector rv;
        double pj = 0.0;
        const bool ok = eng.process(static_cast<int>(j), pj, want_grad ? &g : nullptr,
                                    want_roots ? &rv : nullptr);
        if (!ok) return;
        kept[j] = 1;
        p[j] = pj;
        if (want_grad) out += g;
        if (want_roots) acc.roots[j] = std::move(rv);
      };
      pairwise_sum_into(s0, s1, bgrad[b], body);
    }
  });
  if (want_grad) {
    acc.grad = Eigen::VectorXd::Zero(len);
    pairwise_sum_into(0, nb, acc.grad, [&](std::size_t b, Eigen::Ref<Eigen::VectorXd> out) { out += bgrad[b]; });
  }
  for (char k : kept) acc.kept += k;
  acc.p = pairwise_sum(0, N, [&](std::size_t j) { return p[j]; });
  return acc;
}

void dump_roots(const std::string& path, const Accumulated& acc) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open '" + path + "' for writing");
  os << "sample,position,limit,constraint\n" << std::setprecision(17);
  for (std::size_t j = 0; j < acc.roots.size(); ++j) {
    if (!acc.roots[j]) {
      os << j << ",-1,nan,-1\n";
      continue;
    }
    const auto& rv = *acc.roots[j];
    for (std::size_t q = 0; q < rv.limits.size(); ++q)
      os << j << ',' << q << ',' << rv.limits[q] << ',' << rv.owner[q] << '\n';
  }
}

}  // namespace

double smooth_probability(const chance::ConstraintSet& cs, const std::vector<Eigen::VectorXd>& X,
                          const polychaos::SampleMatrix& samples, const GradConfig& cfg,
                          int* n_discarded) {
  Engine eng(cs, X, samples, cfg);
  const auto acc = run(eng, false, !cfg.dump_path.empty());
  if (!cfg.dump_path.empty()) dump_roots(cfg.dump_path, acc);
  if (n_discarded) *n_discarded = samples.rows() - acc.kept;
  if (acc.kept == 0) throw ConvergenceError("smooth_probability: every sample was discarded");
  return acc.p / acc.kept;
}

GradResult gradient(const chance::ConstraintSet& cs, const std::vector<Eigen::VectorXd>& X,
                    const polychaos::SampleMatrix& samples,
                    const std::vector<Eigen::MatrixXd>& sensitivities, const GradConfig& cfg) {
  Engine eng(cs, X, samples, cfg);
  const auto acc = run(eng, true, !cfg.dump_path.empty());
  if (!cfg.dump_path.empty()) dump_roots(cfg.dump_path, acc);
  GradResult res;
  res.n_samples = samples.rows();
  res.n_discarded = samples.rows() - acc.kept;
  if (acc.kept == 0) throw ConvergenceError("ccgrad: every sample was discarded");
  res.p_smooth = acc.p / acc.kept;
  const double inv = 1.0 / acc.kept;
  for (std::size_t t = 0; t < X.size(); ++t) {
    res.dP_dX.push_back(acc.grad.segment(eng.offset[t], X[t].size()) * inv);
    res.dP_dX_alt.push_back(acc.grad.segment(eng.total + eng.offset[t], X[t].size()) * inv);
    res.max_route_difference =
        std::max(res.max_route_difference, (res.dP_dX[t] - res.dP_dX_alt[t]).cwiseAbs().maxCoeff());
  }
  if (!sensitivities.empty()) {
    if (sensitivities.size() != X.size()) throw DimensionError("ccgrad: one sensitivity block per time");
    const Eigen::Index npi = sensitivities.front().cols();
    res.dP_dpi = Eigen::VectorXd::Zero(npi);
    for (std::size_t t = 0; t < X.size(); ++t) {
      if (sensitivities[t].rows() != X[t].size() || sensitivities[t].cols() != npi)
        throw DimensionError("ccgrad: sensitivity block shape");
      res.dP_dpi += sensitivities[t].transpose() * res.dP_dX[t];
    }
  }
  return res;
}

}  // namespace pcmpc::ccgrad
