#include "pcmpc/galerkin/expanded_ode.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "pcmpc/common/error.hpp"
#include "pcmpc/polychaos/serialization.hpp"

namespace pcmpc::galerkin {

ExpandedOde::ExpandedOde(polychaos::BasisPtr basis, int n_states, int n_inputs,
                         std::vector<InputFunction> inputs, std::vector<Kernel> kernels,
                         std::vector<ProjectedTerm> terms, int quadrature_nodes)
    : basis_(std::move(basis)),
      n_states_(n_states),
      n_inputs_(n_inputs),
      n_coeffs_(basis_->size()),
      quadrature_nodes_(quadrature_nodes),
      inputs_(std::move(inputs)),
      kernels_(std::move(kernels)),
      terms_(std::move(terms)) {
  const int d = dim();
  for (const auto& k : kernels_) {
    if (k.idx.size() != k.w.size() * k.degree || k.out.size() != k.w.size())
      throw DimensionError("ExpandedOde: malformed kernel");
    for (auto o : k.out)
      if (o < 0 || o >= n_coeffs_) throw DimensionError("ExpandedOde: kernel output out of range");
    for (auto i : k.idx)
      if (i < 0 || i >= d) throw DimensionError("ExpandedOde: kernel index out of range");
  }
  for (const auto& t : terms_) {
    if (t.state < 0 || t.state >= n_states_ || t.kernel < 0 ||
        t.kernel >= static_cast<int>(kernels_.size()) || t.input >= static_cast<int>(inputs_.size()))
      throw DimensionError("ExpandedOde: malformed term");
  }
}

std::size_t ExpandedOde::instruction_count() const {
  std::size_t n = 0;
  for (const auto& k : kernels_) n += k.size();
  return n;
}

ExpandedOde::Workspace ExpandedOde::make_workspace() const {
  Workspace ws;
  ws.kv.resize(static_cast<Eigen::Index>(kernels_.size()) * n_coeffs_);
  ws.sig.resize(inputs_.size());
  ws.dsig.resize(inputs_.size());
  return ws;
}

namespace {

void eval_kernel(const Kernel& k, const double* x, double* out) {
  const std::size_t n = k.size();
  const auto* o = k.out.data();
  const auto* idx = k.idx.data();
  const double* w = k.w.data();
  switch (k.degree) {
    case 0:
      for (std::size_t e = 0; e < n; ++e) out[o[e]] += w[e];
      break;
    case 1:
      for (std::size_t e = 0; e < n; ++e) out[o[e]] += w[e] * x[idx[e]];
      break;
    case 2:
      for (std::size_t e = 0; e < n; ++e) out[o[e]] += w[e] * x[idx[2 * e]] * x[idx[2 * e + 1]];
      break;
    default:
      for (std::size_t e = 0; e < n; ++e) {
        double v = w[e];
        for (int s = 0; s < k.degree; ++s) v *= x[idx[e * k.degree + s]];
        out[o[e]] += v;
      }
  }
}

inline void axpy(double a, const double* x, double* y, int n) {
  for (int c = 0; c < n; ++c) y[c] += a * x[c];
}

}  // namespace

void ExpandedOde::rhs(const Eigen::Ref<const Eigen::VectorXd>& x,
                      const Eigen::Ref<const Eigen::VectorXd>& u, Eigen::Ref<Eigen::VectorXd> dx,
                      Workspace& ws) const {
  if (x.size() != dim() || dx.size() != dim() || u.size() != n_inputs_)
    throw DimensionError("ExpandedOde::rhs: dimension mismatch");
  const int n = n_coeffs_;
  ws.kv.setZero();
  for (std::size_t k = 0; k < kernels_.size(); ++k) eval_kernel(kernels_[k], x.data(), ws.kv.data() + k * n);
  for (std::size_t f = 0; f < inputs_.size(); ++f) ws.sig[f] = inputs_[f].value(u);
  dx.setZero();
  for (const auto& t : terms_) {
    const double s = t.coeff * (t.input >= 0 ? ws.sig[t.input] : 1.0);
    dx.segment(static_cast<Eigen::Index>(t.state) * n, n) += s * ws.kv.segment(static_cast<Eigen::Index>(t.kernel) * n, n);
  }
}

Eigen::VectorXd ExpandedOde::rhs(const Eigen::Ref<const Eigen::VectorXd>& x,
                                 const Eigen::Ref<const Eigen::VectorXd>& u) const {
  auto ws = make_workspace();
  Eigen::VectorXd dx(dim());
  rhs(x, u, dx, ws);
  return dx;
}

void ExpandedOde::rhs_with_sensitivity(const Eigen::Ref<const Eigen::VectorXd>& x,
                                       const Eigen::Ref<const Eigen::VectorXd>& u,
                                       const Eigen::Ref<const Eigen::MatrixXd>& du_dpi,
                                       const double* S, int n_cols, int ld,
                                       Eigen::Ref<Eigen::VectorXd> dx, double* dS,
                                       Workspace& ws) const {
  rhs(x, u, dx, ws);
  const int n = n_coeffs_;
  const int D = dim();
  for (int r = 0; r < D; ++r) std::fill(dS + static_cast<std::size_t>(r) * ld, dS + static_cast<std::size_t>(r) * ld + n_cols, 0.0);
  if (n_cols == 0) return;
  if (du_dpi.rows() != n_inputs_ || du_dpi.cols() < n_cols)
    throw DimensionError("ExpandedOde::rhs_with_sensitivity: du_dpi shape");
  const std::size_t nk = kernels_.size();
  const std::size_t need = nk * n * static_cast<std::size_t>(n_cols);
  if (static_cast<std::size_t>(ws.ks.size()) < need) ws.ks.resize(need);
  std::fill(ws.ks.data(), ws.ks.data() + need, 0.0);
  const double* xp = x.data();
  for (std::size_t k = 0; k < nk; ++k) {
    const Kernel& K = kernels_[k];
    double* base = ws.ks.data() + k * n * n_cols;
    const std::size_t ne = K.size();
    if (K.degree == 1) {
      for (std::size_t e = 0; e < ne; ++e)
        axpy(K.w[e], S + static_cast<std::size_t>(K.idx[e]) * ld, base + static_cast<std::size_t>(K.out[e]) * n_cols, n_cols);
    } else if (K.degree == 2) {
      for (std::size_t e = 0; e < ne; ++e) {
        const int a = K.idx[2 * e], b = K.idx[2 * e + 1];
        double* row = base + static_cast<std::size_t>(K.out[e]) * n_cols;
        const double* sa = S + static_cast<std::size_t>(a) * ld;
        const double* sb = S + static_cast<std::size_t>(b) * ld;
        const double wa = K.w[e] * xp[b], wb = K.w[e] * xp[a];
        for (int c = 0; c < n_cols; ++c) row[c] += wa * sa[c] + wb * sb[c];
      }
    } else if (K.degree > 2) {
      for (std::size_t e = 0; e < ne; ++e) {
        double* row = base + static_cast<std::size_t>(K.out[e]) * n_cols;
        for (int s = 0; s < K.degree; ++s) {
          double v = K.w[e];
          for (int r = 0; r < K.degree; ++r)
            if (r != s) v *= xp[K.idx[e * K.degree + r]];
          axpy(v, S + static_cast<std::size_t>(K.idx[e * K.degree + s]) * ld, row, n_cols);
        }
      }
    }
  }
  for (std::size_t f = 0; f < inputs_.size(); ++f) ws.dsig[f] = inputs_[f].derivative(u);
  Eigen::VectorXd dsig_row(n_cols);
  for (const auto& t : terms_) {
    const double s = t.coeff * (t.input >= 0 ? ws.sig[t.input] : 1.0);
    const double* ks = ws.ks.data() + static_cast<std::size_t>(t.kernel) * n * n_cols;
    const double* kv = ws.kv.data() + static_cast<std::size_t>(t.kernel) * n;
    bool input_dep = false;
    if (t.input >= 0 && inputs_[t.input].kind != InputFunction::Kind::One) {
      const auto& f = inputs_[t.input];
      dsig_row = t.coeff * ws.dsig[t.input] * du_dpi.row(f.channel).head(n_cols).transpose();
      input_dep = dsig_row.cwiseAbs().maxCoeff() > 0.0;
    }
    for (int o = 0; o < n; ++o) {
      double* row = dS + (static_cast<std::size_t>(t.state) * n + o) * ld;
      axpy(s, ks + static_cast<std::size_t>(o) * n_cols, row, n_cols);
      if (input_dep && kv[o] != 0.0) axpy(kv[o], dsig_row.data(), row, n_cols);
    }
  }
}

Eigen::MatrixXd ExpandedOde::jacobian_x(const Eigen::Ref<const Eigen::VectorXd>& x,
                                        const Eigen::Ref<const Eigen::VectorXd>& u) const {
  const int n = n_coeffs_;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(dim(), dim());
  for (const auto& t : terms_) {
    const Kernel& K = kernels_[t.kernel];
    const double s = t.coeff * (t.input >= 0 ? inputs_[t.input].value(u) : 1.0);
    for (std::size_t e = 0; e < K.size(); ++e) {
      const int row = t.state * n + K.out[e];
      for (int a = 0; a < K.degree; ++a) {
        double v = s * K.w[e];
        for (int r = 0; r < K.degree; ++r)
          if (r != a) v *= x[K.idx[e * K.degree + r]];
        J(row, K.idx[e * K.degree + a]) += v;
      }
    }
  }
  return J;
}

Eigen::MatrixXd ExpandedOde::jacobian_u(const Eigen::Ref<const Eigen::VectorXd>& x,
                                        const Eigen::Ref<const Eigen::VectorXd>& u) const {
  const int n = n_coeffs_;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(dim(), n_inputs_);
  Eigen::VectorXd kv = Eigen::VectorXd::Zero(n);
  for (const auto& t : terms_) {
    if (t.input < 0 || inputs_[t.input].kind == InputFunction::Kind::One) continue;
    kv.setZero();
    eval_kernel(kernels_[t.kernel], x.data(), kv.data());
    const auto& f = inputs_[t.input];
    J.block(static_cast<Eigen::Index>(t.state) * n, f.channel, n, 1) += t.coeff * f.derivative(u) * kv;
  }
  return J;
}

Eigen::VectorXd ExpandedOde::means(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  Eigen::VectorXd m(n_states_);
  for (int l = 0; l < n_states_; ++l) m[l] = x[static_cast<Eigen::Index>(l) * n_coeffs_];
  return m;
}

namespace {

std::vector<int> factor_list(const Monomial& m) {
  std::vector<int> f;
  for (int l = 0; l < static_cast<int>(m.exponents.size()); ++l)
    for (int e = 0; e < m.exponents[l]; ++e) f.push_back(l);
  return f;
}

Kernel compile_kernel(const std::vector<int>& factors, int param, const PolynomialOde& model,
                      const ProjectionTensor& tensor) {
  const int n = tensor.basis().size();
  Kernel K;
  K.degree = static_cast<int>(factors.size());
  K.factors = factors;
  K.param = param;
  std::vector<std::vector<int>> slots;
  const Eigen::VectorXd* pc = nullptr;
  if (param >= 0) {
    pc = &model.parameters()[param].coeffs();
    std::vector<int> supp;
    for (int c = 0; c < n; ++c)
      if ((*pc)[c] != 0.0) supp.push_back(c);
    slots.push_back(std::move(supp));
  }
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  for (std::size_t s = 0; s < factors.size(); ++s) slots.push_back(all);
  if (slots.empty()) {
    K.out.push_back(0);
    K.w.push_back(1.0);
    return K;
  }
  if (!slots.front().empty() || param < 0) {
    const int off = param >= 0 ? 1 : 0;
    std::vector<std::int32_t> outs, idx;
    std::vector<double> ws;
    tensor.enumerate(slots, [&](std::span<const int> t, int o, double v) {
      const double w = param >= 0 ? v * (*pc)[t[0]] : v;
      outs.push_back(o);
      for (int s = 0; s < K.degree; ++s) idx.push_back(factors[s] * n + t[s + off]);
      ws.push_back(w);
    });
    // Sort by (out, indices) and merge entries that differ only in the
    // folded parameter coefficient.
    std::vector<std::size_t> perm(ws.size());
    std::iota(perm.begin(), perm.end(), 0);
    const int d = K.degree;
    auto key_less = [&](std::size_t a, std::size_t b) {
      if (outs[a] != outs[b]) return outs[a] < outs[b];
      for (int s = 0; s < d; ++s)
        if (idx[a * d + s] != idx[b * d + s]) return idx[a * d + s] < idx[b * d + s];
      return false;
    };
    std::sort(perm.begin(), perm.end(), key_less);
    for (std::size_t r = 0; r < perm.size(); ++r) {
      const std::size_t e = perm[r];
      const bool same = r > 0 && !key_less(perm[r - 1], e);
      if (same) {
        K.w.back() += ws[e];
        continue;
      }
      K.out.push_back(outs[e]);
      for (int s = 0; s < d; ++s) K.idx.push_back(idx[e * d + s]);
      K.w.push_back(ws[e]);
    }
  }
  return K;
}

}  // namespace

ExpandedOde project_dynamics(const PolynomialOde& model, polychaos::BasisPtr basis,
                             const ProjectionTensor& tensor) {
  if (!basis || !tensor.basis().same_as(*basis) || tensor.basis().size() != basis->size())
    throw DimensionError("project_dynamics: tensor was built for a different basis");
  for (const auto& p : model.parameters())
    if (!p.basis().same_as(*basis))
      throw DimensionError("project_dynamics: parameter expansion basis does not match");
  std::map<std::pair<std::vector<int>, int>, int> lookup;
  std::vector<Kernel> kernels;
  std::vector<ProjectedTerm> terms;
  for (int i = 0; i < model.n_states(); ++i) {
    for (const auto& m : model.terms(i)) {
      auto factors = factor_list(m);
      const int need = static_cast<int>(factors.size()) + (m.param >= 0 ? 1 : 0);
      if (static_cast<int>(factors.size()) > tensor.d_max() || need > tensor.max_factors())
        throw DimensionError("project_dynamics: term degree exceeds the tensor degree");
      auto key = std::make_pair(factors, m.param);
      auto it = lookup.find(key);
      int id;
      if (it == lookup.end()) {
        id = static_cast<int>(kernels.size());
        kernels.push_back(compile_kernel(factors, m.param, model, tensor));
        lookup.emplace(std::move(key), id);
      } else {
        id = it->second;
      }
      terms.push_back({i, id, m.coeff, m.input});
    }
  }
  return ExpandedOde(std::move(basis), model.n_states(), model.n_inputs(), model.input_functions(),
                     std::move(kernels), std::move(terms), tensor.quadrature_nodes());
}

Eigen::VectorXd dense_rhs(const PolynomialOde& model, const ProjectionTensor& tensor,
                          const Eigen::Ref<const Eigen::VectorXd>& x,
                          const Eigen::Ref<const Eigen::VectorXd>& u) {
  const int n = tensor.basis().size();
  Eigen::VectorXd dx = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.n_states()) * n);
  std::vector<int> tuple;
  for (int i = 0; i < model.n_states(); ++i) {
    for (const auto& m : model.terms(i)) {
      const auto factors = factor_list(m);
      const int d = static_cast<int>(factors.size());
      const int off = m.param >= 0 ? 1 : 0;
      const int k = d + off;
      const double s = m.coeff * (m.input >= 0 ? model.input_functions()[m.input].value(u) : 1.0);
      if (k == 0) {
        dx[static_cast<Eigen::Index>(i) * n] += s;
        continue;
      }
      tuple.assign(k, 0);
      while (true) {
        double prod = s;
        if (off) prod *= model.parameters()[m.param].coeffs()[tuple[0]];
        for (int r = 0; r < d; ++r) prod *= x[static_cast<Eigen::Index>(factors[r]) * n + tuple[r + off]];
        for (int o = 0; o < n; ++o)
          dx[static_cast<Eigen::Index>(i) * n + o] += prod * tensor.value(tuple, o);
        int r = k - 1;
        while (r >= 0 && ++tuple[r] == n) tuple[r--] = 0;
        if (r < 0) break;
      }
    }
  }
  return dx;
}

Eigen::VectorXd project_initial_conditions(const std::vector<InitialValue>& values,
                                           const polychaos::BasisPtr& basis, bool allow_collocation,
                                           int n_samples, std::uint64_t seed) {
  const int n = basis->size();
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(values.size()) * n);
  for (std::size_t l = 0; l < values.size(); ++l) {
    auto seg = x0.segment(static_cast<Eigen::Index>(l) * n, n);
    if (const auto* c = std::get_if<double>(&values[l])) {
      seg[0] = *c;
    } else if (const auto* e = std::get_if<polychaos::PCExpansion>(&values[l])) {
      if (!e->basis().same_as(*basis) || e->basis().size() != n)
        throw DimensionError("project_initial_conditions: expansion basis does not match");
      seg = e->coeffs();
    } else {
      if (!allow_collocation)
        throw ConfigError("project_initial_conditions: state " + std::to_string(l) +
                          " has an unfitted nonlinear initial map");
      const auto& f = std::get<NonlinearInitial>(values[l]);
      seg = polychaos::fit_function(f.map, basis, n_samples, seed).coeffs();
    }
  }
  return x0;
}

nlohmann::json expanded_ode_to_json(const ExpandedOde& ode) {
  nlohmann::json j;
  j["basis"] = polychaos::basis_to_json(ode.basis());
  j["n_states"] = ode.n_states();
  j["n_inputs"] = ode.n_inputs();
  j["quadrature_nodes"] = ode.quadrature_nodes();
  j["drop_threshold"] = ProjectionTensor::kDropThreshold;
  j["inputs"] = nlohmann::json::array();
  for (const auto& f : ode.input_functions()) j["inputs"].push_back(input_function_to_json(f));
  j["kernels"] = nlohmann::json::array();
  for (const auto& k : ode.kernels())
    j["kernels"].push_back({{"degree", k.degree}, {"factors", k.factors}, {"param", k.param},
                            {"out", k.out}, {"idx", k.idx}, {"w", k.w}});
  j["terms"] = nlohmann::json::array();
  for (const auto& t : ode.terms())
    j["terms"].push_back({{"state", t.state}, {"kernel", t.kernel}, {"coeff", t.coeff}, {"input", t.input}});
  return j;
}

ExpandedOde expanded_ode_from_json(const nlohmann::json& j) {
  try {
    auto basis = polychaos::basis_from_json(j.at("basis"));
    std::vector<InputFunction> inputs;
    for (const auto& f : j.at("inputs")) inputs.push_back(input_function_from_json(f));
    std::vector<Kernel> kernels;
    for (const auto& k : j.at("kernels")) {
      Kernel K;
      K.degree = k.at("degree").get<int>();
      K.factors = k.at("factors").get<std::vector<int>>();
      K.param = k.at("param").get<int>();
      K.out = k.at("out").get<std::vector<std::int32_t>>();
      K.idx = k.at("idx").get<std::vector<std::int32_t>>();
      K.w = k.at("w").get<std::vector<double>>();
      kernels.push_back(std::move(K));
    }
    std::vector<ProjectedTerm> terms;
    for (const auto& t : j.at("terms"))
      terms.push_back({t.at("state").get<int>(), t.at("kernel").get<int>(), t.at("coeff").get<double>(),
                       t.at("input").get<int>()});
    return ExpandedOde(std::move(basis), j.at("n_states").get<int>(), j.at("n_inputs").get<int>(),
                       std::move(inputs), std::move(kernels), std::move(terms),
                       j.value("quadrature_nodes", 0));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("expanded ODE JSON: ") + e.what());
  }
}

}  // namespace pcmpc::galerkin
