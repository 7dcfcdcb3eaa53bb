#include "pcmpc/galerkin/polynomial_ode.hpp"

#include <cmath>
#include <numeric>

#include "pcmpc/common/error.hpp"

namespace pcmpc::galerkin {

double InputFunction::value(const Eigen::Ref<const Eigen::VectorXd>& u) const {
  switch (kind) {
    case Kind::One:
      return 1.0;
    case Kind::Power:
      return param == 1.0 ? u[channel] : std::pow(u[channel], param);
    case Kind::Arrhenius:
      return std::exp(-param / u[channel]);
  }
  return 1.0;
}

double InputFunction::derivative(const Eigen::Ref<const Eigen::VectorXd>& u) const {
  switch (kind) {
    case Kind::One:
      return 0.0;
    case Kind::Power:
      return param == 1.0 ? 1.0 : param * std::pow(u[channel], param - 1.0);
    case Kind::Arrhenius: {
      const double v = u[channel];
      return std::exp(-param / v) * param / (v * v);
    }
  }
  return 0.0;
}

int Monomial::state_degree() const { return std::accumulate(exponents.begin(), exponents.end(), 0); }

PolynomialOde::PolynomialOde(int n_states, int n_inputs)
    : n_states_(n_states), n_inputs_(n_inputs), rhs_(n_states) {
  if (n_states < 1) throw DimensionError("PolynomialOde: need at least one state");
}

int PolynomialOde::add_input_function(InputFunction f) {
  if (f.kind != InputFunction::Kind::One && (f.channel < 0 || f.channel >= n_inputs_))
    throw DimensionError("PolynomialOde: input channel out of range");
  inputs_.push_back(f);
  return static_cast<int>(inputs_.size()) - 1;
}

int PolynomialOde::add_parameter(polychaos::PCExpansion p) {
  if (!params_.empty() && !params_.front().basis().same_as(p.basis()))
    throw DimensionError("PolynomialOde: parameter expansions must share one basis");
  params_.push_back(std::move(p));
  return static_cast<int>(params_.size()) - 1;
}

void PolynomialOde::add_term(int state, double coeff, std::vector<int> exponents, int input,
                             int param) {
  if (state < 0 || state >= n_states_) throw DimensionError("add_term: state out of range");
  if (static_cast<int>(exponents.size()) != n_states_)
    throw DimensionError("add_term: one exponent per state required");
  for (int e : exponents)
    if (e < 0) throw DimensionError("add_term: negative exponent");
  if (input >= static_cast<int>(inputs_.size()) || param >= static_cast<int>(params_.size()))
    throw DimensionError("add_term: unknown input or parameter function");
  rhs_[state].push_back({coeff, std::move(exponents), input, param});
}

int PolynomialOde::max_state_degree() const {
  int d = 0;
  for (const auto& eq : rhs_)
    for (const auto& m : eq) d = std::max(d, m.state_degree());
  return d;
}

Eigen::VectorXd PolynomialOde::eval(const Eigen::Ref<const Eigen::VectorXd>& x,
                                    const Eigen::Ref<const Eigen::VectorXd>& u,
                                    const Eigen::Ref<const Eigen::VectorXd>& param_values) const {
  Eigen::VectorXd dx = Eigen::VectorXd::Zero(n_states_);
  for (int i = 0; i < n_states_; ++i) {
    for (const auto& m : rhs_[i]) {
      double v = m.coeff;
      for (int l = 0; l < n_states_; ++l)
        for (int e = 0; e < m.exponents[l]; ++e) v *= x[l];
      if (m.input >= 0) v *= inputs_[m.input].value(u);
      if (m.param >= 0) v *= param_values[m.param];
      dx[i] += v;
    }
  }
  return dx;
}

Eigen::VectorXd PolynomialOde::parameter_values(const Eigen::Ref<const Eigen::VectorXd>& xi) const {
  Eigen::VectorXd p(params_.size());
  for (std::size_t k = 0; k < params_.size(); ++k) p[k] = params_[k](xi);
  return p;
}

Eigen::VectorXd PolynomialOde::parameter_means() const {
  Eigen::VectorXd p(params_.size());
  for (std::size_t k = 0; k < params_.size(); ++k) p[k] = polychaos::mean(params_[k]);
  return p;
}

nlohmann::json input_function_to_json(const InputFunction& f) {
  static const char* names[] = {"one", "power", "arrhenius"};
  return {{"kind", names[static_cast<int>(f.kind)]}, {"channel", f.channel}, {"param", f.param}};
}

InputFunction input_function_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  InputFunction f;
  if (kind == "one")
    f.kind = InputFunction::Kind::One;
  else if (kind == "power")
    f.kind = InputFunction::Kind::Power;
  else if (kind == "arrhenius")
    f.kind = InputFunction::Kind::Arrhenius;
  else
    throw ConfigError("unknown input function kind '" + kind + "'");
  f.channel = j.at("channel").get<int>();
  f.param = j.at("param").get<double>();
  return f;
}

}  // namespace pcmpc::galerkin
