#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "pcmpc/polychaos/expansion.hpp"

namespace pcmpc::galerkin {

/// Scalar input function sigma_u(u) of a single input channel.
///   One       : 1
///   Power     : u_ch^param
///   Arrhenius : exp(-param / u_ch)
struct InputFunction {
  enum class Kind { One, Power, Arrhenius };
  Kind kind = Kind::One;
  int channel = 0;
  double param = 1.0;

  static InputFunction one() { return {}; }
  static InputFunction power(int channel, double exponent) { return {Kind::Power, channel, exponent}; }
  static InputFunction arrhenius(int channel, double activation) {
    return {Kind::Arrhenius, channel, activation};
  }

  double value(const Eigen::Ref<const Eigen::VectorXd>& u) const;
  /// d sigma / d u_channel.
  double derivative(const Eigen::Ref<const Eigen::VectorXd>& u) const;
};

/// c * prod_l x_l^exponents[l] * sigma_u(u) * sigma_p(p); input/param == -1 means 1.
struct Monomial {
  double coeff = 1.0;
  std::vector<int> exponents;
  int input = -1;
  int param = -1;

  int state_degree() const;
};

/// Polynomial-in-the-states ODE with separable input and parameter factors.
/// Parameter functions are expansions over a common basis; pointwise
/// evaluation takes their realized values instead.
class PolynomialOde {
 public:
  PolynomialOde(int n_states, int n_inputs);

  int n_states() const { return n_states_; }
  int n_inputs() const { return n_inputs_; }

  int add_input_function(InputFunction f);
  int add_parameter(polychaos::PCExpansion p);
  /// Append c * prod x^exponents * sigma_u * sigma_p to equation `state`.
  void add_term(int state, double coeff, std::vector<int> exponents, int input = -1, int param = -1);

  const std::vector<Monomial>& terms(int state) const { return rhs_[state]; }
  const std::vector<InputFunction>& input_functions() const { return inputs_; }
  const std::vector<polychaos::PCExpansion>& parameters() const { return params_; }

  int max_state_degree() const;

  /// dx/dt at a realization of the parameters (one value per parameter).
  Eigen::VectorXd eval(const Eigen::Ref<const Eigen::VectorXd>& x,
                       const Eigen::Ref<const Eigen::VectorXd>& u,
                       const Eigen::Ref<const Eigen::VectorXd>& param_values) const;

  /// Parameter values at xi (each expansion evaluated), or the means.
  Eigen::VectorXd parameter_values(const Eigen::Ref<const Eigen::VectorXd>& xi) const;
  Eigen::VectorXd parameter_means() const;

 private:
  int n_states_;
  int n_inputs_;
  std::vector<std::vector<Monomial>> rhs_;
  std::vector<InputFunction> inputs_;
  std::vector<polychaos::PCExpansion> params_;
};

nlohmann::json input_function_to_json(const InputFunction& f);
InputFunction input_function_from_json(const nlohmann::json& j);

}  // namespace pcmpc::galerkin
