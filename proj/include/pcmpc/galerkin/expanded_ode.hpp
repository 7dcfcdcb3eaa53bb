#pragma once

#include <functional>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "pcmpc/galerkin/polynomial_ode.hpp"
#include "pcmpc/galerkin/projection_tensor.hpp"

namespace pcmpc::galerkin {

/// Flat multiply-accumulate list for one unique (state factors, parameter)
/// product: out[o] = sum_e w_e * prod_s x~[idx_e,s] with o = out_e. Indices
/// are flat offsets state * P~ + coefficient; parameter coefficients are
/// folded into w.
struct Kernel {
  int degree = 0;
  std::vector<int> factors;  // state ids, sorted, with repetition
  int param = -1;
  std::vector<std::int32_t> out;
  std::vector<std::int32_t> idx;  // degree entries per instruction
  std::vector<double> w;

  std::size_t size() const { return w.size(); }
};

/// c * sigma_u(u) * kernel -> equation `state`.
struct ProjectedTerm {
  int state = 0;
  int kernel = 0;
  double coeff = 1.0;
  int input = -1;
};

/// Galerkin-projected coefficient dynamics. State layout is state-major:
/// x~[l * P~ + k] is coefficient k of state l.
class ExpandedOde {
 public:
  ExpandedOde(polychaos::BasisPtr basis, int n_states, int n_inputs,
              std::vector<InputFunction> inputs, std::vector<Kernel> kernels,
              std::vector<ProjectedTerm> terms, int quadrature_nodes = 0);

  int n_states() const { return n_states_; }
  int n_inputs() const { return n_inputs_; }
  int n_terms() const { return n_coeffs_; }
  int dim() const { return n_states_ * n_coeffs_; }
  const polychaos::OrthoBasis& basis() const { return *basis_; }
  const polychaos::BasisPtr& basis_ptr() const { return basis_; }
  const std::vector<Kernel>& kernels() const { return kernels_; }
  const std::vector<ProjectedTerm>& terms() const { return terms_; }
  const std::vector<InputFunction>& input_functions() const { return inputs_; }
  std::size_t instruction_count() const;
  int quadrature_nodes() const { return quadrature_nodes_; }

  /// Scratch buffers; one per thread.
  struct Workspace {
    Eigen::VectorXd kv;   // kernel outputs, n_kernels * P~
    Eigen::VectorXd ks;   // kernel sensitivities, n_kernels * P~ * n_cols
    Eigen::VectorXd sig;  // sigma_u values
    Eigen::VectorXd dsig;
  };
  Workspace make_workspace() const;

  void rhs(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& u,
           Eigen::Ref<Eigen::VectorXd> dx, Workspace& ws) const;
  Eigen::VectorXd rhs(const Eigen::Ref<const Eigen::VectorXd>& x,
                      const Eigen::Ref<const Eigen::VectorXd>& u) const;

  /// State right-hand side plus dS = J_x S + J_u du_dpi for the first n_cols
  /// columns. S and dS are row-major dim x ld arrays; du_dpi is n_inputs x n_cols.
  void rhs_with_sensitivity(const Eigen::Ref<const Eigen::VectorXd>& x,
                            const Eigen::Ref<const Eigen::VectorXd>& u,
                            const Eigen::Ref<const Eigen::MatrixXd>& du_dpi, const double* S,
                            int n_cols, int ld, Eigen::Ref<Eigen::VectorXd> dx, double* dS,
                            Workspace& ws) const;

  /// Dense Jacobians (for checks and small systems).
  Eigen::MatrixXd jacobian_x(const Eigen::Ref<const Eigen::VectorXd>& x,
                             const Eigen::Ref<const Eigen::VectorXd>& u) const;
  Eigen::MatrixXd jacobian_u(const Eigen::Ref<const Eigen::VectorXd>& x,
                             const Eigen::Ref<const Eigen::VectorXd>& u) const;

  /// Index-0 block (means) of a coefficient vector.
  Eigen::VectorXd means(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Coefficients of state l.
  Eigen::VectorXd coeffs(const Eigen::Ref<const Eigen::VectorXd>& x, int l) const {
    return x.segment(static_cast<Eigen::Index>(l) * n_coeffs_, n_coeffs_);
  }

 private:
  polychaos::BasisPtr basis_;
  int n_states_;
  int n_inputs_;
  int n_coeffs_;
  int quadrature_nodes_;
  std::vector<InputFunction> inputs_;
  std::vector<Kernel> kernels_;
  std::vector<ProjectedTerm> terms_;
};

/// Galerkin projection of every term against the tensor. Throws
/// DimensionError when a parameter expansion lives on another basis or a
/// term exceeds the tensor degree.
ExpandedOde project_dynamics(const PolynomialOde& model, polychaos::BasisPtr basis,
                             const ProjectionTensor& tensor);

/// Reference right-hand side built from full index loops over
/// ProjectionTensor::value (no sparsity, no compilation).
Eigen::VectorXd dense_rhs(const PolynomialOde& model, const ProjectionTensor& tensor,
                          const Eigen::Ref<const Eigen::VectorXd>& x,
                          const Eigen::Ref<const Eigen::VectorXd>& u);

/// Initial value of one state: exact value, expansion, or a nonlinear map of
/// xi that still has to be fitted by collocation.
struct NonlinearInitial {
  std::function<double(const Eigen::VectorXd&)> map;
};
using InitialValue = std::variant<double, polychaos::PCExpansion, NonlinearInitial>;

/// Stacked coefficient vector x~(t_k). Nonlinear maps are collocation-fitted
/// only when allowed, otherwise ConfigError.
Eigen::VectorXd project_initial_conditions(const std::vector<InitialValue>& values,
                                           const polychaos::BasisPtr& basis,
                                           bool allow_collocation = false,
                                           int n_samples = 0, std::uint64_t seed = 0x5EEDull);

nlohmann::json expanded_ode_to_json(const ExpandedOde& ode);
ExpandedOde expanded_ode_from_json(const nlohmann::json& j);

}  // namespace pcmpc::galerkin
