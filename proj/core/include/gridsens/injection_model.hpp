#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "gridsens/admittance.hpp"
#include "gridsens/grid_case.hpp"
#include "gridsens/voltage_state.hpp"

namespace gridsens {

enum class LoadModel {
  ConstantPower,    ///< I = conj(S / V)
  ConstantCurrent,  ///< fixed phasor current, the draw at 1∠0: I = conj(S)
};

/// Current drawn by a constant-power device, I = conj(S / V).
Complex constant_power_current(Complex power, Complex voltage);

/// d(I_r, I_i) / d(V_r, V_i) of I = conj(S / V).
Eigen::Matrix2d constant_power_current_jacobian(Complex power, Complex voltage);

/// Real 2x2 block of a complex admittance acting on (V_r, V_i).
inline Eigen::Matrix2d expand_admittance(Complex y) {
  Eigen::Matrix2d block;
  block << y.real(), -y.imag(), y.imag(), y.real();
  return block;
}

/// Rectangular current-injection formulation of the AC power flow.
///
/// Unknowns: interleaved bus voltages (rows/cols 2k, 2k+1) followed by one
/// generator reactive-power variable per voltage-controlled bus. Equations:
///   slack bus      V_r = V_set cos(theta), V_i = V_set sin(theta)
///   other buses    (Y V)_k - I_inj,k(V_k, Q_k) = 0        (real and imaginary KCL)
///   PV buses       V_r^2 + V_i^2 - V_set^2 = 0             (augmented row)
/// where I_inj is generator current minus load current at the bus.
class InjectionModel {
 public:
  InjectionModel(std::shared_ptr<const GridCase> grid, std::shared_ptr<const AdmittanceMatrix> ybus,
                 std::vector<BusKind> roles, std::vector<double> fixed_q_gen, LoadModel load_model);

  const GridCase& grid() const noexcept { return *grid_; }
  const AdmittanceMatrix& ybus() const noexcept { return *ybus_; }
  const std::vector<BusKind>& roles() const noexcept { return roles_; }
  LoadModel load_model() const noexcept { return load_model_; }

  std::size_t bus_count() const noexcept { return roles_.size(); }
  Eigen::Index dimension() const noexcept { return dimension_; }
  Eigen::Index augmented_count() const noexcept { return dimension_ - 2 * static_cast<Eigen::Index>(bus_count()); }
  /// Augmented row/column of a PV bus, if any.
  std::optional<Eigen::Index> reactive_slot(std::size_t bus) const;

  Complex slack_setpoint() const noexcept { return slack_setpoint_; }

  /// Net injected device current at a bus for voltage v and generator reactive output q_gen.
  Complex injection_current(std::size_t bus, Complex v, double q_gen) const;
  /// d(I_inj,r, I_inj,i) / d(V_r, V_i) at a bus.
  Eigen::Matrix2d injection_jacobian(std::size_t bus, Complex v, double q_gen) const;

  /// Generator reactive output at a bus implied by the state (variable for PV, fixed otherwise).
  double q_gen(const Eigen::VectorXd& state, std::size_t bus) const;
  VoltageState voltages(const Eigen::VectorXd& state) const;

  Eigen::VectorXd initial_state(const std::optional<std::vector<Complex>>& warm_start) const;
  Eigen::VectorXd residual(const Eigen::VectorXd& state) const;
  Eigen::SparseMatrix<double> jacobian(const Eigen::VectorXd& state) const;

  /// Right-hand side b of the linear companion model J(x0) x = b built from
  /// device currents at x0. J(x0) x0 = b holds exactly when x0 solves the flow.
  Eigen::VectorXd companion_rhs(const Eigen::VectorXd& state) const;

  /// Network-only matrix: expanded Y on non-slack rows, slack rows pinned, no
  /// device terms and no augmented variables (dimension 2n).
  Eigen::SparseMatrix<double> network_matrix() const;
  /// Right-hand side for network_matrix() with device currents frozen at the state.
  Eigen::VectorXd frozen_injection_rhs(const Eigen::VectorXd& state) const;

 private:
  std::shared_ptr<const GridCase> grid_;
  std::shared_ptr<const AdmittanceMatrix> ybus_;
  std::vector<BusKind> roles_;
  std::vector<double> fixed_q_gen_;
  LoadModel load_model_;
  std::vector<Eigen::Index> slot_;  // -1 when not PV
  Eigen::Index dimension_ = 0;
  Complex slack_setpoint_;
};

}  // namespace gridsens
