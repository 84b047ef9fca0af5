#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "gridsens/admittance.hpp"
#include "gridsens/grid_case.hpp"
#include "gridsens/injection_model.hpp"
#include "gridsens/voltage_state.hpp"

namespace gridsens {

struct PowerFlowOptions {
  double tol = 1e-8;  ///< max KCL current / constraint mismatch, p.u.
  int max_iter = 25;
  bool enforce_q_limits = true;
  int max_q_rounds = 5;
  LoadModel load_model = LoadModel::ConstantPower;
  /// Start from these bus voltages instead of a flat start.
  std::optional<std::vector<Complex>> warm_start;
  /// PV buses that start as PQ, pinned at the given generator reactive output (p.u.).
  std::vector<std::pair<std::size_t, double>> pinned_reactive;
};

struct BranchFlow {
  double p_from = 0.0;
  double q_from = 0.0;
  double p_to = 0.0;
  double q_to = 0.0;
};

struct PowerFlowSolution {
  std::shared_ptr<const GridCase> grid;
  std::shared_ptr<const AdmittanceMatrix> ybus;
  PowerFlowOptions options;

  /// Bus roles after Q-limit handling; limited PV buses appear as PQ.
  std::vector<BusKind> roles;
  /// Generator reactive output per bus (solved for PV and slack, fixed otherwise).
  std::vector<double> q_gen;
  std::vector<std::size_t> q_limited_buses;
  bool q_limits_resolved = true;

  Eigen::VectorXd state;  ///< full Newton state: voltages then PV reactive variables
  VoltageState voltage;
  int iterations = 0;  ///< Newton iterations summed over Q-limit rounds
  int q_limit_rounds = 0;
  double max_mismatch = 0.0;

  /// Complex power injected into the network at each bus (generation minus load).
  std::vector<Complex> bus_injection;
  std::vector<BranchFlow> branch_flows;

  InjectionModel model() const;
};

/// Newton-Raphson in rectangular coordinates. Throws DivergenceError when the
/// mismatch grows for three consecutive iterations or max_iter is exhausted,
/// and SingularMatrixError for a singular Jacobian (islanded or degenerate case).
PowerFlowSolution solve_ac_powerflow(const GridCase& grid, const PowerFlowOptions& options = {});

/// Runs one more Newton update from the converged state and returns the new state.
Eigen::VectorXd newton_step(const PowerFlowSolution& solution);

/// Currents flowing from each terminal bus into a branch: [I_fr^r, I_fr^i, I_to^r, I_to^i].
struct BranchTerminalCurrents {
  std::size_t branch = 0;
  Eigen::Vector4d values = Eigen::Vector4d::Zero();

  Complex from() const { return {values[0], values[1]}; }
  Complex to() const { return {values[2], values[3]}; }
};

BranchTerminalCurrents branch_terminal_currents(const PowerFlowSolution& solution, std::size_t branch);

/// S = V conj(I) at both ends of every branch; zero for open branches.
std::vector<BranchFlow> branch_power_flows(const PowerFlowSolution& solution);

struct PowerBalance {
  double generation = 0.0;
  double load = 0.0;
  double shunt_losses = 0.0;
  double branch_losses = 0.0;

  double residual() const { return generation - load - shunt_losses - branch_losses; }
};

/// Active power bookkeeping: scheduled generation plus computed slack output
/// against loads, shunt conductance and branch losses.
PowerBalance power_balance(const PowerFlowSolution& solution);

}  // namespace gridsens
