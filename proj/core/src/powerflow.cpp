#include "gridsens/powerflow.hpp"

#include <cmath>
#include <string>

#include <Eigen/SparseLU>

#include "gridsens/errors.hpp"

namespace gridsens {
namespace {

struct NewtonResult {
  Eigen::VectorXd state;
  int iterations = 0;
  double mismatch = 0.0;
};

Complex load_power(const PowerFlowSolution& sol, std::size_t k) {
  const Bus& bus = sol.grid->buses()[k];
  const Complex demand(bus.p_load, bus.q_load);
  if (sol.options.load_model == LoadModel::ConstantCurrent) return sol.voltage.phasor(k) * demand;
  return demand;
}

double max_abs(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

Eigen::VectorXd newton_update(const InjectionModel& model, const Eigen::VectorXd& x, const Eigen::VectorXd& f) {
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(model.jacobian(x));
  if (lu.info() != Eigen::Success) {
    throw SingularMatrixError("singular power-flow Jacobian: the case is islanded or degenerate");
  }
  Eigen::VectorXd dx = lu.solve(f);
  if (!dx.allFinite()) throw SingularMatrixError("power-flow Jacobian is numerically singular");
  return x - dx;
}

NewtonResult run_newton(const InjectionModel& model, Eigen::VectorXd x, double tol, int max_iter) {
  Eigen::VectorXd f = model.residual(x);
  if (!f.allFinite()) throw DivergenceError("non-finite mismatch at the starting point");
  double previous = max_abs(f);
  int growth = 0;
  for (int iter = 1; iter <= max_iter; ++iter) {
    x = newton_update(model, x, f);
    f = model.residual(x);
    const double mismatch = max_abs(f);
    if (!std::isfinite(mismatch)) throw DivergenceError("power flow diverged: non-finite mismatch");
    if (mismatch <= tol) return {std::move(x), iter, mismatch};
    growth = mismatch > previous ? growth + 1 : 0;
    if (growth >= 3) {
      throw DivergenceError("power flow diverged: mismatch grew for 3 consecutive iterations (" +
                            std::to_string(mismatch) + " p.u.)");
    }
    previous = mismatch;
  }
  throw DivergenceError("power flow did not converge in " + std::to_string(max_iter) +
                        " iterations (mismatch " + std::to_string(previous) + " p.u.)");
}

}  // namespace

InjectionModel PowerFlowSolution::model() const {
  std::vector<double> fixed(q_gen);
  return InjectionModel(grid, ybus, roles, std::move(fixed), options.load_model);
}

PowerFlowSolution solve_ac_powerflow(const GridCase& grid, const PowerFlowOptions& options) {
  PowerFlowSolution sol;
  sol.grid = std::make_shared<const GridCase>(grid);
  sol.ybus = std::make_shared<const AdmittanceMatrix>(build_ybus(grid));
  sol.options = options;

  const std::size_t n = grid.bus_count();
  sol.roles.resize(n);
  sol.q_gen.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    sol.roles[k] = grid.buses()[k].kind;
    sol.q_gen[k] = grid.generation(k).q;
  }
  for (auto [k, q] : options.pinned_reactive) {
    if (k >= n || sol.roles[k] != BusKind::PV) throw InputError("pinned reactive output needs a PV bus");
    sol.roles[k] = BusKind::PQ;
    sol.q_gen[k] = q;
    sol.q_limited_buses.push_back(k);
  }

  std::optional<std::vector<Complex>> start = options.warm_start;
  for (int round = 0;; ++round) {
    const InjectionModel model = sol.model();
    NewtonResult result = run_newton(model, model.initial_state(start), options.tol, options.max_iter);
    sol.iterations += result.iterations;
    sol.state = std::move(result.state);
    sol.max_mismatch = result.mismatch;
    sol.q_limit_rounds = round;
    for (std::size_t k = 0; k < n; ++k) {
      if (sol.roles[k] == BusKind::PV) sol.q_gen[k] = model.q_gen(sol.state, k);
    }
    if (!options.enforce_q_limits) break;

    std::vector<std::pair<std::size_t, double>> violations;
    for (std::size_t k = 0; k < n; ++k) {
      if (sol.roles[k] != BusKind::PV) continue;
      const BusGeneration& g = grid.generation(k);
      const double q = sol.q_gen[k];
      if (q > g.q_max + options.tol) violations.emplace_back(k, g.q_max);
      if (q < g.q_min - options.tol) violations.emplace_back(k, g.q_min);
    }
    if (violations.empty()) break;
    if (round >= options.max_q_rounds) {
      sol.q_limits_resolved = false;
      break;
    }
    for (auto [k, limit] : violations) {
      sol.roles[k] = BusKind::PQ;
      sol.q_gen[k] = limit;
      sol.q_limited_buses.push_back(k);
    }
    start = model.voltages(sol.state).phasors();
  }

  sol.voltage = VoltageState(sol.state.head(2 * static_cast<Eigen::Index>(n)));

  Eigen::VectorXcd v(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) v[static_cast<Eigen::Index>(k)] = sol.voltage.phasor(k);
  const Eigen::VectorXcd current = sol.ybus->y * v;
  sol.bus_injection.resize(n);
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    sol.bus_injection[static_cast<std::size_t>(k)] = v[k] * std::conj(current[k]);
  }
  const std::size_t s = grid.slack_index();
  sol.q_gen[s] = (sol.bus_injection[s] + load_power(sol, s)).imag();
  sol.branch_flows = branch_power_flows(sol);
  return sol;
}

Eigen::VectorXd newton_step(const PowerFlowSolution& solution) {
  const InjectionModel model = solution.model();
  return newton_update(model, solution.state, model.residual(solution.state));
}

BranchTerminalCurrents branch_terminal_currents(const PowerFlowSolution& solution, std::size_t branch) {
  const auto& stamp = solution.ybus->stamps.at(branch);
  if (!stamp) throw InputError("branch " + std::to_string(branch + 1) + " is open");
  const Complex vf = solution.voltage.phasor(stamp->from);
  const Complex vt = solution.voltage.phasor(stamp->to);
  const Complex i_from = stamp->from_current(vf, vt);
  const Complex i_to = stamp->to_current(vf, vt);
  BranchTerminalCurrents out;
  out.branch = branch;
  out.values << i_from.real(), i_from.imag(), i_to.real(), i_to.imag();
  return out;
}

std::vector<BranchFlow> branch_power_flows(const PowerFlowSolution& solution) {
  std::vector<BranchFlow> flows(solution.grid->branch_count());
  for (std::size_t l = 0; l < flows.size(); ++l) {
    const auto& stamp = solution.ybus->stamps[l];
    if (!stamp) continue;
    const Complex vf = solution.voltage.phasor(stamp->from);
    const Complex vt = solution.voltage.phasor(stamp->to);
    const Complex s_from = vf * std::conj(stamp->from_current(vf, vt));
    const Complex s_to = vt * std::conj(stamp->to_current(vf, vt));
    flows[l] = {s_from.real(), s_from.imag(), s_to.real(), s_to.imag()};
  }
  return flows;
}

PowerBalance power_balance(const PowerFlowSolution& solution) {
  const GridCase& grid = *solution.grid;
  PowerBalance balance;
  const std::size_t s = grid.slack_index();
  for (std::size_t k = 0; k < grid.bus_count(); ++k) {
    const Bus& bus = grid.buses()[k];
    balance.load += load_power(solution, k).real();
    balance.shunt_losses += bus.g_shunt * std::norm(solution.voltage.phasor(k));
    if (k == s) {
      balance.generation += solution.bus_injection[k].real() + load_power(solution, k).real();
    } else {
      balance.generation += grid.generation(k).p;
    }
  }
  for (const BranchFlow& flow : branch_power_flows(solution)) balance.branch_losses += flow.p_from + flow.p_to;
  return balance;
}

}  // namespace gridsens
