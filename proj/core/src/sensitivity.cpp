#include "gridsens/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "gridsens/errors.hpp"

namespace gridsens {
namespace {

constexpr double kZeroCurrent = 1e-12;

std::array<Eigen::Index, 4> terminal_rows(std::size_t from, std::size_t to) {
  const auto f = 2 * static_cast<Eigen::Index>(from);
  const auto t = 2 * static_cast<Eigen::Index>(to);
  return {f, f + 1, t, t + 1};
}

Complex side_value(const Eigen::Vector4d& v, BranchSide side) {
  return side == BranchSide::From ? Complex(v[0], v[1]) : Complex(v[2], v[3]);
}

CurrentMagnitudeDelta magnitude_change(Complex current, Complex delta) {
  const double magnitude = std::abs(current);
  if (magnitude < kZeroCurrent) return {std::abs(delta), true};
  return {(current.real() * delta.real() + current.imag() * delta.imag()) / magnitude, false};
}

double power_change(Complex voltage, Complex current, Complex dv, Complex di) {
  return (dv * std::conj(current) + voltage * std::conj(di)).real();
}

const BranchStamp& closed_stamp(const PowerFlowSolution& sol, std::size_t branch) {
  if (branch >= sol.grid->branch_count()) throw InputError("branch index out of range");
  const auto& stamp = sol.ybus->stamps[branch];
  if (!stamp) throw InputError("branch " + std::to_string(branch + 1) + " is open");
  return *stamp;
}

}  // namespace

Eigen::VectorXd unit_injection_response(const LinearizedSystem& lin, std::size_t bus, int component) {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(lin.dimension());
  if (!lin.is_slack(bus)) rhs[component == 0 ? lin.real_row(bus) : lin.imag_row(bus)] = 1.0;
  return lin.solve(rhs).head(2 * static_cast<Eigen::Index>(lin.bus_count()));
}

InjectionSensitivity dv_dgamma(const LinearizedSystem& lin, std::size_t branch) {
  const GridCase& grid = lin.grid();
  if (branch >= grid.branch_count()) throw InputError("branch index out of range");
  if (!grid.branches()[branch].closed()) throw InputError("branch " + std::to_string(branch + 1) + " is open");

  InjectionSensitivity sens;
  sens.branch = branch;
  sens.from = grid.from_index(branch);
  sens.to = grid.to_index(branch);

  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(lin.dimension(), 4);
  const std::array<std::size_t, 4> buses{sens.from, sens.from, sens.to, sens.to};
  for (int c = 0; c < 4; ++c) {
    if (lin.is_slack(buses[c])) continue;
    rhs(c % 2 == 0 ? lin.real_row(buses[c]) : lin.imag_row(buses[c]), c) = 1.0;
  }
  sens.dv = lin.solve(rhs).topRows(2 * static_cast<Eigen::Index>(grid.bus_count()));
  return sens;
}

Eigen::Vector4d BranchCurrentJacobian::terminal_values(const Eigen::Ref<const Eigen::VectorXd>& v) const {
  const auto rows = terminal_rows(from, to);
  return {v[rows[0]], v[rows[1]], v[rows[2]], v[rows[3]]};
}

Eigen::MatrixXd BranchCurrentJacobian::dense(std::size_t bus_count) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(4, 2 * static_cast<Eigen::Index>(bus_count));
  const auto cols = terminal_rows(from, to);
  for (int c = 0; c < 4; ++c) out.col(cols[c]) += local.col(c);
  return out;
}

BranchCurrentJacobian branch_current_jacobian(const GridCase& grid, std::size_t branch) {
  if (branch >= grid.branch_count()) throw InputError("branch index out of range");
  const Branch& br = grid.branches()[branch];
  if (!br.closed()) throw InputError("branch " + std::to_string(branch + 1) + " is open");
  const BranchStamp stamp = branch_stamp(br, grid.from_index(branch), grid.to_index(branch));

  BranchCurrentJacobian jac;
  jac.branch = branch;
  jac.from = stamp.from;
  jac.to = stamp.to;
  jac.local.block<2, 2>(0, 0) = expand_admittance(stamp.yff);
  jac.local.block<2, 2>(0, 2) = expand_admittance(stamp.yft);
  jac.local.block<2, 2>(2, 0) = expand_admittance(stamp.ytf);
  jac.local.block<2, 2>(2, 2) = expand_admittance(stamp.ytt);
  return jac;
}

Eigen::Matrix4d di_line_dgamma(const InjectionSensitivity& sens, const BranchCurrentJacobian& jac) {
  if (sens.branch != jac.branch) throw InputError("sensitivity and current Jacobian refer to different branches");
  const auto rows = terminal_rows(sens.from, sens.to);
  Eigen::Matrix4d terminal_response;
  for (int r = 0; r < 4; ++r) terminal_response.row(r) = sens.dv.row(rows[r]);
  return jac.local * terminal_response;
}

OutageTransferMatrix build_transfer_matrix(const Eigen::Matrix4d& di_dgamma) {
  OutageTransferMatrix out;
  out.t = Eigen::Matrix4d::Identity() - di_dgamma;
  const Eigen::JacobiSVD<Eigen::Matrix4d> svd(out.t);
  const auto& sigma = svd.singularValues();
  const double smallest = sigma[3];
  out.condition = smallest > 0.0 ? sigma[0] / smallest : std::numeric_limits<double>::infinity();
  if (!std::isfinite(sigma[0])) out.condition = std::numeric_limits<double>::infinity();
  return out;
}

Eigen::Vector4d solve_gamma(const OutageTransferMatrix& t, const BranchTerminalCurrents& pre) {
  if (t.singular()) {
    throw IslandingError("outage of branch " + std::to_string(pre.branch + 1) +
                         " islands the network (cond(T) = " + std::to_string(t.condition) + ")");
  }
  return t.t.fullPivLu().solve(pre.values);
}

Eigen::VectorXd outage_delta_v(const InjectionSensitivity& sens, const OutageTransferMatrix& t,
                               const BranchTerminalCurrents& pre) {
  return sens.dv * solve_gamma(t, pre);
}

std::vector<double> delta_voltage_magnitude(const Eigen::VectorXd& dv, const VoltageState& op) {
  std::vector<double> out(op.bus_count());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double magnitude = op.magnitude(k);
    if (!(magnitude > 0.0)) throw NumericalError("bus " + std::to_string(k) + " has zero voltage magnitude");
    const auto r = 2 * static_cast<Eigen::Index>(k);
    out[k] = (op.real(k) * dv[r] + op.imag(k) * dv[r + 1]) / magnitude;
  }
  return out;
}

CurrentMagnitudeDelta delta_current_magnitude(const Eigen::VectorXd& dv, const PowerFlowSolution& sol,
                                              std::size_t branch, BranchSide side) {
  closed_stamp(sol, branch);
  const BranchCurrentJacobian jac = branch_current_jacobian(*sol.grid, branch);
  const Eigen::Vector4d current = branch_terminal_currents(sol, branch).values;
  return magnitude_change(side_value(current, side), side_value(jac.apply(dv), side));
}

double delta_line_power(const Eigen::VectorXd& dv, const PowerFlowSolution& sol, std::size_t branch,
                        BranchSide side) {
  const BranchStamp& stamp = closed_stamp(sol, branch);
  const BranchCurrentJacobian jac = branch_current_jacobian(*sol.grid, branch);
  const Eigen::Vector4d current = branch_terminal_currents(sol, branch).values;
  const std::size_t bus = side == BranchSide::From ? stamp.from : stamp.to;
  const auto r = 2 * static_cast<Eigen::Index>(bus);
  return power_change(sol.voltage.phasor(bus), side_value(current, side), Complex(dv[r], dv[r + 1]),
                      side_value(jac.apply(dv), side));
}

CircuitLodfResult circuit_lodf(const PowerFlowSolution& sol, const LinearizedSystem& lin, std::size_t outage,
                               std::span<const std::size_t> monitored) {
  const BranchStamp& stamp = closed_stamp(sol, outage);
  CircuitLodfResult result;
  result.outage = outage;
  const BranchTerminalCurrents pre = branch_terminal_currents(sol, outage);
  result.pre_power = (sol.voltage.phasor(stamp.from) * std::conj(pre.from())).real();

  const InjectionSensitivity sens = dv_dgamma(lin, outage);
  const OutageTransferMatrix t = build_transfer_matrix(di_line_dgamma(sens, branch_current_jacobian(*sol.grid, outage)));
  if (t.singular()) {
    result.islanding = true;
    return result;
  }
  const Eigen::VectorXd dv = outage_delta_v(sens, t, pre);

  for (std::size_t m : monitored) {
    CircuitLodfEntry entry;
    entry.branch = m;
    if (m == outage) {
      // The whole branch disappears: its from-side current drops to zero.
      const auto r = 2 * static_cast<Eigen::Index>(stamp.from);
      entry.delta_p = power_change(sol.voltage.phasor(stamp.from), pre.from(), Complex(dv[r], dv[r + 1]), -pre.from());
    } else if (sol.ybus->stamps.at(m)) {
      entry.delta_p = delta_line_power(dv, sol, m, BranchSide::From);
    }
    if (std::abs(result.pre_power) > kZeroCurrent) entry.ratio = entry.delta_p / result.pre_power;
    result.entries.push_back(entry);
  }
  return result;
}

std::string_view to_string(SeverityMetric metric) {
  switch (metric) {
    case SeverityMetric::VmagInf: return "vmag_inf";
    case SeverityMetric::Vmag2: return "vmag_2";
    case SeverityMetric::ImagInf: return "imag_inf";
    case SeverityMetric::PlineInf: return "pline_inf";
  }
  return "unknown";
}

std::optional<SeverityMetric> parse_severity_metric(std::string_view name) {
  for (SeverityMetric m : {SeverityMetric::VmagInf, SeverityMetric::Vmag2, SeverityMetric::ImagInf,
                           SeverityMetric::PlineInf}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

double severity_of(SeverityMetric metric, std::span<const double> delta_vmag, std::span<const double> delta_imag,
                   std::span<const double> delta_p, std::optional<std::size_t> excluded) {
  auto max_abs = [&](std::span<const double> values, bool skip) {
    double best = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (skip && excluded && *excluded == i) continue;
      best = std::max(best, std::abs(values[i]));
    }
    return best;
  };
  switch (metric) {
    case SeverityMetric::VmagInf: return max_abs(delta_vmag, false);
    case SeverityMetric::Vmag2: {
      double sum = 0.0;
      for (double d : delta_vmag) sum += d * d;
      return std::sqrt(sum);
    }
    case SeverityMetric::ImagInf: return max_abs(delta_imag, true);
    case SeverityMetric::PlineInf: return max_abs(delta_p, true);
  }
  return 0.0;
}

OutageEvaluator::OutageEvaluator(const PowerFlowSolution& sol, const LinearizedSystem& lin, OutageOptions options)
    : sol_(sol), lin_(lin), options_(options) {
  jacobians_.resize(sol.grid->branch_count());
  for (std::size_t l = 0; l < jacobians_.size(); ++l) {
    if (sol.grid->branches()[l].closed()) jacobians_[l] = branch_current_jacobian(*sol.grid, l);
  }
}

OutageImpact OutageEvaluator::evaluate(std::size_t outage) const {
  closed_stamp(sol_, outage);
  OutageImpact impact;
  impact.outage = outage;

  const InjectionSensitivity sens = dv_dgamma(lin_, outage);
  const OutageTransferMatrix t = build_transfer_matrix(di_line_dgamma(sens, *jacobians_[outage]));
  impact.t_condition = t.condition;
  if (t.singular()) {
    impact.islanding = true;
    impact.severity = kIslandingSeverity;
    return impact;
  }
  const BranchTerminalCurrents pre = branch_terminal_currents(sol_, outage);
  impact.gamma = solve_gamma(t, pre);
  impact.delta_v = sens.dv * impact.gamma;
  const bool exact = options_.magnitudes == MagnitudeModel::Exact;
  if (exact) {
    impact.delta_vmag.resize(sol_.grid->bus_count());
    for (std::size_t k = 0; k < impact.delta_vmag.size(); ++k) {
      const auto r = 2 * static_cast<Eigen::Index>(k);
      const Complex v = sol_.voltage.phasor(k);
      impact.delta_vmag[k] = std::abs(v + Complex(impact.delta_v[r], impact.delta_v[r + 1])) - std::abs(v);
    }
  } else {
    impact.delta_vmag = delta_voltage_magnitude(impact.delta_v, sol_.voltage);
  }

  const std::size_t branches = sol_.grid->branch_count();
  impact.delta_imag.assign(branches, 0.0);
  impact.delta_p.assign(branches, 0.0);
  for (std::size_t m = 0; m < branches; ++m) {
    if (!jacobians_[m]) continue;
    const BranchCurrentJacobian& jac = *jacobians_[m];
    const Eigen::Vector4d current = branch_terminal_currents(sol_, m).values;
    const Eigen::Vector4d delta_current = m == outage ? Eigen::Vector4d(-current) : jac.apply(impact.delta_v);
    const std::size_t bus = options_.side == BranchSide::From ? jac.from : jac.to;
    const auto r = 2 * static_cast<Eigen::Index>(bus);
    const Complex i0 = side_value(current, options_.side);
    const Complex di = side_value(delta_current, options_.side);
    const Complex v0 = sol_.voltage.phasor(bus);
    const Complex dv(impact.delta_v[r], impact.delta_v[r + 1]);
    if (exact) {
      impact.delta_imag[m] = std::abs(i0 + di) - std::abs(i0);
      impact.delta_p[m] = ((v0 + dv) * std::conj(i0 + di)).real() - (v0 * std::conj(i0)).real();
    } else {
      impact.delta_imag[m] = magnitude_change(i0, di).value;
      impact.delta_p[m] = power_change(v0, i0, dv, di);
    }
  }
  impact.severity = severity_of(options_.metric, impact.delta_vmag, impact.delta_imag, impact.delta_p, outage);
  return impact;
}

OutageImpact evaluate_outage(const PowerFlowSolution& sol, const LinearizedSystem& lin, std::size_t outage,
                             const OutageOptions& options) {
  return OutageEvaluator(sol, lin, options).evaluate(outage);
}

}  // namespace gridsens
