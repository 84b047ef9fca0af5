#include "gridsens/dc_model.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/SparseCholesky>

#include "gridsens/errors.hpp"

namespace gridsens {

struct DcModel::Solver {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
};

namespace {

bool connected_to_slack(const GridCase& grid) {
  const std::size_t n = grid.bus_count();
  std::vector<std::vector<std::size_t>> adjacency(n);
  for (std::size_t l = 0; l < grid.branch_count(); ++l) {
    if (!grid.branches()[l].closed()) continue;
    adjacency[grid.from_index(l)].push_back(grid.to_index(l));
    adjacency[grid.to_index(l)].push_back(grid.from_index(l));
  }
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack{grid.slack_index()};
  seen[grid.slack_index()] = true;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const std::size_t k = stack.back();
    stack.pop_back();
    for (std::size_t j : adjacency[k]) {
      if (!seen[j]) {
        seen[j] = true;
        ++reached;
        stack.push_back(j);
      }
    }
  }
  return reached == n;
}

}  // namespace

DcModel::DcModel(const GridCase& grid) : grid_(std::make_shared<const GridCase>(grid)) {
  if (!connected_to_slack(grid)) {
    throw SingularMatrixError("DC susceptance matrix is singular: network is not connected to the slack bus");
  }
  const std::size_t n = grid.bus_count();
  reduced_.assign(n, -1);
  Eigen::Index next = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k != grid.slack_index()) reduced_[k] = next++;
  }

  susceptance_.assign(grid.branch_count(), 0.0);
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t l = 0; l < grid.branch_count(); ++l) {
    const Branch& br = grid.branches()[l];
    if (!br.closed()) continue;
    const double b = 1.0 / br.x;
    susceptance_[l] = b;
    const Eigen::Index f = reduced_[grid.from_index(l)];
    const Eigen::Index t = reduced_[grid.to_index(l)];
    if (f >= 0) triplets.emplace_back(f, f, b);
    if (t >= 0) triplets.emplace_back(t, t, b);
    if (f >= 0 && t >= 0) {
      triplets.emplace_back(f, t, -b);
      triplets.emplace_back(t, f, -b);
    }
  }
  b_.resize(next, next);
  b_.setFromTriplets(triplets.begin(), triplets.end());
  b_.makeCompressed();

  auto solver = std::make_shared<Solver>();
  if (next > 0) {
    solver->ldlt.compute(b_);
    if (solver->ldlt.info() != Eigen::Success) throw SingularMatrixError("DC susceptance matrix is singular");
  }
  solver_ = std::move(solver);

  std::vector<double> injection(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const Bus& bus = grid.buses()[k];
    injection[k] = grid.generation(k).p - bus.p_load - bus.g_shunt;
  }
  base_.theta = solve_angles(injection);
  base_.flow = branch_flows(base_.theta);
}

std::vector<double> DcModel::solve_angles(const std::vector<double>& injection) const {
  const GridCase& grid = *grid_;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(b_.rows());
  for (std::size_t k = 0; k < grid.bus_count(); ++k) {
    if (reduced_[k] >= 0) rhs[reduced_[k]] += injection.at(k);
  }
  // Phase shifters: flow = b (theta_f - theta_t - shift) moves b*shift onto the injections.
  for (std::size_t l = 0; l < grid.branch_count(); ++l) {
    const Branch& br = grid.branches()[l];
    if (!br.closed() || br.shift == 0.0) continue;
    const double offset = susceptance_[l] * br.shift;
    const Eigen::Index f = reduced_[grid.from_index(l)];
    const Eigen::Index t = reduced_[grid.to_index(l)];
    if (f >= 0) rhs[f] += offset;
    if (t >= 0) rhs[t] -= offset;
  }
  std::vector<double> theta(grid.bus_count(), 0.0);
  if (b_.rows() == 0) return theta;
  const Eigen::VectorXd solution = solver_->ldlt.solve(rhs);
  for (std::size_t k = 0; k < grid.bus_count(); ++k) {
    if (reduced_[k] >= 0) theta[k] = solution[reduced_[k]];
  }
  return theta;
}

std::vector<double> DcModel::branch_flows(const std::vector<double>& theta) const {
  const GridCase& grid = *grid_;
  std::vector<double> flow(grid.branch_count(), 0.0);
  for (std::size_t l = 0; l < grid.branch_count(); ++l) {
    const Branch& br = grid.branches()[l];
    if (!br.closed()) continue;
    flow[l] = susceptance_[l] * (theta[grid.from_index(l)] - theta[grid.to_index(l)] - br.shift);
  }
  return flow;
}

std::vector<double> DcModel::transfer_angles(std::size_t from, std::size_t to) const {
  std::vector<double> theta(grid_->bus_count(), 0.0);
  if (b_.rows() == 0) return theta;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(b_.rows());
  if (reduced_.at(from) >= 0) rhs[reduced_[from]] += 1.0;
  if (reduced_.at(to) >= 0) rhs[reduced_[to]] -= 1.0;
  const Eigen::VectorXd solution = solver_->ldlt.solve(rhs);
  for (std::size_t k = 0; k < theta.size(); ++k) {
    if (reduced_[k] >= 0) theta[k] = solution[reduced_[k]];
  }
  return theta;
}

DcFlows solve_dc(const DcModel& model) { return model.base(); }

DcFlows solve_dc(const GridCase& grid) { return DcModel(grid).base(); }

std::vector<double> dc_ptdf(const DcModel& model, std::size_t from, std::size_t to) {
  const GridCase& grid = model.grid();
  if (from == to) throw InputError("PTDF transfer needs distinct buses");
  if (from >= grid.bus_count() || to >= grid.bus_count()) throw InputError("PTDF bus index out of range");
  const std::vector<double> theta = model.transfer_angles(from, to);
  std::vector<double> ptdf(grid.branch_count(), 0.0);
  for (std::size_t l = 0; l < grid.branch_count(); ++l) {
    if (!grid.branches()[l].closed()) continue;
    ptdf[l] = model.branch_susceptance(l) * (theta[grid.from_index(l)] - theta[grid.to_index(l)]);
  }
  return ptdf;
}

DcLodfResult dc_lodf(const DcModel& model, std::size_t outage) {
  const GridCase& grid = model.grid();
  if (outage >= grid.branch_count()) throw InputError("branch index out of range");
  if (!grid.branches()[outage].closed()) throw InputError("branch " + std::to_string(outage + 1) + " is open");

  DcLodfResult result;
  result.outage = outage;
  result.pre_flow = model.base().flow;
  const std::vector<double> ptdf = dc_ptdf(model, grid.from_index(outage), grid.to_index(outage));
  const double denom = 1.0 - ptdf[outage];
  if (std::abs(denom) < kDcBridgeThreshold) {
    result.islanding = true;
    result.lodf.assign(grid.branch_count(), std::numeric_limits<double>::quiet_NaN());
    result.transfer = std::numeric_limits<double>::infinity();
    return result;
  }

  const double p_outage = result.pre_flow[outage];
  result.transfer = p_outage / denom;
  result.lodf.resize(grid.branch_count());
  result.predicted_flow.resize(grid.branch_count());
  for (std::size_t m = 0; m < grid.branch_count(); ++m) {
    result.lodf[m] = m == outage ? -1.0 : ptdf[m] / denom;
    result.predicted_flow[m] = result.pre_flow[m] + result.lodf[m] * p_outage;
  }
  return result;
}

}  // namespace gridsens
