#pragma once

#include <memory>
#include <vector>

#include <Eigen/SparseCore>

#include "gridsens/grid_case.hpp"

namespace gridsens {

struct DcFlows {
  std::vector<double> theta;  ///< radians, slack at 0
  std::vector<double> flow;   ///< per branch, p.u., zero for open branches
};

/// Lossless DC model P = B theta with the slack row and column removed.
/// Branch susceptances are 1/x; taps are ignored and phase shifts act as
/// fixed angle offsets. Construction throws SingularMatrixError when some
/// bus is not connected to the slack.
class DcModel {
 public:
  explicit DcModel(const GridCase& grid);

  const GridCase& grid() const noexcept { return *grid_; }
  const Eigen::SparseMatrix<double>& reduced_b() const noexcept { return b_; }
  /// Position of a bus in the reduced system, -1 for the slack.
  Eigen::Index reduced_index(std::size_t bus) const { return reduced_.at(bus); }
  double branch_susceptance(std::size_t branch) const { return susceptance_.at(branch); }

  /// Bus angles for a given vector of net injections (p.u., one per bus).
  std::vector<double> solve_angles(const std::vector<double>& injection) const;
  std::vector<double> branch_flows(const std::vector<double>& theta) const;
  /// Angles produced by +1 p.u. at bus `from` and -1 p.u. at bus `to`, without shift offsets.
  std::vector<double> transfer_angles(std::size_t from, std::size_t to) const;

  const DcFlows& base() const noexcept { return base_; }

 private:
  struct Solver;

  std::shared_ptr<const GridCase> grid_;
  std::vector<Eigen::Index> reduced_;
  std::vector<double> susceptance_;
  Eigen::SparseMatrix<double> b_;
  std::shared_ptr<const Solver> solver_;
  DcFlows base_;
};

DcFlows solve_dc(const DcModel& model);
DcFlows solve_dc(const GridCase& grid);

/// Branch flow change per 1 p.u. injected at bus index `from` and withdrawn at `to`.
std::vector<double> dc_ptdf(const DcModel& model, std::size_t from, std::size_t to);

struct DcLodfResult {
  std::size_t outage = 0;
  bool islanding = false;
  std::vector<double> lodf;            ///< LODF_{m,l}; -1 at m = l; NaN when islanding
  std::vector<double> pre_flow;        ///< P^pre per branch
  double transfer = 0.0;               ///< rho = P_l / (1 - PTDF_l)
  std::vector<double> predicted_flow;  ///< P_m + LODF_{m,l} P_l; empty when islanding
};

/// Bridge outages (|1 - PTDF_l| < 1e-9) are reported with islanding = true.
DcLodfResult dc_lodf(const DcModel& model, std::size_t outage);

inline constexpr double kDcBridgeThreshold = 1e-9;

}  // namespace gridsens
