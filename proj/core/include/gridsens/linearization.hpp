#pragma once

#include <atomic>
#include <memory>
#include <optional>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "gridsens/injection_model.hpp"
#include "gridsens/powerflow.hpp"

namespace gridsens {

enum class LinearizationMode {
  Full,     ///< Newton matrix at the solution: network plus device and constraint stamps
  Network,  ///< expanded Y only; device currents frozen, slack pinned
};

/// Real linear model  Y_hat x = b  at a converged operating point.
///
/// Rows 2k and 2k+1 carry the real and imaginary KCL of bus k (slack rows pin
/// its voltage instead); in Full mode one augmented row/column per PV bus
/// follows. A unit current injected into bus k enters the right-hand side at
/// rows 2k and 2k+1. The factorization is computed once; solve() is const
/// and may be called concurrently.
class LinearizedSystem {
 public:
  LinearizedSystem(const PowerFlowSolution& solution, LinearizationMode mode);

  LinearizationMode mode() const noexcept { return mode_; }
  const GridCase& grid() const noexcept { return *grid_; }
  const std::shared_ptr<const GridCase>& grid_ptr() const noexcept { return grid_; }
  std::size_t bus_count() const noexcept { return grid_->bus_count(); }
  Eigen::Index dimension() const noexcept { return matrix_.rows(); }

  Eigen::Index real_row(std::size_t bus) const { return 2 * static_cast<Eigen::Index>(bus); }
  Eigen::Index imag_row(std::size_t bus) const { return 2 * static_cast<Eigen::Index>(bus) + 1; }
  std::optional<Eigen::Index> augmented_row(std::size_t bus) const;
  bool is_slack(std::size_t bus) const noexcept { return bus == grid_->slack_index(); }

  const Eigen::SparseMatrix<double>& matrix() const noexcept { return matrix_; }
  /// Right-hand side reproduced by the operating point: matrix() * operating_point() == rhs().
  const Eigen::VectorXd& rhs() const noexcept { return rhs_; }
  const Eigen::VectorXd& operating_point() const noexcept { return x0_; }
  const VoltageState& voltage() const noexcept { return voltage_; }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;

  /// Number of right-hand-side columns solved so far (shared across copies).
  std::size_t solve_count() const noexcept { return counters_->solves.load(); }
  std::size_t factorization_count() const noexcept { return counters_->factorizations.load(); }

 private:
  struct Counters {
    std::atomic<std::size_t> solves{0};
    std::atomic<std::size_t> factorizations{0};
  };
  struct Factorization;

  LinearizationMode mode_;
  std::shared_ptr<const GridCase> grid_;
  std::vector<Eigen::Index> augmented_;
  Eigen::SparseMatrix<double> matrix_;
  Eigen::VectorXd rhs_;
  Eigen::VectorXd x0_;
  VoltageState voltage_;
  std::shared_ptr<const Factorization> lu_;
  std::shared_ptr<Counters> counters_;
};

LinearizedSystem linearize_at_solution(const PowerFlowSolution& solution,
                                       LinearizationMode mode = LinearizationMode::Full);

}  // namespace gridsens
