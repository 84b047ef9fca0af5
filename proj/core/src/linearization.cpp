#include "gridsens/linearization.hpp"

#include <Eigen/SparseLU>

#include "gridsens/errors.hpp"

namespace gridsens {

struct LinearizedSystem::Factorization {
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
};

LinearizedSystem::LinearizedSystem(const PowerFlowSolution& solution, LinearizationMode mode)
    : mode_(mode), grid_(solution.grid), voltage_(solution.voltage), counters_(std::make_shared<Counters>()) {
  const InjectionModel model = solution.model();
  const std::size_t n = model.bus_count();
  augmented_.assign(n, -1);
  if (mode == LinearizationMode::Full) {
    matrix_ = model.jacobian(solution.state);
    rhs_ = model.companion_rhs(solution.state);
    x0_ = solution.state;
    for (std::size_t k = 0; k < n; ++k) {
      if (auto slot = model.reactive_slot(k)) augmented_[k] = *slot;
    }
  } else {
    matrix_ = model.network_matrix();
    rhs_ = model.frozen_injection_rhs(solution.state);
    x0_ = solution.state.head(2 * static_cast<Eigen::Index>(n));
  }

  auto factorization = std::make_shared<Factorization>();
  factorization->lu.compute(matrix_);
  if (factorization->lu.info() != Eigen::Success) {
    throw SingularMatrixError("linearized system is singular: degenerate operating point");
  }
  lu_ = std::move(factorization);
  counters_->factorizations.fetch_add(1);
}

std::optional<Eigen::Index> LinearizedSystem::augmented_row(std::size_t bus) const {
  if (augmented_.at(bus) < 0) return std::nullopt;
  return augmented_[bus];
}

Eigen::VectorXd LinearizedSystem::solve(const Eigen::VectorXd& b) const {
  counters_->solves.fetch_add(1);
  Eigen::VectorXd x = lu_->lu.solve(b);
  if (!x.allFinite()) throw SingularMatrixError("linearized system solve produced non-finite values");
  return x;
}

Eigen::MatrixXd LinearizedSystem::solve(const Eigen::MatrixXd& b) const {
  counters_->solves.fetch_add(static_cast<std::size_t>(b.cols()));
  Eigen::MatrixXd x = lu_->lu.solve(b);
  if (!x.allFinite()) throw SingularMatrixError("linearized system solve produced non-finite values");
  return x;
}

LinearizedSystem linearize_at_solution(const PowerFlowSolution& solution, LinearizationMode mode) {
  return LinearizedSystem(solution, mode);
}

}  // namespace gridsens
