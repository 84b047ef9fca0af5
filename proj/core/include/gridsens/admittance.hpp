#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/SparseCore>

#include "gridsens/grid_case.hpp"

namespace gridsens {

using Complex = std::complex<double>;

/// Two-port π-model admittances of one branch: [I_fr; I_to] = [yff yft; ytf ytt] [V_fr; V_to].
struct BranchStamp {
  std::size_t from = 0;
  std::size_t to = 0;
  Complex yff, yft, ytf, ytt;

  Complex from_current(Complex v_from, Complex v_to) const { return yff * v_from + yft * v_to; }
  Complex to_current(Complex v_from, Complex v_to) const { return ytf * v_from + ytt * v_to; }
};

/// Standard π model with the (complex) tap on the from side.
BranchStamp branch_stamp(const Branch& branch, std::size_t from_index, std::size_t to_index);

struct AdmittanceMatrix {
  Eigen::SparseMatrix<Complex> y;
  /// Indexed by branch; empty for open branches.
  std::vector<std::optional<BranchStamp>> stamps;
};

AdmittanceMatrix build_ybus(const GridCase& grid);

}  // namespace gridsens
