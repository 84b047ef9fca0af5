#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "gridsens/linearization.hpp"
#include "gridsens/powerflow.hpp"

namespace gridsens {

/// cond(T) above this marks an outage as islanding.
inline constexpr double kIslandingConditionThreshold = 1e12;

/// Component order used for all 4-vectors: (from real, from imag, to real, to imag).
enum class BranchSide { From, To };

/// Voltage response to unit current injections at the terminals of a branch.
struct InjectionSensitivity {
  std::size_t branch = 0;
  std::size_t from = 0;
  std::size_t to = 0;
  /// 2n x 4; column c is dV/d(gamma_c).
  Eigen::Matrix<double, Eigen::Dynamic, 4> dv;
};

/// Four solves against the existing factorization; no refactorization.
/// Injections at the slack bus produce zero columns (its voltage is pinned).
InjectionSensitivity dv_dgamma(const LinearizedSystem& lin, std::size_t branch);

/// Voltage response to a unit current injected at one bus (component 0 real, 1 imaginary).
Eigen::VectorXd unit_injection_response(const LinearizedSystem& lin, std::size_t bus, int component);

/// Linear map from terminal voltages to terminal currents of a branch's π model.
struct BranchCurrentJacobian {
  std::size_t branch = 0;
  std::size_t from = 0;
  std::size_t to = 0;
  Eigen::Matrix4d local = Eigen::Matrix4d::Zero();

  /// Gathers (V_fr^r, V_fr^i, V_to^r, V_to^i) from an interleaved bus vector.
  Eigen::Vector4d terminal_values(const Eigen::Ref<const Eigen::VectorXd>& v) const;
  Eigen::Vector4d apply(const Eigen::Ref<const Eigen::VectorXd>& v) const { return local * terminal_values(v); }
  /// Scatter into a 4 x 2n dense matrix.
  Eigen::MatrixXd dense(std::size_t bus_count) const;
};

BranchCurrentJacobian branch_current_jacobian(const GridCase& grid, std::size_t branch);

/// dI_l/dgamma = (dI_l/dV)(dV/dgamma), rows and columns ordered (fr^r, fr^i, to^r, to^i).
Eigen::Matrix4d di_line_dgamma(const InjectionSensitivity& sens, const BranchCurrentJacobian& jac);

struct OutageTransferMatrix {
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  double condition = 1.0;

  bool singular() const noexcept { return !(condition <= kIslandingConditionThreshold); }
};

/// T = I - dI_l/dgamma with its 2-norm condition number.
OutageTransferMatrix build_transfer_matrix(const Eigen::Matrix4d& di_dgamma);

/// Solves T gamma = I_pre. Throws IslandingError when T is singular.
Eigen::Vector4d solve_gamma(const OutageTransferMatrix& t, const BranchTerminalCurrents& pre);

/// Delta V = [dV/dgamma] T^{-1} I_pre (length 2n).
Eigen::VectorXd outage_delta_v(const InjectionSensitivity& sens, const OutageTransferMatrix& t,
                               const BranchTerminalCurrents& pre);

/// First-order change of each bus voltage magnitude.
std::vector<double> delta_voltage_magnitude(const Eigen::VectorXd& dv, const VoltageState& op);

struct CurrentMagnitudeDelta {
  double value = 0.0;
  /// Operating current is zero; value is the norm of the current change instead.
  bool fallback = false;
};

CurrentMagnitudeDelta delta_current_magnitude(const Eigen::VectorXd& dv, const PowerFlowSolution& sol,
                                              std::size_t branch, BranchSide side = BranchSide::From);

/// First-order change of Re{V conj(I)} at one end of a branch.
double delta_line_power(const Eigen::VectorXd& dv, const PowerFlowSolution& sol, std::size_t branch,
                        BranchSide side = BranchSide::From);

struct CircuitLodfEntry {
  std::size_t branch = 0;
  double delta_p = 0.0;
  std::optional<double> ratio;  ///< delta_p / P_l^pre; empty when P_l^pre is zero
};

struct CircuitLodfResult {
  std::size_t outage = 0;
  bool islanding = false;
  double pre_power = 0.0;
  std::vector<CircuitLodfEntry> entries;
};

/// AC analogue of LODF: from-side real power change of each monitored branch
/// relative to the pre-outage real power on the outaged branch. For the
/// outaged branch itself the post-outage terminal current is zero.
CircuitLodfResult circuit_lodf(const PowerFlowSolution& sol, const LinearizedSystem& lin, std::size_t outage,
                               std::span<const std::size_t> monitored);

enum class SeverityMetric { VmagInf, Vmag2, ImagInf, PlineInf };

std::string_view to_string(SeverityMetric metric);
std::optional<SeverityMetric> parse_severity_metric(std::string_view name);

/// Scalar severity of one outage. Branch metrics skip `excluded` (the outaged branch).
double severity_of(SeverityMetric metric, std::span<const double> delta_vmag, std::span<const double> delta_imag,
                   std::span<const double> delta_p, std::optional<std::size_t> excluded);

inline constexpr double kIslandingSeverity = std::numeric_limits<double>::infinity();

struct OutageImpact {
  std::size_t outage = 0;
  bool islanding = false;
  double t_condition = 1.0;
  Eigen::Vector4d gamma = Eigen::Vector4d::Zero();
  Eigen::VectorXd delta_v;
  std::vector<double> delta_vmag;
  std::vector<double> delta_imag;
  std::vector<double> delta_p;
  double severity = 0.0;
};

/// How Δ|V|, Δ|I| and ΔP are derived from ΔV. Linearized uses the chain-rule
/// first-order terms; Exact evaluates the magnitudes at the shifted state, which
/// matches a re-solve on networks where ΔV itself is exact.
enum class MagnitudeModel { Linearized, Exact };

struct OutageOptions {
  SeverityMetric metric = SeverityMetric::VmagInf;
  BranchSide side = BranchSide::From;
  MagnitudeModel magnitudes = MagnitudeModel::Linearized;
};

/// Full per-outage pipeline over a shared operating point. evaluate() is
/// const and safe to call from several threads.
class OutageEvaluator {
 public:
  OutageEvaluator(const PowerFlowSolution& sol, const LinearizedSystem& lin, OutageOptions options = {});

  OutageImpact evaluate(std::size_t outage) const;
  const OutageOptions& options() const noexcept { return options_; }

 private:
  const PowerFlowSolution& sol_;
  const LinearizedSystem& lin_;
  OutageOptions options_;
  std::vector<std::optional<BranchCurrentJacobian>> jacobians_;
};

OutageImpact evaluate_outage(const PowerFlowSolution& sol, const LinearizedSystem& lin, std::size_t outage,
                             const OutageOptions& options = {});

}  // namespace gridsens
