#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gridsens/linearization.hpp"
#include "gridsens/powerflow.hpp"
#include "gridsens/sensitivity.hpp"

namespace gridsens {

struct ScreeningOptions {
  SeverityMetric metric = SeverityMetric::VmagInf;
  BranchSide side = BranchSide::From;
  MagnitudeModel magnitudes = MagnitudeModel::Linearized;
  std::size_t top_k = 10;
  unsigned jobs = 1;
};

struct ScreeningEntry {
  std::size_t rank = 0;  ///< 1-based position in the ranking
  std::size_t branch = 0;
  int from_bus = 0;
  int to_bus = 0;
  double severity = 0.0;
  bool islanding = false;
  bool top_k = false;
  double t_condition = 0.0;  ///< 0 when not evaluated (graph bridge)
  std::optional<double> oracle_severity;
  std::string note;
  std::vector<double> delta_vmag;
};

/// Ranked N-1 outage list: islanding outages first, then descending
/// severity, ties broken by branch index.
struct ScreeningReport {
  std::string case_id;
  SeverityMetric metric = SeverityMetric::VmagInf;
  LinearizationMode mode = LinearizationMode::Full;
  std::size_t top_k = 0;
  std::vector<ScreeningEntry> entries;
};

/// Evaluates every closed branch. Graph bridges are flagged as islanding
/// without running the sensitivity pipeline.
ScreeningReport screen(const PowerFlowSolution& sol, const LinearizedSystem& lin, const ScreeningOptions& options = {});

struct OracleOutcome {
  std::size_t branch = 0;
  bool islanded = false;
  bool converged = false;
  int iterations = 0;
  std::string failure;
  std::vector<double> delta_vmag;
  std::vector<double> delta_imag;
  std::vector<double> delta_p;
  double severity = 0.0;
};

/// Reactive-limit handling in the oracle re-solve.
enum class OracleQLimits {
  Frozen,    ///< keep the base PV/PQ roles; no further conversions
  Enforced,  ///< start from the base roles and run the usual Q-limit rounds
};

struct OracleOptions {
  OracleQLimits q_limits = OracleQLimits::Frozen;
};

/// Re-solves the nonlinear power flow with the branch removed, warm-started
/// from the base solution with twice the base iteration budget.
OracleOutcome oracle_outage(const PowerFlowSolution& base, std::size_t branch, const OutageOptions& options = {},
                            const OracleOptions& oracle = {});

/// Oracle for several branches; results are ordered like `branches`.
std::vector<OracleOutcome> run_oracle(const PowerFlowSolution& base, std::span<const std::size_t> branches,
                                      const OutageOptions& options = {}, unsigned jobs = 1,
                                      const OracleOptions& oracle = {});

/// Copies oracle severities into the report entries (islanded: +inf, diverged: NaN).
void attach_oracle(ScreeningReport& report, std::span<const OracleOutcome> outcomes);

struct SeverityPair {
  std::size_t branch = 0;
  double predicted = 0.0;
  double actual = 0.0;
};

struct ComparisonSummary {
  bool sufficient = false;
  std::size_t comparable = 0;
  double spearman = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> top_overlap;  ///< (K, overlap) for K in {3, 5, 10}
  double max_abs_error = 0.0;
  double mean_abs_error = 0.0;
  std::string error_basis;  ///< "delta_vmag" (per bus) or "severity"
  std::size_t islanding_mismatches = 0;
  std::size_t diverged = 0;
};

/// Spearman rank correlation with average ranks for ties; NaN when either side is constant.
double spearman_correlation(std::span<const double> a, std::span<const double> b);

/// |top-K by predicted ∩ top-K by actual|, ties broken by branch index.
std::size_t top_k_overlap(std::span<const SeverityPair> pairs, std::size_t k);

/// Summary over outages that are neither islanding nor non-converged.
/// Fewer than three comparable outages mark the summary insufficient.
ComparisonSummary compare(const ScreeningReport& report, std::span<const OracleOutcome> oracle);
ComparisonSummary compare_severities(std::span<const SeverityPair> pairs);

}  // namespace gridsens
