#include "gridsens/screening.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "gridsens/bridges.hpp"
#include "gridsens/errors.hpp"
#include "parallel.hpp"

namespace gridsens {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool ranks_before(const ScreeningEntry& a, const ScreeningEntry& b) {
  if (a.islanding != b.islanding) return a.islanding;
  if (!a.islanding) {
    const bool a_nan = std::isnan(a.severity);
    const bool b_nan = std::isnan(b.severity);
    if (a_nan != b_nan) return a_nan;
    if (!a_nan && a.severity != b.severity) return a.severity > b.severity;
  }
  return a.branch < b.branch;
}

std::vector<double> ranks_of(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double average = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = average;
    i = j + 1;
  }
  return ranks;
}

std::vector<std::size_t> top_branches(std::span<const SeverityPair> pairs, std::size_t k, bool predicted) {
  std::vector<SeverityPair> sorted(pairs.begin(), pairs.end());
  std::sort(sorted.begin(), sorted.end(), [predicted](const SeverityPair& a, const SeverityPair& b) {
    const double va = predicted ? a.predicted : a.actual;
    const double vb = predicted ? b.predicted : b.actual;
    if (va != vb) return va > vb;
    return a.branch < b.branch;
  });
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < std::min(k, sorted.size()); ++i) out.push_back(sorted[i].branch);
  std::sort(out.begin(), out.end());
  return out;
}

double side_power(Complex v, Complex i) { return (v * std::conj(i)).real(); }

}  // namespace

ScreeningReport screen(const PowerFlowSolution& sol, const LinearizedSystem& lin, const ScreeningOptions& options) {
  const GridCase& grid = *sol.grid;
  ScreeningReport report;
  report.case_id = grid.name();
  report.metric = options.metric;
  report.mode = lin.mode();
  report.top_k = options.top_k;

  const std::vector<std::size_t> bridge_list = find_bridges(grid);
  const std::set<std::size_t> bridges(bridge_list.begin(), bridge_list.end());

  std::vector<std::size_t> closed;
  for (std::size_t l = 0; l < grid.branch_count(); ++l) {
    if (grid.branches()[l].closed()) closed.push_back(l);
  }

  const OutageEvaluator evaluator(sol, lin, OutageOptions{options.metric, options.side, options.magnitudes});
  std::vector<ScreeningEntry> entries(closed.size());
  detail::parallel_for(closed.size(), options.jobs, [&](std::size_t i) {
    const std::size_t l = closed[i];
    ScreeningEntry& entry = entries[i];
    entry.branch = l;
    entry.from_bus = grid.branches()[l].from_bus;
    entry.to_bus = grid.branches()[l].to_bus;
    if (bridges.contains(l)) {
      entry.islanding = true;
      entry.severity = kIslandingSeverity;
      entry.note = "bridge";
      return;
    }
    try {
      OutageImpact impact = evaluator.evaluate(l);
      entry.t_condition = impact.t_condition;
      entry.islanding = impact.islanding;
      entry.severity = impact.severity;
      if (impact.islanding) entry.note = "singular_t";
      entry.delta_vmag = std::move(impact.delta_vmag);
    } catch (const NumericalError& e) {
      entry.severity = kNaN;
      entry.note = std::string("failed: ") + e.what();
    }
  });

  std::sort(entries.begin(), entries.end(), ranks_before);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    entries[i].rank = i + 1;
    entries[i].top_k = i < options.top_k;
  }
  report.entries = std::move(entries);
  return report;
}

OracleOutcome oracle_outage(const PowerFlowSolution& base, std::size_t branch, const OutageOptions& options,
                            const OracleOptions& oracle) {
  const GridCase& grid = *base.grid;
  if (branch >= grid.branch_count() || !grid.branches()[branch].closed()) {
    throw InputError("oracle outage needs a closed branch");
  }
  OracleOutcome outcome;
  outcome.branch = branch;
  if (!is_connected(grid, branch)) {
    outcome.islanded = true;
    outcome.severity = kIslandingSeverity;
    return outcome;
  }

  const GridCase outaged = grid.with_branch_status(branch, BranchStatus::Open);
  PowerFlowOptions opts = base.options;
  opts.warm_start = base.voltage.phasors();
  opts.max_iter = 2 * base.options.max_iter;
  opts.pinned_reactive.clear();
  for (std::size_t k : base.q_limited_buses) opts.pinned_reactive.emplace_back(k, base.q_gen[k]);
  if (oracle.q_limits == OracleQLimits::Frozen) opts.enforce_q_limits = false;
  PowerFlowSolution post;
  try {
    post = solve_ac_powerflow(outaged, opts);
  } catch (const NumericalError& e) {
    outcome.failure = e.what();
    outcome.severity = kNaN;
    return outcome;
  }
  outcome.converged = true;
  outcome.iterations = post.iterations;

  const std::size_t n = grid.bus_count();
  outcome.delta_vmag.resize(n);
  for (std::size_t k = 0; k < n; ++k) outcome.delta_vmag[k] = post.voltage.magnitude(k) - base.voltage.magnitude(k);

  outcome.delta_imag.assign(grid.branch_count(), 0.0);
  outcome.delta_p.assign(grid.branch_count(), 0.0);
  for (std::size_t m = 0; m < grid.branch_count(); ++m) {
    const auto& stamp = base.ybus->stamps[m];
    if (!stamp) continue;
    const bool from_side = options.side == BranchSide::From;
    const std::size_t bus = from_side ? stamp->from : stamp->to;
    const BranchTerminalCurrents before = branch_terminal_currents(base, m);
    const Complex i_before = from_side ? before.from() : before.to();
    Complex i_after = 0.0;
    if (m != branch) {
      const BranchTerminalCurrents after = branch_terminal_currents(post, m);
      i_after = from_side ? after.from() : after.to();
    }
    outcome.delta_imag[m] = std::abs(i_after) - std::abs(i_before);
    outcome.delta_p[m] = side_power(post.voltage.phasor(bus), i_after) - side_power(base.voltage.phasor(bus), i_before);
  }
  outcome.severity = severity_of(options.metric, outcome.delta_vmag, outcome.delta_imag, outcome.delta_p, branch);
  return outcome;
}

std::vector<OracleOutcome> run_oracle(const PowerFlowSolution& base, std::span<const std::size_t> branches,
                                      const OutageOptions& options, unsigned jobs,
                                      const OracleOptions& oracle) {
  std::vector<OracleOutcome> outcomes(branches.size());
  detail::parallel_for(branches.size(), jobs,
                       [&](std::size_t i) { outcomes[i] = oracle_outage(base, branches[i], options, oracle); });
  return outcomes;
}

void attach_oracle(ScreeningReport& report, std::span<const OracleOutcome> outcomes) {
  std::map<std::size_t, const OracleOutcome*> by_branch;
  for (const OracleOutcome& o : outcomes) by_branch[o.branch] = &o;
  for (ScreeningEntry& entry : report.entries) {
    auto it = by_branch.find(entry.branch);
    if (it == by_branch.end()) continue;
    const OracleOutcome& o = *it->second;
    entry.oracle_severity = o.islanded ? kIslandingSeverity : (o.converged ? o.severity : kNaN);
  }
}

double spearman_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) return kNaN;
  const std::vector<double> ra = ranks_of(a);
  const std::vector<double> rb = ranks_of(b);
  const double n = static_cast<double>(a.size());
  const double mean = (n + 1.0) / 2.0;
  double cov = 0.0;
  double va = 0.0;
  double vb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    cov += (ra[i] - mean) * (rb[i] - mean);
    va += (ra[i] - mean) * (ra[i] - mean);
    vb += (rb[i] - mean) * (rb[i] - mean);
  }
  if (va == 0.0 || vb == 0.0) return kNaN;
  return cov / std::sqrt(va * vb);
}

std::size_t top_k_overlap(std::span<const SeverityPair> pairs, std::size_t k) {
  const auto predicted = top_branches(pairs, k, true);
  const auto actual = top_branches(pairs, k, false);
  std::vector<std::size_t> common;
  std::set_intersection(predicted.begin(), predicted.end(), actual.begin(), actual.end(), std::back_inserter(common));
  return common.size();
}

ComparisonSummary compare_severities(std::span<const SeverityPair> pairs) {
  ComparisonSummary summary;
  summary.comparable = pairs.size();
  summary.sufficient = pairs.size() >= 3;
  std::vector<double> predicted;
  std::vector<double> actual;
  double total_error = 0.0;
  for (const SeverityPair& p : pairs) {
    predicted.push_back(p.predicted);
    actual.push_back(p.actual);
    const double err = std::abs(p.predicted - p.actual);
    summary.max_abs_error = std::max(summary.max_abs_error, err);
    total_error += err;
  }
  summary.mean_abs_error = pairs.empty() ? 0.0 : total_error / static_cast<double>(pairs.size());
  summary.error_basis = "severity";
  summary.spearman = summary.sufficient ? spearman_correlation(predicted, actual) : kNaN;
  for (std::size_t k : {3u, 5u, 10u}) summary.top_overlap.emplace_back(k, top_k_overlap(pairs, k));
  return summary;
}

ComparisonSummary compare(const ScreeningReport& report, std::span<const OracleOutcome> oracle) {
  std::map<std::size_t, const OracleOutcome*> by_branch;
  for (const OracleOutcome& o : oracle) by_branch[o.branch] = &o;
  if (by_branch.size() != report.entries.size()) throw InputError("report and oracle cover different outage sets");

  std::vector<SeverityPair> pairs;
  std::vector<std::pair<const ScreeningEntry*, const OracleOutcome*>> matched;
  std::size_t islanding_mismatches = 0;
  std::size_t diverged = 0;
  for (const ScreeningEntry& entry : report.entries) {
    auto it = by_branch.find(entry.branch);
    if (it == by_branch.end()) throw InputError("report and oracle cover different outage sets");
    const OracleOutcome& o = *it->second;
    if (entry.islanding != o.islanded) ++islanding_mismatches;
    if (!o.islanded && !o.converged) ++diverged;
    if (entry.islanding || o.islanded || !o.converged || std::isnan(entry.severity)) continue;
    pairs.push_back({entry.branch, entry.severity, o.severity});
    matched.emplace_back(&entry, &o);
  }
  std::sort(pairs.begin(), pairs.end(), [](const SeverityPair& a, const SeverityPair& b) { return a.branch < b.branch; });

  ComparisonSummary summary = compare_severities(pairs);
  summary.islanding_mismatches = islanding_mismatches;
  summary.diverged = diverged;

  bool per_bus = !matched.empty();
  for (const auto& [entry, o] : matched) per_bus = per_bus && entry->delta_vmag.size() == o->delta_vmag.size();
  if (per_bus) {
    double max_err = 0.0;
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& [entry, o] : matched) {
      for (std::size_t k = 0; k < o->delta_vmag.size(); ++k) {
        const double err = std::abs(entry->delta_vmag[k] - o->delta_vmag[k]);
        max_err = std::max(max_err, err);
        total += err;
        ++count;
      }
    }
    summary.max_abs_error = max_err;
    summary.mean_abs_error = count ? total / static_cast<double>(count) : 0.0;
    summary.error_basis = "delta_vmag";
  }
  return summary;
}

}  // namespace gridsens
