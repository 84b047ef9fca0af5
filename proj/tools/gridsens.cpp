#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gridsens/bridges.hpp"
#include "gridsens/case_io.hpp"
#include "gridsens/dc_model.hpp"
#include "gridsens/errors.hpp"
#include "gridsens/linearization.hpp"
#include "gridsens/powerflow.hpp"
#include "gridsens/report_io.hpp"
#include "gridsens/screening.hpp"
#include "gridsens/sensitivity.hpp"

#ifndef GRIDSENS_VERSION
#define GRIDSENS_VERSION "0.0.0"
#endif

using nlohmann::ordered_json;
using namespace gridsens;

namespace {

constexpr int kExitInput = 1;
constexpr int kExitNumerical = 2;

// JSON numbers carry 12 significant digits; non-finite values become strings.
ordered_json num(double x) {
  if (!std::isfinite(x)) return format_number(x);
  return std::strtod(format_number(x).c_str(), nullptr);
}

struct Output {
  std::string path;
  std::ofstream file;
  std::ostream& stream() {
    if (path.empty()) return std::cout;
    if (!file.is_open()) {
      file.open(path, std::ios::binary);
      if (!file) throw InputError("cannot write " + path);
    }
    return file;
  }
};

void write_json(std::ostream& out, const ordered_json& doc) { out << doc.dump(2) << '\n'; }

struct PowerFlowArgs {
  double tol = 1e-8;
  int max_iter = 25;
  bool no_q_limits = false;
  std::string load_model = "power";

  void add_to(CLI::App& sub) {
    sub.add_option("--tol", tol, "Newton mismatch tolerance (p.u.)")->check(CLI::PositiveNumber);
    sub.add_option("--max-iter", max_iter, "Newton iteration limit")->check(CLI::PositiveNumber);
    sub.add_flag("--no-q-limits", no_q_limits, "Ignore generator reactive limits");
    sub.add_option("--load-model", load_model, "Load model")->check(CLI::IsMember({"power", "current"}));
  }

  PowerFlowOptions options() const {
    PowerFlowOptions o;
    o.tol = tol;
    o.max_iter = max_iter;
    o.enforce_q_limits = !no_q_limits;
    o.load_model = load_model == "current" ? LoadModel::ConstantCurrent : LoadModel::ConstantPower;
    return o;
  }

  ordered_json meta() const {
    return {{"tol", num(tol)}, {"max_iter", max_iter}, {"q_limits", !no_q_limits}, {"load_model", load_model}};
  }
};

ordered_json make_meta(const std::string& command, const GridCase& grid) {
  return {{"tool", "gridsens"}, {"version", GRIDSENS_VERSION}, {"command", command}, {"case", grid.name()},
          {"buses", grid.bus_count()}, {"branches", grid.branch_count()}};
}

std::string role_name(const PowerFlowSolution& sol, std::size_t k) {
  switch (sol.roles[k]) {
    case BusKind::Slack: return "slack";
    case BusKind::PV: return "pv";
    case BusKind::PQ: break;
  }
  return sol.grid->buses()[k].kind == BusKind::PV ? "pq_limited" : "pq";
}

// Parses "all" or a 1-based branch number into 0-based closed branch indices.
std::vector<std::size_t> outage_list(const GridCase& grid, const std::string& spec) {
  std::vector<std::size_t> out;
  if (spec == "all") {
    for (std::size_t l = 0; l < grid.branch_count(); ++l) {
      if (grid.branches()[l].closed()) out.push_back(l);
    }
    return out;
  }
  std::size_t pos = 0;
  long n = 0;
  try {
    n = std::stol(spec, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != spec.size() || n < 1 || static_cast<std::size_t>(n) > grid.branch_count()) {
    throw InputError("outage must be 'all' or a branch number in 1.." + std::to_string(grid.branch_count()));
  }
  const std::size_t l = static_cast<std::size_t>(n - 1);
  if (!grid.branches()[l].closed()) throw InputError("branch " + spec + " is out of service");
  out.push_back(l);
  return out;
}

LinearizationMode parse_mode(const std::string& s) {
  return s == "network" ? LinearizationMode::Network : LinearizationMode::Full;
}

BranchSide parse_side(const std::string& s) { return s == "to" ? BranchSide::To : BranchSide::From; }

MagnitudeModel parse_magnitudes(const std::string& s) {
  return s == "exact" ? MagnitudeModel::Exact : MagnitudeModel::Linearized;
}

ordered_json summary_json(const ComparisonSummary& s) {
  ordered_json overlap = ordered_json::object();
  for (auto [k, v] : s.top_overlap) overlap[std::to_string(k)] = v;
  return {{"sufficient", s.sufficient},
          {"comparable", s.comparable},
          {"spearman", num(s.spearman)},
          {"top_overlap", overlap},
          {"max_abs_error", num(s.max_abs_error)},
          {"mean_abs_error", num(s.mean_abs_error)},
          {"error_basis", s.error_basis},
          {"islanding_mismatches", s.islanding_mismatches},
          {"diverged", s.diverged}};
}

// ---- solve ------------------------------------------------------------------

struct SolveArgs {
  std::string case_path;
  PowerFlowArgs pf;
  bool json = false;
  bool csv = false;
  std::string table = "bus";
};

int run_solve(const SolveArgs& a, Output& out) {
  const GridCase grid = load_case(a.case_path);
  const PowerFlowSolution sol = solve_ac_powerflow(grid, a.pf.options());
  const double base = grid.base_mva();
  std::ostream& os = out.stream();

  if (a.csv) {
    if (a.table == "bus") {
      os << "bus,type,vm,va_deg,p_inj,q_inj\n";
      for (std::size_t k = 0; k < grid.bus_count(); ++k) {
        os << grid.buses()[k].id << ',' << role_name(sol, k) << ',' << format_number(sol.voltage.magnitude(k)) << ','
           << format_number(sol.voltage.angle(k) * 180.0 / M_PI) << ',' << format_number(sol.bus_injection[k].real())
           << ',' << format_number(sol.bus_injection[k].imag()) << '\n';
      }
    } else {
      os << "branch,from,to,status,p_from,q_from,p_to,q_to\n";
      for (std::size_t l = 0; l < grid.branch_count(); ++l) {
        const Branch& b = grid.branches()[l];
        const BranchFlow& f = sol.branch_flows[l];
        os << l + 1 << ',' << b.from_bus << ',' << b.to_bus << ',' << (b.closed() ? 1 : 0) << ','
           << format_number(f.p_from) << ',' << format_number(f.q_from) << ',' << format_number(f.p_to) << ','
           << format_number(f.q_to) << '\n';
      }
    }
    return 0;
  }

  ordered_json doc;
  doc["meta"] = make_meta("solve", grid);
  doc["meta"]["options"] = a.pf.meta();
  ordered_json limited = ordered_json::array();
  for (std::size_t k : sol.q_limited_buses) limited.push_back(grid.buses()[k].id);
  doc["summary"] = {{"iterations", sol.iterations},
                    {"max_mismatch", num(sol.max_mismatch)},
                    {"q_limit_rounds", sol.q_limit_rounds},
                    {"q_limits_resolved", sol.q_limits_resolved},
                    {"q_limited_buses", limited},
                    {"base_mva", num(base)}};
  ordered_json buses = ordered_json::array();
  for (std::size_t k = 0; k < grid.bus_count(); ++k) {
    buses.push_back({{"bus", grid.buses()[k].id},
                     {"type", role_name(sol, k)},
                     {"vm", num(sol.voltage.magnitude(k))},
                     {"va_deg", num(sol.voltage.angle(k) * 180.0 / M_PI)},
                     {"p_inj", num(sol.bus_injection[k].real())},
                     {"q_inj", num(sol.bus_injection[k].imag())}});
  }
  doc["buses"] = buses;
  ordered_json branches = ordered_json::array();
  for (std::size_t l = 0; l < grid.branch_count(); ++l) {
    const Branch& b = grid.branches()[l];
    const BranchFlow& f = sol.branch_flows[l];
    branches.push_back({{"branch", l + 1},
                        {"from", b.from_bus},
                        {"to", b.to_bus},
                        {"status", b.closed() ? 1 : 0},
                        {"p_from", num(f.p_from)},
                        {"q_from", num(f.q_from)},
                        {"p_to", num(f.p_to)},
                        {"q_to", num(f.q_to)}});
  }
  doc["branches"] = branches;
  write_json(os, doc);
  return 0;
}

// ---- dclodf -----------------------------------------------------------------

struct DcLodfArgs {
  std::string case_path;
  std::string outage = "all";
};

int run_dclodf(const DcLodfArgs& a, Output& out) {
  const GridCase grid = load_case(a.case_path);
  const std::vector<std::size_t> outages = outage_list(grid, a.outage);
  const DcModel model(grid);
  std::ostream& os = out.stream();
  os << "outage,monitored,lodf,pre_flow,predicted_flow\n";
  for (std::size_t l : outages) {
    const DcLodfResult r = dc_lodf(model, l);
    for (std::size_t m = 0; m < grid.branch_count(); ++m) {
      if (!grid.branches()[m].closed()) continue;
      const double predicted = r.islanding ? std::nan("") : r.predicted_flow[m];
      os << l + 1 << ',' << m + 1 << ',' << format_number(r.lodf[m]) << ',' << format_number(r.pre_flow[m]) << ','
         << format_number(predicted) << '\n';
    }
  }
  return 0;
}

// ---- sens -------------------------------------------------------------------

struct SensArgs {
  std::string case_path;
  PowerFlowArgs pf;
  std::string outage = "all";
  std::string mode = "full";
  std::string metric = "vmag";
  std::string side = "from";
  std::string magnitudes = "linear";
  bool json = false;
};

int run_sens(const SensArgs& a, Output& out) {
  const GridCase grid = load_case(a.case_path);
  const std::vector<std::size_t> outages = outage_list(grid, a.outage);
  const PowerFlowSolution sol = solve_ac_powerflow(grid, a.pf.options());
  const LinearizedSystem lin = linearize_at_solution(sol, parse_mode(a.mode));
  const SeverityMetric metric = a.metric == "imag"    ? SeverityMetric::ImagInf
                                : a.metric == "pline" ? SeverityMetric::PlineInf
                                                      : SeverityMetric::VmagInf;
  const OutageEvaluator evaluator(sol, lin, OutageOptions{metric, parse_side(a.side), parse_magnitudes(a.magnitudes)});
  const std::vector<std::size_t> bridge_list = find_bridges(grid);
  const std::set<std::size_t> bridges(bridge_list.begin(), bridge_list.end());
  const bool per_bus = metric == SeverityMetric::VmagInf;

  struct Row {
    std::size_t outage;
    bool islanding;
    double t_condition;
    double severity;
    std::vector<double> deltas;
  };
  std::vector<Row> rows;
  for (std::size_t l : outages) {
    Row row{l, bridges.contains(l), 0.0, kIslandingSeverity, {}};
    if (!row.islanding) {
      OutageImpact impact = evaluator.evaluate(l);
      row.islanding = impact.islanding;
      row.t_condition = impact.t_condition;
      row.severity = impact.severity;
      if (!impact.islanding) {
        row.deltas = per_bus ? impact.delta_vmag : metric == SeverityMetric::ImagInf ? impact.delta_imag : impact.delta_p;
      }
    }
    rows.push_back(std::move(row));
  }

  auto element_id = [&](std::size_t i) -> long {
    return per_bus ? grid.buses()[i].id : static_cast<long>(i + 1);
  };
  auto element_included = [&](std::size_t i) { return per_bus || grid.branches()[i].closed(); };

  std::ostream& os = out.stream();
  if (!a.json) {
    os << "outage,element,delta,islanding\n";
    for (const Row& r : rows) {
      if (r.islanding) {
        os << r.outage + 1 << ",," << format_number(std::nan("")) << ",1\n";
        continue;
      }
      for (std::size_t i = 0; i < r.deltas.size(); ++i) {
        if (!element_included(i)) continue;
        os << r.outage + 1 << ',' << element_id(i) << ',' << format_number(r.deltas[i]) << ",0\n";
      }
    }
    return 0;
  }

  ordered_json doc;
  doc["meta"] = make_meta("sens", grid);
  doc["meta"]["options"] = a.pf.meta();
  doc["meta"]["options"]["mode"] = a.mode;
  doc["meta"]["options"]["metric"] = a.metric;
  doc["meta"]["options"]["side"] = a.side;
  doc["meta"]["options"]["magnitudes"] = a.magnitudes;
  doc["meta"]["element"] = per_bus ? "bus" : "branch";
  ordered_json list = ordered_json::array();
  for (const Row& r : rows) {
    ordered_json deltas = ordered_json::array();
    for (std::size_t i = 0; i < r.deltas.size(); ++i) {
      if (element_included(i)) deltas.push_back({{"element", element_id(i)}, {"delta", num(r.deltas[i])}});
    }
    list.push_back({{"outage", r.outage + 1},
                    {"from", grid.branches()[r.outage].from_bus},
                    {"to", grid.branches()[r.outage].to_bus},
                    {"islanding", r.islanding},
                    {"t_condition", num(r.t_condition)},
                    {"severity", num(r.severity)},
                    {"deltas", deltas}});
  }
  doc["outages"] = list;
  write_json(os, doc);
  return 0;
}

// ---- screen -----------------------------------------------------------------

struct ScreenArgs {
  std::string case_path;
  PowerFlowArgs pf;
  std::string metric = "vmag_inf";
  std::size_t top = 10;
  bool with_oracle = false;
  std::string oracle_q_limits = "frozen";
  std::string mode = "full";
  std::string side = "from";
  std::string magnitudes = "linear";
  std::string summary_path;
};

int run_screen(const ScreenArgs& a, Output& out, unsigned jobs) {
  const GridCase grid = load_case(a.case_path);
  const PowerFlowSolution sol = solve_ac_powerflow(grid, a.pf.options());
  const LinearizedSystem lin = linearize_at_solution(sol, parse_mode(a.mode));
  ScreeningOptions opts;
  opts.metric = *parse_severity_metric(a.metric);
  opts.side = parse_side(a.side);
  opts.magnitudes = parse_magnitudes(a.magnitudes);
  opts.top_k = a.top;
  opts.jobs = jobs;
  ScreeningReport report = screen(sol, lin, opts);

  ordered_json summary;
  summary["meta"] = make_meta("screen", grid);
  summary["meta"]["options"] = a.pf.meta();
  summary["meta"]["options"]["metric"] = a.metric;
  summary["meta"]["options"]["mode"] = a.mode;
  summary["meta"]["options"]["side"] = a.side;
  summary["meta"]["options"]["magnitudes"] = a.magnitudes;
  summary["meta"]["options"]["top"] = a.top;
  std::size_t islanding = 0;
  std::size_t failed = 0;
  ordered_json top = ordered_json::array();
  for (const ScreeningEntry& e : report.entries) {
    islanding += e.islanding ? 1 : 0;
    failed += (!e.islanding && std::isnan(e.severity)) ? 1 : 0;
    if (e.top_k) top.push_back(e.branch + 1);
  }
  summary["outages"] = report.entries.size();
  summary["islanding"] = islanding;
  summary["failed"] = failed;
  summary["top"] = top;

  if (a.with_oracle) {
    summary["meta"]["options"]["oracle_q_limits"] = a.oracle_q_limits;
    std::vector<std::size_t> branches;
    for (const ScreeningEntry& e : report.entries) branches.push_back(e.branch);
    OracleOptions oracle;
    oracle.q_limits = a.oracle_q_limits == "enforced" ? OracleQLimits::Enforced : OracleQLimits::Frozen;
    const std::vector<OracleOutcome> outcomes =
        run_oracle(sol, branches, OutageOptions{opts.metric, opts.side}, jobs, oracle);
    attach_oracle(report, outcomes);
    summary["comparison"] = summary_json(compare(report, outcomes));
  }

  write_screening_csv(out.stream(), report, a.with_oracle);
  if (!a.summary_path.empty()) {
    std::ofstream file(a.summary_path, std::ios::binary);
    if (!file) throw InputError("cannot write " + a.summary_path);
    write_json(file, summary);
  } else {
    write_json(std::cerr, summary);
  }
  return 0;
}

// ---- compare ----------------------------------------------------------------

struct CompareArgs {
  std::string first;
  std::string second;
  std::string first_column = "severity";
  std::string second_column = "severity";
};

std::map<std::size_t, ScreeningCsvRow> read_rows(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": file not found");
  std::map<std::size_t, ScreeningCsvRow> rows;
  for (ScreeningCsvRow& row : read_screening_csv(in)) {
    const std::size_t branch = row.branch;
    if (!rows.emplace(branch, std::move(row)).second) {
      throw InputError(path + ": branch " + std::to_string(branch) + " listed twice");
    }
  }
  return rows;
}

double column_value(const ScreeningCsvRow& row, const std::string& column, const std::string& path) {
  if (column == "severity") return row.severity;
  if (!row.oracle_severity) throw InputError(path + ": no oracle_severity column");
  return *row.oracle_severity;
}

int run_compare(const CompareArgs& a, Output& out) {
  const auto first = read_rows(a.first);
  const auto second = read_rows(a.second);
  std::vector<SeverityPair> pairs;
  std::size_t islanding_mismatches = 0;
  std::size_t unmatched = 0;
  for (const auto& [branch, row] : first) {
    auto it = second.find(branch);
    if (it == second.end()) {
      ++unmatched;
      continue;
    }
    const double x = column_value(row, a.first_column, a.first);
    const double y = column_value(it->second, a.second_column, a.second);
    if (row.islanding != it->second.islanding) ++islanding_mismatches;
    if (!std::isfinite(x) || !std::isfinite(y)) continue;
    pairs.push_back({branch - 1, x, y});
  }
  for (const auto& [branch, row] : second) unmatched += first.contains(branch) ? 0 : 1;

  ComparisonSummary summary = compare_severities(pairs);
  summary.islanding_mismatches = islanding_mismatches;
  ordered_json doc;
  doc["meta"] = {{"tool", "gridsens"},
                 {"version", GRIDSENS_VERSION},
                 {"command", "compare"},
                 {"first", {{"file", a.first}, {"column", a.first_column}}},
                 {"second", {{"file", a.second}, {"column", a.second_column}}}};
  doc["unmatched"] = unmatched;
  doc["comparison"] = summary_json(summary);
  write_json(out.stream(), doc);
  return 0;
}

// ---- dump -------------------------------------------------------------------

struct DumpArgs {
  std::string case_path;
  bool matpower = false;
};

int run_dump(const DumpArgs& a, Output& out) {
  const GridCase grid = load_case(a.case_path);
  if (a.matpower) {
    out.stream() << to_matpower(grid);
    return 0;
  }
  auto kind = [](BusKind k) { return k == BusKind::Slack ? "slack" : k == BusKind::PV ? "pv" : "pq"; };
  ordered_json doc;
  doc["meta"] = make_meta("dump", grid);
  doc["base_mva"] = num(grid.base_mva());
  ordered_json buses = ordered_json::array();
  for (const Bus& b : grid.buses()) {
    buses.push_back({{"id", b.id},
                     {"kind", kind(b.kind)},
                     {"p_load", num(b.p_load)},
                     {"q_load", num(b.q_load)},
                     {"g_shunt", num(b.g_shunt)},
                     {"b_shunt", num(b.b_shunt)},
                     {"v_init", num(b.v_init)},
                     {"theta_init", num(b.theta_init)}});
  }
  doc["buses"] = buses;
  ordered_json branches = ordered_json::array();
  for (std::size_t l = 0; l < grid.branch_count(); ++l) {
    const Branch& b = grid.branches()[l];
    branches.push_back({{"branch", l + 1},
                        {"from", b.from_bus},
                        {"to", b.to_bus},
                        {"r", num(b.r)},
                        {"x", num(b.x)},
                        {"b_charging", num(b.b_charging)},
                        {"tap", num(b.tap)},
                        {"shift", num(b.shift)},
                        {"status", b.closed() ? 1 : 0}});
  }
  doc["branches"] = branches;
  ordered_json gens = ordered_json::array();
  for (const Generator& g : grid.generators()) {
    gens.push_back({{"bus", g.bus},
                    {"p_set", num(g.p_set)},
                    {"q_set", num(g.q_set)},
                    {"v_set", num(g.v_set)},
                    {"q_min", num(g.q_min)},
                    {"q_max", num(g.q_max)},
                    {"in_service", g.in_service}});
  }
  doc["generators"] = gens;
  write_json(out.stream(), doc);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AC power flow, line-outage sensitivities and N-1 screening", "gridsens"};
  app.set_version_flag("--version", std::string("gridsens ") + GRIDSENS_VERSION);
  app.require_subcommand(1);
  app.fallthrough();

  Output out;
  unsigned jobs = 1;
  app.add_option("--out,-o", out.path, "Write results to this file instead of stdout");
  app.add_option("--jobs,-j", jobs, "Parallel outage evaluations")->check(CLI::Range(1u, 1024u));

  SolveArgs solve_args;
  CLI::App* solve = app.add_subcommand("solve", "Solve the AC power flow");
  solve->add_option("case", solve_args.case_path, "MATPOWER case file")->required();
  solve_args.pf.add_to(*solve);
  auto* json_flag = solve->add_flag("--json", solve_args.json, "JSON output (default)");
  solve->add_flag("--csv", solve_args.csv, "CSV output")->excludes(json_flag);
  solve->add_option("--table", solve_args.table, "CSV table")->check(CLI::IsMember({"bus", "branch"}));

  DcLodfArgs dc_args;
  CLI::App* dclodf = app.add_subcommand("dclodf", "DC line outage distribution factors");
  dclodf->add_option("case", dc_args.case_path, "MATPOWER case file")->required();
  dclodf->add_option("--outage", dc_args.outage, "Branch number or 'all'");

  SensArgs sens_args;
  CLI::App* sens = app.add_subcommand("sens", "Line-outage sensitivities at the operating point");
  sens->add_option("case", sens_args.case_path, "MATPOWER case file")->required();
  sens_args.pf.add_to(*sens);
  sens->add_option("--outage", sens_args.outage, "Branch number or 'all'");
  sens->add_option("--mode", sens_args.mode, "Linear model")->check(CLI::IsMember({"full", "network"}));
  sens->add_option("--metric", sens_args.metric, "Reported change")->check(CLI::IsMember({"vmag", "imag", "pline"}));
  sens->add_option("--side", sens_args.side, "Branch end for imag/pline")->check(CLI::IsMember({"from", "to"}));
  sens->add_option("--magnitudes", sens_args.magnitudes, "Magnitude changes from dV")
      ->check(CLI::IsMember({"linear", "exact"}));
  sens->add_flag("--json", sens_args.json, "JSON output instead of CSV");

  ScreenArgs screen_args;
  CLI::App* scr = app.add_subcommand("screen", "Rank all N-1 line outages");
  scr->add_option("case", screen_args.case_path, "MATPOWER case file")->required();
  screen_args.pf.add_to(*scr);
  scr->add_option("--metric", screen_args.metric, "Severity metric")
      ->check(CLI::IsMember({"vmag_inf", "vmag_2", "imag_inf", "pline_inf"}));
  scr->add_option("--top", screen_args.top, "Size of the flagged top set");
  scr->add_flag("--with-oracle", screen_args.with_oracle, "Re-solve every outage and compare");
  scr->add_option("--oracle-q-limits", screen_args.oracle_q_limits, "Reactive limits in the re-solve")
      ->check(CLI::IsMember({"frozen", "enforced"}));
  scr->add_option("--mode", screen_args.mode, "Linear model")->check(CLI::IsMember({"full", "network"}));
  scr->add_option("--side", screen_args.side, "Branch end for branch metrics")->check(CLI::IsMember({"from", "to"}));
  scr->add_option("--magnitudes", screen_args.magnitudes, "Magnitude changes from dV")
      ->check(CLI::IsMember({"linear", "exact"}));
  scr->add_option("--summary", screen_args.summary_path, "Summary JSON file (default: stderr)");

  CompareArgs cmp_args;
  CLI::App* cmp = app.add_subcommand("compare", "Compare severities from two screening CSV files");
  cmp->add_option("first", cmp_args.first, "Screening CSV")->required();
  cmp->add_option("second", cmp_args.second, "Screening CSV")->required();
  cmp->add_option("--first-column", cmp_args.first_column)->check(CLI::IsMember({"severity", "oracle_severity"}));
  cmp->add_option("--second-column", cmp_args.second_column)->check(CLI::IsMember({"severity", "oracle_severity"}));

  DumpArgs dump_args;
  CLI::App* dump = app.add_subcommand("dump", "Print the parsed case");
  dump->add_option("case", dump_args.case_path, "MATPOWER case file")->required();
  dump->add_flag("--matpower", dump_args.matpower, "MATPOWER text instead of JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    int code = 0;
    if (*solve) code = run_solve(solve_args, out);
    if (*dclodf) code = run_dclodf(dc_args, out);
    if (*sens) code = run_sens(sens_args, out);
    if (*scr) code = run_screen(screen_args, out, jobs);
    if (*cmp) code = run_compare(cmp_args, out);
    if (*dump) code = run_dump(dump_args, out);
    if (out.file.is_open()) out.file.close();
    return code;
  } catch (const InputError& e) {
    std::cerr << "gridsens: " << e.what() << '\n';
    return kExitInput;
  } catch (const NumericalError& e) {
    std::cerr << "gridsens: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "gridsens: " << e.what() << '\n';
    return kExitNumerical;
  }
}
