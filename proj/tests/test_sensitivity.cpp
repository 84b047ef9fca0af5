#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "gridsens/bridges.hpp"
#include "gridsens/dc_model.hpp"
#include "gridsens/errors.hpp"
#include "gridsens/linearization.hpp"
#include "gridsens/screening.hpp"
#include "gridsens/sensitivity.hpp"
#include "support.hpp"

namespace gridsens {
namespace {

PowerFlowOptions constant_current() {
  PowerFlowOptions opts;
  opts.load_model = LoadModel::ConstantCurrent;
  return opts;
}

bool is_bridge(const GridCase& grid, std::size_t l) {
  const std::vector<std::size_t> b = find_bridges(grid);
  return std::binary_search(b.begin(), b.end(), l);
}

Complex phasor_of(const Eigen::VectorXd& v, std::size_t k) {
  return {v[2 * static_cast<Eigen::Index>(k)], v[2 * static_cast<Eigen::Index>(k) + 1]};
}

struct Ieee14 : ::testing::Test {
  static void SetUpTestSuite() {
    sol = std::make_unique<PowerFlowSolution>(solve_ac_powerflow(testing::case14()));
    lin = std::make_unique<LinearizedSystem>(linearize_at_solution(*sol));
  }
  static void TearDownTestSuite() {
    lin.reset();
    sol.reset();
  }
  static inline std::unique_ptr<PowerFlowSolution> sol;
  static inline std::unique_ptr<LinearizedSystem> lin;
};

// ---- injections --------------------------------------------------------------

TEST_F(Ieee14, SlackInjectionHasNoEffectAndSlackStaysPinned) {
  const std::size_t s = sol->grid->slack_index();
  EXPECT_EQ(unit_injection_response(*lin, s, 0).norm(), 0.0);
  const Eigen::VectorXd r = unit_injection_response(*lin, 5, 1);
  EXPECT_NEAR(r[2 * static_cast<Eigen::Index>(s)], 0.0, 1e-15);
  EXPECT_NEAR(r[2 * static_cast<Eigen::Index>(s) + 1], 0.0, 1e-15);
  EXPECT_GT(r.norm(), 0.0);
}

TEST_F(Ieee14, NetworkModelIsReciprocal) {
  const LinearizedSystem net = linearize_at_solution(*sol, LinearizationMode::Network);
  for (std::size_t i : {1u, 4u, 8u, 13u}) {
    for (std::size_t j : {2u, 6u, 11u}) {
      const Complex ij = phasor_of(unit_injection_response(net, i, 0), j);
      const Complex ji = phasor_of(unit_injection_response(net, j, 0), i);
      EXPECT_NEAR(std::abs(ij - ji), 0.0, 1e-12) << i << "," << j;
    }
  }
}

TEST(Sensitivity, TwoBusTheveninImpedance) {
  const PowerFlowSolution sol = solve_ac_powerflow(testing::two_bus(0.4, 0.1, 0.02, 0.1), constant_current());
  const LinearizedSystem lin = linearize_at_solution(sol);
  const InjectionSensitivity sens = dv_dgamma(lin, 0);
  EXPECT_NEAR(sens.dv(2, 2), 0.02, 1e-14);  // dV_to^r / dgamma_to^r
  EXPECT_NEAR(sens.dv(3, 2), 0.1, 1e-14);
  EXPECT_NEAR(sens.dv(2, 3), -0.1, 1e-14);
  EXPECT_EQ(sens.dv.col(0).norm(), 0.0);  // from side is the slack
}

// ---- branch current map -------------------------------------------------------

TEST(Sensitivity, SeriesReactanceCurrentJacobian) {
  const BranchCurrentJacobian j = branch_current_jacobian(testing::two_bus(0.0, 0.0), 0);
  EXPECT_NEAR(j.local(0, 1), 10.0, 1e-14);
  EXPECT_EQ(j.local(0, 0), 0.0);
  EXPECT_NEAR(j.local(1, 0), -10.0, 1e-14);

  const BranchCurrentJacobian c = branch_current_jacobian(testing::two_bus(0.0, 0.0, 0.0, 0.1, 0.04), 0);
  EXPECT_NEAR(c.local(1, 0) - j.local(1, 0), 0.02, 1e-14);
}

TEST(Sensitivity, CurrentJacobianFiniteDifference) {
  const GridCase& grid = testing::case14();
  const AdmittanceMatrix y = build_ybus(grid);
  std::mt19937 rng(11);
  for (std::size_t l : {0u, 7u, 9u, 19u}) {
    const BranchCurrentJacobian jac = branch_current_jacobian(grid, l);
    const BranchStamp& s = *y.stamps[l];
    auto current = [&](const Eigen::Vector4d& v) {
      const Complex vf(v[0], v[1]);
      const Complex vt(v[2], v[3]);
      const Complex i_f = s.from_current(vf, vt);
      const Complex i_t = s.to_current(vf, vt);
      return Eigen::Vector4d(i_f.real(), i_f.imag(), i_t.real(), i_t.imag());
    };
    for (int trial = 0; trial < 10; ++trial) {
      const std::vector<double> r = testing::random_vector(rng, 8);
      const Eigen::Vector4d v(1.0 + 0.1 * r[0], 0.1 * r[1], 1.0 + 0.1 * r[2], 0.1 * r[3]);
      const Eigen::Vector4d d(r[4], r[5], r[6], r[7]);
      constexpr double h = 1e-3;
      const Eigen::Vector4d fd = (current(v + h * d) - current(v - h * d)) / (2 * h);
      EXPECT_LT((fd - jac.local * d).norm() / (jac.local * d).norm(), 1e-8);
    }
  }
}

TEST_F(Ieee14, CurrentJacobianReproducesTerminalCurrents) {
  for (std::size_t l = 0; l < sol->grid->branch_count(); ++l) {
    const BranchCurrentJacobian jac = branch_current_jacobian(*sol->grid, l);
    const Eigen::Vector4d i = jac.apply(sol->voltage.values());
    EXPECT_LT((i - branch_terminal_currents(*sol, l).values).norm(), 1e-12);
  }
}

TEST(Sensitivity, DiDgammaComposition) {
  const BranchCurrentJacobian jac = branch_current_jacobian(testing::two_bus(0.0, 0.0), 0);
  InjectionSensitivity zero;
  zero.branch = 0;
  zero.from = 0;
  zero.to = 1;
  zero.dv = Eigen::MatrixXd::Zero(4, 4);
  EXPECT_EQ(di_line_dgamma(zero, jac).norm(), 0.0);

  const PowerFlowSolution sol = solve_ac_powerflow(testing::two_bus(0.4, 0.1, 0.02, 0.1), constant_current());
  const LinearizedSystem lin = linearize_at_solution(sol);
  const InjectionSensitivity sens = dv_dgamma(lin, 0);
  const BranchCurrentJacobian j2 = branch_current_jacobian(*sol.grid, 0);
  // hand product: rows (fr^r, fr^i, to^r, to^i) of dV restricted to the two terminals
  Eigen::Matrix4d terminal_dv;
  terminal_dv << sens.dv.row(0), sens.dv.row(1), sens.dv.row(2), sens.dv.row(3);
  EXPECT_LT((di_line_dgamma(sens, j2) - j2.local * terminal_dv).norm(), 1e-14);
  // a to-side injection has no other path than the branch: dI_to/dgamma_to = 1
  EXPECT_NEAR(di_line_dgamma(sens, j2)(2, 2), 1.0, 1e-12);
  EXPECT_NEAR(di_line_dgamma(sens, j2)(3, 3), 1.0, 1e-12);
}

// ---- transfer matrix ------------------------------------------------------------

TEST(Sensitivity, TransferMatrixIdentityCase) {
  const OutageTransferMatrix t = build_transfer_matrix(Eigen::Matrix4d::Zero());
  EXPECT_EQ(t.t, Eigen::Matrix4d::Identity());
  EXPECT_NEAR(t.condition, 1.0, 1e-15);
  BranchTerminalCurrents pre;
  pre.values << 0.3, -0.1, -0.29, 0.12;
  EXPECT_LT((solve_gamma(t, pre) - pre.values).norm(), 1e-15);
}

TEST(Sensitivity, TwoBusBridgeIsSingular) {
  const PowerFlowSolution sol = solve_ac_powerflow(testing::two_bus(0.4, 0.1, 0.02, 0.1), constant_current());
  const LinearizedSystem lin = linearize_at_solution(sol);
  const InjectionSensitivity sens = dv_dgamma(lin, 0);
  const OutageTransferMatrix t = build_transfer_matrix(di_line_dgamma(sens, branch_current_jacobian(*sol.grid, 0)));
  EXPECT_TRUE(t.singular());
  EXPECT_THROW(solve_gamma(t, branch_terminal_currents(sol, 0)), IslandingError);
  EXPECT_TRUE(evaluate_outage(sol, lin, 0).islanding);
}

TEST(Sensitivity, TriangleBranchesHaveFiniteCondition) {
  const PowerFlowSolution sol = solve_ac_powerflow(testing::triangle(0.5, 0.2, 0.01));
  const LinearizedSystem lin = linearize_at_solution(sol);
  for (std::size_t l = 0; l < 3; ++l) {
    const OutageImpact impact = evaluate_outage(sol, lin, l);
    EXPECT_FALSE(impact.islanding);
    EXPECT_LT(impact.t_condition, 1e3);
  }
}

TEST(Sensitivity, UnloadedLineGivesZeroImpact) {
  const PowerFlowSolution sol = solve_ac_powerflow(testing::triangle(0.0, 0.0, 0.01));
  const LinearizedSystem lin = linearize_at_solution(sol);
  const OutageImpact impact = evaluate_outage(sol, lin, 2);
  EXPECT_EQ(impact.gamma.norm(), 0.0);
  EXPECT_EQ(impact.delta_v.norm(), 0.0);
  EXPECT_EQ(impact.severity, 0.0);
}

// ---- exactly linear network ---------------------------------------------------

TEST(Sensitivity, LinearNetworkOutagesAreExact) {
  const GridCase grid = testing::five_bus();
  const PowerFlowSolution sol = solve_ac_powerflow(grid, constant_current());
  const LinearizedSystem lin = linearize_at_solution(sol);
  std::size_t checked = 0;
  for (std::size_t l = 0; l < grid.branch_count(); ++l) {
    const OutageImpact impact = evaluate_outage(sol, lin, l);
    EXPECT_EQ(impact.islanding, is_bridge(grid, l)) << "branch " << l + 1;
    if (impact.islanding) continue;
    const PowerFlowSolution post = solve_ac_powerflow(grid.with_branch_status(l, BranchStatus::Open), constant_current());
    const Eigen::VectorXd exact = post.voltage.values() - sol.voltage.values();
    EXPECT_LT((impact.delta_v - exact).cwiseAbs().maxCoeff(), 1e-10) << "branch " << l + 1;
    ++checked;
  }
  EXPECT_EQ(checked, 6u);
}

TEST(Sensitivity, InjectedGammaReappearsAsTerminalCurrents) {
  const GridCase grid = testing::five_bus();
  const PowerFlowSolution sol = solve_ac_powerflow(grid, constant_current());
  const LinearizedSystem lin = linearize_at_solution(sol);
  for (std::size_t l = 0; l < 6; ++l) {
    const OutageImpact impact = evaluate_outage(sol, lin, l);
    const BranchCurrentJacobian jac = branch_current_jacobian(grid, l);
    const Eigen::Vector4d after = jac.apply(sol.voltage.values() + impact.delta_v);
    EXPECT_LT((after - impact.gamma).cwiseAbs().maxCoeff(), 1e-10) << "branch " << l + 1;
  }
}

TEST_F(Ieee14, TerminalVoltageSignsMatchResolve) {
  const OutageEvaluator evaluator(*sol, *lin);
  for (std::size_t l = 0; l < sol->grid->branch_count(); ++l) {
    if (is_bridge(*sol->grid, l)) continue;
    const OutageImpact impact = evaluator.evaluate(l);
    const OracleOutcome oracle = oracle_outage(*sol, l);
    ASSERT_TRUE(oracle.converged);
    for (std::size_t k : {sol->grid->from_index(l), sol->grid->to_index(l)}) {
      if (std::abs(oracle.delta_vmag[k]) < 1e-8) continue;  // voltage-controlled terminal
      EXPECT_EQ(std::signbit(impact.delta_vmag[k]), std::signbit(oracle.delta_vmag[k]))
          << "branch " << l + 1 << " bus index " << k;
    }
  }
}

TEST_F(Ieee14, PredictedAndResolvedVoltageChangesCorrelate) {
  const OutageEvaluator evaluator(*sol, *lin);
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t l = 0; l < sol->grid->branch_count(); ++l) {
    if (is_bridge(*sol->grid, l)) continue;
    const OutageImpact impact = evaluator.evaluate(l);
    const OracleOutcome oracle = oracle_outage(*sol, l);
    x.insert(x.end(), impact.delta_vmag.begin(), impact.delta_vmag.end());
    y.insert(y.end(), oracle.delta_vmag.begin(), oracle.delta_vmag.end());
  }
  const Eigen::Map<const Eigen::VectorXd> a(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::Map<const Eigen::VectorXd> b(y.data(), static_cast<Eigen::Index>(y.size()));
  const Eigen::VectorXd ca = a.array() - a.mean();
  const Eigen::VectorXd cb = b.array() - b.mean();
  EXPECT_GT(ca.dot(cb) / (ca.norm() * cb.norm()), 0.0);
}

// ---- impact quantities -----------------------------------------------------------

TEST(Sensitivity, VoltageMagnitudeChangeExamples) {
  const VoltageState op = VoltageState::from_phasors(std::vector<Complex>{{1.0, 0.0}});
  EXPECT_NEAR(delta_voltage_magnitude(Eigen::Vector2d(0.01, 0.0), op)[0], 0.01, 1e-15);
  EXPECT_EQ(delta_voltage_magnitude(Eigen::Vector2d(0.0, 0.01), op)[0], 0.0);
}

TEST(Sensitivity, VoltageMagnitudeChangeFiniteDifference) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::vector<double> r = testing::random_vector(rng, 4);
    const Complex v = std::polar(1.0 + 0.1 * r[0], r[1]);
    const Complex dv(r[2], r[3]);
    const VoltageState op = VoltageState::from_phasors(std::vector<Complex>{v});
    const double analytic = delta_voltage_magnitude(Eigen::Vector2d(dv.real(), dv.imag()), op)[0];
    constexpr double eps = 1e-6;
    const double fd = (std::abs(v + eps * dv) - std::abs(v - eps * dv)) / (2 * eps);
    EXPECT_LT(std::abs(fd - analytic) / std::abs(analytic), 1e-6);
  }
}

TEST(Sensitivity, CurrentMagnitudeChangeExample) {
  // constant-current load of 1 p.u. behind j0.1: I_fr = (1, 0)
  const PowerFlowSolution sol = solve_ac_powerflow(testing::two_bus(1.0, 0.0), constant_current());
  ASSERT_NEAR(std::abs(branch_terminal_currents(sol, 0).from() - Complex(1.0, 0.0)), 0.0, 1e-14);
  Eigen::VectorXd dv = Eigen::VectorXd::Zero(4);
  dv[3] = -0.01;  // V_to changes by -j0.01, so I_fr changes by 0.1
  const CurrentMagnitudeDelta d = delta_current_magnitude(dv, sol, 0);
  EXPECT_NEAR(d.value, 0.1, 1e-14);
  EXPECT_FALSE(d.fallback);
}

TEST(Sensitivity, CurrentUnaffectedBehindSlack) {
  // bus 3 hangs off the slack; the outage is on the parallel pair feeding bus 2
  std::vector<Bus> buses{testing::load_bus(2, 0.4, 0.1), testing::slack_bus(1), testing::load_bus(3, 0.3, 0.1)};
  std::vector<Branch> branches{testing::line(1, 2, 0.01, 0.1), testing::line(1, 2, 0.02, 0.12),
                               testing::line(1, 3, 0.01, 0.1)};
  const GridCase grid(100.0, buses, branches, {testing::slack_gen(1)});
  const PowerFlowSolution sol = solve_ac_powerflow(grid);
  const LinearizedSystem lin = linearize_at_solution(sol);
  const OutageImpact impact = evaluate_outage(sol, lin, 0, OutageOptions{SeverityMetric::ImagInf, BranchSide::From});
  EXPECT_GT(std::abs(impact.delta_imag[1]), 1e-3);
  EXPECT_NEAR(impact.delta_imag[2], 0.0, 1e-15);
}

TEST_F(Ieee14, CurrentAndPowerChangesFiniteDifference) {
  const OutageImpact impact = evaluate_outage(*sol, *lin, 2);
  const Eigen::VectorXd dv = impact.delta_v / impact.delta_v.norm();
  const AdmittanceMatrix& y = *sol->ybus;
  constexpr double eps = 1e-5;
  for (std::size_t m = 0; m < sol->grid->branch_count(); ++m) {
    const BranchStamp& s = *y.stamps[m];
    for (BranchSide side : {BranchSide::From, BranchSide::To}) {
      const bool from = side == BranchSide::From;
      auto at = [&](double t) {
        const Eigen::VectorXd v = sol->voltage.values() + t * dv;
        const Complex vf = phasor_of(v, s.from);
        const Complex vt = phasor_of(v, s.to);
        const Complex i = from ? s.from_current(vf, vt) : s.to_current(vf, vt);
        return std::pair(std::abs(i), ((from ? vf : vt) * std::conj(i)).real());
      };
      const auto [ip, pp] = at(eps);
      const auto [im, pm] = at(-eps);
      const double fd_i = (ip - im) / (2 * eps);
      const double fd_p = (pp - pm) / (2 * eps);
      const double di = delta_current_magnitude(dv, *sol, m, side).value;
      const double dp = delta_line_power(dv, *sol, m, side);
      EXPECT_LT(std::abs(di - fd_i), 1e-6 * std::max(std::abs(di), 1e-3)) << "branch " << m + 1;
      EXPECT_LT(std::abs(dp - fd_p), 1e-6 * std::max(std::abs(dp), 1e-3)) << "branch " << m + 1;
    }
  }
}

TEST(Sensitivity, LinePowerChangeIdentities) {
  const PowerFlowSolution sol = solve_ac_powerflow(testing::triangle(0.5, 0.2));
  EXPECT_EQ(delta_line_power(Eigen::VectorXd::Zero(6), sol, 0), 0.0);
  std::mt19937 rng(2);
  const std::vector<double> r = testing::random_vector(rng, 6, 0.01);
  Eigen::VectorXd dv = Eigen::Map<const Eigen::VectorXd>(r.data(), 6);
  dv.head(2).setZero();
  for (std::size_t l = 0; l < 3; ++l) {
    EXPECT_NEAR(delta_line_power(dv, sol, l, BranchSide::From) + delta_line_power(dv, sol, l, BranchSide::To), 0.0,
                1e-12);
  }
}

// ---- circuit LODF ------------------------------------------------------------------

TEST(Sensitivity, SelfRatioNearMinusOneWhenLightlyLoaded) {
  const GridCase grid = testing::case14().with_scaled_injections(0.2);
  const PowerFlowSolution sol = solve_ac_powerflow(grid);
  const LinearizedSystem lin = linearize_at_solution(sol);
  for (std::size_t l = 0; l < grid.branch_count(); ++l) {
    if (is_bridge(grid, l)) continue;
    const std::vector<std::size_t> self{l};
    const CircuitLodfResult r = circuit_lodf(sol, lin, l, self);
    ASSERT_TRUE(r.entries[0].ratio.has_value());
    EXPECT_NEAR(*r.entries[0].ratio, -1.0, 0.05) << "branch " << l + 1;
    // the re-solve confirms the outaged line carries nothing afterwards
    const PowerFlowSolution post = solve_ac_powerflow(grid.with_branch_status(l, BranchStatus::Open));
    EXPECT_EQ(post.branch_flows[l].p_from, 0.0);
  }
}

TEST(Sensitivity, TriangleRatiosApproachDcLodf) {
  const std::vector<std::size_t> all{0, 1, 2};
  double previous = 1.0;
  for (double k : {1.0, 0.1, 0.01}) {
    const GridCase tri = testing::triangle(0.5 * k, 0.2 * k, 0.01 * k);
    const PowerFlowSolution sol = solve_ac_powerflow(tri);
    const LinearizedSystem lin = linearize_at_solution(sol);
    const CircuitLodfResult ac = circuit_lodf(sol, lin, 0, all);
    const DcLodfResult dc = dc_lodf(DcModel(tri), 0);
    double gap = 0.0;
    for (std::size_t m = 0; m < 3; ++m) gap = std::max(gap, std::abs(*ac.entries[m].ratio - dc.lodf[m]));
    EXPECT_LT(gap, previous);
    previous = gap;
  }
  EXPECT_LT(previous, 1e-4);
}

TEST(Sensitivity, UnloadedRatiosUndefined) {
  const PowerFlowSolution sol = solve_ac_powerflow(testing::triangle(0.0, 0.0, 0.01));
  const LinearizedSystem lin = linearize_at_solution(sol);
  const std::vector<std::size_t> all{0, 1, 2};
  const CircuitLodfResult r = circuit_lodf(sol, lin, 1, all);
  for (const CircuitLodfEntry& e : r.entries) {
    EXPECT_FALSE(e.ratio.has_value());
    EXPECT_EQ(e.delta_p, 0.0);
  }
}

// ---- severity ----------------------------------------------------------------------

TEST(Sensitivity, SeverityMetrics) {
  const std::vector<double> dv{0.01, -0.03, 0.02};
  const std::vector<double> di{0.5, -0.1, 0.2};
  const std::vector<double> dp{-2.0, 0.3, 0.1};
  EXPECT_DOUBLE_EQ(severity_of(SeverityMetric::VmagInf, dv, di, dp, 0), 0.03);
  EXPECT_DOUBLE_EQ(severity_of(SeverityMetric::Vmag2, dv, di, dp, 0), std::sqrt(0.0014));
  EXPECT_DOUBLE_EQ(severity_of(SeverityMetric::ImagInf, dv, di, dp, 0), 0.2);
  EXPECT_DOUBLE_EQ(severity_of(SeverityMetric::PlineInf, dv, di, dp, 0), 0.3);
  EXPECT_DOUBLE_EQ(severity_of(SeverityMetric::PlineInf, dv, di, dp, std::nullopt), 2.0);
  EXPECT_EQ(parse_severity_metric("imag_inf"), SeverityMetric::ImagInf);
  EXPECT_FALSE(parse_severity_metric("vmag").has_value());
}

}  // namespace
}  // namespace gridsens
