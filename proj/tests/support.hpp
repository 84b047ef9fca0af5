#pragma once

#include <random>
#include <string>
#include <vector>

#include "gridsens/case_io.hpp"
#include "gridsens/grid_case.hpp"

namespace gridsens::testing {

inline std::string data_path(const std::string& file) { return std::string(GRIDSENS_DATA_DIR) + "/" + file; }

inline const GridCase& case14() {
  static const GridCase grid = load_case(data_path("case14.m"));
  return grid;
}

inline const GridCase& case118() {
  static const GridCase grid = load_case(data_path("case118.m"));
  return grid;
}

inline Bus slack_bus(int id, double v = 1.0) {
  Bus b;
  b.id = id;
  b.kind = BusKind::Slack;
  b.v_init = v;
  return b;
}

inline Bus load_bus(int id, double p, double q) {
  Bus b;
  b.id = id;
  b.p_load = p;
  b.q_load = q;
  return b;
}

inline Branch line(int from, int to, double r, double x, double b = 0.0) {
  Branch br;
  br.from_bus = from;
  br.to_bus = to;
  br.r = r;
  br.x = x;
  br.b_charging = b;
  return br;
}

inline Generator slack_gen(int bus, double v = 1.0) {
  Generator g;
  g.bus = bus;
  g.v_set = v;
  g.q_min = -100.0;
  g.q_max = 100.0;
  return g;
}

/// Slack bus 1 feeding a load at bus 2 through one series branch.
inline GridCase two_bus(double p, double q, double r = 0.0, double x = 0.1, double b = 0.0) {
  return GridCase(100.0, {slack_bus(1), load_bus(2, p, q)}, {line(1, 2, r, x, b)}, {slack_gen(1)}, "two_bus");
}

/// Two identical parallel lines between the slack and a load.
inline GridCase two_bus_parallel(double p, double q) {
  return GridCase(100.0, {slack_bus(1), load_bus(2, p, q)}, {line(1, 2, 0.01, 0.1), line(1, 2, 0.01, 0.1)},
                  {slack_gen(1)}, "two_bus_parallel");
}

/// Equal-impedance triangle 1-2, 1-3, 3-2 with bus 1 as slack.
inline GridCase triangle(double p2, double p3, double r = 0.0, double x = 0.1) {
  return GridCase(100.0, {slack_bus(1), load_bus(2, p2, 0.0), load_bus(3, p3, 0.0)},
                  {line(1, 2, r, x), line(1, 3, r, x), line(3, 2, r, x)}, {slack_gen(1)}, "triangle");
}

/// Radial chain 1-2-3 fed from bus 1.
inline GridCase chain3(double p) {
  return GridCase(100.0, {slack_bus(1), load_bus(2, p, 0.2 * p), load_bus(3, p, 0.2 * p)},
                  {line(1, 2, 0.02, 0.1), line(2, 3, 0.02, 0.1)}, {slack_gen(1)}, "chain3");
}

/// Five-bus meshed network with one radial spur (branch 7, 4-5), charging,
/// a shunt and an off-nominal tap. Meant for the constant-current load model.
inline GridCase five_bus() {
  Bus b3 = load_bus(3, 0.4, 0.15);
  b3.b_shunt = 0.05;
  std::vector<Bus> buses{slack_bus(1, 1.02), load_bus(2, 0.6, 0.2), b3, load_bus(4, 0.3, -0.1), load_bus(5, 0.2, 0.05)};
  Branch tx = line(2, 4, 0.0, 0.08);
  tx.tap = 0.97;
  std::vector<Branch> branches{line(1, 2, 0.02, 0.06, 0.03), line(1, 3, 0.08, 0.24, 0.025), line(2, 3, 0.06, 0.18, 0.02),
                               tx, line(3, 4, 0.01, 0.03, 0.01), line(1, 4, 0.05, 0.2), line(4, 5, 0.03, 0.12)};
  return GridCase(100.0, std::move(buses), std::move(branches), {slack_gen(1, 1.02)}, "five_bus");
}

inline std::vector<double> random_vector(std::mt19937& rng, std::size_t n, double scale = 1.0) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

}  // namespace gridsens::testing
