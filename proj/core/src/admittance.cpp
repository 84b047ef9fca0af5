#include "gridsens/admittance.hpp"

#include <cmath>

namespace gridsens {

BranchStamp branch_stamp(const Branch& branch, std::size_t from_index, std::size_t to_index) {
  const Complex ys = 1.0 / Complex(branch.r, branch.x);
  const Complex half_charging(0.0, branch.b_charging / 2.0);
  const Complex tap = std::polar(branch.tap, branch.shift);

  BranchStamp stamp;
  stamp.from = from_index;
  stamp.to = to_index;
  stamp.ytt = ys + half_charging;
  stamp.yff = stamp.ytt / (branch.tap * branch.tap);
  stamp.yft = -ys / std::conj(tap);
  stamp.ytf = -ys / tap;
  return stamp;
}

AdmittanceMatrix build_ybus(const GridCase& grid) {
  const auto n = static_cast<Eigen::Index>(grid.bus_count());
  AdmittanceMatrix result;
  result.stamps.resize(grid.branch_count());

  std::vector<Eigen::Triplet<Complex>> triplets;
  triplets.reserve(4 * grid.branch_count() + grid.bus_count());
  for (std::size_t l = 0; l < grid.branch_count(); ++l) {
    const Branch& br = grid.branches()[l];
    if (!br.closed()) continue;
    const BranchStamp s = branch_stamp(br, grid.from_index(l), grid.to_index(l));
    const auto f = static_cast<Eigen::Index>(s.from);
    const auto t = static_cast<Eigen::Index>(s.to);
    triplets.emplace_back(f, f, s.yff);
    triplets.emplace_back(f, t, s.yft);
    triplets.emplace_back(t, f, s.ytf);
    triplets.emplace_back(t, t, s.ytt);
    result.stamps[l] = s;
  }
  for (std::size_t k = 0; k < grid.bus_count(); ++k) {
    const Bus& bus = grid.buses()[k];
    const auto i = static_cast<Eigen::Index>(k);
    // Keep the diagonal structurally present even for isolated buses.
    triplets.emplace_back(i, i, Complex(bus.g_shunt, bus.b_shunt));
  }

  result.y.resize(n, n);
  result.y.setFromTriplets(triplets.begin(), triplets.end());
  result.y.makeCompressed();
  return result;
}

}  // namespace gridsens
