#include "gridsens/grid_case.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gridsens/errors.hpp"

namespace gridsens {

GridCase::GridCase(double base_mva, std::vector<Bus> buses, std::vector<Branch> branches,
                   std::vector<Generator> generators, std::string name)
    : name_(std::move(name)),
      base_mva_(base_mva),
      buses_(std::move(buses)),
      branches_(std::move(branches)),
      generators_(std::move(generators)) {
  validate_and_index();
}

void GridCase::validate_and_index() {
  if (!(base_mva_ > 0.0)) throw InputError("base MVA must be positive");
  if (buses_.empty()) throw InputError("case has no buses");

  auto [lo, hi] = std::minmax_element(buses_.begin(), buses_.end(),
                                      [](const Bus& a, const Bus& b) { return a.id < b.id; });
  min_id_ = lo->id;
  const auto span = static_cast<std::size_t>(static_cast<long long>(hi->id) - lo->id + 1);
  if (span > 50 * buses_.size() + 1000000) throw InputError("bus ids too sparse to index");
  dense_index_.assign(span, -1);

  std::size_t slack_count = 0;
  for (std::size_t k = 0; k < buses_.size(); ++k) {
    const Bus& bus = buses_[k];
    auto& slot = dense_index_[static_cast<std::size_t>(bus.id - min_id_)];
    if (slot >= 0) throw InputError("duplicate bus id " + std::to_string(bus.id));
    slot = static_cast<std::ptrdiff_t>(k);
    if (!(bus.v_init > 0.0)) throw InputError("bus " + std::to_string(bus.id) + ": initial voltage must be positive");
    if (bus.kind == BusKind::Slack) {
      ++slack_count;
      slack_ = k;
    }
  }
  if (slack_count != 1) {
    throw InputError("case must have exactly one slack bus, found " + std::to_string(slack_count));
  }

  for (std::size_t l = 0; l < branches_.size(); ++l) {
    const Branch& br = branches_[l];
    const std::string tag = "branch " + std::to_string(l + 1);
    if (!has_bus(br.from_bus)) throw InputError(tag + " references missing bus " + std::to_string(br.from_bus));
    if (!has_bus(br.to_bus)) throw InputError(tag + " references missing bus " + std::to_string(br.to_bus));
    if (br.from_bus == br.to_bus) throw InputError(tag + " connects bus " + std::to_string(br.from_bus) + " to itself");
    if (!(br.tap > 0.0)) throw InputError(tag + ": tap ratio must be positive");
    if (br.closed() && br.r * br.r + br.x * br.x == 0.0) throw InputError(tag + " has zero impedance");
  }

  generation_.assign(buses_.size(), BusGeneration{});
  for (const Generator& gen : generators_) {
    if (!has_bus(gen.bus)) throw InputError("generator references missing bus " + std::to_string(gen.bus));
    if (gen.q_min > gen.q_max) throw InputError("generator at bus " + std::to_string(gen.bus) + ": q_min > q_max");
    if (!(gen.v_set > 0.0)) throw InputError("generator at bus " + std::to_string(gen.bus) + ": voltage setpoint must be positive");
    if (!gen.in_service) continue;
    BusGeneration& g = generation_[index_of(gen.bus)];
    if (g.count == 0) g.v_set = gen.v_set;
    g.p += gen.p_set;
    g.q += gen.q_set;
    g.q_min += gen.q_min;
    g.q_max += gen.q_max;
    ++g.count;
  }
  for (std::size_t k = 0; k < buses_.size(); ++k) {
    if (buses_[k].kind == BusKind::PV && generation_[k].count == 0) {
      throw InputError("PV bus " + std::to_string(buses_[k].id) + " has no in-service generator");
    }
    if (generation_[k].count == 0) generation_[k].v_set = buses_[k].v_init;
  }
}

bool GridCase::has_bus(int bus_id) const noexcept {
  const long long offset = static_cast<long long>(bus_id) - min_id_;
  return offset >= 0 && offset < static_cast<long long>(dense_index_.size()) &&
         dense_index_[static_cast<std::size_t>(offset)] >= 0;
}

std::size_t GridCase::index_of(int bus_id) const {
  if (!has_bus(bus_id)) throw InputError("unknown bus id " + std::to_string(bus_id));
  return static_cast<std::size_t>(dense_index_[static_cast<std::size_t>(bus_id - min_id_)]);
}

GridCase GridCase::with_branch_status(std::size_t branch, BranchStatus status) const {
  GridCase copy = *this;
  copy.branches_.at(branch).status = status;
  copy.validate_and_index();
  return copy;
}

GridCase GridCase::with_scaled_injections(double factor) const {
  GridCase copy = *this;
  for (Bus& bus : copy.buses_) {
    bus.p_load *= factor;
    bus.q_load *= factor;
  }
  for (Generator& gen : copy.generators_) {
    if (copy.buses_[copy.index_of(gen.bus)].kind == BusKind::Slack) continue;
    gen.p_set *= factor;
    if (copy.buses_[copy.index_of(gen.bus)].kind == BusKind::PQ) gen.q_set *= factor;
  }
  copy.validate_and_index();
  return copy;
}

bool GridCase::operator==(const GridCase& other) const {
  return base_mva_ == other.base_mva_ && buses_ == other.buses_ && branches_ == other.branches_ &&
         generators_ == other.generators_;
}

}  // namespace gridsens
