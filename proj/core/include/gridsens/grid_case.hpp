#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace gridsens {

enum class BusKind { PQ, PV, Slack };
enum class BranchStatus { Open, Closed };

/// All electrical quantities are per unit on the case MVA base; angles in radians.
struct Bus {
  int id = 0;
  BusKind kind = BusKind::PQ;
  double p_load = 0.0;
  double q_load = 0.0;
  double g_shunt = 0.0;
  double b_shunt = 0.0;
  double v_init = 1.0;
  double theta_init = 0.0;

  bool operator==(const Bus&) const = default;
};

struct Branch {
  int from_bus = 0;
  int to_bus = 0;
  double r = 0.0;
  double x = 0.0;
  double b_charging = 0.0;  ///< total line charging, split half to each end
  double tap = 1.0;         ///< off-nominal ratio on the from side
  double shift = 0.0;
  BranchStatus status = BranchStatus::Closed;

  bool closed() const noexcept { return status == BranchStatus::Closed; }
  bool operator==(const Branch&) const = default;
};

struct Generator {
  int bus = 0;
  double p_set = 0.0;
  double q_set = 0.0;  ///< reactive output used when the bus is not voltage controlled
  double v_set = 1.0;
  double q_min = 0.0;
  double q_max = 0.0;
  bool in_service = true;

  bool operator==(const Generator&) const = default;
};

/// Generator totals at one bus.
struct BusGeneration {
  double p = 0.0;
  double q = 0.0;
  double q_min = 0.0;
  double q_max = 0.0;
  double v_set = 0.0;
  int count = 0;
};

/// Validated network model. Internal bus order is the order of `buses`; branch
/// indices are positions in `branches`.
class GridCase {
 public:
  GridCase() = default;
  GridCase(double base_mva, std::vector<Bus> buses, std::vector<Branch> branches,
           std::vector<Generator> generators, std::string name = {});

  const std::string& name() const noexcept { return name_; }
  double base_mva() const noexcept { return base_mva_; }
  const std::vector<Bus>& buses() const noexcept { return buses_; }
  const std::vector<Branch>& branches() const noexcept { return branches_; }
  const std::vector<Generator>& generators() const noexcept { return generators_; }
  std::size_t bus_count() const noexcept { return buses_.size(); }
  std::size_t branch_count() const noexcept { return branches_.size(); }

  /// Bus id to internal index; throws InputError for unknown ids.
  std::size_t index_of(int bus_id) const;
  bool has_bus(int bus_id) const noexcept;
  std::size_t slack_index() const noexcept { return slack_; }
  std::size_t from_index(std::size_t branch) const { return index_of(branches_.at(branch).from_bus); }
  std::size_t to_index(std::size_t branch) const { return index_of(branches_.at(branch).to_bus); }

  const BusGeneration& generation(std::size_t bus_index) const { return generation_.at(bus_index); }

  /// Copy with one branch switched to the given status.
  GridCase with_branch_status(std::size_t branch, BranchStatus status) const;
  /// Copy with all loads and non-slack generation multiplied by `factor`.
  GridCase with_scaled_injections(double factor) const;

  bool operator==(const GridCase& other) const;

 private:
  void validate_and_index();

  std::string name_;
  double base_mva_ = 100.0;
  std::vector<Bus> buses_;
  std::vector<Branch> branches_;
  std::vector<Generator> generators_;

  int min_id_ = 0;
  std::vector<std::ptrdiff_t> dense_index_;  // bus id - min_id_ -> index, -1 if absent
  std::vector<BusGeneration> generation_;
  std::size_t slack_ = 0;
};

}  // namespace gridsens
