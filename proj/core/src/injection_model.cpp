#include "gridsens/injection_model.hpp"

#include <cmath>

#include "gridsens/errors.hpp"

namespace gridsens {

Complex constant_power_current(Complex power, Complex voltage) { return std::conj(power / voltage); }

Eigen::Matrix2d constant_power_current_jacobian(Complex power, Complex voltage) {
  const double p = power.real();
  const double q = power.imag();
  const double vr = voltage.real();
  const double vi = voltage.imag();
  const double m = vr * vr + vi * vi;
  const double ir = (p * vr + q * vi) / m;
  const double ii = (p * vi - q * vr) / m;
  Eigen::Matrix2d jac;
  jac << (p - 2.0 * vr * ir) / m, (q - 2.0 * vi * ir) / m,  //
      (-q - 2.0 * vr * ii) / m, (p - 2.0 * vi * ii) / m;
  return jac;
}

namespace {

// d(I_r, I_i)/dQ for a generator injecting conj((P + jQ) / V).
Eigen::Vector2d reactive_current_derivative(Complex v) {
  const double m = std::norm(v);
  return {v.imag() / m, -v.real() / m};
}

std::vector<Complex> network_currents(const AdmittanceMatrix& ybus, const Eigen::VectorXd& state, std::size_t n) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(n));
  for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = Complex(state[2 * k], state[2 * k + 1]);
  const Eigen::VectorXcd i = ybus.y * v;
  return {i.data(), i.data() + i.size()};
}

}  // namespace

InjectionModel::InjectionModel(std::shared_ptr<const GridCase> grid, std::shared_ptr<const AdmittanceMatrix> ybus,
                               std::vector<BusKind> roles, std::vector<double> fixed_q_gen, LoadModel load_model)
    : grid_(std::move(grid)),
      ybus_(std::move(ybus)),
      roles_(std::move(roles)),
      fixed_q_gen_(std::move(fixed_q_gen)),
      load_model_(load_model) {
  const std::size_t n = grid_->bus_count();
  if (roles_.size() != n || fixed_q_gen_.size() != n) throw InputError("bus role vectors do not match the case");
  slot_.assign(n, -1);
  dimension_ = 2 * static_cast<Eigen::Index>(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (roles_[k] == BusKind::PV) slot_[k] = dimension_++;
  }
  const std::size_t s = grid_->slack_index();
  slack_setpoint_ = std::polar(grid_->generation(s).v_set, grid_->buses()[s].theta_init);
}

std::optional<Eigen::Index> InjectionModel::reactive_slot(std::size_t bus) const {
  if (slot_.at(bus) < 0) return std::nullopt;
  return slot_[bus];
}

Complex InjectionModel::injection_current(std::size_t bus, Complex v, double q_gen) const {
  const Bus& b = grid_->buses()[bus];
  const double p_gen = grid_->generation(bus).p;
  if (load_model_ == LoadModel::ConstantPower) {
    return constant_power_current(Complex(p_gen - b.p_load, q_gen - b.q_load), v);
  }
  return constant_power_current(Complex(p_gen, q_gen), v) - std::conj(Complex(b.p_load, b.q_load));
}

Eigen::Matrix2d InjectionModel::injection_jacobian(std::size_t bus, Complex v, double q_gen) const {
  const Bus& b = grid_->buses()[bus];
  const double p_gen = grid_->generation(bus).p;
  if (load_model_ == LoadModel::ConstantPower) {
    return constant_power_current_jacobian(Complex(p_gen - b.p_load, q_gen - b.q_load), v);
  }
  return constant_power_current_jacobian(Complex(p_gen, q_gen), v);
}

double InjectionModel::q_gen(const Eigen::VectorXd& state, std::size_t bus) const {
  return slot_[bus] >= 0 ? state[slot_[bus]] : fixed_q_gen_[bus];
}

VoltageState InjectionModel::voltages(const Eigen::VectorXd& state) const {
  return VoltageState(state.head(2 * static_cast<Eigen::Index>(bus_count())));
}

Eigen::VectorXd InjectionModel::initial_state(const std::optional<std::vector<Complex>>& warm_start) const {
  const std::size_t n = bus_count();
  if (warm_start && warm_start->size() != n) throw InputError("warm-start voltage has wrong length");
  const double theta = std::arg(slack_setpoint_);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dimension_);
  for (std::size_t k = 0; k < n; ++k) {
    Complex v;
    if (roles_[k] == BusKind::Slack) {
      v = slack_setpoint_;
    } else if (warm_start) {
      v = (*warm_start)[k];
    } else if (roles_[k] == BusKind::PV) {
      v = std::polar(grid_->generation(k).v_set, theta);
    } else {
      v = std::polar(1.0, theta);
    }
    x[2 * static_cast<Eigen::Index>(k)] = v.real();
    x[2 * static_cast<Eigen::Index>(k) + 1] = v.imag();
  }
  // Reactive outputs consistent with KCL at the starting voltages.
  const auto currents = network_currents(*ybus_, x, n);
  for (std::size_t k = 0; k < n; ++k) {
    if (slot_[k] < 0) continue;
    const Complex v(x[2 * static_cast<Eigen::Index>(k)], x[2 * static_cast<Eigen::Index>(k) + 1]);
    x[slot_[k]] = (v * std::conj(currents[k])).imag() + grid_->buses()[k].q_load;
  }
  return x;
}

Eigen::VectorXd InjectionModel::residual(const Eigen::VectorXd& state) const {
  const std::size_t n = bus_count();
  Eigen::VectorXd f(dimension_);
  const auto currents = network_currents(*ybus_, state, n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto r = 2 * static_cast<Eigen::Index>(k);
    const Complex v(state[r], state[r + 1]);
    if (roles_[k] == BusKind::Slack) {
      f[r] = v.real() - slack_setpoint_.real();
      f[r + 1] = v.imag() - slack_setpoint_.imag();
      continue;
    }
    const Complex mismatch = currents[k] - injection_current(k, v, q_gen(state, k));
    f[r] = mismatch.real();
    f[r + 1] = mismatch.imag();
    if (slot_[k] >= 0) {
      const double vset = grid_->generation(k).v_set;
      f[slot_[k]] = std::norm(v) - vset * vset;
    }
  }
  return f;
}

Eigen::SparseMatrix<double> InjectionModel::jacobian(const Eigen::VectorXd& state) const {
  const std::size_t n = bus_count();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(4 * ybus_->y.nonZeros() + 4 * dimension_));

  const auto& y = ybus_->y;
  for (Eigen::Index col = 0; col < y.outerSize(); ++col) {
    for (Eigen::SparseMatrix<Complex>::InnerIterator it(y, col); it; ++it) {
      const auto row = static_cast<std::size_t>(it.row());
      if (roles_[row] == BusKind::Slack) continue;
      const Eigen::Matrix2d block = expand_admittance(it.value());
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) triplets.emplace_back(2 * it.row() + a, 2 * col + b, block(a, b));
      }
    }
  }

  for (std::size_t k = 0; k < n; ++k) {
    const auto r = 2 * static_cast<Eigen::Index>(k);
    const Complex v(state[r], state[r + 1]);
    if (roles_[k] == BusKind::Slack) {
      triplets.emplace_back(r, r, 1.0);
      triplets.emplace_back(r + 1, r + 1, 1.0);
      continue;
    }
    const Eigen::Matrix2d device = injection_jacobian(k, v, q_gen(state, k));
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) triplets.emplace_back(r + a, r + b, -device(a, b));
    }
    if (slot_[k] >= 0) {
      const Eigen::Vector2d dq = reactive_current_derivative(v);
      triplets.emplace_back(r, slot_[k], -dq[0]);
      triplets.emplace_back(r + 1, slot_[k], -dq[1]);
      triplets.emplace_back(slot_[k], r, 2.0 * v.real());
      triplets.emplace_back(slot_[k], r + 1, 2.0 * v.imag());
    }
  }

  Eigen::SparseMatrix<double> jac(dimension_, dimension_);
  jac.setFromTriplets(triplets.begin(), triplets.end());
  jac.makeCompressed();
  return jac;
}

Eigen::VectorXd InjectionModel::companion_rhs(const Eigen::VectorXd& state) const {
  const std::size_t n = bus_count();
  Eigen::VectorXd b(dimension_);
  for (std::size_t k = 0; k < n; ++k) {
    const auto r = 2 * static_cast<Eigen::Index>(k);
    const Complex v(state[r], state[r + 1]);
    if (roles_[k] == BusKind::Slack) {
      b[r] = slack_setpoint_.real();
      b[r + 1] = slack_setpoint_.imag();
      continue;
    }
    const double q = q_gen(state, k);
    const Complex i0 = injection_current(k, v, q);
    Eigen::Vector2d source = Eigen::Vector2d(i0.real(), i0.imag()) -
                             injection_jacobian(k, v, q) * Eigen::Vector2d(v.real(), v.imag());
    if (slot_[k] >= 0) {
      source -= reactive_current_derivative(v) * q;
      const double vset = grid_->generation(k).v_set;
      b[slot_[k]] = std::norm(v) + vset * vset;
    }
    b[r] = source[0];
    b[r + 1] = source[1];
  }
  return b;
}

Eigen::SparseMatrix<double> InjectionModel::network_matrix() const {
  const auto dim = 2 * static_cast<Eigen::Index>(bus_count());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(4 * ybus_->y.nonZeros() + 2));
  const auto& y = ybus_->y;
  for (Eigen::Index col = 0; col < y.outerSize(); ++col) {
    for (Eigen::SparseMatrix<Complex>::InnerIterator it(y, col); it; ++it) {
      if (roles_[static_cast<std::size_t>(it.row())] == BusKind::Slack) continue;
      const Eigen::Matrix2d block = expand_admittance(it.value());
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) triplets.emplace_back(2 * it.row() + a, 2 * col + b, block(a, b));
      }
    }
  }
  const auto s = 2 * static_cast<Eigen::Index>(grid_->slack_index());
  triplets.emplace_back(s, s, 1.0);
  triplets.emplace_back(s + 1, s + 1, 1.0);
  Eigen::SparseMatrix<double> m(dim, dim);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

Eigen::VectorXd InjectionModel::frozen_injection_rhs(const Eigen::VectorXd& state) const {
  const std::size_t n = bus_count();
  Eigen::VectorXd b(2 * static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    const auto r = 2 * static_cast<Eigen::Index>(k);
    if (roles_[k] == BusKind::Slack) {
      b[r] = slack_setpoint_.real();
      b[r + 1] = slack_setpoint_.imag();
      continue;
    }
    const Complex i0 = injection_current(k, Complex(state[r], state[r + 1]), q_gen(state, k));
    b[r] = i0.real();
    b[r + 1] = i0.imag();
  }
  return b;
}

}  // namespace gridsens
