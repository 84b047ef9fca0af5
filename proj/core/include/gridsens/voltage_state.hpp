#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace gridsens {

/// Interleaved rectangular bus voltages [V1r, V1i, ..., Vnr, Vni] in per unit.
class VoltageState {
 public:
  VoltageState() = default;
  explicit VoltageState(Eigen::VectorXd interleaved) : values_(std::move(interleaved)) {}

  static VoltageState from_phasors(std::span<const std::complex<double>> phasors) {
    Eigen::VectorXd v(2 * static_cast<Eigen::Index>(phasors.size()));
    for (std::size_t k = 0; k < phasors.size(); ++k) {
      v[2 * static_cast<Eigen::Index>(k)] = phasors[k].real();
      v[2 * static_cast<Eigen::Index>(k) + 1] = phasors[k].imag();
    }
    return VoltageState(std::move(v));
  }

  std::size_t bus_count() const noexcept { return static_cast<std::size_t>(values_.size() / 2); }
  double real(std::size_t k) const { return values_[2 * static_cast<Eigen::Index>(k)]; }
  double imag(std::size_t k) const { return values_[2 * static_cast<Eigen::Index>(k) + 1]; }
  std::complex<double> phasor(std::size_t k) const { return {real(k), imag(k)}; }
  double magnitude(std::size_t k) const { return std::abs(phasor(k)); }
  double angle(std::size_t k) const { return std::arg(phasor(k)); }

  std::vector<std::complex<double>> phasors() const {
    std::vector<std::complex<double>> out(bus_count());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = phasor(k);
    return out;
  }

  const Eigen::VectorXd& values() const noexcept { return values_; }

 private:
  Eigen::VectorXd values_;
};

}  // namespace gridsens
