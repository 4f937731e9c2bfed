#pragma once

#include <cmath>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include <pauliprobe/pauli.hpp>

namespace pauliprobe {

/**
 * A Hermitian operator H = sum_x h_x sigma_x with real coefficients.
 *
 * Construction enforces the invariants: coefficients must be real (tiny
 * imaginary parts below 1e-9, unavoidable when a spectrum came through a
 * dense round-trip, are truncated; anything larger throws), a declared
 * locality k must match the support (tail_two_norm(spectrum, k) == 0), and
 * `normalized` may only be set when the operator norm is 1 within 1e-9.
 *
 * The eigendecomposition H = V diag(lambda) V^dagger is computed lazily,
 * once, and shared between copies; concurrent readers are safe after the
 * single writer has populated it (std::call_once).
 */
class Hamiltonian {
 public:
  explicit Hamiltonian(PauliSpectrum spectrum,
                       std::optional<int> locality = std::nullopt,
                       bool normalized = false)
      : spec_(realify(std::move(spectrum))),
        locality_(locality),
        normalized_(normalized),
        cache_(std::make_shared<EigCache>()) {
    if (locality_) {
      if (*locality_ < 0 || *locality_ > spec_.n())
        throw std::invalid_argument("Hamiltonian: declared locality out of range");
      if (tail_two_norm(spec_, *locality_) > 1e-12)
        throw std::invalid_argument(
            "Hamiltonian: spectrum has weight beyond the declared locality");
    }
    if (normalized_ && std::abs(inf_norm() - 1.0) > 1e-9)
      throw std::invalid_argument(
          "Hamiltonian: normalized flag requires unit operator norm");
  }

  int n() const { return spec_.n(); }
  const PauliSpectrum& spectrum() const { return spec_; }
  std::optional<int> locality() const { return locality_; }
  bool normalized() const { return normalized_; }

  double coefficient(const PauliString& p) const {
    return spec_.coefficient(p).real();
  }

  // Ascending eigenvalues / matching eigenvector columns (cached).
  const Eigen::VectorXd& eigenvalues() const { return ensure_eig().values; }
  const Eigen::MatrixXcd& eigenvectors() const { return ensure_eig().vectors; }

  double inf_norm() const {
    const Eigen::VectorXd& ev = eigenvalues();
    if (ev.size() == 0) return 0.0;
    return std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff()));
  }

 private:
  struct EigCache {
    std::once_flag once;
    Eigen::VectorXd values;
    Eigen::MatrixXcd vectors;
  };

  static PauliSpectrum realify(PauliSpectrum s) {
    std::vector<PauliSpectrum::Entry> real_entries;
    real_entries.reserve(s.size());
    for (const auto& [p, a] : s) {
      if (std::abs(a.imag()) > 1e-9)
        throw std::invalid_argument("Hamiltonian: coefficients must be real");
      real_entries.emplace_back(p, cplx(a.real(), 0.0));
    }
    return PauliSpectrum(s.n(), std::move(real_entries));
  }

  const EigCache& ensure_eig() const {
    std::call_once(cache_->once, [this] {
      Eigen::MatrixXcd dense = dense_from_spectrum(spec_);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(dense);
      if (eig.info() != Eigen::Success)
        throw std::runtime_error("Hamiltonian: eigendecomposition failed");
      cache_->values = eig.eigenvalues();
      cache_->vectors = eig.eigenvectors();
    });
    return *cache_;
  }

  PauliSpectrum spec_;
  std::optional<int> locality_;
  bool normalized_;
  std::shared_ptr<EigCache> cache_;
};

}  // namespace pauliprobe
