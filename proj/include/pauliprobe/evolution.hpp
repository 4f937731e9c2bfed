#pragma once

#include <cmath>
#include <complex>
#include <memory>

#include <Eigen/Dense>

#include <pauliprobe/hamiltonian.hpp>
#include <pauliprobe/pauli.hpp>

namespace pauliprobe {

// U(t) = e^{-iHt}, evaluated exactly through the cached eigendecomposition:
// U = V diag(e^{-it*lambda}) V^dagger.
inline Eigen::MatrixXcd evolve_unitary(const Hamiltonian& h, double t) {
  if (!std::isfinite(t))
    throw std::invalid_argument("evolve_unitary: t must be finite");
  const Eigen::VectorXd& lambda = h.eigenvalues();
  const Eigen::MatrixXcd& v = h.eigenvectors();
  Eigen::VectorXcd phases(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i)
    phases(i) = std::exp(cplx(0.0, -t * lambda(i)));
  return v * phases.asDiagonal() * v.adjoint();
}

/**
 * The Pauli coefficients (u_x)_x of U(t) = e^{-iHt}. Since U is unitary,
 * (|u_x|^2)_x is a probability distribution (checked to 1e-9 here); it is
 * exactly the outcome distribution the sampling oracle draws from.
 */
struct UnitarySpectrum {
  PauliSpectrum spectrum;
  double t = 0.0;
  std::shared_ptr<const Hamiltonian> source;
};

inline UnitarySpectrum unitary_spectrum(const Hamiltonian& h, double t) {
  PauliSpectrum s = spectrum_from_dense(evolve_unitary(h, t));
  double mass = s.two_norm();
  if (std::abs(mass * mass - 1.0) > 1e-9)
    throw std::runtime_error("unitary_spectrum: coefficient mass deviates from 1");
  return UnitarySpectrum{std::move(s), t, std::make_shared<const Hamiltonian>(h)};
}

/**
 * Measures how well U(t) is approximated by its first-order Taylor expansion:
 * remainder_norm = ||U(t) - Id + itH||_inf, which the analysis bounds by
 * c*t^2 for t <= 1/2 and ||H||_inf <= 1 (indeed e^t - 1 - t <= t^2 there).
 */
struct TaylorRemainder {
  double t = 0.0;
  double remainder_norm = 0.0;
  double bound = 0.0;
  bool within_bound() const { return remainder_norm <= bound; }
};

inline TaylorRemainder remainder_check(const Hamiltonian& h, double t, double c = 1.0) {
  if (!(t > 0.0 && t <= 0.5))
    throw std::invalid_argument("remainder_check: t must lie in (0, 1/2]");
  if (h.inf_norm() > 1.0 + 1e-9)
    throw std::invalid_argument("remainder_check: requires ||H||_inf <= 1");
  Eigen::Index dim = Eigen::Index{1} << h.n();
  Eigen::MatrixXcd residual = evolve_unitary(h, t) -
                              Eigen::MatrixXcd::Identity(dim, dim) +
                              cplx(0.0, t) * dense_from_spectrum(h.spectrum());
  return TaylorRemainder{t, inf_norm(residual), c * t * t};
}

}  // namespace pauliprobe
