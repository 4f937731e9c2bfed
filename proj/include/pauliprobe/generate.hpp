#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <pauliprobe/errors.hpp>
#include <pauliprobe/hamiltonian.hpp>
#include <pauliprobe/pauli.hpp>
#include <pauliprobe/rng.hpp>

namespace pauliprobe {

enum class InstanceLabel { Close, Far };

inline const char* to_string(InstanceLabel label) {
  return label == InstanceLabel::Close ? "close" : "far";
}

/**
 * A generated benchmark Hamiltonian together with its ground truth. The tail
 * is measured by brute force on the normalized spectrum, so the label is a
 * promise: Close instances satisfy exact_tail <= eps1, Far instances
 * exact_tail >= eps2, and nothing in between is ever emitted.
 */
struct PlantedInstance {
  Hamiltonian hamiltonian;
  double exact_tail = 0.0;
  InstanceLabel label = InstanceLabel::Close;
  int k = 0;
  double eps1 = 0.0;
  double eps2 = 0.0;
  std::uint64_t seed = 0;
};

namespace detail {

// All strings of weight <= k (identity included), in index order.
inline std::vector<PauliString> weight_at_most(int n, int k) {
  std::vector<PauliString> out;
  std::uint64_t total = std::uint64_t{1} << (2 * n);
  for (std::uint64_t idx = 0; idx < total; ++idx) {
    PauliString p = PauliString::from_index(n, idx);
    if (p.weight() <= k) out.push_back(p);
  }
  return out;
}

inline PauliSpectrum draw_supported(int n, const std::vector<PauliString>& candidates,
                                    double density, SplitMix64& rng) {
  std::vector<PauliSpectrum::Entry> entries;
  for (const PauliString& p : candidates)
    if (rng.u01() < density) entries.emplace_back(p, cplx(rng.symmetric(), 0.0));
  return PauliSpectrum(n, std::move(entries));
}

inline PauliSpectrum scale(const PauliSpectrum& s, double factor) {
  std::vector<PauliSpectrum::Entry> entries;
  entries.reserve(s.size());
  for (const auto& [p, a] : s) entries.emplace_back(p, a * factor);
  return PauliSpectrum(s.n(), std::move(entries));
}

inline PauliSpectrum add(const PauliSpectrum& a, const PauliSpectrum& b) {
  std::vector<PauliSpectrum::Entry> entries(a.entries());
  entries.insert(entries.end(), b.entries().begin(), b.entries().end());
  return PauliSpectrum(a.n(), std::move(entries));
}

}  // namespace detail

/**
 * Random k-local Hamiltonian: every string of weight <= k (identity
 * included) enters the support independently with probability `density`,
 * with a coefficient uniform in [-1, 1); the result is then rescaled so its
 * operator norm is exactly 1. A draw that comes out identically zero is
 * returned as the (valid, unnormalized) zero Hamiltonian. Bit-for-bit
 * reproducible from the seed.
 */
inline Hamiltonian random_k_local(int n, int k, double density, std::uint64_t seed) {
  if (n < 1 || n > qubit_cap())
    throw std::invalid_argument("random_k_local: n out of range");
  if (k < 1 || k > n) throw std::invalid_argument("random_k_local: need 1 <= k <= n");
  if (!(density >= 0.0 && density <= 1.0))
    throw std::invalid_argument("random_k_local: density must be in [0, 1]");
  SplitMix64 rng(seed);
  PauliSpectrum raw =
      detail::draw_supported(n, detail::weight_at_most(n, k), density, rng);
  if (raw.empty()) return Hamiltonian(PauliSpectrum(n), k, /*normalized=*/false);
  double norm = inf_norm(raw);
  return Hamiltonian(detail::scale(raw, 1.0 / norm), k, /*normalized=*/true);
}

/**
 * Rejection-samples a normalized Hamiltonian whose exact distance from
 * k-locality (tail_two_norm after normalization) is <= eps1 for Close or
 * >= eps2 for Far. Far instances combine a k-local part A with a strictly
 * heavier part B, A + lambda*B, where lambda is found by bisection on the
 * exactly measured tail; Close instances with eps1 > 0 get a heavy part
 * small enough that the tail provably stays inside (0, eps1]. Every accepted
 * instance re-measures the tail from the normalized spectrum by brute force.
 */
inline PlantedInstance planted_instance(int n, int k, double eps1, double eps2,
                                        InstanceLabel want, std::uint64_t seed,
                                        int budget = 1000) {
  if (n < 1 || n > qubit_cap())
    throw std::invalid_argument("planted_instance: n out of range");
  if (k < 1 || k > n) throw std::invalid_argument("planted_instance: need 1 <= k <= n");
  if (!(eps1 >= 0.0 && eps1 < eps2 && eps2 <= 1.0))
    throw std::invalid_argument("planted_instance: need 0 <= eps1 < eps2 <= 1");
  if (budget < 1) throw std::invalid_argument("planted_instance: budget must be >= 1");

  SplitMix64 rng(derive_seed(seed, 0xBEEF));
  std::vector<PauliString> local_candidates = detail::weight_at_most(n, k);
  std::uint64_t heavy_count = (std::uint64_t{1} << (2 * n)) -
                              static_cast<std::uint64_t>(local_candidates.size());
  bool need_heavy = (want == InstanceLabel::Far) || eps1 > 0.0;
  if (want == InstanceLabel::Far && heavy_count == 0)
    throw GenerationError(
        "planted_instance: no strings of weight > k exist (k = n), Far instance "
        "is impossible");

  auto accept = [&](const PauliSpectrum& raw) -> PlantedInstance {
    double norm = inf_norm(raw);
    PauliSpectrum scaled = detail::scale(raw, 1.0 / norm);
    double tail = tail_two_norm(scaled, k);
    bool ok = want == InstanceLabel::Close ? tail <= eps1 : tail >= eps2;
    if (!ok) return PlantedInstance{Hamiltonian(PauliSpectrum(n)), -1.0};
    std::optional<int> locality;
    if (tail == 0.0) locality = k;
    return PlantedInstance{Hamiltonian(std::move(scaled), locality, true),
                           tail, want, k, eps1, eps2, seed};
  };

  for (int attempt = 0; attempt < budget; ++attempt) {
    double density = 0.3 + 0.7 * rng.u01();
    PauliSpectrum a = detail::draw_supported(n, local_candidates, density, rng);
    if (a.empty()) continue;

    if (!need_heavy || heavy_count == 0) {
      // Exactly k-local: tail is identically zero.
      PlantedInstance inst = accept(a);
      if (inst.exact_tail >= 0.0) return inst;
      continue;
    }

    // Draw one to three distinct strings of weight > k for the heavy part.
    int want_terms = 1 + static_cast<int>(rng.below(3));
    std::vector<PauliSpectrum::Entry> heavy;
    for (int tries = 0; tries < 1000 && static_cast<int>(heavy.size()) < want_terms;
         ++tries) {
      PauliString p =
          PauliString::from_index(n, rng.below(std::uint64_t{1} << (2 * n)));
      if (p.weight() <= k) continue;
      bool dup = false;
      for (const auto& [q, coeff] : heavy) dup = dup || q == p;
      if (!dup) heavy.emplace_back(p, cplx(rng.symmetric(), 0.0));
    }
    if (heavy.empty()) continue;
    PauliSpectrum b(n, heavy);
    if (b.empty()) continue;  // coefficients could all be exactly zero

    double b_two = b.two_norm();
    if (want == InstanceLabel::Close) {
      // tail <= lambda*|B|_2 / |A + lambda*B|_2 and |A + lambda*B|_2 >=
      // sqrt(|A|_2^2 + u^2) with u = lambda*|B|_2, so u <=
      // eps1*|A|_2/sqrt(1-eps1^2) guarantees tail <= eps1. Aim below the cap.
      double u = 0.8 * eps1 * a.two_norm() / std::sqrt(1.0 - eps1 * eps1);
      PlantedInstance inst = accept(detail::add(a, detail::scale(b, u / b_two)));
      if (inst.exact_tail >= 0.0) return inst;
      continue;
    }

    // Far: tail(lambda) = lambda*|B|_2 / inf_norm(A + lambda*B) rises from 0
    // toward |B|_2/|B|_inf. Grow lambda geometrically until past the target,
    // then bisect; if this heavy part cannot reach eps2, redraw.
    double target = std::min(1.0, eps2 + 0.1 * (1.0 - eps2));
    auto tail_at = [&](double lambda) {
      PauliSpectrum h = detail::add(a, detail::scale(b, lambda));
      return lambda * b_two / inf_norm(h);
    };
    double lo = 0.0, hi = 1.0;
    int grow = 0;
    while (tail_at(hi) < target && grow++ < 40) {
      lo = hi;
      hi *= 2.0;
    }
    if (tail_at(hi) < target) continue;
    for (int iter = 0; iter < 50; ++iter) {
      double mid = 0.5 * (lo + hi);
      if (tail_at(mid) >= target)
        hi = mid;
      else
        lo = mid;
    }
    PlantedInstance inst = accept(detail::add(a, detail::scale(b, hi)));
    if (inst.exact_tail >= 0.0) return inst;
  }
  throw GenerationError("planted_instance: rejection budget exhausted for label " +
                        std::string(to_string(want)));
}

}  // namespace pauliprobe
