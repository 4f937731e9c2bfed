#pragma once

#include <cmath>
#include <cstdint>
#include <iostream>
#include <map>
#include <utility>
#include <vector>

#include <pauliprobe/errors.hpp>
#include <pauliprobe/evolution.hpp>
#include <pauliprobe/hamiltonian.hpp>
#include <pauliprobe/pauli.hpp>
#include <pauliprobe/rng.hpp>

namespace pauliprobe {

// Ceiling on the samples any single simulated primitive may draw. Plans
// whose counts land above it throw PlanInfeasible instead of spinning for
// hours; desk-scale overrides exist precisely to stay below it.
inline constexpr std::uint64_t kMaxRunnableSamples = 1'000'000'000;

// Running cost of every oracle access: one query is one invocation of the
// black box U(t), and each contributes |t| to the total evolution time.
struct QueryLedger {
  std::uint64_t queries = 0;
  double evolution_time = 0.0;
};

// Walker/Vose alias table: O(K) construction, O(1) draws. Construction
// iterates in fixed index order, so sampling is deterministic in the seed.
class AliasTable {
 public:
  AliasTable() = default;

  explicit AliasTable(const std::vector<double>& weights) {
    std::size_t k = weights.size();
    if (k == 0) throw std::invalid_argument("AliasTable: empty distribution");
    double sum = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw std::invalid_argument("AliasTable: negative weight");
      sum += w;
    }
    if (sum <= 0.0) throw std::invalid_argument("AliasTable: zero total mass");
    threshold_.resize(k);
    alias_.resize(k);
    std::vector<double> scaled(k);
    std::vector<std::uint32_t> small, large;
    for (std::size_t i = 0; i < k; ++i) {
      scaled[i] = weights[i] * static_cast<double>(k) / sum;
      (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
      std::uint32_t s = small.back();
      small.pop_back();
      std::uint32_t l = large.back();
      threshold_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] -= 1.0 - scaled[s];
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    // Whatever remains is numerically 1 after the redistribution.
    for (std::uint32_t i : large) {
      threshold_[i] = 1.0;
      alias_[i] = i;
    }
    for (std::uint32_t i : small) {
      threshold_[i] = 1.0;
      alias_[i] = i;
    }
  }

  std::size_t size() const { return threshold_.size(); }

  std::size_t sample(SplitMix64& rng) const {
    std::size_t cell = static_cast<std::size_t>(rng.below(threshold_.size()));
    return rng.u01() < threshold_[cell] ? cell : alias_[cell];
  }

 private:
  std::vector<double> threshold_;
  std::vector<std::uint32_t> alias_;
};

/**
 * Query access to the time evolution U(t) = e^{-iHt} of a hidden
 * Hamiltonian. Algorithms interact with H only through this interface:
 *
 *  - bell_sample(t, m): m draws of a Pauli string x with probability
 *    |u_x(t)|^2, the outcome distribution of measuring U applied to half of
 *    a maximally entangled state in the Bell basis. Simulated here by exact
 *    diagonalization plus alias sampling, which is statistically identical.
 *  - estimate_coefficient(t, x, beta, delta): an additive-error estimate of
 *    u_x(t) itself, from 2*ceil(4 ln(4/delta)/beta^2) auxiliary queries
 *    (each part estimated to beta/sqrt(2) by a Bernoulli mean).
 *
 * Every access is metered in the ledger. The exact distribution is
 * reachable only when the oracle was built in verification mode, and is
 * never metered: it exists for tests and the verify suite, not algorithms.
 *
 * Instances are not thread-safe; give each trial its own oracle.
 */
class EvolutionOracle {
 public:
  EvolutionOracle(Hamiltonian hidden, std::uint64_t seed,
                  bool verification_mode = false)
      : hidden_(std::move(hidden)),
        rng_(derive_seed(seed, 0x07ACDE)),
        seed_(seed),
        verification_(verification_mode) {}

  int qubits() const { return hidden_.n(); }
  std::uint64_t seed() const { return seed_; }
  const QueryLedger& ledger() const { return ledger_; }

  // The parallel-work seam: an independent oracle over the same hidden
  // Hamiltonian with RNG stream derive_seed(seed(), stream) and a fresh
  // ledger. Workers each take a fork (instances are single-threaded), and
  // the parent absorbs their ledgers serially after the join, so totals
  // and results are independent of scheduling order.
  EvolutionOracle fork(std::uint64_t stream) const {
    return EvolutionOracle(hidden_, derive_seed(seed_, stream), verification_);
  }
  void absorb(const QueryLedger& child) {
    ledger_.queries += child.queries;
    ledger_.evolution_time += child.evolution_time;
  }

  std::vector<PauliString> bell_sample(double t, std::uint64_t m) {
    const Cache& cache = cache_for(t);
    std::vector<PauliString> out;
    out.reserve(static_cast<std::size_t>(m));
    int n = hidden_.n();
    for (std::uint64_t i = 0; i < m; ++i)
      out.push_back(
          PauliString::from_index(n, cache.support[cache.alias.sample(rng_)]));
    ledger_.queries += m;
    ledger_.evolution_time += static_cast<double>(m) * std::abs(t);
    return out;
  }

  cplx estimate_coefficient(double t, const PauliString& x, double beta,
                            double delta) {
    if (x.n() != hidden_.n())
      throw std::invalid_argument("estimate_coefficient: qubit count mismatch");
    if (!(beta > 0.0 && beta <= 2.0))
      throw std::invalid_argument("estimate_coefficient: beta must be in (0, 2]");
    if (!(delta > 0.0 && delta < 1.0))
      throw std::invalid_argument("estimate_coefficient: delta must be in (0, 1)");
    double m_exact = std::ceil(4.0 * std::log(4.0 / delta) / (beta * beta));
    if (m_exact > static_cast<double>(kMaxRunnableSamples))
      throw PlanInfeasible(
          "estimate_coefficient: sample count exceeds the runnable budget");
    std::uint64_t m2 = static_cast<std::uint64_t>(m_exact);
    const Cache& cache = cache_for(t);
    cplx u = cache.u[x.index()];
    auto bernoulli_mean = [&](double p) {
      p = std::clamp(p, 0.0, 1.0);
      std::uint64_t hits = 0;
      for (std::uint64_t i = 0; i < m2; ++i) hits += rng_.bernoulli(p);
      return static_cast<double>(hits) / static_cast<double>(m2);
    };
    double re_hat = bernoulli_mean(0.5 * (1.0 + u.real()));
    double im_hat = bernoulli_mean(0.5 * (1.0 + u.imag()));
    ledger_.queries += 2 * m2;
    ledger_.evolution_time += 2.0 * static_cast<double>(m2) * std::abs(t);
    return cplx(2.0 * re_hat - 1.0, 2.0 * im_hat - 1.0);
  }

  // Ground-truth outcome distribution at this t, sorted by string index.
  // Available only in verification mode; deliberately unmetered.
  std::vector<std::pair<PauliString, double>> exact_distribution(double t) {
    if (!verification_)
      throw std::logic_error(
          "exact_distribution is only available in verification mode");
    const Cache& cache = cache_for(t);
    std::vector<std::pair<PauliString, double>> out;
    out.reserve(cache.support.size());
    int n = hidden_.n();
    for (std::size_t i = 0; i < cache.support.size(); ++i)
      out.emplace_back(PauliString::from_index(n, cache.support[i]),
                       cache.probs[i]);
    return out;
  }

 private:
  struct Cache {
    std::vector<cplx> u;                  // dense, indexed by string index
    std::vector<std::uint64_t> support;   // indices with positive probability
    std::vector<double> probs;            // matching probabilities
    AliasTable alias;
  };

  const Cache& cache_for(double t) {
    auto it = cache_.find(t);
    if (it != cache_.end()) return it->second;
    if (std::abs(t) > 0.5 && !warned_large_t_) {
      std::cerr << "pauliprobe: warning: oracle queried at |t| = " << std::abs(t)
                << " > 1/2, outside the regime the analysis covers\n";
      warned_large_t_ = true;
    }
    UnitarySpectrum us = unitary_spectrum(hidden_, t);
    Cache cache;
    cache.u.assign(std::size_t{1} << (2 * hidden_.n()), cplx(0.0, 0.0));
    double mass = 0.0;
    for (const auto& [p, a] : us.spectrum) {
      cache.u[p.index()] = a;
      mass += std::norm(a);
    }
    for (const auto& [p, a] : us.spectrum) {
      double prob = std::norm(a) / mass;  // mass is 1 within 1e-9; exact here
      if (prob > 0.0) {
        cache.support.push_back(p.index());
        cache.probs.push_back(prob);
      }
    }
    cache.alias = AliasTable(cache.probs);
    return cache_.emplace(t, std::move(cache)).first->second;
  }

  Hamiltonian hidden_;
  std::map<double, Cache> cache_;
  QueryLedger ledger_;
  SplitMix64 rng_;
  std::uint64_t seed_;
  bool verification_ = false;
  bool warned_large_t_ = false;
};

}  // namespace pauliprobe
