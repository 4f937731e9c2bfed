#pragma once

#include <algorithm>
#include <bit>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace pauliprobe {

using cplx = std::complex<double>;

// PauliString::n() may not exceed this: masks are 32-bit and base-4 indices
// must fit comfortably in a uint64.
inline constexpr int kHardQubitLimit = 16;

namespace detail {
inline int& qubit_cap_storage() {
  static int cap = 10;
  return cap;
}
}  // namespace detail

// Desk-scale guard for every routine that materializes 2^n x 2^n or 4^n
// dense data. Configurable, but the default keeps memory in the hundreds of
// megabytes at worst. Not thread-safe; set it during single-threaded setup.
inline int qubit_cap() { return detail::qubit_cap_storage(); }

inline void set_qubit_cap(int cap) {
  if (cap < 1 || cap > kHardQubitLimit)
    throw std::invalid_argument("set_qubit_cap: cap must be in [1, 16]");
  detail::qubit_cap_storage() = cap;
}

// RAII helper: temporarily lowers (or raises) the qubit cap, e.g. in tests.
class QubitCapGuard {
 public:
  explicit QubitCapGuard(int cap) : saved_(qubit_cap()) { set_qubit_cap(cap); }
  ~QubitCapGuard() { detail::qubit_cap_storage() = saved_; }
  QubitCapGuard(const QubitCapGuard&) = delete;
  QubitCapGuard& operator=(const QubitCapGuard&) = delete;

 private:
  int saved_;
};

/**
 * An n-qubit Pauli word sigma_{x_0} (x) sigma_{x_1} (x) ... (x) sigma_{x_{n-1}},
 * with letters coded 0 = I, 1 = X, 2 = Y, 3 = Z and qubit 0 as the leftmost
 * tensor factor. Stored as two n-bit masks: bit q of x_mask is set when the
 * letter on qubit q is X or Y, bit q of z_mask when it is Z or Y. The weight
 * (number of non-identity letters) is therefore a single popcount.
 */
class PauliString {
 public:
  PauliString() = default;

  PauliString(int n, std::uint32_t x_mask, std::uint32_t z_mask)
      : n_(check_n(n)), x_(x_mask), z_(z_mask) {
    std::uint32_t valid = mask_for(n);
    if ((x_ & ~valid) != 0 || (z_ & ~valid) != 0)
      throw std::invalid_argument("PauliString: mask bits beyond qubit count");
  }

  static PauliString identity(int n) { return PauliString(n, 0, 0); }

  // A single non-identity letter (1..3) on one qubit.
  static PauliString single(int n, int qubit, int letter) {
    check_n(n);
    if (qubit < 0 || qubit >= n)
      throw std::invalid_argument("PauliString::single: qubit out of range");
    if (letter < 1 || letter > 3)
      throw std::invalid_argument("PauliString::single: letter must be 1..3");
    PauliString p = identity(n);
    p.set_letter(qubit, letter);
    return p;
  }

  // Parses a word such as "IXZZ"; the first character acts on qubit 0.
  static PauliString from_word(std::string_view word) {
    if (word.empty()) throw std::invalid_argument("PauliString: empty word");
    PauliString p = identity(static_cast<int>(word.size()));
    for (int q = 0; q < p.n_; ++q) {
      int letter;
      switch (word[static_cast<std::size_t>(q)]) {
        case 'I': letter = 0; break;
        case 'X': letter = 1; break;
        case 'Y': letter = 2; break;
        case 'Z': letter = 3; break;
        default:
          throw std::invalid_argument("PauliString: letters must be I, X, Y or Z");
      }
      p.set_letter(q, letter);
    }
    return p;
  }

  // Inverse of index(): base-4 digits, qubit 0 most significant.
  static PauliString from_index(int n, std::uint64_t index) {
    check_n(n);
    if (index >= (std::uint64_t{1} << (2 * n)))
      throw std::invalid_argument("PauliString::from_index: index out of range");
    PauliString p = identity(n);
    for (int q = n - 1; q >= 0; --q) {
      p.set_letter(q, static_cast<int>(index & 3u));
      index >>= 2;
    }
    return p;
  }

  int n() const { return n_; }
  std::uint32_t x_mask() const { return x_; }
  std::uint32_t z_mask() const { return z_; }

  int letter(int qubit) const {
    bool x = (x_ >> qubit) & 1u;
    bool z = (z_ >> qubit) & 1u;
    return x ? (z ? 2 : 1) : (z ? 3 : 0);
  }

  int weight() const { return std::popcount(x_ | z_); }
  bool is_identity() const { return (x_ | z_) == 0; }

  // Position in the 4^n vectorization used by the transforms below.
  std::uint64_t index() const {
    std::uint64_t idx = 0;
    for (int q = 0; q < n_; ++q) idx = (idx << 2) | static_cast<std::uint64_t>(letter(q));
    return idx;
  }

  std::string word() const {
    static constexpr char kLetters[] = "IXYZ";
    std::string out(static_cast<std::size_t>(n_), 'I');
    for (int q = 0; q < n_; ++q) out[static_cast<std::size_t>(q)] = kLetters[letter(q)];
    return out;
  }

  friend bool operator==(const PauliString& a, const PauliString& b) {
    return a.n_ == b.n_ && a.x_ == b.x_ && a.z_ == b.z_;
  }
  friend bool operator!=(const PauliString& a, const PauliString& b) { return !(a == b); }
  friend bool operator<(const PauliString& a, const PauliString& b) {
    if (a.n_ != b.n_) return a.n_ < b.n_;
    return a.index() < b.index();
  }

 private:
  static int check_n(int n) {
    if (n < 1 || n > kHardQubitLimit)
      throw std::invalid_argument("PauliString: qubit count must be in [1, 16]");
    return n;
  }
  static std::uint32_t mask_for(int n) {
    return n == 32 ? ~0u : ((1u << n) - 1u);
  }
  void set_letter(int qubit, int letter) {
    std::uint32_t bit = 1u << qubit;
    x_ &= ~bit;
    z_ &= ~bit;
    if (letter == 1 || letter == 2) x_ |= bit;
    if (letter == 2 || letter == 3) z_ |= bit;
  }

  int n_ = 0;
  std::uint32_t x_ = 0;
  std::uint32_t z_ = 0;
};

inline int weight(const PauliString& p) { return p.weight(); }

/**
 * Sparse Pauli coefficient map: a finite collection of (string, coefficient)
 * pairs representing A = sum_x a_x sigma_x. Entries are kept sorted by
 * string index, duplicates are merged and exact zeros dropped, so iteration
 * order — and everything serialized from it — is deterministic.
 */
class PauliSpectrum {
 public:
  using Entry = std::pair<PauliString, cplx>;

  explicit PauliSpectrum(int n) : n_(check_n(n)) {}

  PauliSpectrum(int n, std::vector<Entry> entries) : n_(check_n(n)) {
    for (const auto& [p, a] : entries) {
      if (p.n() != n_)
        throw std::invalid_argument("PauliSpectrum: entry qubit count mismatch");
      (void)a;
    }
    if (!std::is_sorted(entries.begin(), entries.end(), index_less))
      std::sort(entries.begin(), entries.end(), index_less);
    coeffs_.reserve(entries.size());
    for (const auto& [p, a] : entries) {
      if (!coeffs_.empty() && coeffs_.back().first == p)
        coeffs_.back().second += a;
      else
        coeffs_.emplace_back(p, a);
    }
    std::erase_if(coeffs_, [](const Entry& e) { return e.second == cplx(0.0, 0.0); });
  }

  int n() const { return n_; }
  std::size_t size() const { return coeffs_.size(); }
  bool empty() const { return coeffs_.empty(); }
  const std::vector<Entry>& entries() const { return coeffs_; }
  auto begin() const { return coeffs_.begin(); }
  auto end() const { return coeffs_.end(); }

  // Coefficient of one string; absent strings read as zero.
  cplx coefficient(const PauliString& p) const {
    auto it = std::lower_bound(coeffs_.begin(), coeffs_.end(), p,
                               [](const Entry& e, const PauliString& q) {
                                 return index_less(e, Entry{q, {}});
                               });
    if (it != coeffs_.end() && it->first == p) return it->second;
    return cplx(0.0, 0.0);
  }

  // sqrt(sum_x |a_x|^2); equals the normalized Frobenius norm by Parseval.
  double two_norm() const {
    double sum = 0.0;
    for (const auto& [p, a] : coeffs_) sum += std::norm(a);
    return std::sqrt(sum);
  }

 private:
  static int check_n(int n) {
    if (n < 1 || n > kHardQubitLimit)
      throw std::invalid_argument("PauliSpectrum: qubit count must be in [1, 16]");
    return n;
  }
  static bool index_less(const Entry& a, const Entry& b) {
    return a.first.index() < b.first.index();
  }

  int n_;
  std::vector<Entry> coeffs_;
};

inline double two_norm(const PauliSpectrum& s) { return s.two_norm(); }

// sqrt(sum_x |a_x - b_x|^2): the normalized two-norm distance between two
// operators given by their spectra, via a merge walk over the sorted entries.
inline double two_norm_distance(const PauliSpectrum& a, const PauliSpectrum& b) {
  if (a.n() != b.n())
    throw std::invalid_argument("two_norm_distance: qubit count mismatch");
  double sum = 0.0;
  auto ia = a.begin(), ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && ia->first.index() < ib->first.index()))
      sum += std::norm((ia++)->second);
    else if (ia == a.end() || ib->first.index() < ia->first.index())
      sum += std::norm((ib++)->second);
    else
      sum += std::norm((ia++)->second - (ib++)->second);
  }
  return std::sqrt(sum);
}

// sqrt(sum over |x| > k of |a_x|^2): the two-norm distance from the
// weight-<= k truncation, i.e. from the nearest k-local operator.
inline double tail_two_norm(const PauliSpectrum& s, int k) {
  if (k < 0 || k > s.n())
    throw std::invalid_argument("tail_two_norm: k must be in [0, n]");
  double sum = 0.0;
  for (const auto& [p, a] : s)
    if (p.weight() > k) sum += std::norm(a);
  return std::sqrt(sum);
}

namespace detail {

inline int qubits_from_dim(Eigen::Index rows, Eigen::Index cols) {
  if (rows != cols) throw std::invalid_argument("matrix must be square");
  int n = 0;
  while ((Eigen::Index{1} << n) < rows) ++n;
  if ((Eigen::Index{1} << n) != rows || n < 1)
    throw std::invalid_argument("dimension must be 2^n with n >= 1");
  if (n > qubit_cap())
    throw std::invalid_argument("qubit count exceeds the configured cap");
  return n;
}

// Combined index whose base-4 digit for qubit q is 2*r_q + s_q, where r_q
// and s_q are the row/column bits of that qubit. Matches PauliString::index
// digit order (qubit 0 most significant).
inline std::uint64_t interleave(std::uint64_t r, std::uint64_t s, int n) {
  std::uint64_t u = 0;
  for (int b = n - 1; b >= 0; --b)
    u = (u << 2) | (((r >> b) & 1u) << 1) | ((s >> b) & 1u);
  return u;
}

// One radix-4 butterfly pass per qubit over the 4^n vectorization; forward
// maps matrix-element quadruples to (I, X, Y, Z) coefficients, inverse undoes
// it. Total cost O(4^n * n) versus O(16^n) for the naive trace formula.
inline void pauli_passes(std::vector<cplx>& v, int n, bool forward) {
  const cplx i(0.0, 1.0);
  std::uint64_t total = v.size();
  for (int d = 0; d < n; ++d) {
    std::uint64_t stride = std::uint64_t{1} << (2 * d);
    std::uint64_t block = stride << 2;
    for (std::uint64_t base = 0; base < total; base += block) {
      for (std::uint64_t off = 0; off < stride; ++off) {
        std::uint64_t i0 = base + off;
        cplx v0 = v[i0], v1 = v[i0 + stride], v2 = v[i0 + 2 * stride],
             v3 = v[i0 + 3 * stride];
        if (forward) {
          v[i0] = 0.5 * (v0 + v3);
          v[i0 + stride] = 0.5 * (v1 + v2);
          v[i0 + 2 * stride] = 0.5 * i * (v1 - v2);
          v[i0 + 3 * stride] = 0.5 * (v0 - v3);
        } else {
          v[i0] = v0 + v3;
          v[i0 + stride] = v1 - i * v2;
          v[i0 + 2 * stride] = v1 + i * v2;
          v[i0 + 3 * stride] = v0 - v3;
        }
      }
    }
  }
}

}  // namespace detail

// All 4^n coefficients a_x = Tr[sigma_x M] / 2^n of a dense matrix, computed
// by the per-qubit butterfly in O(4^n * n).
inline PauliSpectrum spectrum_from_dense(const Eigen::MatrixXcd& m) {
  int n = detail::qubits_from_dim(m.rows(), m.cols());
  std::uint64_t dim = std::uint64_t{1} << n;
  std::vector<cplx> v(dim * dim);
  for (std::uint64_t r = 0; r < dim; ++r)
    for (std::uint64_t s = 0; s < dim; ++s)
      v[detail::interleave(r, s, n)] =
          m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s));
  detail::pauli_passes(v, n, /*forward=*/true);
  std::vector<PauliSpectrum::Entry> entries;
  for (std::uint64_t idx = 0; idx < v.size(); ++idx)
    if (v[idx] != cplx(0.0, 0.0))
      entries.emplace_back(PauliString::from_index(n, idx), v[idx]);
  return PauliSpectrum(n, std::move(entries));
}

// Reassembles the dense 2^n x 2^n matrix sum_x a_x sigma_x.
inline Eigen::MatrixXcd dense_from_spectrum(const PauliSpectrum& s) {
  int n = s.n();
  if (n > qubit_cap())
    throw std::invalid_argument("dense_from_spectrum: qubit count exceeds the cap");
  std::uint64_t dim = std::uint64_t{1} << n;
  std::vector<cplx> v(dim * dim, cplx(0.0, 0.0));
  for (const auto& [p, a] : s) v[p.index()] = a;
  detail::pauli_passes(v, n, /*forward=*/false);
  Eigen::MatrixXcd m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::uint64_t r = 0; r < dim; ++r)
    for (std::uint64_t s2 = 0; s2 < dim; ++s2)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s2)) =
          v[detail::interleave(r, s2, n)];
  return m;
}

// Operator (spectral) norm of a dense matrix via the Hermitian eigensolver
// on M^dagger M; exact enough for the 1e-9-scale tolerances used here.
inline double inf_norm(const Eigen::MatrixXcd& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::MatrixXcd gram = m.adjoint() * m;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram, Eigen::EigenvaluesOnly);
  double top = eig.eigenvalues().maxCoeff();
  return std::sqrt(std::max(top, 0.0));
}

// Operator norm of sum_x a_x sigma_x. Real coefficients make the matrix
// Hermitian, where the direct eigenvalue route is cheaper and sharper.
inline double inf_norm(const PauliSpectrum& s) {
  if (s.empty()) return 0.0;
  bool real_coeffs = true;
  for (const auto& [p, a] : s)
    if (a.imag() != 0.0) { real_coeffs = false; break; }
  Eigen::MatrixXcd m = dense_from_spectrum(s);
  if (real_coeffs) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(m, Eigen::EigenvaluesOnly);
    return std::max(std::abs(eig.eigenvalues().minCoeff()),
                    std::abs(eig.eigenvalues().maxCoeff()));
  }
  return inf_norm(m);
}

}  // namespace pauliprobe
