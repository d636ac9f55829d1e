#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

// Real homogeneous polynomials of degree 2r on C^M,
//   H(u) = sum_{j, l in [M]^r} H_{j,l} u_{j_1}..u_{j_r} conj(u_{l_1})..conj(u_{l_r}),
// with H_{j,l} symmetric within j and within l and H_{l,j} = conj(H_{j,l}).
// Coefficients are per tuple; storage is one entry per orbit (sorted j, sorted l).
namespace qho::hampoly {

using cplx = std::complex<double>;
using State = std::vector<cplx>;

inline constexpr int kMaxHalfDegree = 5;
inline constexpr std::size_t kMaxModes = 256;

// j in slots [0, r), l in slots [r, 2r), 1-based, each half sorted ascending; unused slots 0.
using Key = std::array<std::uint16_t, 2 * kMaxHalfDegree>;

struct Orbit {
  std::vector<std::size_t> j;
  std::vector<std::size_t> l;
};

Key make_key(int r, std::span<const std::size_t> j, std::span<const std::size_t> l);
Orbit unpack(int r, const Key& k);
Key conjugate_key(int r, const Key& k);
// (r!/prod cnt!) for j times the same for l
double multiplicity(int r, const Key& k);

class HamPoly {
 public:
  HamPoly(std::size_t M, int r);

  std::size_t modes() const { return M_; }
  int half_degree() const { return r_; }
  std::size_t size() const { return coeffs_.size(); }
  bool empty() const { return coeffs_.empty(); }
  const std::map<Key, cplx>& coeffs() const { return coeffs_; }

  // Adds c at (j, l) and conj(c) at (l, j). When (l, j) lies in the same orbit, c must be real and is added once.
  void insert(std::span<const std::size_t> j, std::span<const std::size_t> l, cplx c);
  // Per-tuple coefficient at any permutation of (j, l).
  cplx get(std::span<const std::size_t> j, std::span<const std::size_t> l) const;
  cplx at(const Key& k) const;

  // Raw orbit write; callers keep the conjugate orbit consistent.
  void set(const Key& k, cplx c);
  void add(const Key& k, cplx c);

  // this += s * other (s real preserves reality).
  void add_scaled(const HamPoly& other, double s);
  HamPoly scaled(double s) const;
  // Removes orbits with |c| <= tol.
  void prune(double tol = 0.0);
  // Replaces each conjugate pair by its exact Hermitian average.
  void symmetrize();
  bool is_real(double tol) const;

  double evaluate(std::span<const cplx> u) const;
  cplx evaluate_complex(std::span<const cplx> u) const;
  // 2 dH/d conj(u_k)
  State gradient(std::span<const cplx> u) const;

  // Orbits satisfying a predicate.
  HamPoly filter(const std::function<bool(const Orbit&)>& keep) const;

  bool operator==(const HamPoly& o) const { return M_ == o.M_ && r_ == o.r_ && coeffs_ == o.coeffs_; }

 private:
  std::size_t M_;
  int r_;
  std::map<Key, cplx> coeffs_;
};

// {H, K} = 2i sum_k (dH/d conj(u_k) dK/du_k - dH/du_k dK/d conj(u_k)); half-degree r + r' - 1.
HamPoly poisson(const HamPoly& h, const HamPoly& k);

double h_norm(const HamPoly& h);
double c_norm(const HamPoly& h);

bool commutes_with_action(const HamPoly& h, std::size_t q);

// Z_2(u) = 1/2 sum_k w_k |u_k|^2
HamPoly z2(std::span<const double> w);
// I_q(u) = |u_q|^2
HamPoly action(std::size_t M, std::size_t q);

// (sum_k <k> |u_k|^2)^{1/2}
double h_half_norm(std::span<const cplx> u);

// Least index with nonzero net multiplicity in the orbit; SIZE_MAX when balanced.
std::size_t kappa_of(int r, const Key& k);
// sum_{j} w_{j_n} - sum_{l} w_{l_n}
double omega_of(int r, const Key& k, std::span<const double> w);

}  // namespace qho::hampoly
