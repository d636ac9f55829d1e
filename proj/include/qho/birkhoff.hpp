#pragma once

#include <map>
#include <span>
#include <vector>

#include "qho/fit.hpp"
#include "qho/hampoly.hpp"

// Normal form (Z_2 + P) o tau = Z_2 + Q^{(2p+2)} + ... + Q^{(2r+2p)} + R with Q commuting with I_1..I_N.
namespace qho::birkhoff {

using hampoly::cplx;
using hampoly::HamPoly;
using hampoly::State;

struct LU {
  HamPoly L;  // orbits with kappa <= N
  HamPoly U;  // the rest
};

LU split_LU(const HamPoly& q, std::size_t N);

// chi_{j,l} = L_{j,l} / (i Omega_{j,l}); throws SmallDivisorError when |Omega| < beta_floor on a nonzero orbit.
HamPoly solve_cohomological(const HamPoly& L, std::span<const double> w, double beta_floor, double* min_omega = nullptr);

struct StageDiagnostics {
  int r_star = 0;
  std::size_t l_orbits = 0;
  double min_omega = 0.0;  // smallest |Omega| divided by (infinity when L = 0)
  double l_norm = 0.0;      // ||L||_H
  double chi_c_norm = 0.0;
  double cohomological_residual = 0.0;  // ||{chi, Z_2} + L||_H
  double dropped_mass = 0.0;            // sum of ||(1/k!) ad^k ...||_H over the first overflowing order
};

struct NormalForm {
  int p = 1;
  int r = 1;
  std::size_t N = 1;
  std::size_t M = 0;
  double beta_floor = 0.0;
  std::vector<double> w;
  std::vector<HamPoly> chis;   // chis[i] belongs to r* = p + 1 + i
  std::map<int, HamPoly> Qs;   // degree n -> Q^{(n)}, 2p+2 <= n <= 2r+2p
  std::vector<StageDiagnostics> diagnostics;

  int degree_cap() const { return 2 * r + 2 * p; }
};

struct Options {
  double beta_floor = 0.0;   // <= 0: certificate beta at r_cert = 2(r+p), j_cap = M, times 0.99
  bool track_dropped = false;
};

// Default divisor floor for an (r, p, N) run on frequencies w.
double default_beta_floor(std::span<const double> w, int r, int p, std::size_t N);

// One induction step at r_star: split Q^{(2 r_star)}, solve for chi, apply the truncated adjoint series.
void lie_transform_stage(NormalForm& nf, int r_star, const HamPoly& Z2, bool track_dropped);

NormalForm normal_form(std::span<const double> w, const HamPoly& P, int p, int r, std::size_t N, const Options& opt = {});

struct FlowOptions {
  double rtol = 1e-13;
  double radius = 1.0;  // h^{1/2} radius of admissible initial data
};

// Time-t flow of du/dt = i grad chi(u), t in [-1, 1].
State flow(const HamPoly& chi, std::span<const cplx> u0, double t, const FlowOptions& opt = {});

// tau(u) = phi_{chi_{p+1}} o ... o phi_{chi_{r+p}} (u); inverse applies the flows backwards in reverse order.
State transform(const NormalForm& nf, std::span<const cplx> u, const FlowOptions& opt = {});
State inverse_transform(const NormalForm& nf, std::span<const cplx> u, const FlowOptions& opt = {});

// Re sum a_k conj(b_k)
double real_dot(std::span<const cplx> a, std::span<const cplx> b);

// |(i dphi v, dphi w) - (i v, w)| with central-difference Jacobian-vector products.
double symplecticity_defect(const HamPoly& chi, std::span<const cplx> u, std::span<const cplx> v, std::span<const cplx> w,
                            double t = 1.0, double fd_step = 1e-5, const FlowOptions& opt = {});

struct Validation {
  std::vector<double> eps;
  std::vector<double> remainder;  // max over samples of |R(eps u)|
  std::vector<double> identity;   // max over samples of ||tau(eps u) - eps u|| / ||eps u||
  PowerFit remainder_fit;
  PowerFit identity_fit;
  double min_sample_slope = 0.0;  // smallest per-sample remainder slope
  int target = 0;                 // 2r + 2p + 2
};

// R(u) = (Z_2 + P)(tau(u)) - Z_2(u) - sum Q(u) at u = eps * sample.
double remainder(const NormalForm& nf, const HamPoly& Z2, const HamPoly& P, std::span<const cplx> u,
                 const FlowOptions& opt = {});

Validation validate_normal_form(const NormalForm& nf, const HamPoly& Z2, const HamPoly& P,
                                const std::vector<State>& samples, const std::vector<double>& eps_grid,
                                const FlowOptions& opt = {});

// Random state with unit h^{1/2} norm supported on the first `support` modes.
State unit_sample(std::size_t M, std::uint64_t seed, std::size_t support = 0);

}  // namespace qho::birkhoff
