#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qho/fit.hpp"
#include "qho/hampoly.hpp"
#include "qho/hermite.hpp"
#include "qho/spectral.hpp"

// Truncated NLS  i du/dt = (T + V) u + sign |u|^{2p} u  on the first M eigenmodes of T + V.
// In eigen-coordinates: du/dt = -i grad H, H = 1/2 sum Lambda_j |u_j|^2 + sign/(2p+2) int |sum u_j psi_j|^{2p+2}.
namespace qho::dynamics {

using hampoly::cplx;
using hampoly::HamPoly;
using hampoly::State;

enum class Path { physical, tensor };

struct Nonlinearity {
  int p = 1;
  int sign = 1;  // +1 focusing, -1 defocusing
  std::size_t M = 0;
  // Quadrature for integrands with Gaussian factor exp(-(p+1) x^2); psi(j, q) = psi[(j-1) * npts + q].
  std::size_t npts = 0;
  std::vector<double> weights;
  std::vector<double> psi;
  // sign/(2p+2) * int psi_{j_1}..psi_{j_{2p+2}}, per tuple; empty unless requested.
  HamPoly tensor{1, 1};
  bool has_tensor = false;

  // sign/(2p+2) int |U|^{2p+2}
  double energy(std::span<const cplx> u) const;
  // 2 d/d conj(u_k) of energy = sign int |U|^{2p} U psi_k
  State gradient(std::span<const cplx> u) const;
  // int psi_{i_1} .. psi_{i_n}
  double overlap(std::span<const std::size_t> idx) const;
};

Nonlinearity assemble_nonlinearity(const spectral::Spectrum& s, const hermite::HermiteBasis& basis, int p, int sign,
                                   std::size_t M, bool build_tensor = false);

double mass(std::span<const cplx> u);
double hamiltonian(std::span<const cplx> u, std::span<const double> evals, const Nonlinearity& nl,
                   Path path = Path::physical);

struct EvolveOptions {
  double dt = 1e-3;
  double T = 1.0;
  std::size_t stride = 100;    // steps between snapshots
  std::size_t n_report = 2;    // actions logged per snapshot
  Path path = Path::physical;
  bool keep_states = false;
  double fp_tol = 0.0;         // implicit-midpoint fixed point, relative; 0 iterates to stagnation
  int fp_max_iter = 100;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<double> H;
  std::vector<double> mass;
  std::vector<std::vector<double>> actions;  // per snapshot, I_1..I_{n_report}
  std::vector<State> states;                 // only with keep_states
  std::vector<double> max_drift;             // max over every step of |I_j(t) - I_j(0)|, j <= n_report
  State final_state;
  std::size_t steps = 0;

  double mass_drift() const;
  double energy_drift() const;
};

// Strang splitting: exact half rotation, implicit-midpoint nonlinear step, exact half rotation.
Trajectory evolve(std::span<const cplx> u0, std::span<const double> evals, const Nonlinearity& nl,
                  const EvolveOptions& opt);

struct DriftReport {
  std::vector<double> eps;
  std::vector<std::vector<double>> drift;  // drift[e][j-1]
  std::vector<PowerFit> fits;              // per j
  PowerFit max_fit;                        // fit of max_j drift
  int target = 4;                          // 2p + 2
};

DriftReport action_drift_report(const std::vector<double>& eps, const std::vector<Trajectory>& trajs, std::size_t N,
                                int p);

// min(eps^{-2}, 1e4)
double default_horizon(double eps);

// eps times a unit h^{1/2} random state on the first `support` modes.
State initial_data(std::size_t M, double eps, std::uint64_t seed, std::size_t support = 0);

// eps times a unit h^{1/2} state with |u_j| proportional to j^{-decay} and random phases.
State power_profile(std::size_t M, double eps, std::uint64_t seed, double decay = 1.0);

// Truncation tail ||P_{<= nl.M}(|u|^{2p} u - |u^{<=m}|^{2p} u^{<=m})||_{l^2}, u^{<=m} the first m modes of u.
double tail_proxy(const Nonlinearity& nl, std::span<const cplx> u, std::size_t m);

struct DriftRun {
  std::vector<double> eps;
  std::vector<Trajectory> trajectories;
  DriftReport report;
};

// One trajectory per eps (in parallel, at most `threads` workers), each from initial_data(M, eps, seed).
DriftRun drift_experiment(std::span<const double> evals, const Nonlinearity& nl, const std::vector<double>& eps,
                          std::uint64_t seed, std::size_t N, EvolveOptions opt, double T_override = 0.0,
                          unsigned threads = 0);

}  // namespace qho::dynamics
