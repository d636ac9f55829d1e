#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "qho/dynamics.hpp"
#include "qho/error.hpp"

using namespace qho;
using namespace qho::dynamics;
using Idx = std::vector<std::size_t>;

namespace {

potential::Potential small_potential(std::uint64_t seed, double h1) {
  const auto p = potential::sample_potential(potential::power_weight(), seed);
  return potential::scaled(p, h1 / potential::sobolev_norm(p, 1.0));
}

struct Setup {
  hermite::HermiteBasis basis;
  spectral::Spectrum s;
};

Setup setup(const potential::Potential& pot, std::size_t D) {
  auto basis = spectral::basis_for(D, pot.coeffs.size());
  auto s = spectral::compute_spectrum(basis, pot, D);
  return {std::move(basis), std::move(s)};
}

Nonlinearity zero_nonlinearity(std::size_t M) {
  Nonlinearity nl;
  nl.M = M;
  nl.tensor = HamPoly(M, 2);
  nl.has_tensor = true;
  return nl;
}

double dist(std::span<const cplx> a, std::span<const cplx> b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace

TEST_CASE("overlap integrals at zero potential") {
  const auto st = setup(potential::zero_potential(), 16);
  const auto nl = assemble_nonlinearity(st.s, st.basis, 1, 1, 8);
  CHECK(std::abs(nl.overlap(Idx{1, 1, 1, 1}) - 1.0 / std::sqrt(2.0 * std::numbers::pi)) <= 1e-13);
  CHECK(std::abs(nl.overlap(Idx{1, 1, 1, 2})) <= 1e-15);
  CHECK(std::abs(nl.overlap(Idx{1, 2, 3, 5})) <= 1e-15);
  // int h_1^2 h_2^2 = 1/(2 sqrt(2 pi))
  CHECK(std::abs(nl.overlap(Idx{1, 1, 2, 2}) - 0.5 / std::sqrt(2.0 * std::numbers::pi)) <= 1e-13);
}

TEST_CASE("overlaps and tensor against a trapezoid oracle") {
  const auto st = setup(small_potential(4, 0.1), 24);
  const auto nl = assemble_nonlinearity(st.s, st.basis, 1, -1, 6, true);
  const double L = 16.0, h = 0.01;
  std::vector<double> xs;
  for (double x = -L; x <= L + 1e-12; x += h) xs.push_back(x);
  const hermite::Table table(xs, st.s.dim);
  std::vector<std::vector<double>> psi;
  for (std::size_t j = 1; j <= 6; ++j) psi.push_back(spectral::eigenfunction_values(st.s, table, j));
  auto integral = [&](const Idx& idx) {
    double s = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double m = (i == 0 || i + 1 == xs.size()) ? 0.5 * h : h;
      for (auto j : idx) m *= psi[j - 1][i];
      s += m;
    }
    return s;
  };
  for (const Idx& idx : {Idx{1, 1, 1, 1}, Idx{1, 2, 3, 4}, Idx{2, 2, 5, 6}, Idx{3, 4, 4, 6}}) {
    CHECK(std::abs(nl.overlap(idx) - integral(idx)) <= 1e-11);
    const Idx j{idx[0], idx[1]}, l{idx[2], idx[3]};
    CHECK(std::abs(nl.tensor.get(j, l) - cplx(-0.25 * integral(idx))) <= 1e-11);
    // any permutation of the four slots gives the same real entry
    CHECK(nl.tensor.get(Idx{idx[2], idx[0]}, Idx{idx[3], idx[1]}) == nl.tensor.get(Idx{idx[0], idx[2]}, Idx{idx[1], idx[3]}));
  }
  CHECK(nl.tensor.is_real(0.0));
  for (const auto& [k, c] : nl.tensor.coeffs()) CHECK(c.imag() == 0.0);
}

TEST_CASE("tensor and physical paths agree") {
  const auto st = setup(small_potential(9, 0.05), 24);
  const auto nl = assemble_nonlinearity(st.s, st.basis, 1, 1, 5, true);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const State u = initial_data(5, 0.3, seed);
    CHECK(std::abs(nl.energy(u) - nl.tensor.evaluate(u)) <= 1e-14);
    CHECK(dist(nl.gradient(u), nl.tensor.gradient(u)) <= 1e-14);
  }
  EvolveOptions o;
  o.dt = 1e-2;
  o.T = 5.0;
  const State u0 = initial_data(5, 0.2, 3);
  const auto a = evolve(u0, st.s.evals, nl, o);
  o.path = Path::tensor;
  const auto b = evolve(u0, st.s.evals, nl, o);
  CHECK(dist(a.final_state, b.final_state) <= 1e-8);
}

TEST_CASE("p = 2 nonlinearity") {
  const auto st = setup(potential::zero_potential(), 16);
  const auto nl = assemble_nonlinearity(st.s, st.basis, 2, 1, 4, true);
  CHECK(nl.tensor.half_degree() == 3);
  // int h_1^6 = pi^{-3/2} sqrt(pi/3)
  CHECK(std::abs(nl.overlap(Idx{1, 1, 1, 1, 1, 1}) - std::pow(std::numbers::pi, -1.5) * std::sqrt(std::numbers::pi / 3.0)) <= 1e-13);
  const State u = initial_data(4, 0.5, 2);
  CHECK(std::abs(nl.energy(u) - nl.tensor.evaluate(u)) <= 1e-14);
  CHECK(dist(nl.gradient(u), nl.tensor.gradient(u)) <= 1e-14);
}

TEST_CASE("hamiltonian and mass") {
  const auto st = setup(potential::zero_potential(), 16);
  const auto nl = assemble_nonlinearity(st.s, st.basis, 1, 1, 4);
  const State zero(4);
  CHECK(hamiltonian(zero, st.s.evals, nl) == 0.0);
  CHECK(mass(zero) == 0.0);
  const State e1{1.0, 0.0, 0.0, 0.0};
  CHECK(hamiltonian(e1, st.s.evals, zero_nonlinearity(4)) == 0.5);
  CHECK(std::abs(hamiltonian(e1, st.s.evals, nl) - (0.5 + 0.25 / std::sqrt(2.0 * std::numbers::pi))) <= 1e-13);
}

TEST_CASE("norm equivalence window") {
  const double rho = 1.0;
  double lo = INFINITY, hi = 0.0;
  for (std::uint64_t v = 0; v < 5; ++v) {
    const auto st = setup(small_potential(v, 0.1), 32);
    for (int sign : {1, -1}) {
      const auto nl = assemble_nonlinearity(st.s, st.basis, 1, sign, 16);
      for (double eps : {0.1, 0.05, 0.01})
        for (std::uint64_t s = 0; s < 10; ++s) {
          const State u = initial_data(16, eps, s);
          const double q = std::abs(hamiltonian(u, st.s.evals, nl) + rho * mass(u)) / (eps * eps);
          lo = std::min(lo, q);
          hi = std::max(hi, q);
        }
    }
  }
  const double C = std::max(hi, 1.0 / lo);
  MESSAGE("C_rho = " << C);
  CHECK(C <= 2.0);
  CHECK(lo >= 1.0 / C);
  CHECK(hi <= C);
}

TEST_CASE("linear flow") {
  const auto st = setup(small_potential(2, 0.05), 24);
  const auto nl = zero_nonlinearity(8);
  const State u0 = initial_data(8, 0.1, 4);
  EvolveOptions o;
  o.dt = 0.01;
  o.T = 10.0;
  o.n_report = 8;
  o.stride = 7;
  const auto tr = evolve(u0, st.s.evals, nl, o);
  for (std::size_t j = 0; j < 8; ++j)
    CHECK(std::abs(tr.final_state[j] - u0[j] * std::exp(cplx(0, -st.s.evals[j] * 10.0))) <= 1e-12);
  for (double d : tr.max_drift) CHECK(d <= 1e-16);
  CHECK(tr.times.front() == 0.0);
  CHECK(std::abs(tr.times.back() - 10.0) <= 1e-12);
  for (std::size_t i = 1; i < tr.times.size(); ++i) CHECK(tr.times[i] > tr.times[i - 1]);
  const auto rep = action_drift_report({0.1}, {tr}, 2, 1);
  CHECK(rep.drift[0][0] <= 1e-16);
  CHECK(rep.drift[0][1] <= 1e-16);
}

TEST_CASE("single mode rotates with the closed-form frequency") {
  const auto st = setup(small_potential(5, 0.05), 24);
  const auto nl = assemble_nonlinearity(st.s, st.basis, 1, 1, 1);
  const double P = nl.overlap(Idx{1, 1, 1, 1});
  const State u0{cplx(0.3, 0.1)};
  EvolveOptions o;
  o.dt = 1e-3;
  o.T = 10.0;
  const auto tr = evolve(u0, st.s.evals, nl, o);
  const double a = std::norm(u0[0]);
  const cplx exact = u0[0] * std::exp(cplx(0, -(st.s.evals[0] + P * a) * o.T));
  CHECK(std::abs(tr.final_state[0] - exact) <= 1e-9);
  CHECK(std::abs(std::norm(tr.final_state[0]) - a) <= 1e-12);
}

TEST_CASE("conservation, reversibility, gauge covariance") {
  const auto st = setup(small_potential(7, 0.05), 32);
  const auto nl = assemble_nonlinearity(st.s, st.basis, 1, 1, 12);
  const State u0 = initial_data(12, 0.1, 11);
  EvolveOptions o;
  o.dt = 1e-2;
  o.T = 50.0;
  o.stride = 10;
  const auto tr = evolve(u0, st.s.evals, nl, o);
  CHECK(tr.mass_drift() <= 1e-15);
  CHECK(tr.energy_drift() <= 1e-8);

  // reversed time: conj(u(-t)) solves the same equation
  State back(tr.final_state);
  for (auto& z : back) z = std::conj(z);
  auto rt = evolve(back, st.s.evals, nl, o).final_state;
  for (auto& z : rt) z = std::conj(z);
  CHECK(dist(rt, u0) <= 1e-12);

  const cplx phase = std::exp(cplx(0, 0.7));
  State rotated(u0);
  for (auto& z : rotated) z *= phase;
  const auto g = evolve(rotated, st.s.evals, nl, o);
  State expect(tr.final_state);
  for (auto& z : expect) z *= phase;
  CHECK(dist(g.final_state, expect) <= 1e-14);
}

TEST_CASE("second order in dt") {
  const auto st = setup(small_potential(8, 0.05), 32);
  const auto nl = assemble_nonlinearity(st.s, st.basis, 1, 1, 8);
  const State u0 = initial_data(8, 0.3, 2);
  std::vector<double> drift;
  for (double dt : {0.02, 0.01, 0.005}) {
    EvolveOptions o;
    o.dt = dt;
    o.T = 20.0;
    o.stride = 1;
    drift.push_back(evolve(u0, st.s.evals, nl, o).energy_drift());
  }
  MESSAGE("H drift " << drift[0] << " " << drift[1] << " " << drift[2]);
  CHECK(drift[0] / drift[1] == doctest::Approx(4.0).epsilon(0.125));
  CHECK(drift[1] / drift[2] == doctest::Approx(4.0).epsilon(0.125));
}

TEST_CASE("drift report fits the eps exponent") {
  std::vector<Trajectory> trajs;
  const std::vector<double> eps{0.12, 0.09, 0.06, 0.045};
  for (double e : eps) {
    Trajectory t;
    t.max_drift = {3.0 * std::pow(e, 4), 0.5 * std::pow(e, 4.5)};
    trajs.push_back(t);
  }
  const auto r = action_drift_report(eps, trajs, 2, 1);
  CHECK(r.target == 4);
  CHECK(r.fits[0].slope == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(r.fits[1].slope == doctest::Approx(4.5).epsilon(1e-12));
  CHECK(r.max_fit.slope == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(default_horizon(0.1) == doctest::Approx(100.0));
  CHECK(default_horizon(0.001) == 1e4);
}

TEST_CASE("truncation tail scales like M^{-1/2}") {
  const auto st = setup(small_potential(3, 0.05), 192);
  const auto nl = assemble_nonlinearity(st.s, st.basis, 1, 1, 128);
  double lr = 0.0;
  const int n = 20;
  for (int seed = 0; seed < n; ++seed) {
    const State u = power_profile(128, 0.1, seed);
    lr += std::log(tail_proxy(nl, u, 8) / tail_proxy(nl, u, 16));
  }
  const double ratio = std::exp(lr / n);
  MESSAGE("tail ratio M=8 / M=16: " << ratio);
  CHECK(ratio >= std::sqrt(2.0) * 0.7);
  CHECK(ratio <= std::sqrt(2.0) * 1.3);
  // homogeneous of degree 2p + 1 in eps
  const State a = power_profile(128, 0.1, 1), b = power_profile(128, 0.05, 1);
  CHECK(tail_proxy(nl, a, 8) / tail_proxy(nl, b, 8) == doctest::Approx(8.0).epsilon(1e-10));
}

TEST_CASE("parallel drift experiment is deterministic") {
  const auto st = setup(small_potential(1, 0.05), 24);
  const auto nl = assemble_nonlinearity(st.s, st.basis, 1, 1, 6);
  EvolveOptions o;
  o.dt = 0.01;
  const std::vector<double> eps{0.2, 0.1};
  const auto a = drift_experiment(st.s.evals, nl, eps, 3, 2, o, 5.0, 2);
  const auto b = drift_experiment(st.s.evals, nl, eps, 3, 2, o, 5.0, 1);
  for (std::size_t i = 0; i < eps.size(); ++i) CHECK(a.trajectories[i].final_state == b.trajectories[i].final_state);
  CHECK(a.report.drift == b.report.drift);
}

TEST_CASE("errors") {
  const auto st = setup(potential::zero_potential(), 16);
  CHECK_THROWS_AS(assemble_nonlinearity(st.s, st.basis, 1, 1, 13), ConfigError);
  CHECK_THROWS_AS(assemble_nonlinearity(st.s, st.basis, 1, 2, 4), ConfigError);
  const hermite::HermiteBasis coarse(16, 40);
  CHECK_NOTHROW(assemble_nonlinearity(st.s, coarse, 1, 1, 4));
  CHECK_THROWS_AS(assemble_nonlinearity(st.s, coarse, 2, 1, 4), ConfigError);
  const auto nl = assemble_nonlinearity(st.s, st.basis, 1, 1, 4);
  EvolveOptions o;
  o.dt = -1.0;
  CHECK_THROWS_AS(evolve(State(4), st.s.evals, nl, o), ConfigError);
  o.dt = 0.01;
  o.path = Path::tensor;
  CHECK_THROWS_AS(evolve(State(4), st.s.evals, nl, o), ConfigError);
  CHECK_THROWS_AS(evolve(State(3), st.s.evals, nl, EvolveOptions{}), ConfigError);
  // an enormous amplitude defeats the fixed-point iteration
  o.path = Path::physical;
  o.dt = 0.5;
  State big(4, cplx(30.0, 0.0));
  CHECK_THROWS_AS(evolve(big, st.s.evals, nl, o), IntegratorError);
  CHECK_THROWS_AS(tail_proxy(nl, State(4), 4), ConfigError);
}
