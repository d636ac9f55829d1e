// Acceptance suite: one PASS/FAIL line per criterion. Usage: acceptance [criterion ...]
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qho/birkhoff.hpp"
#include "qho/dynamics.hpp"
#include "qho/hampoly.hpp"
#include "qho/hermite.hpp"
#include "qho/potential.hpp"
#include "qho/resonance.hpp"
#include "qho/spectral.hpp"

using namespace qho;
using hampoly::cplx;
using hampoly::HamPoly;
using hampoly::State;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }
double uniform(std::mt19937_64& g, double lo = -1.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}

// Standard instance: sampled power-weight potential (seed 0) rescaled to the r = 2, N = 2 budget, D = 32.
struct Standard {
  potential::Potential V;
  hermite::HermiteBasis basis;
  spectral::Spectrum s;
};

const Standard& standard() {
  static const Standard st = [] {
    const auto mu = hermite::mu_table(64);
    const double gamma = resonance::estimate_gamma_r(2, 12, 24, mu).gamma;
    auto V = potential::rescale_to_budget(potential::sample_potential(potential::power_weight(), 0), 2, 2, gamma);
    auto basis = spectral::basis_for(32, V.coeffs.size());
    auto s = spectral::compute_spectrum(basis, V, 32);
    return Standard{std::move(V), std::move(basis), std::move(s)};
  }();
  return st;
}

std::vector<double> first(const std::vector<double>& e, std::size_t M) { return {e.begin(), e.begin() + M}; }

HamPoly quartic(std::size_t M) {
  const auto& st = standard();
  return dynamics::assemble_nonlinearity(st.s, st.basis, 1, 1, M, true).tensor;
}

// Trapezoid rule on [-20, 20], step 0.02.
std::vector<double> trapezoid_grid() {
  std::vector<double> x;
  for (int i = -1000; i <= 1000; ++i) x.push_back(0.02 * i);
  return x;
}

void c1(Outcome& o) {
  const std::size_t jmax = 64;
  const auto mu = hermite::mu_table(jmax);
  const auto xs = trapezoid_grid();
  std::vector<double> xs2(xs);
  for (auto& x : xs2) x *= std::numbers::sqrt2;
  const hermite::Table h(xs, jmax);
  const hermite::Table h2(xs2, 2 * jmax);
  const double c = std::pow(2.0, 0.25) * 0.02;
  double worst = 0.0, worst_parseval = 0.0;
  for (std::size_t j = 1; j <= jmax; ++j) {
    double parseval = 0.0, h4 = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) h4 += 0.02 * std::pow(h.at(j, i), 4);
    for (std::size_t k = 1; k <= j; ++k) {
      double q = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) q += h.at(j, i) * h.at(j, i) * h2.at(2 * k - 1, i);
      worst = std::max(worst, std::abs(c * q - mu(k, j)));
      parseval += mu(k, j) * mu(k, j);
    }
    worst_parseval = std::max(worst_parseval, std::abs(parseval - h4));
  }
  o.detail << "max |mu - quad| = " << worst << ", Parseval " << worst_parseval;
  o.check(worst <= 1e-8, "mu");
  o.check(worst_parseval <= 1e-8, "Parseval");
}

void c2(Outcome& o) {
  const std::size_t D = 128, trust = 96;
  const auto basis = spectral::basis_for(D, 64);
  const auto s0 = spectral::compute_spectrum(basis, potential::zero_potential(), D, trust);
  double harm = 0.0;
  for (std::size_t j = 1; j <= trust; ++j) harm = std::max(harm, std::abs(s0.evals[j - 1] - (2.0 * j - 1.0)));
  o.detail << "V=0: max |Lambda_j - (2j-1)| = " << harm;
  o.check(s0.trusted() == trust && harm <= 1e-10, "zero potential");

  // constants fitted on seeds 0-9, checked on seeds 10-19
  const double norm = 0.05;
  std::vector<double> cg, cl;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto raw = potential::sample_potential(potential::power_weight(), seed);
    const auto V = potential::scaled(raw, norm / potential::sobolev_norm(raw, 1.0));
    const auto d = spectral::eigen_diagnostics(spectral::compute_spectrum(basis, V, D, trust), basis);
    double g = 0.0, l = 0.0;
    for (const auto& r : d.rows) {
      g = std::max(g, r.gap * std::sqrt(static_cast<double>(r.j)) / norm);
      l = std::max(l, r.l2_dist * std::pow(static_cast<double>(r.j), 1.0 / 12.0) / norm);
    }
    cg.push_back(g);
    cl.push_back(l);
  }
  const auto half_max = [](const std::vector<double>& v, bool second) {
    return *std::max_element(v.begin() + (second ? 10 : 0), v.begin() + (second ? 20 : 10));
  };
  const double gfit = half_max(cg, false), gchk = half_max(cg, true);
  const double lfit = half_max(cl, false), lchk = half_max(cl, true);
  o.detail << "; gap constant " << gfit << " (fit) vs " << gchk << " (check), eigenvector constant " << lfit << " vs "
           << lchk;
  o.check(std::abs(gchk / gfit - 1.0) <= 0.2, "gap constant stability");
  o.check(std::abs(lchk / lfit - 1.0) <= 0.2, "eigenvector constant stability");
}

void c3(Outcome& o) {
  const std::size_t D = 64;
  const auto basis = spectral::basis_for(D, 64);
  const auto raw = potential::sample_potential(potential::power_weight(), 3);
  const auto V = potential::scaled(raw, 0.05 / potential::sobolev_norm(raw, 1.0));
  const auto s = spectral::compute_spectrum(basis, V, D);
  // k <= j: beyond that the gradient is O(|V|) small and the difference quotient is rounding-dominated
  auto g = rng(11);
  const double delta = 1e-5;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto j = static_cast<std::size_t>(uniform(g, 1.0, 33.0));
    const auto k = static_cast<std::size_t>(uniform(g, 1.0, j + 1.0));
    auto plus = V, minus = V;
    plus.coeffs[2 * k - 2] += delta;
    minus.coeffs[2 * k - 2] -= delta;
    const double fd =
        (spectral::compute_spectrum(basis, plus, D).evals[j - 1] - spectral::compute_spectrum(basis, minus, D).evals[j - 1]) /
        (2 * delta);
    const double an = spectral::eigenvalue_gradient(s, basis, j, k);
    worst = std::max(worst, std::abs(fd - an) / std::abs(an));
  }
  const auto s0 = spectral::compute_spectrum(basis, potential::zero_potential(), D);
  const auto mu = hermite::mu_table(48);
  double base = 0.0;
  for (std::size_t j = 1; j <= 48; ++j)
    for (std::size_t k = 1; k <= 32; ++k)
      base = std::max(base, std::abs(spectral::eigenvalue_gradient(s0, basis, j, k) - mu(k, j)));
  o.detail << "max relative FD error " << worst << ", |grad - mu| at V=0 " << base;
  o.check(worst <= 1e-5, "finite difference");
  o.check(base <= 1e-8, "zero potential");
}

HamPoly random_poly(std::mt19937_64& g, std::size_t M, int r, int terms) {
  HamPoly h(M, r);
  for (int t = 0; t < terms; ++t) {
    std::vector<std::size_t> j(r), l(r);
    for (auto& x : j) x = static_cast<std::size_t>(uniform(g, 1.0, M + 1.0));
    for (auto& x : l) x = static_cast<std::size_t>(uniform(g, 1.0, M + 1.0));
    cplx c(uniform(g), uniform(g));
    if (hampoly::make_key(r, j, l) == hampoly::conjugate_key(r, hampoly::make_key(r, j, l))) c = c.real();
    h.insert(j, l, c);
  }
  return h;
}

State random_state(std::mt19937_64& g, std::size_t M) {
  State u(M);
  for (auto& x : u) x = cplx(uniform(g), uniform(g));
  return u;
}

// Wirtinger derivatives d/du_k, d/d conj(u_k) by central differences.
std::pair<State, State> wirtinger(const HamPoly& h, const State& u) {
  const double e = 1e-6;
  State du(u.size()), dub(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    State p = u, m = u;
    p[k] += e;
    m[k] -= e;
    const double dx = (h.evaluate(p) - h.evaluate(m)) / (2 * e);
    p = u;
    m = u;
    p[k] += cplx(0, e);
    m[k] -= cplx(0, e);
    const double dy = (h.evaluate(p) - h.evaluate(m)) / (2 * e);
    du[k] = 0.5 * cplx(dx, -dy);
    dub[k] = 0.5 * cplx(dx, dy);
  }
  return {du, dub};
}

void c4(Outcome& o) {
  auto g = rng(4);
  bool antisym = true;
  double jacobi = 0.0;
  for (int t = 0; t < 30; ++t) {
    const auto a = random_poly(g, 3, 1 + t % 2, 6);
    const auto b = random_poly(g, 3, 1 + (t / 2) % 2, 6);
    const auto c = random_poly(g, 3, 1 + (t / 4) % 2, 6);
    antisym = antisym && hampoly::poisson(a, b) == hampoly::poisson(b, a).scaled(-1.0);
    auto j = hampoly::poisson(a, hampoly::poisson(b, c));
    j.add_scaled(hampoly::poisson(b, hampoly::poisson(c, a)), 1.0);
    j.add_scaled(hampoly::poisson(c, hampoly::poisson(a, b)), 1.0);
    jacobi = std::max(jacobi, hampoly::h_norm(j));
  }
  double fd = 0.0;
  for (int t = 0; t < 50; ++t) {
    const auto h = random_poly(g, 3, 1 + t % 2, 5);
    const auto k = random_poly(g, 3, 1 + (t / 2) % 2, 5);
    const auto u = random_state(g, 3);
    const auto [hu, hub] = wirtinger(h, u);
    const auto [ku, kub] = wirtinger(k, u);
    cplx ref{};
    for (std::size_t q = 0; q < 3; ++q) ref += hub[q] * ku[q] - hu[q] * kub[q];
    ref *= cplx(0, 2);
    fd = std::max(fd, std::abs(hampoly::poisson(h, k).evaluate(u) - ref) / std::max(1.0, std::abs(ref)));
  }
  const auto w = first(standard().s.evals, 6);
  const auto Z = hampoly::z2(w);
  double eig = 0.0;
  for (int t = 0; t < 40; ++t) {
    const int r = 1 + t % 4;
    const auto chi = random_poly(g, 6, r, 3);
    const auto b = hampoly::poisson(chi, Z);
    for (const auto& [key, c] : chi.coeffs()) {
      const cplx expect = cplx(0, -hampoly::omega_of(r, key, w)) * c;
      eig = std::max(eig, std::abs(b.at(key) - expect) / std::max(1.0, std::abs(expect)));
    }
  }
  o.detail << "antisymmetry " << (antisym ? "exact" : "broken") << ", Jacobi " << jacobi << ", FD bracket " << fd
           << ", -i Omega relation " << eig;
  o.check(antisym, "antisymmetry");
  o.check(jacobi <= 1e-10, "Jacobi");
  o.check(fd <= 1e-5, "finite-difference bracket");
  o.check(eig <= 1e-12, "eigen-relation");
}

void c5(Outcome& o) {
  const std::size_t M = 8;
  const auto w = first(standard().s.evals, M);
  const auto nf = birkhoff::normal_form(w, quartic(M), 1, 2, 2);
  double worst = 0.0;
  o.detail << "stages:";
  for (const auto& d : nf.diagnostics) {
    o.detail << " r*=" << d.r_star << " residual " << d.cohomological_residual << " (|L| " << d.l_norm << ")";
    worst = std::max(worst, d.cohomological_residual);
  }
  o.check(nf.diagnostics.size() == 2, "stage count");
  o.check(worst <= 1e-12, "residual");
}

void c6(Outcome& o) {
  const std::size_t M = 8, N = 2;
  const auto w = first(standard().s.evals, M);
  const auto P = quartic(M);
  const auto nf = birkhoff::normal_form(w, P, 1, 1, N);
  std::vector<State> samples;
  for (std::uint64_t k = 0; k < 4; ++k) samples.push_back(birkhoff::unit_sample(M, 100 + k));
  const auto v = birkhoff::validate_normal_form(nf, hampoly::z2(w), P, samples, {0.1, 0.07, 0.05, 0.035});
  bool commutes = true;
  for (const auto& [n, q] : nf.Qs)
    for (std::size_t a = 1; a <= N; ++a) commutes = commutes && hampoly::commutes_with_action(q, a);
  o.detail << "remainder slope " << v.remainder_fit.slope << " (need >= " << v.target - 0.5 << "), |R| at eps=0.035 "
           << v.remainder.back() << ", Q commutes with I_1..I_" << N << ": " << (commutes ? "yes" : "no");
  o.check(v.remainder_fit.slope >= v.target - 0.5, "slope");
  o.check(commutes, "commutation");
}

double dist(const State& a, const State& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

void c7(Outcome& o) {
  const std::size_t M = 3;
  const auto w = first(standard().s.evals, M);
  const auto nf = birkhoff::normal_form(w, quartic(M), 1, 2, 1);
  double group = 0.0, inverse = 0.0, sympl = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    State u = birkhoff::unit_sample(M, 40 + s);
    for (auto& x : u) x *= 0.2;
    for (const auto& chi : nf.chis) {
      group = std::max(group, dist(birkhoff::flow(chi, birkhoff::flow(chi, u, 0.4), 0.6), birkhoff::flow(chi, u, 1.0)));
      inverse = std::max(inverse, dist(birkhoff::flow(chi, birkhoff::flow(chi, u, 1.0), -1.0), u));
      const State v = birkhoff::unit_sample(M, 60 + s), x = birkhoff::unit_sample(M, 80 + s);
      sympl = std::max(sympl, birkhoff::symplecticity_defect(chi, u, v, x));
    }
    inverse = std::max(inverse, dist(birkhoff::inverse_transform(nf, birkhoff::transform(nf, u)), u));
  }
  o.detail << nf.chis.size() << " generators; group law " << group << ", inverse " << inverse << ", symplecticity "
           << sympl;
  o.check(group <= 1e-8, "group law");
  o.check(inverse <= 1e-8, "invertibility");
  o.check(sympl <= 1e-6, "symplecticity");
}

void c8(Outcome& o) {
  const std::size_t M = 16;
  const auto& st = standard();
  const auto nl = dynamics::assemble_nonlinearity(st.s, st.basis, 1, 1, M);
  const auto u0 = dynamics::initial_data(M, 0.1, 1);
  dynamics::EvolveOptions opt;
  opt.T = 1e3;
  opt.stride = 100000;
  opt.dt = 1e-3;
  const auto a = dynamics::evolve(u0, st.s.evals, nl, opt);
  opt.dt = 5e-4;
  opt.stride = 200000;
  const auto b = dynamics::evolve(u0, st.s.evals, nl, opt);
  const double ratio = a.energy_drift() / b.energy_drift();
  o.detail << "mass drift " << a.mass_drift() << ", H drift " << a.energy_drift() << " (dt 1e-3) / " << b.energy_drift()
           << " (dt 5e-4), ratio " << ratio;
  o.check(a.mass_drift() <= 1e-8, "mass");
  o.check(a.energy_drift() <= 1e-6, "energy");
  o.check(ratio >= 3.5 && ratio <= 4.5, "dt halving ratio");
}

void c9(Outcome& o) {
  const std::size_t M = 16, N = 2;
  const auto& st = standard();
  const auto cert = resonance::certify(st.s.evals, 4, N, M);
  const auto nl = dynamics::assemble_nonlinearity(st.s, st.basis, 1, 1, M);
  const std::vector<double> eps{0.12, 0.09, 0.06, 0.045};
  dynamics::EvolveOptions opt;
  opt.dt = 1e-3;
  opt.stride = 1000;
  opt.n_report = N;
  const auto run = dynamics::drift_experiment(st.s.evals, nl, eps, 1, N, opt);
  const double s = run.report.max_fit.slope;
  double smallest = 0.0;
  for (double d : run.report.drift.back()) smallest = std::max(smallest, d);
  const double bound = 10.0 * std::pow(eps.back(), 4);
  o.detail << "certificate beta " << cert.beta << "; drift";
  for (std::size_t e = 0; e < eps.size(); ++e)
    o.detail << " " << *std::max_element(run.report.drift[e].begin(), run.report.drift[e].end());
  o.detail << "; fitted exponent " << s << " (need >= 3), drift at eps=0.045 " << smallest << " vs " << bound;
  o.check(cert.beta > 0.0 && !cert.resonant, "certificate");
  o.check(s >= 3.0, "exponent");
  o.check(smallest < bound, "drift bound");
}

void c10(Outcome& o) {
  const std::size_t D = 64;
  const auto basis = spectral::basis_for(D, 64);
  const auto zero = spectral::compute_spectrum(basis, potential::zero_potential(), D);
  const auto cz = resonance::certify(zero.evals, 4, 2, 40);
  const double witness = resonance::omega(zero.evals, cz.argmin);
  o.detail << "V=0 resonant: " << (cz.resonant ? "yes" : "no") << " witness Omega " << witness;
  o.check(cz.resonant && cz.argmin.valid(4) && std::abs(witness) <= resonance::kResonanceTol, "zero potential");

  const auto mu = hermite::mu_table(64);
  const double gamma = resonance::estimate_gamma_r(3, 12, 24, mu).gamma;
  int ok = 0;
  std::vector<double> evals;
  double beta0 = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto V = potential::rescale_to_budget(potential::sample_potential(potential::power_weight(), seed), 3, 2, gamma);
    const auto s = spectral::compute_spectrum(basis, V, D);
    const auto c = resonance::certify(s.evals, 3, 2, 40);
    if (c.beta > 0.0 && !c.resonant) ++ok;
    if (seed == 0) {
      evals = s.evals;
      beta0 = c.beta;
    }
  }
  double scaling = 0.0;
  for (double f : {0.5, 1.7, 3.0}) {
    std::vector<double> e(evals);
    for (auto& x : e) x *= f;
    scaling = std::max(scaling, std::abs(resonance::certify(e, 3, 2, 40).beta - f * beta0) / (f * beta0));
  }
  o.detail << "; certified " << ok << "/100; beta scaling error " << scaling;
  o.check(ok >= 95, "certified fraction");
  o.check(scaling <= 1e-12, "scaling");
}

struct Criterion {
  int id;
  const char* name;
  double max_seconds;  // 0: no limit
  std::function<void(Outcome&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "mu coefficients", 10, c1},         {2, "spectrum ground truth", 60, c2},
      {3, "eigenvalue gradient", 0, c3},      {4, "bracket algebra", 0, c4},
      {5, "cohomological residual", 0, c5},   {6, "remainder scaling", 300, c6},
      {7, "flow properties", 0, c7},          {8, "conservation", 0, c8},
      {9, "action drift scaling", 1800, c9},  {10, "resonance certificates", 0, c10}};
  std::set<int> pick;
  for (int i = 1; i < argc; ++i) pick.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!pick.empty() && !pick.contains(c.id)) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.max_seconds > 0 && secs > c.max_seconds) o.check(false, "runtime");
    if (!o.pass) ++failed;
    std::printf("%s %2d %-24s %7.1fs  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
