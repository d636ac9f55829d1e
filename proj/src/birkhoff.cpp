#include "qho/birkhoff.hpp"

#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "qho/error.hpp"
#include "qho/potential.hpp"
#include "qho/resonance.hpp"

namespace qho::birkhoff {

using hampoly::Key;
using hampoly::kMaxHalfDegree;

LU split_LU(const HamPoly& q, std::size_t N) {
  const int r = q.half_degree();
  LU out{HamPoly(q.modes(), r), HamPoly(q.modes(), r)};
  for (const auto& [k, c] : q.coeffs()) {
    if (hampoly::kappa_of(r, k) <= N)
      out.L.set(k, c);
    else
      out.U.set(k, c);
  }
  return out;
}

HamPoly solve_cohomological(const HamPoly& L, std::span<const double> w, double beta_floor, double* min_omega) {
  if (w.size() < L.modes()) throw ConfigError("fewer frequencies than modes");
  const int r = L.half_degree();
  HamPoly chi(L.modes(), r);
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& [k, c] : L.coeffs()) {
    if (c == cplx(0.0)) continue;
    const double om = hampoly::omega_of(r, k, w);
    const double a = std::abs(om);
    if (!(a >= beta_floor) || a <= resonance::kResonanceTol) {
      const auto o = hampoly::unpack(r, k);
      char buf[96];
      std::snprintf(buf, sizeof buf, "divisor %.3e below floor %.3e", om, beta_floor);
      throw SmallDivisorError(o.j, o.l, om, buf);
    }
    lo = std::min(lo, a);
    chi.set(k, c / (cplx(0.0, 1.0) * om));
  }
  chi.symmetrize();
  if (min_omega) *min_omega = lo;
  return chi;
}

double default_beta_floor(std::span<const double> w, int r, int p, std::size_t N) {
  const auto cert = resonance::certify(w, 2 * (r + p), N, w.size());
  return 0.99 * cert.beta;
}

namespace {

void check_degree(const HamPoly& h, int n) {
  if (2 * h.half_degree() != n) throw Error("bracket produced degree " + std::to_string(2 * h.half_degree()) +
                                            ", expected " + std::to_string(n));
}

}  // namespace

void lie_transform_stage(NormalForm& nf, int r_star, const HamPoly& Z2, bool track_dropped) {
  const int cap = nf.degree_cap();
  const int n0 = 2 * r_star;
  if (n0 > cap) throw ConfigError("stage beyond the degree cap");
  const HamPoly Qn = nf.Qs.count(n0) ? nf.Qs.at(n0) : HamPoly(nf.M, r_star);
  auto [L, U] = split_LU(Qn, nf.N);

  StageDiagnostics d;
  d.r_star = r_star;
  d.l_orbits = L.size();
  HamPoly chi = solve_cohomological(L, nf.w, nf.beta_floor, &d.min_omega);
  d.l_norm = hampoly::h_norm(L);
  d.chi_c_norm = hampoly::c_norm(chi);
  HamPoly res = hampoly::poisson(chi, Z2);
  res.add_scaled(L, 1.0);
  d.cohomological_residual = hampoly::h_norm(res);

  std::map<int, HamPoly> next;
  for (const auto& [n, q] : nf.Qs) next.emplace(n, n == n0 ? U : q);

  if (!chi.empty()) {
    const int step = 2 * (r_star - 1);
    // shifted: the L series with weights -1/(k+1)!; otherwise 1/k!.
    auto series = [&](const HamPoly& base, int n_star, bool shifted) {
      HamPoly a = base;
      double fact = 1.0;
      for (int k = 1;; ++k) {
        const int n = n_star + k * step;
        if (n > cap && (!track_dropped || n / 2 > kMaxHalfDegree)) break;
        a = hampoly::poisson(chi, a);
        check_degree(a, n);
        fact *= k;
        const double coef = shifted ? -1.0 / (fact * (k + 1)) : 1.0 / fact;
        if (n > cap) {
          d.dropped_mass += std::abs(coef) * hampoly::h_norm(a);
          break;
        }
        if (a.empty()) break;
        next.try_emplace(n, nf.M, n / 2).first->second.add_scaled(a, coef);
      }
    };
    for (const auto& [n, q] : nf.Qs)
      if (!q.empty()) series(q, n, false);
    series(L, n0, true);
  }
  for (auto& [n, q] : next) q.symmetrize();

  nf.Qs = std::move(next);
  nf.chis.push_back(std::move(chi));
  nf.diagnostics.push_back(d);
}

NormalForm normal_form(std::span<const double> w, const HamPoly& P, int p, int r, std::size_t N, const Options& opt) {
  if (p < 1 || r < 1) throw ConfigError("p and r must be positive");
  if (r + p > kMaxHalfDegree) throw ConfigError("r + p exceeds the supported half-degree " + std::to_string(kMaxHalfDegree));
  if (P.half_degree() != p + 1) throw ConfigError("perturbation must have degree 2p + 2");
  if (w.size() != P.modes()) throw ConfigError("frequency count does not match the mode count");
  if (N < 1 || N > w.size()) throw ConfigError("N must lie in [1, M]");

  NormalForm nf;
  nf.p = p;
  nf.r = r;
  nf.N = N;
  nf.M = w.size();
  nf.w.assign(w.begin(), w.end());
  nf.beta_floor = opt.beta_floor > 0.0 ? opt.beta_floor : default_beta_floor(w, r, p, N);
  for (int n = 2 * p + 2; n <= nf.degree_cap(); n += 2) nf.Qs.emplace(n, HamPoly(nf.M, n / 2));
  nf.Qs.at(2 * p + 2) = P;

  const HamPoly Z2 = hampoly::z2(w);
  for (int rs = p + 1; rs <= r + p; ++rs) lie_transform_stage(nf, rs, Z2, opt.track_dropped);
  return nf;
}

namespace {

// Flat term list for i * grad chi.
struct Plan {
  int r = 0;
  std::vector<cplx> a;               // 2i c * multiplicity
  std::vector<std::uint16_t> idx;    // 2r zero-based indices per term
};

Plan compile(const HamPoly& chi) {
  Plan pl;
  pl.r = chi.half_degree();
  for (const auto& [k, c] : chi.coeffs()) {
    pl.a.push_back(cplx(0.0, 2.0) * c * hampoly::multiplicity(pl.r, k));
    for (int n = 0; n < 2 * pl.r; ++n) pl.idx.push_back(static_cast<std::uint16_t>(k[n] - 1));
  }
  return pl;
}

void apply(const Plan& pl, const State& u, State& du) {
  std::fill(du.begin(), du.end(), cplx(0.0));
  const int r = pl.r;
  for (std::size_t t = 0; t < pl.a.size(); ++t) {
    const std::uint16_t* k = pl.idx.data() + t * 2 * r;
    cplx pu = pl.a[t];
    for (int n = 0; n < r; ++n) pu *= u[k[n]];
    // the l half is sorted, so each distinct index is the start of a run
    for (int n = r; n < 2 * r; ++n) {
      if (n > r && k[n] == k[n - 1]) continue;
      int beta = 1;
      while (n + beta < 2 * r && k[n + beta] == k[n]) ++beta;
      cplx m = pu * static_cast<double>(beta);
      for (int s = r; s < 2 * r; ++s)
        if (s != n) m *= std::conj(u[k[s]]);
      du[k[n]] += m;
    }
  }
}

double norm_inf(std::span<const cplx> u) {
  double m = 0.0;
  for (const auto& z : u) m = std::max(m, std::abs(z));
  return m;
}

}  // namespace

State flow(const HamPoly& chi, std::span<const cplx> u0, double t, const FlowOptions& opt) {
  namespace ode = boost::numeric::odeint;
  if (u0.size() != chi.modes()) throw ConfigError("state dimension does not match the generator");
  if (!(std::abs(t) <= 1.0)) throw ConfigError("flow time must lie in [-1, 1]");
  if (hampoly::h_half_norm(u0) > opt.radius) throw IntegratorError("initial state outside the flow radius");
  State u(u0.begin(), u0.end());
  if (chi.empty() || t == 0.0) return u;

  const Plan pl = compile(chi);
  auto rhs = [&pl](const State& x, State& dx, double) { apply(pl, x, dx); };
  const double atol = opt.rtol * std::max(norm_inf(u0), std::numeric_limits<double>::min());
  try {
    auto stepper = ode::make_controlled(atol, opt.rtol, ode::runge_kutta_dopri5<State>());
    ode::integrate_adaptive(stepper, rhs, u, 0.0, t, t / 16.0);
  } catch (const std::exception& e) {
    throw IntegratorError(std::string("flow integration failed: ") + e.what());
  }
  for (const auto& z : u)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw IntegratorError("flow produced a non-finite state");
  return u;
}

State transform(const NormalForm& nf, std::span<const cplx> u, const FlowOptions& opt) {
  State x(u.begin(), u.end());
  for (auto it = nf.chis.rbegin(); it != nf.chis.rend(); ++it) x = flow(*it, x, 1.0, opt);
  return x;
}

State inverse_transform(const NormalForm& nf, std::span<const cplx> u, const FlowOptions& opt) {
  State x(u.begin(), u.end());
  for (const auto& chi : nf.chis) x = flow(chi, x, -1.0, opt);
  return x;
}

double real_dot(std::span<const cplx> a, std::span<const cplx> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size() && k < b.size(); ++k) s += (a[k] * std::conj(b[k])).real();
  return s;
}

double symplecticity_defect(const HamPoly& chi, std::span<const cplx> u, std::span<const cplx> v, std::span<const cplx> w,
                            double t, double fd_step, const FlowOptions& opt) {
  const std::size_t M = u.size();
  auto jvp = [&](std::span<const cplx> dir) {
    State plus(M), minus(M);
    for (std::size_t k = 0; k < M; ++k) {
      plus[k] = u[k] + fd_step * dir[k];
      minus[k] = u[k] - fd_step * dir[k];
    }
    const State fp = flow(chi, plus, t, opt);
    const State fm = flow(chi, minus, t, opt);
    State d(M);
    for (std::size_t k = 0; k < M; ++k) d[k] = (fp[k] - fm[k]) / (2.0 * fd_step);
    return d;
  };
  const State dv = jvp(v);
  const State dw = jvp(w);
  const cplx I(0.0, 1.0);
  State iv(M), idv(M);
  for (std::size_t k = 0; k < M; ++k) {
    iv[k] = I * v[k];
    idv[k] = I * dv[k];
  }
  return std::abs(real_dot(idv, dw) - real_dot(iv, w));
}

double remainder(const NormalForm& nf, const HamPoly& Z2, const HamPoly& P, std::span<const cplx> u,
                 const FlowOptions& opt) {
  const State tu = transform(nf, u, opt);
  double r = Z2.evaluate(tu) - Z2.evaluate(u) + P.evaluate(tu);
  for (const auto& [n, q] : nf.Qs) r -= q.evaluate(u);
  return r;
}

Validation validate_normal_form(const NormalForm& nf, const HamPoly& Z2, const HamPoly& P,
                                const std::vector<State>& samples, const std::vector<double>& eps_grid,
                                const FlowOptions& opt) {
  if (samples.empty() || eps_grid.size() < 2) throw ConfigError("validation needs samples and at least two radii");
  Validation v;
  v.eps = eps_grid;
  v.target = 2 * nf.r + 2 * nf.p + 2;
  v.remainder.assign(eps_grid.size(), 0.0);
  v.identity.assign(eps_grid.size(), 0.0);
  v.min_sample_slope = std::numeric_limits<double>::infinity();
  for (const auto& s : samples) {
    std::vector<double> rs(eps_grid.size());
    for (std::size_t e = 0; e < eps_grid.size(); ++e) {
      State u(s.size());
      for (std::size_t k = 0; k < s.size(); ++k) u[k] = eps_grid[e] * s[k];
      rs[e] = std::abs(remainder(nf, Z2, P, u, opt));
      const State tu = transform(nf, u, opt);
      State diff(u.size());
      for (std::size_t k = 0; k < u.size(); ++k) diff[k] = tu[k] - u[k];
      v.remainder[e] = std::max(v.remainder[e], rs[e]);
      v.identity[e] = std::max(v.identity[e], hampoly::h_half_norm(diff) / hampoly::h_half_norm(u));
    }
    v.min_sample_slope = std::min(v.min_sample_slope, fit_power_law(eps_grid, rs).slope);
  }
  v.remainder_fit = fit_power_law(v.eps, v.remainder);
  v.identity_fit = fit_power_law(v.eps, v.identity);
  return v;
}

State unit_sample(std::size_t M, std::uint64_t seed, std::size_t support) {
  if (M == 0) throw ConfigError("empty state");
  const std::size_t S = support == 0 ? M : std::min(support, M);
  const auto g = potential::gaussians(seed, 2 * S);
  State u(M, cplx(0.0));
  for (std::size_t k = 0; k < S; ++k) u[k] = cplx(g[2 * k], g[2 * k + 1]);
  const double n = hampoly::h_half_norm(u);
  if (n == 0.0) throw DegenerateInputError("zero sample");
  for (auto& z : u) z /= n;
  return u;
}

}  // namespace qho::birkhoff
