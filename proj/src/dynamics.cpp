#include "qho/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "qho/birkhoff.hpp"
#include "qho/error.hpp"
#include "qho/potential.hpp"

namespace qho::dynamics {

namespace {

double max_abs(std::span<const cplx> u) {
  double m = 0.0;
  for (const auto& z : u) m = std::max(m, std::abs(z));
  return m;
}

std::vector<cplx> field(const Nonlinearity& nl, std::span<const cplx> u) {
  std::vector<cplx> U(nl.npts, cplx(0.0));
  for (std::size_t j = 0; j < nl.M; ++j) {
    if (u[j] == cplx(0.0)) continue;
    const double* row = nl.psi.data() + j * nl.npts;
    for (std::size_t q = 0; q < nl.npts; ++q) U[q] += u[j] * row[q];
  }
  return U;
}

void check_dim(const Nonlinearity& nl, std::span<const cplx> u) {
  if (u.size() != nl.M) throw ConfigError("state dimension does not match the nonlinearity");
}

// Sorted multisets of size n from {1..M}.
std::vector<std::vector<std::size_t>> multisets(std::size_t M, int n) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur(n, 1);
  while (true) {
    out.push_back(cur);
    int i = n - 1;
    while (i >= 0 && cur[i] == M) --i;
    if (i < 0) break;
    ++cur[i];
    for (int k = i + 1; k < n; ++k) cur[k] = cur[i];
  }
  return out;
}

}  // namespace

double Nonlinearity::energy(std::span<const cplx> u) const {
  check_dim(*this, u);
  const auto U = field(*this, u);
  double s = 0.0;
  for (std::size_t q = 0; q < npts; ++q) s += weights[q] * std::pow(std::norm(U[q]), p + 1);
  return sign * s / (2.0 * p + 2.0);
}

State Nonlinearity::gradient(std::span<const cplx> u) const {
  check_dim(*this, u);
  auto U = field(*this, u);
  for (std::size_t q = 0; q < npts; ++q) U[q] *= sign * weights[q] * std::pow(std::norm(U[q]), p);
  State g(M);
  for (std::size_t k = 0; k < M; ++k) {
    const double* row = psi.data() + k * npts;
    cplx s = 0.0;
    for (std::size_t q = 0; q < npts; ++q) s += U[q] * row[q];
    g[k] = s;
  }
  return g;
}

double Nonlinearity::overlap(std::span<const std::size_t> idx) const {
  double s = 0.0;
  for (std::size_t q = 0; q < npts; ++q) {
    double m = weights[q];
    for (auto j : idx) {
      if (j < 1 || j > M) throw IndexError("overlap index out of range");
      m *= psi[(j - 1) * npts + q];
    }
    s += m;
  }
  return s;
}

Nonlinearity assemble_nonlinearity(const spectral::Spectrum& s, const hermite::HermiteBasis& basis, int p, int sign,
                                   std::size_t M, bool build_tensor) {
  if (p < 1) throw ConfigError("p must be positive");
  if (sign != 1 && sign != -1) throw ConfigError("sign must be +1 or -1");
  if (M < 1 || M > s.trusted()) throw ConfigError("M must lie in [1, trusted modes]");
  if (basis.cap() < s.dim) throw ConfigError("basis smaller than the spectrum dimension");
  const std::size_t degree = static_cast<std::size_t>(2 * p + 2) * (s.dim - 1);
  if (!basis.exact_for_degree(degree))
    throw ConfigError("quadrature order " + std::to_string(basis.quad_order()) + " too small for " +
                      std::to_string(2 * p + 2) + "-fold products");

  Nonlinearity nl;
  nl.p = p;
  nl.sign = sign;
  nl.M = M;
  const auto rule = basis.product_rule(static_cast<std::size_t>(p + 1), s.dim);
  nl.npts = rule.points.size();
  nl.weights = rule.weights;
  nl.psi.assign(M * nl.npts, 0.0);
  for (std::size_t j = 0; j < M; ++j)
    for (std::size_t i = 0; i < s.dim; ++i) {
      const double c = s.evecs(i, j);
      if (c == 0.0) continue;
      const double* h = rule.values.row(i + 1);
      double* out = nl.psi.data() + j * nl.npts;
      for (std::size_t q = 0; q < nl.npts; ++q) out[q] += c * h[q];
    }

  if (build_tensor) {
    const auto sets = multisets(M, p + 1);
    std::vector<std::vector<double>> bare(sets.size(), std::vector<double>(nl.npts));
    for (std::size_t a = 0; a < sets.size(); ++a)
      for (std::size_t q = 0; q < nl.npts; ++q) {
        double m = 1.0;
        for (auto j : sets[a]) m *= nl.psi[(j - 1) * nl.npts + q];
        bare[a][q] = m;
      }
    HamPoly t(M, p + 1);
    const double scale = sign / (2.0 * p + 2.0);
    for (std::size_t a = 0; a < sets.size(); ++a)
      for (std::size_t b = a; b < sets.size(); ++b) {
        double c = 0.0;
        for (std::size_t q = 0; q < nl.npts; ++q) c += nl.weights[q] * bare[a][q] * bare[b][q];
        t.set(hampoly::make_key(p + 1, sets[a], sets[b]), scale * c);
        t.set(hampoly::make_key(p + 1, sets[b], sets[a]), scale * c);
      }
    nl.tensor = std::move(t);
    nl.has_tensor = true;
  }
  return nl;
}

double mass(std::span<const cplx> u) {
  double s = 0.0;
  for (const auto& z : u) s += std::norm(z);
  return s;
}

double hamiltonian(std::span<const cplx> u, std::span<const double> evals, const Nonlinearity& nl, Path path) {
  if (evals.size() < u.size()) throw ConfigError("fewer eigenvalues than modes");
  double z = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) z += 0.5 * evals[j] * std::norm(u[j]);
  if (path == Path::tensor) {
    if (!nl.has_tensor) throw ConfigError("tensor path requested but no tensor assembled");
    return z + nl.tensor.evaluate(u);
  }
  return z + nl.energy(u);
}

double Trajectory::mass_drift() const {
  double m = 0.0;
  for (double x : mass) m = std::max(m, std::abs(x - mass.front()));
  return m;
}

double Trajectory::energy_drift() const {
  double m = 0.0;
  for (double x : H) m = std::max(m, std::abs(x - H.front()));
  return m;
}

Trajectory evolve(std::span<const cplx> u0, std::span<const double> evals, const Nonlinearity& nl,
                  const EvolveOptions& opt) {
  check_dim(nl, u0);
  if (!(opt.dt > 0.0) || !(opt.T > 0.0)) throw ConfigError("dt and T must be positive");
  if (opt.stride == 0) throw ConfigError("snapshot stride must be positive");
  if (evals.size() < nl.M) throw ConfigError("fewer eigenvalues than modes");
  if (opt.path == Path::tensor && !nl.has_tensor) throw ConfigError("tensor path requested but no tensor assembled");
  const std::size_t M = nl.M;
  const std::size_t nrep = std::min(opt.n_report, M);
  const auto steps = static_cast<std::size_t>(std::llround(opt.T / opt.dt));
  if (steps == 0) throw ConfigError("horizon shorter than one step");

  // The state is carried in extended precision; double rounding of the rotations otherwise biases H over 1e6 steps.
  using Wide = std::complex<long double>;
  std::vector<Wide> rot(M);
  for (std::size_t j = 0; j < M; ++j) rot[j] = std::exp(Wide(0.0L, -0.5L * evals[j] * opt.dt));
  auto grad = [&](const State& x) { return opt.path == Path::tensor ? nl.tensor.gradient(x) : nl.gradient(x); };
  const Wide mi_dt(0.0L, -static_cast<long double>(opt.dt));

  Trajectory tr;
  State u(u0.begin(), u0.end());
  std::vector<Wide> w(u0.begin(), u0.end());
  const double m0 = mass(u);
  std::vector<double> I0(nrep);
  for (std::size_t j = 0; j < nrep; ++j) I0[j] = std::norm(u[j]);
  tr.max_drift.assign(nrep, 0.0);
  auto snapshot = [&](double t) {
    tr.times.push_back(t);
    tr.H.push_back(hamiltonian(u, evals, nl, opt.path));
    tr.mass.push_back(mass(u));
    std::vector<double> I(nrep);
    for (std::size_t j = 0; j < nrep; ++j) I[j] = std::norm(u[j]);
    tr.actions.push_back(std::move(I));
    if (opt.keep_states) tr.states.push_back(u);
  };
  snapshot(0.0);

  std::vector<Wide> v(M);
  State mid(M);
  for (std::size_t n = 1; n <= steps; ++n) {
    for (std::size_t j = 0; j < M; ++j) {
      w[j] *= rot[j];
      u[j] = cplx(w[j]);
    }
    // v = w - i dt grad((w + v)/2)
    State g = grad(u);
    for (std::size_t j = 0; j < M; ++j) v[j] = w[j] + mi_dt * Wide(g[j]);
    const double scale = std::max(max_abs(u), 1e-300);
    double prev = INFINITY;
    for (int it = 0;; ++it) {
      for (std::size_t j = 0; j < M; ++j) mid[j] = cplx(0.5L * (w[j] + v[j]));
      g = grad(mid);
      double diff = 0.0;
      for (std::size_t j = 0; j < M; ++j) {
        const Wide nv = w[j] + mi_dt * Wide(g[j]);
        const double d = static_cast<double>(std::abs(nv - v[j]));
        if (!(d <= diff)) diff = d;  // keeps NaN
        v[j] = nv;
      }
      if (!std::isfinite(diff)) throw IntegratorError("implicit midpoint iteration diverged");
      if (diff <= opt.fp_tol * scale || (diff >= prev && diff <= 1e-12 * scale)) break;
      if (it >= opt.fp_max_iter) throw IntegratorError("implicit midpoint iteration did not converge");
      prev = diff;
    }
    for (std::size_t j = 0; j < M; ++j) {
      w[j] = v[j] * rot[j];
      u[j] = cplx(w[j]);
    }

    const double m = mass(u);
    if (!std::isfinite(m) || m > 100.0 * m0) throw InstabilityError("norm grew beyond 10x its initial value at t = " + std::to_string(n * opt.dt));
    for (std::size_t j = 0; j < nrep; ++j) tr.max_drift[j] = std::max(tr.max_drift[j], std::abs(std::norm(u[j]) - I0[j]));
    if (n % opt.stride == 0 || n == steps) snapshot(n * opt.dt);
  }
  tr.final_state = u;
  tr.steps = steps;
  return tr;
}

DriftReport action_drift_report(const std::vector<double>& eps, const std::vector<Trajectory>& trajs, std::size_t N,
                                int p) {
  if (eps.size() != trajs.size()) throw ConfigError("one trajectory per eps required");
  DriftReport r;
  r.eps = eps;
  r.target = 2 * p + 2;
  std::vector<double> mx;
  for (const auto& t : trajs) {
    if (t.max_drift.size() < N) throw ConfigError("trajectory logs fewer actions than N");
    r.drift.emplace_back(t.max_drift.begin(), t.max_drift.begin() + N);
    mx.push_back(*std::max_element(r.drift.back().begin(), r.drift.back().end()));
  }
  for (std::size_t j = 0; j < N; ++j) {
    std::vector<double> y;
    for (const auto& d : r.drift) y.push_back(d[j]);
    r.fits.push_back(fit_power_law(eps, y));
  }
  r.max_fit = fit_power_law(eps, mx);
  return r;
}

double default_horizon(double eps) { return std::min(1.0 / (eps * eps), 1e4); }

State initial_data(std::size_t M, double eps, std::uint64_t seed, std::size_t support) {
  State u = birkhoff::unit_sample(M, seed, support);
  for (auto& z : u) z *= eps;
  return u;
}

State power_profile(std::size_t M, double eps, std::uint64_t seed, double decay) {
  const auto g = potential::gaussians(seed, 2 * M);
  State u(M);
  for (std::size_t j = 0; j < M; ++j) u[j] = std::polar(std::pow(j + 1.0, -decay), std::atan2(g[2 * j + 1], g[2 * j]));
  const double n = hampoly::h_half_norm(u);
  for (auto& z : u) z *= eps / n;
  return u;
}

double tail_proxy(const Nonlinearity& nl, std::span<const cplx> u, std::size_t m) {
  check_dim(nl, u);
  if (m >= nl.M) throw ConfigError("no tail modes above m");
  State low(u.begin(), u.end());
  std::fill(low.begin() + m, low.end(), cplx(0.0));
  const State a = nl.gradient(u);
  const State b = nl.gradient(low);
  double s = 0.0;
  for (std::size_t j = 0; j < nl.M; ++j) s += std::norm(a[j] - b[j]);
  return std::sqrt(s);
}

DriftRun drift_experiment(std::span<const double> evals, const Nonlinearity& nl, const std::vector<double>& eps,
                          std::uint64_t seed, std::size_t N, EvolveOptions opt, double T_override, unsigned threads) {
  if (eps.empty()) throw ConfigError("empty eps grid");
  opt.n_report = std::max(opt.n_report, N);
  DriftRun run;
  run.eps = eps;
  run.trajectories.resize(eps.size());
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers = std::min<unsigned>(threads == 0 ? hw : threads, static_cast<unsigned>(eps.size()));
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto work = [&] {
    for (std::size_t i; (i = next++) < eps.size();) {
      try {
        EvolveOptions o = opt;
        o.T = T_override > 0.0 ? T_override : default_horizon(eps[i]);
        run.trajectories[i] = evolve(initial_data(nl.M, eps[i], seed), evals, nl, o);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mu);
        if (!err) err = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
  run.report = action_drift_report(eps, run.trajectories, N, nl.p);
  return run;
}

}  // namespace qho::dynamics
