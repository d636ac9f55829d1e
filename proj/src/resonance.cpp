#include "qho/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>

#include "qho/error.hpp"

namespace qho::resonance {
namespace {

class Enumerator {
 public:
  Enumerator(int r, std::size_t N, std::size_t j_cap, const std::function<void(const Tuple&)>& visit)
      : r_(r), N_(N), cap_(j_cap), visit_(visit) {}

  void run() {
    for (int rs = 1; rs <= r_; ++rs) {
      t_.j.assign(static_cast<std::size_t>(rs), 0);
      t_.sigma.assign(static_cast<std::size_t>(rs), 0);
      indices(0, 1);
    }
  }

 private:
  void indices(std::size_t pos, std::size_t lo) {
    if (pos == t_.j.size()) {
      signs(0, r_);
      return;
    }
    const std::size_t hi = pos == 0 ? std::min(N_, cap_) : cap_;
    for (std::size_t v = lo; v <= hi; ++v) {
      t_.j[pos] = v;
      indices(pos + 1, v + 1);
    }
  }

  void signs(std::size_t pos, int budget) {
    if (pos == t_.sigma.size()) {
      visit_(t_);
      return;
    }
    const int m = budget - static_cast<int>(t_.sigma.size() - pos - 1);
    for (int s = -m; s <= m; ++s) {
      if (s == 0) continue;
      t_.sigma[pos] = s;
      signs(pos + 1, budget - std::abs(s));
    }
  }

  int r_;
  std::size_t N_;
  std::size_t cap_;
  const std::function<void(const Tuple&)>& visit_;
  Tuple t_;
};

void check_range(std::span<const double> evals, std::size_t j_cap) {
  if (evals.size() < j_cap) throw IndexError("frequencies not available up to j_cap");
}

double mu_combo(const Tuple& t, std::size_t k, const hermite::MuTable& mu) {
  double s = 0.0;
  for (std::size_t n = 0; n < t.r_star(); ++n) s += t.sigma[n] * mu(k, t.j[n]);
  return s;
}

}  // namespace

int Tuple::weight() const {
  int w = 0;
  for (int s : sigma) w += std::abs(s);
  return w;
}

bool Tuple::valid(int r) const {
  if (j.empty() || j.size() != sigma.size() || weight() > r) return false;
  for (std::size_t n = 0; n < j.size(); ++n) {
    if (sigma[n] == 0 || j[n] == 0) return false;
    if (n > 0 && j[n] <= j[n - 1]) return false;
  }
  return true;
}

double omega(std::span<const double> evals, const Tuple& t) {
  double s = 0.0;
  for (std::size_t n = 0; n < t.r_star(); ++n) {
    if (t.j[n] == 0 || t.j[n] > evals.size()) throw IndexError("tuple index beyond the trusted spectrum");
    s += t.sigma[n] * evals[t.j[n] - 1];
  }
  return s;
}

double omega(std::span<const double> evals, std::span<const std::size_t> j, std::span<const std::size_t> l) {
  double s = 0.0;
  for (auto a : j) {
    if (a == 0 || a > evals.size()) throw IndexError("index beyond the trusted spectrum");
    s += evals[a - 1];
  }
  for (auto b : l) {
    if (b == 0 || b > evals.size()) throw IndexError("index beyond the trusted spectrum");
    s -= evals[b - 1];
  }
  return s;
}

std::size_t kappa(std::span<const std::size_t> j, std::span<const std::size_t> l) {
  std::map<std::size_t, int> net;
  for (auto a : j) ++net[a];
  for (auto b : l) --net[b];
  for (const auto& [idx, m] : net)
    if (m != 0) return idx;
  return kInfinity;
}

void enumerate_tuples(int r, std::size_t N, std::size_t j_cap, const std::function<void(const Tuple&)>& visit) {
  if (r < 1 || N < 1) throw ConfigError("enumeration needs r >= 1 and N >= 1");
  if (j_cap < N) throw ConfigError("j_cap must be at least N");
  Enumerator(r, N, j_cap, visit).run();
}

std::uint64_t count_tuples(int r, std::size_t N, std::size_t j_cap) {
  std::uint64_t n = 0;
  enumerate_tuples(r, N, j_cap, [&](const Tuple&) { ++n; });
  return n;
}

Certificate certify(std::span<const double> evals, int r, std::size_t N, std::size_t j_cap) {
  check_range(evals, j_cap);
  Certificate c;
  c.r = r;
  c.N = N;
  c.j_max_scanned = j_cap;
  c.beta = std::numeric_limits<double>::infinity();
  c.scaled_margin = std::numeric_limits<double>::infinity();
  enumerate_tuples(r, N, j_cap, [&](const Tuple& t) {
    ++c.count;
    const double w = std::abs(omega(evals, t));
    if (w < c.beta) {
      c.beta = w;
      c.argmin = t;
    }
    const double scaled = w * std::pow(static_cast<double>(t.j.back()), 2.0 * static_cast<double>(t.r_star()));
    if (scaled < c.scaled_margin) {
      c.scaled_margin = scaled;
      c.scaled_argmin = t;
    }
  });
  c.resonant = c.beta <= kResonanceTol;
  return c;
}

WeakScan weak_scan(std::span<const double> evals, int r, std::size_t N, std::size_t j_cap) {
  check_range(evals, j_cap);
  WeakScan w;
  w.min_shifted = std::numeric_limits<double>::infinity();
  w.scaled = std::numeric_limits<double>::infinity();
  enumerate_tuples(r, N, j_cap, [&](const Tuple& t) {
    ++w.count;
    const double om = omega(evals, t);
    const double jp = std::pow(static_cast<double>(t.j.back()), 2.0 * static_cast<double>(t.r_star()));
    for (int k = -4 * r; k <= 4 * r; ++k) {
      const double d = std::abs(k + om);
      if (d < w.min_shifted) {
        w.min_shifted = d;
        w.argmin = t;
        w.shift = k;
      }
      w.scaled = std::min(w.scaled, d * jp);
    }
  });
  return w;
}

std::size_t gamma_k_cap(std::size_t j1) { return std::max<std::size_t>(8, 4 * j1); }

std::size_t selected_k(const Tuple& t, const hermite::MuTable& mu) {
  std::size_t best_k = 1;
  double best = -1.0;
  for (std::size_t k = 1; k <= gamma_k_cap(t.j.front()); ++k) {
    const double v = std::abs(mu_combo(t, k, mu));
    if (v > best) {
      best = v;
      best_k = k;
    }
  }
  return best_k;
}

GammaEstimate estimate_gamma_r(int r, std::size_t j1_max, std::size_t j_cap, const hermite::MuTable& mu) {
  if (mu.size() < j_cap) throw ConfigError("mu table does not cover j_cap");
  GammaEstimate g;
  g.gamma = std::numeric_limits<double>::infinity();
  enumerate_tuples(r, j1_max, j_cap, [&](const Tuple& t) {
    ++g.count;
    const std::size_t k = selected_k(t, mu);
    if (k == gamma_k_cap(t.j.front())) g.k_cap_hit = true;
    const double v = std::abs(mu_combo(t, k, mu)) * std::pow(static_cast<double>(t.j.front()), 0.25);
    if (v < g.gamma) {
      g.gamma = v;
      g.argmin = t;
      g.k_at_argmin = k;
    }
  });
  return g;
}

ChainReport derivative_chain(const spectral::Spectrum& s, const hermite::HermiteBasis& basis, int r, std::size_t j1_max,
                             std::size_t j_cap, double gamma, const hermite::MuTable& mu) {
  if (j_cap > s.trusted()) throw IndexError("j_cap beyond the trusted spectrum");
  if (mu.size() < j_cap) throw ConfigError("mu table does not cover j_cap");
  const std::size_t kmax = gamma_k_cap(j1_max);
  std::vector<double> grad(j_cap * kmax, std::numeric_limits<double>::quiet_NaN());
  auto dlambda = [&](std::size_t j, std::size_t k) {
    double& g = grad[(j - 1) * kmax + (k - 1)];
    if (std::isnan(g)) g = spectral::eigenvalue_gradient(s, basis, j, k);
    return g;
  };
  ChainReport rep;
  rep.worst_ratio = std::numeric_limits<double>::infinity();
  enumerate_tuples(r, j1_max, j_cap, [&](const Tuple& t) {
    const std::size_t k = selected_k(t, mu);
    double d = 0.0;
    for (std::size_t n = 0; n < t.r_star(); ++n) d += t.sigma[n] * dlambda(t.j[n], k);
    const double ratio = std::abs(d) / (gamma * std::pow(static_cast<double>(t.j.front()), -0.25));
    ++rep.checked;
    if (ratio < 0.5) ++rep.failures;
    if (ratio < rep.worst_ratio) {
      rep.worst_ratio = ratio;
      rep.worst = t;
    }
  });
  return rep;
}

}  // namespace qho::resonance
