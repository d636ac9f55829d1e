#include "qho/hampoly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "qho/error.hpp"

namespace qho::hampoly {
namespace {

constexpr cplx kI{0.0, 1.0};

struct KeyHash {
  std::size_t operator()(const Key& k) const {
    std::uint64_t h = 1469598103934665603ULL;
    for (auto v : k) {
      h ^= v;
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double half_multiplicity(const std::uint16_t* a, int r) {
  double m = factorial(r);
  int run = 1;
  for (int i = 1; i <= r; ++i) {
    if (i < r && a[i] == a[i - 1]) {
      ++run;
    } else {
      m /= factorial(run);
      run = 1;
    }
  }
  return m;
}

void check_half_degree(int r) {
  if (r < 1 || r > kMaxHalfDegree) throw ConfigError("half-degree must lie in [1, 5]");
}

// Sorted multiset union of a and b with one occurrence of `drop` removed from a (drop_in_a) or from b.
int merge_drop(const std::uint16_t* a, int na, const std::uint16_t* b, int nb, std::uint16_t drop, bool drop_in_a,
               std::uint16_t* out) {
  std::uint16_t tmp[2 * kMaxHalfDegree];
  int n = 0;
  bool dropped = false;
  for (int i = 0; i < na; ++i) {
    if (drop_in_a && !dropped && a[i] == drop) {
      dropped = true;
      continue;
    }
    tmp[n++] = a[i];
  }
  for (int i = 0; i < nb; ++i) {
    if (!drop_in_a && !dropped && b[i] == drop) {
      dropped = true;
      continue;
    }
    tmp[n++] = b[i];
  }
  std::sort(tmp, tmp + n);
  std::copy(tmp, tmp + n, out);
  return n;
}

struct Entry {
  const Key* key;
  cplx a;  // per-tuple coefficient times orbit multiplicity
};

// Distinct indices with their counts in a sorted run.
template <class F>
void for_each_distinct(const std::uint16_t* a, int n, F&& f) {
  int i = 0;
  while (i < n) {
    int k = i;
    while (k < n && a[k] == a[i]) ++k;
    f(a[i], k - i);
    i = k;
  }
}

HamPoly bracket_raw(const HamPoly& h, const HamPoly& k) {
  const int r1 = h.half_degree(), r2 = k.half_degree();
  const int ro = r1 + r2 - 1;
  check_half_degree(ro);
  const std::size_t M = h.modes();
  HamPoly out(M, ro);
  if (h.empty() || k.empty()) return out;

  std::vector<Entry> ek;
  ek.reserve(k.size());
  for (const auto& [key, c] : k.coeffs()) ek.push_back({&key, c * multiplicity(r2, key)});
  std::vector<std::vector<std::pair<std::uint32_t, int>>> by_j(M + 1), by_l(M + 1);
  for (std::uint32_t b = 0; b < ek.size(); ++b) {
    const auto* kb = ek[b].key->data();
    for_each_distinct(kb, r2, [&](std::uint16_t q, int cnt) { by_j[q].push_back({b, cnt}); });
    for_each_distinct(kb + r2, r2, [&](std::uint16_t q, int cnt) { by_l[q].push_back({b, cnt}); });
  }

  std::unordered_map<Key, cplx, KeyHash> acc;
  Key nk{};
  for (const auto& [key_a, ca] : h.coeffs()) {
    const cplx a = ca * multiplicity(r1, key_a);
    const auto* ja = key_a.data();
    const auto* la = key_a.data() + r1;
    // beta_q gamma_q terms: q in l_A, q in j_B
    for_each_distinct(la, r1, [&](std::uint16_t q, int beta) {
      for (const auto& [b, gamma] : by_j[q]) {
        const auto* kb = ek[b].key->data();
        nk.fill(0);
        merge_drop(ja, r1, kb, r2, q, false, nk.data());
        merge_drop(la, r1, kb + r2, r2, q, true, nk.data() + ro);
        acc[nk] += (2.0 * beta * gamma) * kI * a * ek[b].a;
      }
    });
    // alpha_q delta_q terms: q in j_A, q in l_B
    for_each_distinct(ja, r1, [&](std::uint16_t q, int alpha) {
      for (const auto& [b, delta] : by_l[q]) {
        const auto* kb = ek[b].key->data();
        nk.fill(0);
        merge_drop(ja, r1, kb, r2, q, true, nk.data());
        merge_drop(la, r1, kb + r2, r2, q, false, nk.data() + ro);
        acc[nk] -= (2.0 * alpha * delta) * kI * a * ek[b].a;
      }
    });
  }
  for (const auto& [key, c] : acc)
    if (c != cplx(0.0, 0.0)) out.set(key, c / multiplicity(ro, key));
  out.symmetrize();
  out.prune(0.0);
  return out;
}

// Total order on polynomials used to fix the argument order of the bracket.
int compare(const HamPoly& a, const HamPoly& b) {
  if (a.half_degree() != b.half_degree()) return a.half_degree() < b.half_degree() ? -1 : 1;
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  auto ia = a.coeffs().begin();
  auto ib = b.coeffs().begin();
  for (; ia != a.coeffs().end(); ++ia, ++ib) {
    if (ia->first != ib->first) return ia->first < ib->first ? -1 : 1;
    if (ia->second.real() != ib->second.real()) return ia->second.real() < ib->second.real() ? -1 : 1;
    if (ia->second.imag() != ib->second.imag()) return ia->second.imag() < ib->second.imag() ? -1 : 1;
  }
  return 0;
}

}  // namespace

Key make_key(int r, std::span<const std::size_t> j, std::span<const std::size_t> l) {
  check_half_degree(r);
  if (j.size() != static_cast<std::size_t>(r) || l.size() != static_cast<std::size_t>(r))
    throw ConfigError("multi-index length does not match the half-degree");
  Key k{};
  for (int n = 0; n < r; ++n) {
    if (j[n] == 0 || l[n] == 0 || j[n] > kMaxModes || l[n] > kMaxModes) throw IndexError("mode index out of range");
    k[n] = static_cast<std::uint16_t>(j[n]);
    k[r + n] = static_cast<std::uint16_t>(l[n]);
  }
  std::sort(k.begin(), k.begin() + r);
  std::sort(k.begin() + r, k.begin() + 2 * r);
  return k;
}

Orbit unpack(int r, const Key& k) {
  Orbit o;
  o.j.assign(k.begin(), k.begin() + r);
  o.l.assign(k.begin() + r, k.begin() + 2 * r);
  return o;
}

Key conjugate_key(int r, const Key& k) {
  Key c{};
  std::copy(k.begin() + r, k.begin() + 2 * r, c.begin());
  std::copy(k.begin(), k.begin() + r, c.begin() + r);
  return c;
}

double multiplicity(int r, const Key& k) { return half_multiplicity(k.data(), r) * half_multiplicity(k.data() + r, r); }

HamPoly::HamPoly(std::size_t M, int r) : M_(M), r_(r) {
  check_half_degree(r);
  if (M == 0 || M > kMaxModes) throw ConfigError("mode count must lie in [1, 256]");
}

void HamPoly::insert(std::span<const std::size_t> j, std::span<const std::size_t> l, cplx c) {
  const Key k = make_key(r_, j, l);
  for (int n = 0; n < 2 * r_; ++n)
    if (k[n] > M_) throw IndexError("mode index beyond M");
  const Key ck = conjugate_key(r_, k);
  if (ck == k) {
    if (std::abs(c.imag()) > 1e-14 * std::abs(c)) throw ConfigError("self-conjugate orbit needs a real coefficient");
    add(k, c.real());
  } else {
    add(k, c);
    add(ck, std::conj(c));
  }
}

cplx HamPoly::get(std::span<const std::size_t> j, std::span<const std::size_t> l) const { return at(make_key(r_, j, l)); }

cplx HamPoly::at(const Key& k) const {
  auto it = coeffs_.find(k);
  return it == coeffs_.end() ? cplx{} : it->second;
}

void HamPoly::set(const Key& k, cplx c) {
  if (c == cplx(0.0, 0.0))
    coeffs_.erase(k);
  else
    coeffs_[k] = c;
}

void HamPoly::add(const Key& k, cplx c) {
  if (c == cplx(0.0, 0.0)) return;
  auto [it, fresh] = coeffs_.try_emplace(k, c);
  if (!fresh) {
    it->second += c;
    if (it->second == cplx(0.0, 0.0)) coeffs_.erase(it);
  }
}

void HamPoly::add_scaled(const HamPoly& other, double s) {
  if (other.M_ != M_ || other.r_ != r_) throw ConfigError("adding polynomials of different shape");
  for (const auto& [k, c] : other.coeffs_) add(k, s * c);
}

HamPoly HamPoly::scaled(double s) const {
  HamPoly h(M_, r_);
  if (s == 0.0) return h;
  for (const auto& [k, c] : coeffs_) h.coeffs_.emplace_hint(h.coeffs_.end(), k, s * c);
  return h;
}

void HamPoly::prune(double tol) {
  std::erase_if(coeffs_, [&](const auto& kv) { return std::abs(kv.second) <= tol; });
}

void HamPoly::symmetrize() {
  std::vector<std::pair<Key, cplx>> updates;
  for (const auto& [k, c] : coeffs_) {
    const Key ck = conjugate_key(r_, k);
    if (ck == k) {
      if (c.imag() != 0.0) updates.push_back({k, c.real()});
    } else if (k < ck) {
      const cplx avg = 0.5 * (c + std::conj(at(ck)));
      updates.push_back({k, avg});
      updates.push_back({ck, std::conj(avg)});
    } else if (!coeffs_.contains(ck)) {
      const cplx avg = 0.5 * c;
      updates.push_back({k, avg});
      updates.push_back({ck, std::conj(avg)});
    }
  }
  for (const auto& [k, c] : updates) set(k, c);
}

bool HamPoly::is_real(double tol) const {
  for (const auto& [k, c] : coeffs_)
    if (std::abs(c - std::conj(at(conjugate_key(r_, k)))) > tol) return false;
  return true;
}

cplx HamPoly::evaluate_complex(std::span<const cplx> u) const {
  if (u.size() != M_) throw ConfigError("state dimension does not match the polynomial");
  cplx s{};
  for (const auto& [k, c] : coeffs_) {
    cplx m = c * multiplicity(r_, k);
    for (int n = 0; n < r_; ++n) m *= u[k[n] - 1];
    for (int n = r_; n < 2 * r_; ++n) m *= std::conj(u[k[n] - 1]);
    s += m;
  }
  return s;
}

double HamPoly::evaluate(std::span<const cplx> u) const {
  if (u.size() != M_) throw ConfigError("state dimension does not match the polynomial");
  cplx v{};
  double mag = 0.0;
  for (const auto& [k, c] : coeffs_) {
    cplx m = c * multiplicity(r_, k);
    for (int n = 0; n < r_; ++n) m *= u[k[n] - 1];
    for (int n = r_; n < 2 * r_; ++n) m *= std::conj(u[k[n] - 1]);
    v += m;
    mag += std::abs(m);
  }
  if (std::abs(v.imag()) > 1e-12 * mag) throw Error("polynomial evaluation is not real");
  return v.real();
}

State HamPoly::gradient(std::span<const cplx> u) const {
  if (u.size() != M_) throw ConfigError("state dimension does not match the polynomial");
  State g(M_);
  for (const auto& [k, c] : coeffs_) {
    const cplx a = 2.0 * c * multiplicity(r_, k);
    cplx pu = a;
    for (int n = 0; n < r_; ++n) pu *= u[k[n] - 1];
    for_each_distinct(k.data() + r_, r_, [&](std::uint16_t q, int beta) {
      cplx m = pu * static_cast<double>(beta);
      bool skipped = false;
      for (int n = r_; n < 2 * r_; ++n) {
        if (!skipped && k[n] == q) {
          skipped = true;
          continue;
        }
        m *= std::conj(u[k[n] - 1]);
      }
      g[q - 1] += m;
    });
  }
  return g;
}

HamPoly HamPoly::filter(const std::function<bool(const Orbit&)>& keep) const {
  HamPoly h(M_, r_);
  for (const auto& [k, c] : coeffs_)
    if (keep(unpack(r_, k))) h.coeffs_.emplace_hint(h.coeffs_.end(), k, c);
  return h;
}

HamPoly poisson(const HamPoly& h, const HamPoly& k) {
  if (h.modes() != k.modes()) throw ConfigError("bracket of polynomials on different mode counts");
  const int c = compare(h, k);
  if (c == 0) return HamPoly(h.modes(), h.half_degree() + k.half_degree() - 1);
  if (c < 0) return bracket_raw(h, k);
  return bracket_raw(k, h).scaled(-1.0);
}

double h_norm(const HamPoly& h) {
  double m = 0.0;
  for (const auto& [k, c] : h.coeffs()) m = std::max(m, std::abs(c));
  return m;
}

double c_norm(const HamPoly& h) {
  const int r = h.half_degree();
  double m = 0.0;
  for (const auto& [k, c] : h.coeffs()) {
    double d = 0.0;
    for (int n = 0; n < r; ++n) d += static_cast<double>(k[n]) - static_cast<double>(k[r + n]);
    m = std::max(m, std::abs(c) * std::sqrt(1.0 + d * d));
  }
  return m;
}

bool commutes_with_action(const HamPoly& h, std::size_t q) {
  const int r = h.half_degree();
  for (const auto& [k, c] : h.coeffs()) {
    if (c == cplx(0.0, 0.0)) continue;
    int net = 0;
    for (int n = 0; n < r; ++n) net += (k[n] == q) - (k[r + n] == q);
    if (net != 0) return false;
  }
  return true;
}

HamPoly z2(std::span<const double> w) {
  HamPoly h(w.size(), 1);
  for (std::size_t q = 1; q <= w.size(); ++q) {
    const std::size_t idx[1] = {q};
    h.insert(idx, idx, 0.5 * w[q - 1]);
  }
  return h;
}

HamPoly action(std::size_t M, std::size_t q) {
  if (q == 0 || q > M) throw IndexError("action index beyond M");
  HamPoly h(M, 1);
  const std::size_t idx[1] = {q};
  h.insert(idx, idx, 1.0);
  return h;
}

double h_half_norm(std::span<const cplx> u) {
  double s = 0.0;
  for (std::size_t k = 1; k <= u.size(); ++k) s += std::sqrt(1.0 + static_cast<double>(k * k)) * std::norm(u[k - 1]);
  return std::sqrt(s);
}

std::size_t kappa_of(int r, const Key& k) {
  std::uint16_t best = 0;
  for (int n = 0; n < 2 * r; ++n) {
    const std::uint16_t q = k[n];
    if (best != 0 && q >= best) continue;
    int net = 0;
    for (int m = 0; m < r; ++m) net += (k[m] == q) - (k[r + m] == q);
    if (net != 0) best = q;
  }
  return best == 0 ? std::numeric_limits<std::size_t>::max() : best;
}

double omega_of(int r, const Key& k, std::span<const double> w) {
  double s = 0.0;
  for (int n = 0; n < r; ++n) s += w[k[n] - 1] - w[k[r + n] - 1];
  return s;
}

}  // namespace qho::hampoly
