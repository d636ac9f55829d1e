#include "qho/potential.hpp"

#include <cmath>
#include <numbers>

#include "qho/error.hpp"

namespace qho::potential {
namespace {

const double kQuarter2 = std::pow(2.0, 0.25);

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform on (0, 1] from the counter-based stream splitmix64(key + counter).
double unit_open(std::uint64_t key, std::uint64_t counter) {
  return (static_cast<double>(splitmix64(key + counter) >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace

Weight power_weight(double exponent, std::size_t k_max) {
  Weight w;
  w.coeffs.resize(k_max);
  for (std::size_t k = 1; k <= k_max; ++k) w.coeffs[k - 1] = std::pow(1.0 + k, -exponent);
  w.label = "power";
  w.params = {{"exponent", exponent}, {"k_max", static_cast<double>(k_max)}};
  return w;
}

Weight zero_weight(std::size_t k_max) {
  Weight w;
  w.coeffs.assign(k_max, 0.0);
  w.label = "zero";
  w.params = {{"k_max", static_cast<double>(k_max)}};
  return w;
}

void validate(const Weight& w) {
  if (w.coeffs.empty()) throw ConfigError("weight has no coefficients");
  for (double c : w.coeffs)
    if (!std::isfinite(c) || c < 0.0) throw ConfigError("weight coefficients must be finite and nonnegative");
}

double h3_mass(const Weight& w) {
  double s = 0.0;
  for (std::size_t k = 1; k <= w.coeffs.size(); ++k) s += std::pow(japanese(k), 3.0) * w.coeffs[k - 1] * w.coeffs[k - 1];
  return s;
}

double Potential::operator()(double x) const {
  if (coeffs.empty()) return 0.0;
  std::vector<double> h(coeffs.size());
  hermite::values(x * std::numbers::sqrt2, h.size(), h.data());
  double s = 0.0;
  for (std::size_t k = 0; k < coeffs.size(); ++k) s += coeffs[k] * h[k];
  return kQuarter2 * s;
}

bool Potential::is_zero() const {
  for (double c : coeffs)
    if (c != 0.0) return false;
  return true;
}

Potential zero_potential(std::size_t k_max) {
  Potential p;
  p.coeffs.assign(k_max, 0.0);
  p.gaussians.assign(k_max, 0.0);
  p.weight_label = "zero";
  p.weight_params = {{"k_max", static_cast<double>(k_max)}};
  return p;
}

Potential from_coeffs(std::vector<double> coeffs) {
  Potential p;
  p.coeffs = std::move(coeffs);
  p.h1_norm = sobolev_norm(p.coeffs, 1.0);
  p.weight_label = "explicit";
  return p;
}

std::vector<double> gaussians(std::uint64_t seed, std::size_t n) {
  std::vector<double> g(n);
  const std::uint64_t key = splitmix64(seed ^ 0x5851f42d4c957f2dULL);
  for (std::size_t k = 1; k <= n; ++k) {
    const double u1 = unit_open(key, 2 * k);
    const double u2 = unit_open(key, 2 * k + 1);
    g[k - 1] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  return g;
}

Potential sample_potential(const Weight& weight, std::uint64_t seed) {
  validate(weight);
  Potential p;
  p.seed = seed;
  p.gaussians = gaussians(seed, weight.coeffs.size());
  p.coeffs.resize(weight.coeffs.size());
  for (std::size_t k = 0; k < p.coeffs.size(); ++k) p.coeffs[k] = p.gaussians[k] * weight.coeffs[k] / kQuarter2;
  p.h1_norm = sobolev_norm(p.coeffs, 1.0);
  p.weight_label = weight.label;
  p.weight_params = weight.params;
  return p;
}

double japanese(double k) { return std::sqrt(1.0 + k * k); }

double sobolev_norm(const std::vector<double>& coeffs, double s) {
  double acc = 0.0;
  for (std::size_t k = 1; k <= coeffs.size(); ++k) acc += std::pow(japanese(static_cast<double>(k)), s) * coeffs[k - 1] * coeffs[k - 1];
  return std::sqrt(acc);
}

double sobolev_norm(const Potential& p, double s) { return sobolev_norm(p.coeffs, s); }

double budget(int r, std::size_t N, double gamma_r) {
  if (r < 1 || N < 1 || !(gamma_r > 0.0)) throw ConfigError("budget needs r >= 1, N >= 1, gamma_r > 0");
  return gamma_r / (2.0 * r) * std::pow(static_cast<double>(N), -1.0 / 6.0) * (1.0 - 1e-9);
}

Potential scaled(const Potential& p, double factor) {
  Potential q = p;
  for (double& c : q.coeffs) c *= factor;
  q.h1_norm = sobolev_norm(q.coeffs, 1.0);
  return q;
}

Potential rescale_to_budget(const Potential& p, int r, std::size_t N, double gamma_r) {
  const double norm = sobolev_norm(p.coeffs, 1.0);
  if (!(norm > 0.0)) throw DegenerateInputError("cannot rescale a zero potential");
  return scaled(p, budget(r, N, gamma_r) / norm);
}

double continuum_norm(const Potential& p, const hermite::HermiteBasis& basis) {
  const std::size_t K = p.coeffs.size();
  if (basis.cap() < K + 1) throw ConfigError("basis cap too small for the potential derivative");
  if (!basis.exact_for_degree(2 * K + 2)) throw ConfigError("quadrature too coarse for the potential norm");
  const auto& t = basis.at_nodes();
  const auto& y = basis.nodes();
  const auto& w = basis.weights();
  double l2 = 0.0;
  double x2 = 0.0;
  double d2 = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    double v = 0.0;
    double dv = 0.0;
    for (std::size_t k = 1; k <= K; ++k) {
      const double c = p.coeffs[k - 1];
      v += c * t.at(k, i);
      double d = -std::sqrt(0.5 * k) * t.at(k + 1, i);
      if (k > 1) d += std::sqrt(0.5 * (k - 1.0)) * t.at(k - 1, i);
      dv += c * d;
    }
    v *= kQuarter2;
    dv *= kQuarter2 * std::numbers::sqrt2;
    l2 += w[i] * v * v;
    x2 += w[i] * 0.5 * y[i] * y[i] * v * v;
    d2 += w[i] * dv * dv;
  }
  const double jac = 1.0 / std::numbers::sqrt2;
  return std::sqrt(jac * (2.0 * l2 + x2 + d2));
}

}  // namespace qho::potential
