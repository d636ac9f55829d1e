#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qho/hermite.hpp"

// Potentials V(x) = sum_k v_k 2^{1/4} h_k(x sqrt 2), coefficients on an L^2-orthonormal family.
namespace qho::potential {

struct Weight {
  std::vector<double> coeffs;  // P_k, k = 1..K
  std::string label;
  std::map<std::string, double> params;
};

// P_k = (1 + k)^{-exponent}, k = 1..k_max.
Weight power_weight(double exponent = 3.0, std::size_t k_max = 64);
Weight zero_weight(std::size_t k_max = 64);
void validate(const Weight& w);
// sum_k <k>^3 P_k^2
double h3_mass(const Weight& w);

struct Potential {
  std::vector<double> coeffs;
  std::uint64_t seed = 0;
  std::vector<double> gaussians;
  double h1_norm = 0.0;
  std::string weight_label;
  std::map<std::string, double> weight_params;

  double operator()(double x) const;
  bool is_zero() const;
};

Potential zero_potential(std::size_t k_max = 64);
Potential from_coeffs(std::vector<double> coeffs);

// Standard normal draws g_1..g_n, reproducible per (seed, k) independently of n.
std::vector<double> gaussians(std::uint64_t seed, std::size_t n);

Potential sample_potential(const Weight& weight, std::uint64_t seed);

double japanese(double k);
// (sum_k <k>^s v_k^2)^{1/2}
double sobolev_norm(const Potential& p, double s);
double sobolev_norm(const std::vector<double>& coeffs, double s);

double budget(int r, std::size_t N, double gamma_r);
Potential rescale_to_budget(const Potential& p, int r, std::size_t N, double gamma_r);
Potential scaled(const Potential& p, double factor);

// Quadrature value of (||V||_{H^1}^2 + ||<x> V||_{L^2}^2)^{1/2}; basis cap must exceed the coefficient count.
double continuum_norm(const Potential& p, const hermite::HermiteBasis& basis);

}  // namespace qho::potential
