#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "qho/hermite.hpp"
#include "qho/spectral.hpp"

// Small divisors Omega = sum sigma_n Lambda_{j_n}, their enumeration and empirical lower bounds.
namespace qho::resonance {

inline constexpr std::size_t kInfinity = std::numeric_limits<std::size_t>::max();
inline constexpr double kResonanceTol = 1e-12;

// sigma in (Z*)^{r*}, j strictly increasing, 1-based.
struct Tuple {
  std::vector<int> sigma;
  std::vector<std::size_t> j;

  std::size_t r_star() const { return j.size(); }
  int weight() const;  // |sigma_1| + ... + |sigma_{r*}|
  bool valid(int r) const;
};

double omega(std::span<const double> evals, const Tuple& t);
// sum Lambda_{j_n} - sum Lambda_{l_n}
double omega(std::span<const double> evals, std::span<const std::size_t> j, std::span<const std::size_t> l);

// Least index with nonzero net multiplicity between j and l; kInfinity if they are equal as multisets.
std::size_t kappa(std::span<const std::size_t> j, std::span<const std::size_t> l);

// Every tuple with r* <= r, j_1 <= N, j_{r*} <= j_cap, |sigma|_1 <= r, in lexicographic order on (r*, j, sigma).
void enumerate_tuples(int r, std::size_t N, std::size_t j_cap, const std::function<void(const Tuple&)>& visit);
std::uint64_t count_tuples(int r, std::size_t N, std::size_t j_cap);

struct Certificate {
  int r = 0;
  std::size_t N = 0;
  std::size_t j_max_scanned = 0;
  double beta = 0.0;
  Tuple argmin;
  std::uint64_t count = 0;
  double scaled_margin = 0.0;  // min |Omega| j_{r*}^{2 r*}
  Tuple scaled_argmin;
  bool resonant = false;       // beta <= kResonanceTol
};

Certificate certify(std::span<const double> evals, int r, std::size_t N, std::size_t j_cap);

// min over tuples and integer shifts k in [-4r, 4r] of |k + Omega|, raw and scaled by j_{r*}^{2 r*}.
struct WeakScan {
  double min_shifted = 0.0;
  double scaled = 0.0;
  Tuple argmin;
  int shift = 0;
  std::uint64_t count = 0;
};

WeakScan weak_scan(std::span<const double> evals, int r, std::size_t N, std::size_t j_cap);

// Largest k examined for a tuple with leading index j_1.
std::size_t gamma_k_cap(std::size_t j1);

struct GammaEstimate {
  double gamma = 0.0;
  Tuple argmin;
  std::size_t k_at_argmin = 0;
  bool k_cap_hit = false;  // some tuple was maximized at its k cap
  std::uint64_t count = 0;
};

// min over tuples (j_1 <= j1_max, j_{r*} <= j_cap) of max_{k <= gamma_k_cap(j_1)} |sum sigma_n mu_{k,j_n}| j_1^{1/4}.
GammaEstimate estimate_gamma_r(int r, std::size_t j1_max, std::size_t j_cap, const hermite::MuTable& mu);

// k maximizing |sum sigma_n mu_{k,j_n}| over k <= gamma_k_cap(j_1).
std::size_t selected_k(const Tuple& t, const hermite::MuTable& mu);

struct ChainReport {
  std::uint64_t checked = 0;
  std::uint64_t failures = 0;
  double worst_ratio = 0.0;  // min |d Omega| / (gamma j_1^{-1/4})
  Tuple worst;
};

// |d Omega / d v_{2k-1}| at the selected k against 0.5 gamma j_1^{-1/4}, for every tuple in range.
ChainReport derivative_chain(const spectral::Spectrum& s, const hermite::HermiteBasis& basis, int r, std::size_t j1_max,
                             std::size_t j_cap, double gamma, const hermite::MuTable& mu);

}  // namespace qho::resonance
