#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "qho/fit.hpp"
#include "qho/hermite.hpp"
#include "qho/potential.hpp"

// Galerkin eigenproblem for -d^2/dx^2 + x^2 + V in the Hermite basis h_1..h_D.
namespace qho::spectral {

inline constexpr double kMinGap = 1e-10;

struct Spectrum {
  std::size_t dim = 0;
  std::vector<double> evals;  // Lambda_1..Lambda_trusted, ascending
  Eigen::MatrixXd evecs;      // dim x trusted, column j-1 = coefficients of psi_j on h_1..h_dim
  bool sign_fixed = true;     // (psi_j, h_j) >= 0
  std::vector<std::string> warnings;

  std::size_t trusted() const { return evals.size(); }
};

std::size_t default_trust(std::size_t D);

// Basis able to assemble D modes against a potential with k_max coefficients.
hermite::HermiteBasis basis_for(std::size_t D, std::size_t k_max);

Eigen::MatrixXd assemble_operator(const hermite::HermiteBasis& basis, const potential::Potential& p, std::size_t D,
                                  double* symmetry_defect = nullptr);

Spectrum eigendecompose(const Eigen::MatrixXd& A, std::size_t D_trust);

Spectrum compute_spectrum(const hermite::HermiteBasis& basis, const potential::Potential& p, std::size_t D,
                          std::size_t D_trust = 0);

// max_{j <= D_trust} |Lambda_j(D) - Lambda_j(2D)|
double galerkin_convergence(const potential::Potential& p, std::size_t D, std::size_t D_trust = 0);

// max_j ||(A - Lambda_j) psi_j||_2 over reported modes
double eigen_residual(const Eigen::MatrixXd& A, const Spectrum& s);

// psi_j at the points of a Hermite table (table count must cover spec.dim).
std::vector<double> eigenfunction_values(const Spectrum& s, const hermite::Table& t, std::size_t j);

// d Lambda_j / d v_{2k-1} = int 2^{1/4} h_{2k-1}(x sqrt 2) psi_j^2 dx
double eigenvalue_gradient(const Spectrum& s, const hermite::HermiteBasis& basis, std::size_t j, std::size_t k);

struct DiagnosticRow {
  std::size_t j;
  double lambda;
  double gap;      // |Lambda_j - (2j - 1)|
  double l2_dist;  // ||psi_j - h_j|| on coefficients
  double l4_norm;  // (int psi_j^4)^{1/4}
};

struct Diagnostics {
  std::vector<DiagnosticRow> rows;
  PowerFit gap_fit;  // exponents reported as C * j^slope over j in [fit_from, trusted]
  PowerFit l2_fit;
  PowerFit l4_fit;
  std::size_t fit_from = 4;
  std::vector<double> l4_dyadic_means;  // blocks [1,2), [2,4), [4,8), ...
};

Diagnostics eigen_diagnostics(const Spectrum& s, const hermite::HermiteBasis& basis, std::size_t fit_from = 4);

}  // namespace qho::spectral
