#include "qho/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "qho/error.hpp"
#include "qho/kernels.hpp"

namespace qho::spectral {
namespace {

const double kQuarter2 = std::pow(2.0, 0.25);

}  // namespace

std::size_t default_trust(std::size_t D) { return D - D / 4; }

hermite::HermiteBasis basis_for(std::size_t D, std::size_t k_max) {
  const std::size_t cap = std::max(D, k_max);
  return hermite::build_basis(cap, hermite::min_quad_order(cap));
}

Eigen::MatrixXd assemble_operator(const hermite::HermiteBasis& basis, const potential::Potential& p, std::size_t D,
                                  double* symmetry_defect) {
  const std::size_t K = p.coeffs.size();
  if (D == 0 || D > basis.cap()) throw ConfigError("Galerkin dimension exceeds the basis cap");
  if (K > basis.cap()) throw ConfigError("potential has more coefficients than the basis cap");
  if (!basis.exact_for_degree(2 * (D - 1) + (K > 0 ? K - 1 : 0)))
    throw ConfigError("quadrature too coarse for the Galerkin assembly");

  const auto& k = kernels::active();
  const auto& rule = basis.pair_rule();
  const auto& nodes = basis.at_nodes();
  const std::size_t Q = basis.quad_order();

  // g_q = W_q/sqrt2 * V(y_q/sqrt2), with V(y/sqrt2) = 2^{1/4} sum_k v_k h_k(y).
  std::vector<double> g(Q, 0.0);
  for (std::size_t m = 1; m <= K; ++m)
    if (p.coeffs[m - 1] != 0.0) k.axpy(kQuarter2 * p.coeffs[m - 1], nodes.row(m), g.data(), Q);
  for (std::size_t q = 0; q < Q; ++q) g[q] *= rule.weights[q];

  const auto n = static_cast<Eigen::Index>(D);
  Eigen::MatrixXd A(n, n);
  for (std::size_t i = 1; i <= D; ++i)
    for (std::size_t j = 1; j <= D; ++j)
      A(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1)) =
          k.dot3(g.data(), rule.values.row(i), rule.values.row(j), Q);
  if (symmetry_defect) *symmetry_defect = (A - A.transpose()).cwiseAbs().maxCoeff();
  A = 0.5 * (A + A.transpose()).eval();
  for (Eigen::Index i = 0; i < n; ++i) A(i, i) += 2.0 * static_cast<double>(i) + 1.0;
  return A;
}

Spectrum eigendecompose(const Eigen::MatrixXd& A, std::size_t D_trust) {
  const auto D = static_cast<std::size_t>(A.rows());
  if (A.rows() != A.cols() || D == 0) throw ConfigError("operator matrix must be square and nonempty");
  if (D_trust == 0) D_trust = default_trust(D);
  if (D_trust > default_trust(D)) throw ConfigError("D_trust exceeds D minus the D/4 buffer");
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + A.cwiseAbs().maxCoeff()))
    throw ConfigError("operator matrix is not symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success) throw Error("eigensolver failed");
  Spectrum s;
  s.dim = D;
  s.evals.resize(D_trust);
  s.evecs = es.eigenvectors().leftCols(static_cast<Eigen::Index>(D_trust));
  for (std::size_t j = 0; j < D_trust; ++j) {
    s.evals[j] = es.eigenvalues()[static_cast<Eigen::Index>(j)];
    const auto c = static_cast<Eigen::Index>(j);
    if (s.evecs(c, c) < 0.0) s.evecs.col(c) *= -1.0;
  }
  for (std::size_t j = 0; j + 1 < D_trust; ++j) {
    const double gap = s.evals[j + 1] - s.evals[j];
    if (gap < kMinGap) throw MultiplicityError(j + 1, gap);
  }
  for (std::size_t j = 0; j < D_trust; ++j)
    if (std::abs(s.evals[j] - (2.0 * j + 1.0)) >= 1.0)
      s.warnings.push_back("|Lambda_" + std::to_string(j + 1) + " - " + std::to_string(2 * j + 1) +
                           "| >= 1: potential too large for eigenvalue separation");
  return s;
}

Spectrum compute_spectrum(const hermite::HermiteBasis& basis, const potential::Potential& p, std::size_t D,
                          std::size_t D_trust) {
  return eigendecompose(assemble_operator(basis, p, D), D_trust);
}

double galerkin_convergence(const potential::Potential& p, std::size_t D, std::size_t D_trust) {
  if (D_trust == 0) D_trust = default_trust(D);
  const auto basis = basis_for(2 * D, p.coeffs.size());
  const auto a = compute_spectrum(basis, p, D, D_trust);
  const auto b = compute_spectrum(basis, p, 2 * D, D_trust);
  double m = 0.0;
  for (std::size_t j = 0; j < D_trust; ++j) m = std::max(m, std::abs(a.evals[j] - b.evals[j]));
  return m;
}

double eigen_residual(const Eigen::MatrixXd& A, const Spectrum& s) {
  double m = 0.0;
  for (std::size_t j = 0; j < s.trusted(); ++j) {
    const auto c = static_cast<Eigen::Index>(j);
    m = std::max(m, (A * s.evecs.col(c) - s.evals[j] * s.evecs.col(c)).norm());
  }
  return m;
}

std::vector<double> eigenfunction_values(const Spectrum& s, const hermite::Table& t, std::size_t j) {
  if (j == 0 || j > s.trusted()) throw IndexError("eigenfunction index beyond the trusted spectrum");
  if (t.count() < s.dim) throw ConfigError("Hermite table shorter than the Galerkin dimension");
  const auto& k = kernels::active();
  std::vector<double> v(t.points(), 0.0);
  const auto c = static_cast<Eigen::Index>(j - 1);
  for (std::size_t n = 1; n <= s.dim; ++n) {
    const double a = s.evecs(static_cast<Eigen::Index>(n - 1), c);
    if (a != 0.0) k.axpy(a, t.row(n), v.data(), t.points());
  }
  return v;
}

double eigenvalue_gradient(const Spectrum& s, const hermite::HermiteBasis& basis, std::size_t j, std::size_t k) {
  if (j == 0 || j > s.trusted()) throw IndexError("gradient mode beyond the trusted spectrum");
  if (k == 0 || 2 * k - 1 > basis.cap()) throw IndexError("gradient coefficient beyond the basis cap");
  if (s.dim > basis.cap()) throw ConfigError("basis cap below the Galerkin dimension");
  if (!basis.exact_for_degree(2 * (s.dim - 1) + 2 * k - 2)) throw ConfigError("quadrature too coarse for the gradient");
  const auto& rule = basis.pair_rule();
  const auto psi = eigenfunction_values(s, rule.values, j);
  std::vector<double> w(psi.size());
  for (std::size_t q = 0; q < w.size(); ++q) w[q] = rule.weights[q] * psi[q];
  return kQuarter2 * kernels::active().dot3(w.data(), psi.data(), basis.at_nodes().row(2 * k - 1), w.size());
}

Diagnostics eigen_diagnostics(const Spectrum& s, const hermite::HermiteBasis& basis, std::size_t fit_from) {
  if (s.dim > basis.cap()) throw ConfigError("basis cap below the Galerkin dimension");
  if (!basis.exact_for_degree(4 * (s.dim - 1))) throw ConfigError("quadrature too coarse for L4 norms");
  const auto& rule = basis.pair_rule();
  Diagnostics d;
  d.fit_from = fit_from;
  for (std::size_t j = 1; j <= s.trusted(); ++j) {
    DiagnosticRow row{};
    row.j = j;
    row.lambda = s.evals[j - 1];
    row.gap = std::abs(row.lambda - (2.0 * j - 1.0));
    const auto c = static_cast<Eigen::Index>(j - 1);
    double l2 = 0.0;
    for (std::size_t n = 1; n <= s.dim; ++n) {
      const double e = s.evecs(static_cast<Eigen::Index>(n - 1), c) - (n == j ? 1.0 : 0.0);
      l2 += e * e;
    }
    row.l2_dist = std::sqrt(l2);
    const auto psi = eigenfunction_values(s, rule.values, j);
    double l4 = 0.0;
    for (std::size_t q = 0; q < psi.size(); ++q) l4 += rule.weights[q] * psi[q] * psi[q] * psi[q] * psi[q];
    row.l4_norm = std::pow(l4, 0.25);
    d.rows.push_back(row);
  }
  std::vector<double> js, gaps, l2s, l4s;
  for (const auto& r : d.rows) {
    if (r.j < fit_from) continue;
    js.push_back(static_cast<double>(r.j));
    gaps.push_back(r.gap);
    l2s.push_back(r.l2_dist);
    l4s.push_back(r.l4_norm);
  }
  d.gap_fit = fit_power_law(js, gaps);
  d.l2_fit = fit_power_law(js, l2s);
  d.l4_fit = fit_power_law(js, l4s);
  for (std::size_t lo = 1; lo <= s.trusted(); lo *= 2) {
    const std::size_t hi = std::min(2 * lo, s.trusted() + 1);
    double sum = 0.0;
    for (std::size_t j = lo; j < hi; ++j) sum += d.rows[j - 1].l4_norm;
    d.l4_dyadic_means.push_back(sum / static_cast<double>(hi - lo));
  }
  return d;
}

}  // namespace qho::spectral
