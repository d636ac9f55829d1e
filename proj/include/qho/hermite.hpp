#pragma once

#include <cstddef>
#include <span>
#include <vector>

// Hermite functions h_j, j >= 1, normalized in L^2 with (-d^2/dx^2 + x^2) h_j = (2j-1) h_j.
namespace qho::hermite {

// Gauss-Hermite rule in "function" form: sum_i weights[i] * f(nodes[i]) equals
// the integral of f over the real line whenever f = polynomial(deg <= 2n-1) * exp(-x^2).
// The weights already contain the factor exp(+x_i^2), so they never underflow.
struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};

Quadrature gauss_hermite(std::size_t n);

// h_1..h_count at a single point, stable for any |x|.
void values(double x, std::size_t count, double* out);
double value(std::size_t j, double x);

// h_1..h_count at many points, row-major by mode: at(j, i) = h_j(x_i).
class Table {
 public:
  Table() = default;
  Table(std::span<const double> xs, std::size_t count);

  std::size_t count() const { return count_; }
  std::size_t points() const { return npts_; }
  const double* row(std::size_t j) const { return data_.data() + (j - 1) * npts_; }
  double at(std::size_t j, std::size_t i) const { return data_[(j - 1) * npts_ + i]; }

 private:
  std::size_t count_ = 0;
  std::size_t npts_ = 0;
  std::vector<double> data_;
};

std::size_t min_quad_order(std::size_t cap);

// Rule for integrands whose Gaussian factor is exp(-m x^2): substituting x = y/sqrt(m)
// maps it onto the stored nodes. points[i] = y_i/sqrt(m), weights[i] = W_i/sqrt(m).
struct ProductRule {
  std::size_t m = 1;
  std::vector<double> points;
  std::vector<double> weights;
  Table values;
};

class HermiteBasis {
 public:
  HermiteBasis(std::size_t cap, std::size_t quad_order);

  std::size_t cap() const { return cap_; }
  std::size_t quad_order() const { return quad_.nodes.size(); }
  const std::vector<double>& nodes() const { return quad_.nodes; }
  const std::vector<double>& weights() const { return quad_.weights; }

  // h_j at the nodes.
  const Table& at_nodes() const { return table_; }
  // Four-fold products (Gaussian factor exp(-2x^2)); built once.
  const ProductRule& pair_rule() const { return pair_; }
  ProductRule product_rule(std::size_t m, std::size_t count) const;

  // True when the stored rule integrates poly(deg) * exp(-m x^2) exactly.
  bool exact_for_degree(std::size_t degree) const { return degree + 1 <= 2 * quad_order(); }

 private:
  std::size_t cap_;
  Quadrature quad_;
  Table table_;
  ProductRule pair_;
};

HermiteBasis build_basis(std::size_t cap, std::size_t quad_order);

double alpha(std::size_t j);

class MuTable {
 public:
  explicit MuTable(std::size_t j_max);

  std::size_t size() const { return j_max_; }
  // mu_{k,j} for 1 <= k <= j; zero for k > j.
  double operator()(std::size_t k, std::size_t j) const {
    return k > j ? 0.0 : entries_[(j - 1) * j / 2 + (k - 1)];
  }
  const std::vector<double>& alphas() const { return alpha_; }

 private:
  std::size_t j_max_;
  std::vector<double> alpha_;
  std::vector<double> entries_;
};

MuTable mu_table(std::size_t j_max);

double verify_eigenrelation(const HermiteBasis& basis, std::size_t j, double grid_step);

}  // namespace qho::hermite
