#include "qho/hermite.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "qho/error.hpp"
#include "qho/kernels.hpp"

namespace qho::hermite {
namespace {

const double kPiQuarterInv = std::pow(std::numbers::pi, -0.25);
constexpr double kRescale = 1e100;
const double kLogRescale = std::log(kRescale);

// Three-term recurrence with a running log scale: true h_m = value * exp(logscale).
// visit(m, value, logscale) is called for m = 0..count-1 (0-based).
template <class Visit>
void scaled_recurrence(double x, std::size_t count, Visit&& visit) {
  if (count == 0) return;
  double s = -0.5 * x * x;
  double a = kPiQuarterInv;
  visit(std::size_t{0}, a, s);
  if (count == 1) return;
  double b = std::numbers::sqrt2 * x * a;
  visit(std::size_t{1}, b, s);
  for (std::size_t m = 2; m < count; ++m) {
    const double c = std::sqrt(2.0 / m) * x * b - std::sqrt((m - 1.0) / m) * a;
    a = b;
    b = c;
    if (std::abs(b) > kRescale) {
      a /= kRescale;
      b /= kRescale;
      s += kLogRescale;
    }
    visit(m, b, s);
  }
}

double unscale(double v, double s) {
  if (v == 0.0) return 0.0;
  return std::copysign(std::exp(std::log(std::abs(v)) + s), v);
}

}  // namespace

void values(double x, std::size_t count, double* out) {
  if (std::abs(x) <= kernels::kHermiteDirectLimit) {
    kernels::scalar().hermite_block(&x, 1, count, out, 1);
    return;
  }
  scaled_recurrence(x, count, [&](std::size_t m, double v, double s) { out[m] = unscale(v, s); });
}

double value(std::size_t j, double x) {
  if (j == 0) throw IndexError("Hermite index starts at 1");
  std::vector<double> buf(j);
  values(x, j, buf.data());
  return buf[j - 1];
}

Quadrature gauss_hermite(std::size_t n) {
  if (n == 0) throw ConfigError("quadrature order must be positive");
  Quadrature q;
  q.nodes.resize(n);
  q.weights.resize(n);
  if (n == 1) {
    q.nodes[0] = 0.0;
    q.weights[0] = std::sqrt(std::numbers::pi);
    return q;
  }
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  Eigen::VectorXd sub(static_cast<Eigen::Index>(n - 1));
  for (std::size_t k = 1; k < n; ++k) sub[static_cast<Eigen::Index>(k - 1)] = std::sqrt(0.5 * k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  for (std::size_t i = 0; i < n; ++i) q.nodes[i] = es.eigenvalues()[static_cast<Eigen::Index>(i)];
  std::sort(q.nodes.begin(), q.nodes.end());

  // Newton polish on h_n (0-based), then Christoffel weights 1/sum_{k<n} h_k^2.
  const double root2n = std::sqrt(2.0 * n);
  for (std::size_t i = 0; i < n; ++i) {
    double x = q.nodes[i];
    for (int it = 0; it < 8; ++it) {
      double hn = 0.0;
      double hm = 0.0;
      double sn = 0.0;
      double sm = 0.0;
      scaled_recurrence(x, n + 1, [&](std::size_t m, double v, double s) {
        if (m == n - 1) hm = v, sm = s;
        if (m == n) hn = v, sn = s;
      });
      if (sm != sn) hm *= std::exp(sm - sn);
      const double d = root2n * hm - x * hn;
      if (d == 0.0) break;
      const double dx = hn / d;
      x -= dx;
      if (std::abs(dx) <= 1e-16 * std::max(1.0, std::abs(x))) break;
    }
    q.nodes[i] = x;
  }
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double v = 0.5 * (q.nodes[n - 1 - i] - q.nodes[i]);
    q.nodes[i] = -v;
    q.nodes[n - 1 - i] = v;
  }
  if (n % 2 == 1) q.nodes[n / 2] = 0.0;

  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    double scale = -0.5 * q.nodes[i] * q.nodes[i];
    scaled_recurrence(q.nodes[i], n, [&](std::size_t, double v, double s) {
      if (s != scale) {
        sum *= std::exp(2.0 * (scale - s));
        scale = s;
      }
      sum += v * v;
    });
    q.weights[i] = std::exp(-(std::log(sum) + 2.0 * scale));
  }
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double w = 0.5 * (q.weights[i] + q.weights[n - 1 - i]);
    q.weights[i] = w;
    q.weights[n - 1 - i] = w;
  }
  return q;
}

Table::Table(std::span<const double> xs, std::size_t count)
    : count_(count), npts_(xs.size()), data_(count * xs.size()) {
  if (count == 0 || xs.empty()) return;
  const auto& k = kernels::active();
  std::vector<double> col(count);
  std::size_t i = 0;
  while (i < npts_) {
    if (std::abs(xs[i]) > kernels::kHermiteDirectLimit) {
      values(xs[i], count, col.data());
      for (std::size_t m = 0; m < count; ++m) data_[m * npts_ + i] = col[m];
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < npts_ && std::abs(xs[end]) <= kernels::kHermiteDirectLimit) ++end;
    k.hermite_block(xs.data() + i, end - i, count, data_.data() + i, npts_);
    i = end;
  }
}

std::size_t min_quad_order(std::size_t cap) { return 2 * cap + 8; }

HermiteBasis::HermiteBasis(std::size_t cap, std::size_t quad_order) : cap_(cap) {
  if (cap == 0) throw ConfigError("basis cap must be positive");
  if (quad_order < min_quad_order(cap))
    throw ConfigError("quad_order " + std::to_string(quad_order) + " below exactness threshold " +
                      std::to_string(min_quad_order(cap)) + " for cap " + std::to_string(cap));
  quad_ = gauss_hermite(quad_order);
  table_ = Table(quad_.nodes, cap_);
  pair_ = product_rule(2, cap_);
}

ProductRule HermiteBasis::product_rule(std::size_t m, std::size_t count) const {
  ProductRule r;
  r.m = m;
  const double inv = 1.0 / std::sqrt(static_cast<double>(m));
  r.points.resize(quad_.nodes.size());
  r.weights.resize(quad_.nodes.size());
  for (std::size_t i = 0; i < quad_.nodes.size(); ++i) {
    r.points[i] = quad_.nodes[i] * inv;
    r.weights[i] = quad_.weights[i] * inv;
  }
  r.values = Table(r.points, count);
  return r;
}

HermiteBasis build_basis(std::size_t cap, std::size_t quad_order) { return HermiteBasis(cap, quad_order); }

double alpha(std::size_t j) {
  if (j == 0) throw IndexError("alpha index starts at 1");
  const double jj = static_cast<double>(j);
  return std::exp(std::lgamma(2.0 * jj - 1.0) - 2.0 * std::lgamma(jj) - (jj - 1.0) * std::log(4.0));
}

MuTable::MuTable(std::size_t j_max) : j_max_(j_max), alpha_(j_max), entries_(j_max * (j_max + 1) / 2) {
  if (j_max == 0) throw ConfigError("mu table size must be positive");
  for (std::size_t j = 1; j <= j_max; ++j) alpha_[j - 1] = alpha(j);
  const double c = std::pow(2.0 * std::numbers::pi, -0.25);
  for (std::size_t j = 1; j <= j_max; ++j)
    for (std::size_t k = 1; k <= j; ++k)
      entries_[(j - 1) * j / 2 + (k - 1)] = c * std::sqrt(alpha_[k - 1]) * alpha_[j - k];
}

MuTable mu_table(std::size_t j_max) { return MuTable(j_max); }

double verify_eigenrelation(const HermiteBasis& basis, std::size_t j, double grid_step) {
  if (j == 0 || j > basis.cap()) throw IndexError("eigenrelation index out of range");
  if (!(grid_step > 0.0)) throw ConfigError("grid_step must be positive");
  const double lo = basis.nodes().front();
  const double hi = basis.nodes().back();
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / grid_step));
  std::vector<double> g(n + 1);
  std::vector<double> buf(j);
  for (std::size_t i = 0; i <= n; ++i) {
    values(lo + i * grid_step, j, buf.data());
    g[i] = buf[j - 1];
  }
  const double lambda = 2.0 * j - 1.0;
  const double inv = 1.0 / (grid_step * grid_step);
  double res = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double x = lo + i * grid_step;
    const double lap = (g[i + 1] - 2.0 * g[i] + g[i - 1]) * inv;
    res = std::max(res, std::abs(-lap + (x * x - lambda) * g[i]));
  }
  return res;
}

}  // namespace qho::hermite
