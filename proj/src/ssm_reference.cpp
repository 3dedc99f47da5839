#include "sass/ssm_reference.hpp"

#include <cmath>
#include <string>

#include "sass/error.hpp"

namespace sass::ssm {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void StateSpaceParams::validate() const {
  const std::size_t n = a.rows;
  if (n == 0 || a.cols != n) throw ShapeError("StateSpaceParams: A must be square, N >= 1");
  if (b.rows != n || b.cols != 1) throw ShapeError("StateSpaceParams: B must be N x 1");
  if (c.rows != 1 || c.cols != n) throw ShapeError("StateSpaceParams: C must be 1 x N");
  if (!(delta > 0.0)) throw ShapeError("StateSpaceParams: delta must be positive");
}

namespace {

// LU with partial pivoting, in place. Returns false on an exactly zero pivot.
struct Lu {
  Matrix lu;
  std::vector<std::size_t> perm;

  bool factor(Matrix m) {
    const std::size_t n = m.rows;
    perm.resize(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t col = 0; col < n; ++col) {
      std::size_t pivot = col;
      for (std::size_t r = col + 1; r < n; ++r) {
        if (std::abs(m(r, col)) > std::abs(m(pivot, col))) pivot = r;
      }
      if (m(pivot, col) == 0.0) return false;
      if (pivot != col) {
        for (std::size_t j = 0; j < n; ++j) std::swap(m(col, j), m(pivot, j));
        std::swap(perm[col], perm[pivot]);
      }
      for (std::size_t r = col + 1; r < n; ++r) {
        const double f = m(r, col) / m(col, col);
        m(r, col) = f;
        for (std::size_t j = col + 1; j < n; ++j) m(r, j) -= f * m(col, j);
      }
    }
    lu = std::move(m);
    return true;
  }

  Matrix solve(const Matrix& rhs) const {
    const std::size_t n = lu.rows;
    Matrix x(n, rhs.cols);
    for (std::size_t c = 0; c < rhs.cols; ++c) {
      std::vector<double> y(n);
      for (std::size_t i = 0; i < n; ++i) {
        double s = rhs(perm[i], c);
        for (std::size_t j = 0; j < i; ++j) s -= lu(i, j) * y[j];
        y[i] = s;
      }
      for (std::size_t i = n; i-- > 0;) {
        double s = y[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= lu(i, j) * x(j, c);
        x(i, c) = s / lu(i, i);
      }
    }
    return x;
  }
};

double norm1(const Matrix& m) {
  double best = 0.0;
  for (std::size_t j = 0; j < m.cols; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows; ++i) s += std::abs(m(i, j));
    best = std::max(best, s);
  }
  return best;
}

double frobenius(const Matrix& m) {
  double s = 0.0;
  for (double v : m.data) s += v * v;
  return std::sqrt(s);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols; ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ShapeError(std::string(what) + ": lengths " + std::to_string(a) + " and " +
                     std::to_string(b));
  }
}

}  // namespace

DiscreteSSM discretize(const StateSpaceParams& p) {
  p.validate();
  const std::size_t n = p.state_dim();
  const double half = p.delta / 2.0;
  Matrix lhs = Matrix::identity(n);
  Matrix rhs = Matrix::identity(n);
  for (std::size_t i = 0; i < n * n; ++i) {
    lhs.data[i] -= half * p.a.data[i];
    rhs.data[i] += half * p.a.data[i];
  }
  Lu lu;
  if (!lu.factor(lhs)) {
    throw SingularDiscretizationError("discretize: I - delta/2 A is singular");
  }
  const double cond = norm1(lhs) * norm1(lu.solve(Matrix::identity(n)));
  if (!(cond <= kMaxDiscretizationCondition)) {
    throw SingularDiscretizationError("discretize: condition estimate " + std::to_string(cond) +
                                      " exceeds 1e12");
  }
  Matrix scaled_b = p.b;
  for (double& v : scaled_b.data) v *= p.delta;
  return DiscreteSSM{lu.solve(rhs), lu.solve(scaled_b), p.c};
}

KernelVec unroll_kernel(const DiscreteSSM& d, std::size_t length) {
  const std::size_t n = d.state_dim();
  KernelVec k;
  k.values.resize(length);
  std::vector<double> v(d.b_bar.data), next(n);
  for (std::size_t l = 0; l < length; ++l) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += d.c_bar.data[i] * v[i];
    k.values[l] = s;
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += d.a_bar(i, j) * v[j];
      next[i] = acc;
    }
    v.swap(next);
  }
  return k;
}

std::vector<double> scan_recurrent(const DiscreteSSM& d, std::span<const double> u) {
  const std::size_t n = d.state_dim();
  std::vector<double> x(n, 0.0), next(n), y(u.size());
  for (std::size_t l = 0; l < u.size(); ++l) {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = d.b_bar.data[i] * u[l];
      for (std::size_t j = 0; j < n; ++j) acc += d.a_bar(i, j) * x[j];
      next[i] = acc;
    }
    x.swap(next);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += d.c_bar.data[i] * x[i];
    y[l] = s;
  }
  return y;
}

std::vector<double> causal_convolution(std::span<const double> k, std::span<const double> u) {
  check_lengths(k.size(), u.size(), "causal_convolution");
  std::vector<double> y(u.size(), 0.0);
  for (std::size_t l = 0; l < u.size(); ++l) {
    double s = 0.0;
    for (std::size_t m = 0; m <= l; ++m) s += k[m] * u[l - m];
    y[l] = s;
  }
  return y;
}

std::vector<double> circular_convolution(std::span<const double> k,
                                         std::span<const double> u) {
  check_lengths(k.size(), u.size(), "circular_convolution");
  const std::size_t n = u.size();
  std::vector<double> y(n, 0.0);
  for (std::size_t l = 0; l < n; ++l) {
    double s = 0.0;
    for (std::size_t m = 0; m < n; ++m) s += k[m] * u[(l + n - m) % n];
    y[l] = s;
  }
  return y;
}

ComplexVec causal_convolution(const ComplexVec& k, std::span<const double> u) {
  return ComplexVec(causal_convolution(k.re, u), causal_convolution(k.im, u));
}

ComplexVec circular_convolution(const ComplexVec& k, std::span<const double> u) {
  return ComplexVec(circular_convolution(k.re, u), circular_convolution(k.im, u));
}

double spectral_radius_bound(const Matrix& m, int squarings) {
  double norm = frobenius(m);
  if (norm == 0.0) return 0.0;
  Matrix x = m;
  for (double& v : x.data) v /= norm;
  double log_norm = std::log(norm);  // log of the scale of m^(2^i)
  for (int i = 0; i < squarings; ++i) {
    x = matmul(x, x);
    const double s = frobenius(x);
    if (s == 0.0) return 0.0;
    for (double& v : x.data) v /= s;
    log_norm = 2.0 * log_norm + std::log(s);
  }
  return std::exp(log_norm / std::ldexp(1.0, squarings));
}

bool is_stable(const DiscreteSSM& d, double max_radius) {
  return spectral_radius_bound(d.a_bar) < max_radius;
}

StateSpaceParams random_stable_system(Rng& rng, std::size_t state_dim, double max_radius) {
  if (state_dim == 0) throw ShapeError("random_stable_system: N must be >= 1");
  const double entry_std = 1.0 / std::sqrt(static_cast<double>(state_dim));
  for (;;) {
    StateSpaceParams p;
    p.a = Matrix(state_dim, state_dim);
    for (double& v : p.a.data) v = rng.normal(0.0, entry_std);
    const double shift = frobenius(p.a) + 0.5;
    for (std::size_t i = 0; i < state_dim; ++i) p.a(i, i) -= shift;
    p.b = Matrix(state_dim, 1);
    p.c = Matrix(1, state_dim);
    for (double& v : p.b.data) v = rng.normal();
    for (double& v : p.c.data) v = rng.normal();
    p.delta = rng.uniform(0.1, 1.0);
    if (is_stable(discretize(p), max_radius)) return p;
  }
}

}  // namespace sass::ssm
