#include "lscae/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lscae/error.hpp"
#include "lscae/kernels.hpp"

namespace lscae {

namespace {

void validate_symmetric(const Matrix& a) {
  if (!a.is_square()) fail(ErrorKind::ShapeMismatch, "sym_eig requires a square matrix");
  require_finite(a, "sym_eig input");
  const double tol = 1e-9 * std::max(1.0, max_abs(a));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      if (std::abs(a(i, j) - a(j, i)) > tol)
        fail(ErrorKind::NonSymmetric, "asymmetry exceeds tolerance");
}

Matrix symmetrized(const Matrix& a) {
  Matrix s = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) {
      const double v = 0.5 * (a(i, j) + a(j, i));
      s(i, j) = v;
      s(j, i) = v;
    }
  return s;
}

// Cyclic Jacobi. On return `a` is (numerically) diagonal and v holds the
// accumulated rotations when requested.
void jacobi(Matrix& a, Matrix* v) {
  const std::size_t n = a.rows();
  const double norm = frobenius_norm(a);
  if (norm == 0.0) return;
  const double stop = 1e-11 * norm;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += 2.0 * a(i, j) * a(i, j);
    if (std::sqrt(off) < stop) return;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        double* rp = a.data() + p * n;
        double* rq = a.data() + q * n;
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = rp[k];
          const double aqk = rq[k];
          rp[k] = c * apk - s * aqk;
          rq[k] = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        if (v != nullptr) {
          for (std::size_t k = 0; k < n; ++k) {
            const double vkp = (*v)(k, p);
            const double vkq = (*v)(k, q);
            (*v)(k, p) = c * vkp - s * vkq;
            (*v)(k, q) = s * vkp + c * vkq;
          }
        }
      }
    }
  }
}

// Householder reduction to tridiagonal form. `v` enters holding A and leaves
// holding the orthogonal transform; d/e receive the diagonal and subdiagonal.
void tridiagonalize(Matrix& v, std::vector<double>& d, std::vector<double>& e) {
  const std::size_t n = v.rows();
  d.assign(n, 0.0);
  e.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) d[j] = v(n - 1, j);

  for (std::size_t i = n - 1; i > 0; --i) {
    double scale = 0.0;
    double h = 0.0;
    for (std::size_t k = 0; k < i; ++k) scale += std::abs(d[k]);
    if (scale == 0.0) {
      e[i] = d[i - 1];
      for (std::size_t j = 0; j < i; ++j) {
        d[j] = v(i - 1, j);
        v(i, j) = 0.0;
        v(j, i) = 0.0;
      }
    } else {
      for (std::size_t k = 0; k < i; ++k) {
        d[k] /= scale;
        h += d[k] * d[k];
      }
      double f = d[i - 1];
      double g = std::sqrt(h);
      if (f > 0) g = -g;
      e[i] = scale * g;
      h -= f * g;
      d[i - 1] = f - g;
      for (std::size_t j = 0; j < i; ++j) e[j] = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        v(j, i) = f;
        g = e[j] + v(j, j) * f;
        for (std::size_t k = j + 1; k <= i - 1; ++k) {
          g += v(k, j) * d[k];
          e[k] += v(k, j) * f;
        }
        e[j] = g;
      }
      f = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        e[j] /= h;
        f += e[j] * d[j];
      }
      const double hh = f / (h + h);
      for (std::size_t j = 0; j < i; ++j) e[j] -= hh * d[j];
      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        g = e[j];
        for (std::size_t k = j; k <= i - 1; ++k) v(k, j) -= (f * e[k] + g * d[k]);
        d[j] = v(i - 1, j);
        v(i, j) = 0.0;
      }
    }
    d[i] = h;
  }

  for (std::size_t i = 0; i + 1 < n; ++i) {
    v(n - 1, i) = v(i, i);
    v(i, i) = 1.0;
    const double h = d[i + 1];
    if (h != 0.0) {
      for (std::size_t k = 0; k <= i; ++k) d[k] = v(k, i + 1) / h;
      for (std::size_t j = 0; j <= i; ++j) {
        double g = 0.0;
        for (std::size_t k = 0; k <= i; ++k) g += v(k, i + 1) * v(k, j);
        for (std::size_t k = 0; k <= i; ++k) v(k, j) -= g * d[k];
      }
    }
    for (std::size_t k = 0; k <= i; ++k) v(k, i + 1) = 0.0;
  }
  for (std::size_t j = 0; j < n; ++j) {
    d[j] = v(n - 1, j);
    v(n - 1, j) = 0.0;
  }
  v(n - 1, n - 1) = 1.0;
  e[0] = 0.0;
}

// Implicit-shift QL on the tridiagonal (d, e). When `vt` is non-null it holds
// the transposed transform (row i = eigenvector i) and is updated in place.
void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e, Matrix* vt) {
  const std::size_t n = d.size();
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;

  double f = 0.0;
  double tst1 = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    std::size_t m = l;
    while (m < n) {
      if (std::abs(e[m]) <= eps * tst1) break;
      ++m;
    }
    if (m == n) m = n - 1;
    if (m > l) {
      int iter = 0;
      do {
        if (++iter > 60) fail(ErrorKind::NonFinite, "QL iteration did not converge");
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0;
        double c2 = c;
        double c3 = c;
        const double el1 = e[l + 1];
        double s = 0.0;
        double s2 = 0.0;
        for (std::size_t ii = m; ii-- > l;) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[ii];
          h = c * p;
          r = std::hypot(p, e[ii]);
          e[ii + 1] = s * r;
          s = e[ii] / r;
          c = p / r;
          p = c * d[ii] - s * g;
          d[ii + 1] = h + s * (c * g + s * d[ii]);
          if (vt != nullptr) {
            double* vi = vt->data() + ii * n;
            double* vi1 = vt->data() + (ii + 1) * n;
            for (std::size_t k = 0; k < n; ++k) {
              const double hk = vi1[k];
              vi1[k] = s * vi[k] + c * hk;
              vi[k] = c * vi[k] - s * hk;
            }
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }
}

bool use_jacobi(EigenMethod method, std::size_t n) {
  switch (method) {
    case EigenMethod::Jacobi: return true;
    case EigenMethod::TridiagonalQL: return false;
    case EigenMethod::Auto: return n <= kJacobiMaxDim;
  }
  return true;
}

SymEig sorted(std::vector<double> values, const Matrix& vecs) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });
  SymEig out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    out.values[c] = values[order[c]];
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = vecs(r, order[c]);
  }
  fix_column_signs(out.vectors);
  return out;
}

}  // namespace

void fix_column_signs(Matrix& v) {
  for (std::size_t c = 0; c < v.cols(); ++c) {
    std::size_t best = 0;
    double best_abs = -1.0;
    for (std::size_t r = 0; r < v.rows(); ++r) {
      if (std::abs(v(r, c)) > best_abs) {
        best_abs = std::abs(v(r, c));
        best = r;
      }
    }
    if (v.rows() > 0 && v(best, c) < 0.0)
      for (std::size_t r = 0; r < v.rows(); ++r) v(r, c) = -v(r, c);
  }
}

SymEig sym_eig(const Matrix& a, EigenMethod method) {
  validate_symmetric(a);
  const std::size_t n = a.rows();
  if (n == 0) return {};
  Matrix s = symmetrized(a);
  if (use_jacobi(method, n)) {
    Matrix v = Matrix::identity(n);
    jacobi(s, &v);
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = s(i, i);
    return sorted(std::move(values), v);
  }
  std::vector<double> d;
  std::vector<double> e;
  tridiagonalize(s, d, e);
  Matrix vt = s.transpose();
  tridiagonal_ql(d, e, &vt);
  return sorted(std::move(d), vt.transpose());
}

std::vector<double> sym_eigvals(const Matrix& a, EigenMethod method) {
  validate_symmetric(a);
  const std::size_t n = a.rows();
  if (n == 0) return {};
  Matrix s = symmetrized(a);
  std::vector<double> values;
  if (use_jacobi(method, n)) {
    jacobi(s, nullptr);
    values.resize(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = s(i, i);
  } else {
    std::vector<double> e;
    tridiagonalize(s, values, e);
    tridiagonal_ql(values, e, nullptr);
  }
  std::sort(values.begin(), values.end());
  return values;
}

Matrix pairwise_sq_dist(const Matrix& x) {
  if (x.rows() == 0) fail(ErrorKind::ShapeMismatch, "pairwise_sq_dist requires n >= 1");
  require_finite(x, "pairwise_sq_dist input");
  return kernels::pairwise_sq_dist(x);
}

Matrix cholesky_lower(const Matrix& a) {
  if (!a.is_square()) fail(ErrorKind::ShapeMismatch, "cholesky requires a square matrix");
  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0)) fail(ErrorKind::DegenerateData, "matrix is not positive definite");
    l(j, j) = std::sqrt(diag);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

}  // namespace lscae
