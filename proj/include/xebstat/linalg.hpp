#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "xebstat/bigfloat.hpp"
#include "xebstat/errors.hpp"

// Small dense linear-algebra kernel, templated on the real scalar type
// (BigFloat for accurate mode, double for the fast 53-bit mode).
// All values participating in one computation must be created under the
// same active PrecisionContext.

namespace xebstat {

template <class Real>
class DenseMatrix {
 public:
  DenseMatrix() : rows_(0), cols_(0) {}
  DenseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), a_(rows * cols, Real(0)) {}

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = Real(1);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Real& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  const Real& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  DenseMatrix transposed() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  Real infinity_norm() const {
    Real best(0);
    for (std::size_t i = 0; i < rows_; ++i) {
      Real s(0);
      for (std::size_t j = 0; j < cols_; ++j) s += abs((*this)(i, j));
      if (s > best) best = s;
    }
    return best;
  }

 private:
  std::size_t rows_, cols_;
  std::vector<Real> a_;
};

template <class Real>
std::vector<Real> matvec(const DenseMatrix<Real>& m, const std::vector<Real>& v) {
  if (m.cols() != v.size()) {
    throw ConfigError("matvec: dimension mismatch (" + std::to_string(m.cols()) + " cols vs " +
                      std::to_string(v.size()) + " entries)");
  }
  std::vector<Real> y(m.rows(), Real(0));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Real acc(0);
    for (std::size_t j = 0; j < m.cols(); ++j) acc = fma(m(i, j), v[j], acc);
    y[i] = acc;
  }
  return y;
}

template <class Real>
std::vector<Real> vecmat(const std::vector<Real>& v, const DenseMatrix<Real>& m) {
  if (m.rows() != v.size()) throw ConfigError("vecmat: dimension mismatch");
  std::vector<Real> y(m.cols(), Real(0));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) y[j] = fma(v[i], m(i, j), y[j]);
  return y;
}

template <class Real>
DenseMatrix<Real> mat_mul(const DenseMatrix<Real>& a, const DenseMatrix<Real>& b) {
  if (a.cols() != b.rows()) throw ConfigError("mat_mul: dimension mismatch");
  DenseMatrix<Real> c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Real& aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) = fma(aik, b(k, j), c(i, j));
    }
  return c;
}

template <class Real>
Real dot(const std::vector<Real>& a, const std::vector<Real>& b) {
  Real acc(0);
  for (std::size_t i = 0; i < a.size(); ++i) acc = fma(a[i], b[i], acc);
  return acc;
}

template <class Real>
Real norm2(const std::vector<Real>& a) {
  Real acc(0);
  for (const Real& x : a) acc = fma(x, x, acc);
  return sqrt(acc);
}

template <class Real>
Real max_abs_diff(const DenseMatrix<Real>& a, const DenseMatrix<Real>& b) {
  Real best(0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      Real d = abs(a(i, j) - b(i, j));
      if (d > best) best = d;
    }
  return best;
}

// ---------------------------------------------------------------------------
// Thin Householder QR. Returns Q (m x k) with orthonormal columns and
// R (k x n) upper trapezoidal with nonnegative diagonal, k = min(m, n).

template <class Real>
struct QrResult {
  DenseMatrix<Real> q;
  DenseMatrix<Real> r;
};

template <class Real>
QrResult<Real> qr_thin(const DenseMatrix<Real>& a_in) {
  const std::size_t m = a_in.rows(), n = a_in.cols();
  const std::size_t k = std::min(m, n);
  DenseMatrix<Real> a = a_in;
  std::vector<std::vector<Real>> reflectors;
  reflectors.reserve(k);

  for (std::size_t col = 0; col < k; ++col) {
    // Householder vector for column col, rows col..m-1.
    Real nrm(0);
    for (std::size_t i = col; i < m; ++i) nrm = fma(a(i, col), a(i, col), nrm);
    nrm = sqrt(nrm);
    std::vector<Real> u(m - col, Real(0));
    if (nrm > 0) {
      Real alpha = (a(col, col) > 0) ? -nrm : nrm;
      for (std::size_t i = col; i < m; ++i) u[i - col] = a(i, col);
      u[0] -= alpha;
      Real unorm2(0);
      for (const Real& x : u) unorm2 = fma(x, x, unorm2);
      if (unorm2 > 0) {
        for (std::size_t j = col; j < n; ++j) {
          Real proj(0);
          for (std::size_t i = col; i < m; ++i) proj = fma(u[i - col], a(i, j), proj);
          Real f = proj * 2 / unorm2;
          for (std::size_t i = col; i < m; ++i) a(i, j) -= f * u[i - col];
        }
        a(col, col) = alpha;
        for (std::size_t i = col + 1; i < m; ++i) a(i, col) = Real(0);
      }
    }
    reflectors.push_back(std::move(u));
  }

  QrResult<Real> out;
  out.r = DenseMatrix<Real>(k, n);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i; j < n; ++j) out.r(i, j) = a(i, j);

  // Back-accumulate thin Q.
  out.q = DenseMatrix<Real>(m, k);
  for (std::size_t j = 0; j < k; ++j) out.q(j, j) = Real(1);
  for (std::size_t col = k; col-- > 0;) {
    const std::vector<Real>& u = reflectors[col];
    Real unorm2(0);
    for (const Real& x : u) unorm2 = fma(x, x, unorm2);
    if (!(unorm2 > 0)) continue;
    for (std::size_t j = 0; j < k; ++j) {
      Real proj(0);
      for (std::size_t i = col; i < m; ++i) proj = fma(u[i - col], out.q(i, j), proj);
      Real f = proj * 2 / unorm2;
      for (std::size_t i = col; i < m; ++i) out.q(i, j) -= f * u[i - col];
    }
  }

  // Normalize sign so R has nonnegative diagonal.
  for (std::size_t i = 0; i < k; ++i) {
    if (out.r(i, i) < 0) {
      for (std::size_t j = i; j < n; ++j) out.r(i, j) = -out.r(i, j);
      for (std::size_t r = 0; r < m; ++r) out.q(r, i) = -out.q(r, i);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Nonsymmetric dense eigensolver: Householder Hessenberg reduction followed
// by Francis double-shift QR with eigenvector extraction by quasi-triangular
// back-substitution. Sized for matrices up to a few hundred rows.

template <class Real>
struct EigenPair {
  Real value;              // real part
  Real imag;               // imaginary part; nonzero only when is_complex
  bool is_complex = false;
  std::vector<Real> right;  // empty for complex pairs
  std::vector<Real> left;
};

template <class Real>
struct EigenDecomposition {
  std::vector<EigenPair<Real>> pairs;  // descending |value|
};

namespace detail {

template <class Real>
void hessenberg_reduce(DenseMatrix<Real>& a, DenseMatrix<Real>& q) {
  const std::size_t n = a.rows();
  q = DenseMatrix<Real>::identity(n);
  if (n < 3) return;
  for (std::size_t col = 0; col + 2 < n; ++col) {
    Real nrm(0);
    for (std::size_t i = col + 1; i < n; ++i) nrm = fma(a(i, col), a(i, col), nrm);
    nrm = sqrt(nrm);
    if (!(nrm > 0)) continue;
    std::vector<Real> u(n - col - 1, Real(0));
    Real alpha = (a(col + 1, col) > 0) ? -nrm : nrm;
    for (std::size_t i = col + 1; i < n; ++i) u[i - col - 1] = a(i, col);
    u[0] -= alpha;
    Real unorm2(0);
    for (const Real& x : u) unorm2 = fma(x, x, unorm2);
    if (!(unorm2 > 0)) continue;

    // Rows col+1..n-1: A <- P A
    for (std::size_t j = col; j < n; ++j) {
      Real proj(0);
      for (std::size_t i = col + 1; i < n; ++i) proj = fma(u[i - col - 1], a(i, j), proj);
      Real f = proj * 2 / unorm2;
      for (std::size_t i = col + 1; i < n; ++i) a(i, j) -= f * u[i - col - 1];
    }
    // Columns col+1..n-1: A <- A P
    for (std::size_t i = 0; i < n; ++i) {
      Real proj(0);
      for (std::size_t j = col + 1; j < n; ++j) proj = fma(u[j - col - 1], a(i, j), proj);
      Real f = proj * 2 / unorm2;
      for (std::size_t j = col + 1; j < n; ++j) a(i, j) -= f * u[j - col - 1];
    }
    // Q <- Q P
    for (std::size_t i = 0; i < n; ++i) {
      Real proj(0);
      for (std::size_t j = col + 1; j < n; ++j) proj = fma(u[j - col - 1], q(i, j), proj);
      Real f = proj * 2 / unorm2;
      for (std::size_t j = col + 1; j < n; ++j) q(i, j) -= f * u[j - col - 1];
    }
    a(col + 1, col) = alpha;
    for (std::size_t i = col + 2; i < n; ++i) a(i, col) = Real(0);
  }
}

// Rotate a trailing 2x2 block with real eigenvalues into triangular form.
// p is the index of the block's first row/column.
template <class Real>
void split_real_2x2(DenseMatrix<Real>& t, DenseMatrix<Real>& z, std::size_t p, bool want_z) {
  const std::size_t n = t.rows();
  Real a = t(p, p), b = t(p, p + 1), c = t(p + 1, p), d = t(p + 1, p + 1);
  Real half = (a - d) / 2;
  Real disc = fma(half, half, b * c);
  if (disc < 0) return;  // complex pair stays as a block
  Real m = (a + d) / 2;
  Real root = sqrt(disc);
  // Eigenvalue of larger magnitude for a well-conditioned eigenvector.
  Real lam = (m >= 0) ? m + root : m - root;
  Real v0, v1;
  if (abs(b) + abs(lam - a) >= abs(c) + abs(lam - d)) {
    v0 = b;
    v1 = lam - a;
  } else {
    v0 = lam - d;
    v1 = c;
  }
  Real h = hypot(v0, v1);
  if (!(h > 0)) { v0 = Real(1); v1 = Real(0); h = Real(1); }
  Real cs = v0 / h, sn = v1 / h;
  // G = [[cs, -sn], [sn, cs]] has the eigenvector as first column.
  for (std::size_t j = p; j < n; ++j) {  // rows: T <- G^T T
    Real x = t(p, j), y = t(p + 1, j);
    t(p, j) = cs * x + sn * y;
    t(p + 1, j) = cs * y - sn * x;
  }
  for (std::size_t i = 0; i <= p + 1; ++i) {  // cols: T <- T G
    Real x = t(i, p), y = t(i, p + 1);
    t(i, p) = cs * x + sn * y;
    t(i, p + 1) = cs * y - sn * x;
  }
  if (want_z) {
    const std::size_t zn = z.rows();
    for (std::size_t i = 0; i < zn; ++i) {
      Real x = z(i, p), y = z(i, p + 1);
      z(i, p) = cs * x + sn * y;
      z(i, p + 1) = cs * y - sn * x;
    }
  }
  t(p + 1, p) = Real(0);
}

// One explicit shifted QR step (Givens) on the Hessenberg block l..ihi.
// Explicit shifting is immune to the bulge washout that implicit chases
// suffer when the block carries interior near-zero subdiagonals, so it is
// used as a periodic rescue when the Francis iteration stagnates.
template <class Real>
void explicit_shift_step(DenseMatrix<Real>& t, DenseMatrix<Real>& z, long l, long ihi,
                         const Real& sigma, bool want_z) {
  const std::size_t n = t.rows();
  for (long k = l; k <= ihi; ++k) t(k, k) -= sigma;
  std::vector<Real> cs, sn;
  for (long k = l; k < ihi; ++k) {
    Real a = t(k, k), b = t(k + 1, k);
    Real r = hypot(a, b);
    Real c(1), s(0);
    if (r > 0) {
      c = a / r;
      s = b / r;
    }
    cs.push_back(c);
    sn.push_back(s);
    for (std::size_t j = static_cast<std::size_t>(k); j < n; ++j) {
      Real x = t(k, j), y = t(k + 1, j);
      t(k, j) = c * x + s * y;
      t(k + 1, j) = c * y - s * x;
    }
    t(k + 1, k) = Real(0);
  }
  for (long k = l; k < ihi; ++k) {
    const Real& c = cs[k - l];
    const Real& s = sn[k - l];
    const long rmax = std::min<long>(k + 1, ihi);
    for (long i = 0; i <= rmax; ++i) {
      Real x = t(i, k), y = t(i, k + 1);
      t(i, k) = c * x + s * y;
      t(i, k + 1) = c * y - s * x;
    }
    if (want_z) {
      for (std::size_t i = 0; i < n; ++i) {
        Real x = z(i, k), y = z(i, k + 1);
        z(i, k) = c * x + s * y;
        z(i, k + 1) = c * y - s * x;
      }
    }
  }
  for (long k = l; k <= ihi; ++k) t(k, k) += sigma;
}

// Francis double-shift QR on an upper Hessenberg matrix; t becomes real
// Schur form (1x1 and complex 2x2 diagonal blocks), z accumulates the
// orthogonal similarity.
template <class Real>
void real_schur(DenseMatrix<Real>& t, DenseMatrix<Real>& z, bool want_z) {
  const std::size_t n = t.rows();
  if (n <= 1) return;
  const Real eps = qr_split_tol<Real>();

  Real anorm(0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = (i == 0 ? 0 : i - 1); j < n; ++j) anorm += abs(t(i, j));
  if (!(anorm > 0)) return;

  long ihi = static_cast<long>(n) - 1;
  int its = 0;
  long total_its = 0;
  const long max_total = 120 * static_cast<long>(n);

  while (ihi >= 0) {
    // Deflation scan.
    long l = ihi;
    while (l > 0) {
      Real s = abs(t(l - 1, l - 1)) + abs(t(l, l));
      if (!(s > 0)) s = anorm;
      if (abs(t(l, l - 1)) <= eps * s) {
        t(l, l - 1) = Real(0);
        break;
      }
      --l;
    }
    if (l == ihi) {
      --ihi;
      its = 0;
      continue;
    }
    if (l == ihi - 1) {
      split_real_2x2(t, z, static_cast<std::size_t>(l), want_z);
      ihi -= 2;
      its = 0;
      continue;
    }
    if (++total_its > max_total) {
      throw NumericError("eig_dense: QR iteration did not converge");
    }

    // Shifts from the trailing 2x2 of the active block.
    Real h11 = t(ihi - 1, ihi - 1), h12 = t(ihi - 1, ihi);
    Real h21 = t(ihi, ihi - 1), h22 = t(ihi, ihi);
    Real s_tr = h11 + h22;
    Real s_det = h11 * h22 - h12 * h21;
    if (its > 0 && its % 8 == 0) {
      // Stagnation rescue: one explicit step with the Wilkinson-style real
      // shift (trailing-2x2 eigenvalue closest to the corner, or its real
      // part for a complex pair).
      Real half = (h11 - h22) / 2;
      Real disc = fma(half, half, h12 * h21);
      Real sigma = (h11 + h22) / 2;
      if (disc > 0) {
        Real root = sqrt(disc);
        Real lam1 = sigma + root, lam2 = sigma - root;
        sigma = (abs(lam1 - h22) < abs(lam2 - h22)) ? lam1 : lam2;
      }
      explicit_shift_step(t, z, l, ihi, sigma, want_z);
      ++its;
      continue;
    }
    if (its == 10 || its == 20) {
      Real sh = abs(t(ihi, ihi - 1)) * 0.75 + h22;
      s_tr = sh * 2;
      s_det = sh * sh;
    }
    ++its;

    // Start the bulge chase at the lowest row m where the disturbed
    // subdiagonal entry is negligible (two-consecutive-small-subdiagonals
    // test); this keeps the shifts effective below tiny couplings.
    Real x(0), y(0), w(0);
    long m = ihi - 2;
    for (; m >= l; --m) {
      x = t(m, m) * (t(m, m) - s_tr) + t(m, m + 1) * t(m + 1, m) + s_det;
      y = t(m + 1, m) * (t(m, m) + t(m + 1, m + 1) - s_tr);
      w = t(m + 2, m + 1) * t(m + 1, m);
      if (m == l) break;
      Real lhs = abs(t(m, m - 1)) * (abs(y) + abs(w));
      Real rhs = eps * abs(x) *
                 (abs(t(m - 1, m - 1)) + abs(t(m, m)) + abs(t(m + 1, m + 1)));
      if (lhs <= rhs) break;
    }

    for (long k = m; k <= ihi - 1; ++k) {
      if (k > m) {
        x = t(k, k - 1);
        y = t(k + 1, k - 1);
        w = (k + 2 <= ihi) ? t(k + 2, k - 1) : Real(0);
      }
      const bool three = (k + 2 <= ihi);
      Real scale = abs(x) + abs(y) + (three ? abs(w) : Real(0));
      if (!(scale > 0)) continue;
      Real xs = x / scale, ys = y / scale, ws = three ? w / scale : Real(0);
      Real alpha = sqrt(fma(xs, xs, fma(ys, ys, ws * ws)));
      if (!(alpha > 0)) continue;
      if (xs > 0) alpha = -alpha;
      Real u0 = xs - alpha, u1 = ys, u2 = ws;
      Real unorm2 = fma(u0, u0, fma(u1, u1, u2 * u2));
      if (!(unorm2 > 0)) continue;
      Real two_over = Real(2) / unorm2;

      // Column k-1 is handled explicitly: the reflector annihilates the
      // entries below t(k, k-1); fill-in at the chase start is negligible
      // by the start-row test and is dropped.
      if (k > m) {
        t(k, k - 1) = alpha * scale;
        t(k + 1, k - 1) = Real(0);
        if (three) t(k + 2, k - 1) = Real(0);
      } else if (m > l) {
        t(m, m - 1) *= (Real(1) - u0 * u0 * two_over);
      }
      for (std::size_t j = static_cast<std::size_t>(k); j < n; ++j) {  // rows k..k+2
        Real proj = fma(u0, t(k, j), u1 * t(k + 1, j));
        if (three) proj = fma(u2, t(k + 2, j), proj);
        Real f = proj * two_over;
        t(k, j) -= f * u0;
        t(k + 1, j) -= f * u1;
        if (three) t(k + 2, j) -= f * u2;
      }
      const long rmax = std::min<long>(k + 3, ihi);
      for (long i = 0; i <= rmax; ++i) {  // columns k..k+2
        Real proj = fma(u0, t(i, k), u1 * t(i, k + 1));
        if (three) proj = fma(u2, t(i, k + 2), proj);
        Real f = proj * two_over;
        t(i, k) -= f * u0;
        t(i, k + 1) -= f * u1;
        if (three) t(i, k + 2) -= f * u2;
      }
      if (want_z) {
        for (std::size_t i = 0; i < n; ++i) {
          Real proj = fma(u0, z(i, k), u1 * z(i, k + 1));
          if (three) proj = fma(u2, z(i, k + 2), proj);
          Real f = proj * two_over;
          z(i, k) -= f * u0;
          z(i, k + 1) -= f * u1;
          if (three) z(i, k + 2) -= f * u2;
        }
      }
    }
  }

  // Split any remaining 2x2 block that has real eigenvalues.
  for (std::size_t p = 0; p + 1 < n; ++p) {
    if (t(p + 1, p) != 0) split_real_2x2(t, z, p, want_z);
  }
}

// Right eigenvector of the quasi-triangular T for the real eigenvalue at
// diagonal position j, by back-substitution with regularized pivots.
template <class Real>
std::vector<Real> schur_right_vector(const DenseMatrix<Real>& t, std::size_t j, const Real& smallnum) {
  const std::size_t n = t.rows();
  const Real lam = t(j, j);
  std::vector<Real> y(n, Real(0));
  y[j] = Real(1);
  long i = static_cast<long>(j) - 1;
  while (i >= 0) {
    const bool in_block = (i > 0) && (t(i, i - 1) != 0);
    if (in_block) {
      Real r1(0), r2(0);
      for (std::size_t kk = i + 1; kk <= j; ++kk) {
        r1 = fma(t(i - 1, kk), y[kk], r1);
        r2 = fma(t(i, kk), y[kk], r2);
      }
      Real a = t(i - 1, i - 1) - lam, b = t(i - 1, i);
      Real c = t(i, i - 1), d = t(i, i) - lam;
      Real det = a * d - b * c;
      if (abs(det) < smallnum * smallnum) det = (det < 0 ? -smallnum : smallnum) * smallnum;
      y[i - 1] = (-r1 * d + r2 * b) / det;
      y[i] = (-r2 * a + r1 * c) / det;
      i -= 2;
    } else {
      Real r(0);
      for (std::size_t kk = i + 1; kk <= j; ++kk) r = fma(t(i, kk), y[kk], r);
      Real dpiv = t(i, i) - lam;
      if (abs(dpiv) < smallnum) dpiv = smallnum;
      y[i] = -r / dpiv;
      --i;
    }
  }
  return y;
}

// Left eigenvector (row vector u with u T = lam u) by forward substitution.
template <class Real>
std::vector<Real> schur_left_vector(const DenseMatrix<Real>& t, std::size_t j, const Real& smallnum) {
  const std::size_t n = t.rows();
  const Real lam = t(j, j);
  std::vector<Real> u(n, Real(0));
  u[j] = Real(1);
  std::size_t i = j + 1;
  while (i < n) {
    const bool in_block = (i + 1 < n) && (t(i + 1, i) != 0);
    if (in_block) {
      Real r1(0), r2(0);
      for (std::size_t kk = j; kk < i; ++kk) {
        r1 = fma(u[kk], t(kk, i), r1);
        r2 = fma(u[kk], t(kk, i + 1), r2);
      }
      // u_i (T(i,i)-lam) + u_{i+1} T(i+1,i)   = -r1
      // u_i T(i,i+1) + u_{i+1} (T(i+1,i+1)-lam) = -r2
      Real a = t(i, i) - lam, b = t(i + 1, i);
      Real c = t(i, i + 1), d = t(i + 1, i + 1) - lam;
      Real det = a * d - b * c;
      if (abs(det) < smallnum * smallnum) det = (det < 0 ? -smallnum : smallnum) * smallnum;
      u[i] = (-r1 * d + r2 * b) / det;
      u[i + 1] = (-r2 * a + r1 * c) / det;
      i += 2;
    } else {
      Real r(0);
      for (std::size_t kk = j; kk < i; ++kk) r = fma(u[kk], t(kk, i), r);
      Real dpiv = t(i, i) - lam;
      if (abs(dpiv) < smallnum) dpiv = smallnum;
      u[i] = -r / dpiv;
      ++i;
    }
  }
  return u;
}

template <class Real>
void normalize_with_sign(std::vector<Real>& v) {
  Real nrm = norm2(v);
  if (!(nrm > 0)) return;
  Real thresh = nrm * real_eps<Real>() * 64;
  int flip = 1;
  for (const Real& x : v) {
    if (abs(x) > thresh) {
      if (x < 0) flip = -1;
      break;
    }
  }
  for (Real& x : v) x = (flip < 0) ? -x / nrm : x / nrm;
}

}  // namespace detail

/// Leading k eigenpairs (descending |value|). Right and left eigenvectors are
/// returned for real eigenvalues; complex pairs are flagged and carry no
/// vectors. Every returned real pair satisfies the residual bound
/// max-norm(T v - lam v) <= 2^(-mantissa_bits/2) * max-norm(T); same on the left.
template <class Real>
EigenDecomposition<Real> eig_dense(const DenseMatrix<Real>& m, std::size_t k,
                                   bool want_vectors = true) {
  if (m.rows() != m.cols()) throw ConfigError("eig_dense: matrix must be square");
  const std::size_t n = m.rows();
  if (k > n) throw ConfigError("eig_dense: k exceeds dimension");

  DenseMatrix<Real> t = m;
  DenseMatrix<Real> z;
  detail::hessenberg_reduce(t, z);
  detail::real_schur(t, z, want_vectors);

  struct Entry {
    std::size_t pos;
    bool is_complex;
    int pair_sign;  // +1 / -1 for the two members of a complex pair
  };
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < n;) {
    if (i + 1 < n && t(i + 1, i) != 0) {
      entries.push_back({i, true, +1});
      entries.push_back({i, true, -1});
      i += 2;
    } else {
      entries.push_back({i, false, 0});
      ++i;
    }
  }

  auto value_of = [&](const Entry& e) -> std::pair<Real, Real> {
    if (!e.is_complex) return {t(e.pos, e.pos), Real(0)};
    Real a = t(e.pos, e.pos), b = t(e.pos, e.pos + 1);
    Real c = t(e.pos + 1, e.pos), d = t(e.pos + 1, e.pos + 1);
    Real mm = (a + d) / 2;
    Real half = (a - d) / 2;
    Real disc = fma(half, half, b * c);  // < 0 for a complex block
    Real im = sqrt(abs(disc));
    return {mm, (e.pair_sign > 0) ? im : -im};
  };

  std::stable_sort(entries.begin(), entries.end(), [&](const Entry& x, const Entry& y) {
    auto [xr, xi] = value_of(x);
    auto [yr, yi] = value_of(y);
    Real xm = hypot(xr, xi), ym = hypot(yr, yi);
    if (xm != ym) return xm > ym;
    return xr > yr;
  });

  const Real anorm = m.infinity_norm();
  const Real tol = half_precision_tol<Real>();
  const Real smallnum = real_eps<Real>() * (anorm > 0 ? anorm : Real(1));

  EigenDecomposition<Real> out;
  out.pairs.reserve(k);
  for (std::size_t idx = 0; idx < k; ++idx) {
    const Entry& e = entries[idx];
    auto [re, im] = value_of(e);
    EigenPair<Real> p;
    p.value = re;
    p.imag = im;
    p.is_complex = e.is_complex;
    if (!e.is_complex && want_vectors) {
      std::vector<Real> y = detail::schur_right_vector(t, e.pos, smallnum);
      std::vector<Real> u = detail::schur_left_vector(t, e.pos, smallnum);
      p.right = matvec(z, y);
      p.left = matvec(z, u);
      detail::normalize_with_sign(p.right);
      detail::normalize_with_sign(p.left);

      std::vector<Real> rv = matvec(m, p.right);
      Real res_r(0);
      for (std::size_t i = 0; i < n; ++i) {
        Real d = abs(rv[i] - p.value * p.right[i]);
        if (d > res_r) res_r = d;
      }
      std::vector<Real> lv = vecmat(p.left, m);
      Real res_l(0);
      for (std::size_t i = 0; i < n; ++i) {
        Real d = abs(lv[i] - p.value * p.left[i]);
        if (d > res_l) res_l = d;
      }
      Real bound = tol * (anorm > 0 ? anorm : Real(1));
      if (res_r > bound || res_l > bound) {
        throw NumericError("eig_dense: eigenpair residual exceeds tolerance");
      }
    }
    out.pairs.push_back(std::move(p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// One-sided Jacobi SVD with a truncation budget on the discarded squared
// singular values. Returns the smallest-rank factorization whose discarded
// weight stays within budget; the discarded weight is reported as computed.

template <class Real>
struct SvdResult {
  DenseMatrix<Real> u;      // m x r
  std::vector<Real> sigma;  // descending
  DenseMatrix<Real> v;      // n x r
  Real discarded_weight{0};
  std::size_t full_rank = 0;  // count of nonzero singular values before truncation
};

namespace detail {

template <class Real>
void jacobi_svd_columns(DenseMatrix<Real>& u, DenseMatrix<Real>& v) {
  const std::size_t m = u.rows(), n = u.cols();
  const Real thresh = real_eps<Real>() * static_cast<double>(m + n);
  const int max_sweeps = 100;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool changed = false;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        Real p(0), qq(0), rr(0);
        for (std::size_t r = 0; r < m; ++r) {
          p = fma(u(r, i), u(r, j), p);
          qq = fma(u(r, i), u(r, i), qq);
          rr = fma(u(r, j), u(r, j), rr);
        }
        if (!(qq > 0) || !(rr > 0)) continue;
        if (abs(p) <= thresh * sqrt(qq) * sqrt(rr)) continue;
        changed = true;
        Real tau = (rr - qq) / (p * 2);
        Real tt = Real(1) / (abs(tau) + sqrt(fma(tau, tau, Real(1))));
        if (tau < 0) tt = -tt;
        Real c = Real(1) / sqrt(fma(tt, tt, Real(1)));
        Real s = c * tt;
        for (std::size_t r = 0; r < m; ++r) {
          Real x = u(r, i), y = u(r, j);
          u(r, i) = c * x - s * y;
          u(r, j) = s * x + c * y;
        }
        for (std::size_t r = 0; r < n; ++r) {
          Real x = v(r, i), y = v(r, j);
          v(r, i) = c * x - s * y;
          v(r, j) = s * x + c * y;
        }
      }
    }
    if (!changed) return;
  }
  throw NumericError("svd_truncate: Jacobi sweep limit exceeded");
}

}  // namespace detail

template <class Real>
SvdResult<Real> svd_truncate(const DenseMatrix<Real>& a, const Real& budget) {
  if (budget < 0) throw ConfigError("svd_truncate: budget must be nonnegative");
  if (a.rows() < a.cols()) {
    SvdResult<Real> t = svd_truncate(a.transposed(), budget);
    std::swap(t.u, t.v);
    return t;
  }
  const std::size_t m = a.rows(), n = a.cols();
  DenseMatrix<Real> u = a;
  DenseMatrix<Real> v = DenseMatrix<Real>::identity(n);
  detail::jacobi_svd_columns(u, v);

  std::vector<Real> sig(n, Real(0));
  for (std::size_t j = 0; j < n; ++j) {
    Real s2(0);
    for (std::size_t r = 0; r < m; ++r) s2 = fma(u(r, j), u(r, j), s2);
    sig[j] = sqrt(s2);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sig[x] > sig[y]; });

  std::size_t full_rank = 0;
  for (std::size_t j = 0; j < n; ++j)
    if (sig[order[j]] > 0) ++full_rank;

  // Discard from the smallest while the cumulative squared weight fits.
  std::size_t keep = n;
  Real cum(0);
  while (keep > 0) {
    const Real& s = sig[order[keep - 1]];
    Real next = fma(s, s, cum);
    if (next <= budget) {
      cum = next;
      --keep;
    } else {
      break;
    }
  }

  SvdResult<Real> out;
  out.discarded_weight = cum;
  out.full_rank = full_rank;
  out.u = DenseMatrix<Real>(m, keep);
  out.v = DenseMatrix<Real>(n, keep);
  out.sigma.reserve(keep);
  for (std::size_t jj = 0; jj < keep; ++jj) {
    std::size_t src = order[jj];
    out.sigma.push_back(sig[src]);
    for (std::size_t r = 0; r < m; ++r) out.u(r, jj) = u(r, src) / sig[src];
    for (std::size_t r = 0; r < n; ++r) out.v(r, jj) = v(r, src);
  }
  return out;
}

// ---------------------------------------------------------------------------

template <class Real>
struct LinearFit {
  Real slope;
  Real intercept;
};

/// Ordinary least squares y = slope*x + intercept.
template <class Real>
LinearFit<Real> linear_fit(const std::vector<Real>& xs, const std::vector<Real>& ys) {
  if (xs.size() != ys.size()) throw ConfigError("linear_fit: length mismatch");
  const std::size_t n = xs.size();
  if (n < 2) throw ConfigError("linear_fit: need at least two points");
  Real xm(0), ym(0);
  for (std::size_t i = 0; i < n; ++i) {
    xm += xs[i];
    ym += ys[i];
  }
  xm /= static_cast<double>(n);
  ym /= static_cast<double>(n);
  Real sxx(0), sxy(0), xscale(0);
  for (std::size_t i = 0; i < n; ++i) {
    Real dx = xs[i] - xm;
    sxx = fma(dx, dx, sxx);
    sxy = fma(dx, ys[i] - ym, sxy);
    xscale = fma(xs[i], xs[i], xscale);
  }
  if (!(sxx > real_eps<Real>() * (xscale + Real(1)))) {
    throw NumericError("linear_fit: degenerate abscissas");
  }
  LinearFit<Real> f;
  f.slope = sxy / sxx;
  f.intercept = ym - f.slope * xm;
  return f;
}

}  // namespace xebstat
