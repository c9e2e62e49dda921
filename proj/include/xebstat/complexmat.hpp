#pragma once

#include <cstddef>
#include <vector>

#include "xebstat/bigfloat.hpp"
#include "xebstat/errors.hpp"

// Minimal complex arithmetic over the templated real scalar. std::complex is
// only specified for built-in floating types, so the few operations needed
// for gate invariants and Kraus contractions are spelled out here.

namespace xebstat {

template <class Real>
struct Complex {
  Real re{0};
  Real im{0};

  Complex() = default;
  Complex(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}
  explicit Complex(Real r) : re(std::move(r)), im(Real(0)) {}

  friend Complex operator+(const Complex& a, const Complex& b) { return {a.re + b.re, a.im + b.im}; }
  friend Complex operator-(const Complex& a, const Complex& b) { return {a.re - b.re, a.im - b.im}; }
  friend Complex operator-(const Complex& a) { return {-a.re, -a.im}; }
  friend Complex operator*(const Complex& a, const Complex& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend Complex operator*(const Complex& a, const Real& s) { return {a.re * s, a.im * s}; }
  friend Complex operator/(const Complex& a, const Complex& b) {
    Real d = fma(b.re, b.re, b.im * b.im);
    return {fma(a.re, b.re, a.im * b.im) / d, fma(a.im, b.re, -(a.re * b.im)) / d};
  }
  Complex& operator+=(const Complex& b) {
    re += b.re;
    im += b.im;
    return *this;
  }
};

template <class Real>
Complex<Real> conj(const Complex<Real>& a) {
  return {a.re, -a.im};
}

template <class Real>
Real abs2(const Complex<Real>& a) {
  return fma(a.re, a.re, a.im * a.im);
}

template <class Real>
Real abs(const Complex<Real>& a) {
  return hypot(a.re, a.im);
}

template <class Real>
class ComplexMatrix {
 public:
  ComplexMatrix() : rows_(0), cols_(0) {}
  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), a_(rows * cols, Complex<Real>()) {}

  static ComplexMatrix identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = Complex<Real>(Real(1), Real(0));
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Complex<Real>& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  const Complex<Real>& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  ComplexMatrix adjoint() const {
    ComplexMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = conj((*this)(i, j));
    return t;
  }

  ComplexMatrix transposed() const {
    ComplexMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  Complex<Real> trace() const {
    Complex<Real> t;
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
  }

  Real max_abs() const {
    Real best(0);
    for (const auto& x : a_) {
      Real v = abs(x);
      if (v > best) best = v;
    }
    return best;
  }

 private:
  std::size_t rows_, cols_;
  std::vector<Complex<Real>> a_;
};

template <class Real>
ComplexMatrix<Real> operator*(const ComplexMatrix<Real>& a, const ComplexMatrix<Real>& b) {
  if (a.cols() != b.rows()) throw ConfigError("ComplexMatrix: dimension mismatch in product");
  ComplexMatrix<Real> c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Complex<Real>& aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

template <class Real>
ComplexMatrix<Real> operator+(const ComplexMatrix<Real>& a, const ComplexMatrix<Real>& b) {
  ComplexMatrix<Real> c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) + b(i, j);
  return c;
}

template <class Real>
ComplexMatrix<Real> kron(const ComplexMatrix<Real>& a, const ComplexMatrix<Real>& b) {
  ComplexMatrix<Real> c(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l)
          c(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return c;
}

/// Determinant via LU with partial pivoting (abs2 pivot selection).
template <class Real>
Complex<Real> determinant(const ComplexMatrix<Real>& m_in) {
  if (m_in.rows() != m_in.cols()) throw ConfigError("determinant: matrix must be square");
  ComplexMatrix<Real> m = m_in;
  const std::size_t n = m.rows();
  Complex<Real> det(Real(1), Real(0));
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    Real best = abs2(m(col, col));
    for (std::size_t r = col + 1; r < n; ++r) {
      Real v = abs2(m(r, col));
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (!(best > 0)) return Complex<Real>(Real(0), Real(0));
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(piv, j), m(col, j));
      det = -det;
    }
    det = det * m(col, col);
    for (std::size_t r = col + 1; r < n; ++r) {
      Complex<Real> f = m(r, col) / m(col, col);
      for (std::size_t j = col; j < n; ++j) m(r, j) = m(r, j) - f * m(col, j);
    }
  }
  return det;
}

}  // namespace xebstat
