#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "xebstat/bigfloat.hpp"
#include "xebstat/complexmat.hpp"
#include "xebstat/errors.hpp"
#include "xebstat/linalg.hpp"

// Single-qudit noise channels in Kraus form and their statistical-model
// parameters. The two-copy contractions Y1, Y2 and the nonunitality mu are
// evaluated by building the q^2 x q^2 two-copy operators explicitly and
// tracing against SWAP, which works for any CPTP channel.

namespace xebstat {

template <class Real>
struct KrausChannel {
  int q = 2;
  std::vector<ComplexMatrix<Real>> ops;
};

/// Channel summary (r: average infidelity, u: unitarity, mu: nonunitality)
/// and the derived update parameters.
template <class Real>
struct NoiseStatParams {
  int q = 2;
  Real r{0};
  Real u{1};
  Real mu{0};
  Real y1{0};
  Real y2{0};
  Real gamma1{0};
  Real gamma2{0};
  Real delta2{0};
  Real epsilon{0};
};

namespace detail {

/// SWAP operator between the two copies, in the (copy1 x copy2) product basis.
template <class Real>
ComplexMatrix<Real> swap_operator(int q) {
  std::size_t d = static_cast<std::size_t>(q);
  ComplexMatrix<Real> s(d * d, d * d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) s(i * d + j, j * d + i) = Complex<Real>(Real(1), Real(0));
  return s;
}

/// Noise on copy 1 only: sum_a (K_a x I) O (K_a x I)^dag.
template <class Real>
ComplexMatrix<Real> one_copy_apply(const KrausChannel<Real>& ch, const ComplexMatrix<Real>& o) {
  std::size_t d = static_cast<std::size_t>(ch.q);
  ComplexMatrix<Real> eye = ComplexMatrix<Real>::identity(d);
  ComplexMatrix<Real> acc(d * d, d * d);
  for (const auto& k : ch.ops) {
    ComplexMatrix<Real> ki = kron(k, eye);
    acc = acc + ki * o * ki.adjoint();
  }
  return acc;
}

/// Noise on both copies: sum_{a,b} (K_a x K_b) O (K_a x K_b)^dag.
template <class Real>
ComplexMatrix<Real> two_copy_apply(const KrausChannel<Real>& ch, const ComplexMatrix<Real>& o) {
  std::size_t d = static_cast<std::size_t>(ch.q);
  ComplexMatrix<Real> acc(d * d, d * d);
  for (const auto& ka : ch.ops)
    for (const auto& kb : ch.ops) {
      ComplexMatrix<Real> kk = kron(ka, kb);
      acc = acc + kk * o * kk.adjoint();
    }
  return acc;
}

template <class Real>
Real trace_against_swap(const ComplexMatrix<Real>& o, int q) {
  ComplexMatrix<Real> s = swap_operator<Real>(q);
  Complex<Real> t = (o * s).trace();
  return t.re;
}

}  // namespace detail

template <class Real>
void check_completeness(const KrausChannel<Real>& ch, double tol = 1e-12) {
  std::size_t d = static_cast<std::size_t>(ch.q);
  if (ch.ops.empty()) throw ConfigError("KrausChannel: no operators");
  ComplexMatrix<Real> acc(d, d);
  for (const auto& k : ch.ops) {
    if (k.rows() != d || k.cols() != d) throw ConfigError("KrausChannel: operator size mismatch");
    acc = acc + k.adjoint() * k;
  }
  ComplexMatrix<Real> eye = ComplexMatrix<Real>::identity(d);
  Real dev(0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      Real e = abs(acc(i, j) - eye(i, j));
      if (e > dev) dev = e;
    }
  if (dev > real_from<Real>(tol)) {
    throw ConfigError("KrausChannel: completeness sum_a K^dag K = I violated");
  }
}

/// Y1 = Tr(N1(SWAP) SWAP), Y2 = Tr(N2(SWAP) SWAP), mu from Tr(N2(I) SWAP) = q + mu;
/// then r = (q - Y1/q)/(q+1), u = (Y2 + mu - 1)/(q^2-1), gamma1 = q r/(q-1),
/// gamma2 = 1 - u + mu/(q^2-1), delta2 = mu/(q(q^2-1)), epsilon = (1 - q^-2) gamma1.
template <class Real>
NoiseStatParams<Real> stat_params_from_kraus(const KrausChannel<Real>& ch) {
  check_completeness(ch);
  const Real q(static_cast<long>(ch.q));
  ComplexMatrix<Real> swap = detail::swap_operator<Real>(ch.q);
  ComplexMatrix<Real> eye2 = ComplexMatrix<Real>::identity(static_cast<std::size_t>(ch.q) *
                                                           static_cast<std::size_t>(ch.q));
  NoiseStatParams<Real> p;
  p.q = ch.q;
  p.y1 = detail::trace_against_swap(detail::one_copy_apply(ch, swap), ch.q);
  p.y2 = detail::trace_against_swap(detail::two_copy_apply(ch, swap), ch.q);
  p.mu = detail::trace_against_swap(detail::two_copy_apply(ch, eye2), ch.q) - q;
  Real q2m1 = q * q - 1;
  p.r = (q - p.y1 / q) / (q + 1);
  p.u = (p.y2 + p.mu - 1) / q2m1;
  p.gamma1 = q * p.r / (q - 1);
  p.gamma2 = Real(1) - p.u + p.mu / q2m1;
  p.delta2 = p.mu / (q * q2m1);
  p.epsilon = (Real(1) - Real(1) / (q * q)) * p.gamma1;
  return p;
}

/// One-copy noise update in the {I/q^2, SWAP/q} basis.
template <class Real>
DenseMatrix<Real> one_copy_update(const NoiseStatParams<Real>& p) {
  DenseMatrix<Real> n(2, 2);
  n(0, 0) = Real(1);
  n(0, 1) = p.gamma1;
  n(1, 1) = Real(1) - p.gamma1;
  return n;
}

/// Two-copy noise update [[1-delta2, gamma2], [delta2, 1-gamma2]].
template <class Real>
DenseMatrix<Real> two_copy_update(const NoiseStatParams<Real>& p) {
  DenseMatrix<Real> n(2, 2);
  n(0, 0) = Real(1) - p.delta2;
  n(0, 1) = p.gamma2;
  n(1, 0) = p.delta2;
  n(1, 1) = Real(1) - p.gamma2;
  return n;
}

/// gamma = epsilon / (1 - q^-2); epsilon must lie in [0, 1 - q^-2].
template <class Real>
Real gamma_from_epsilon(const Real& epsilon, int q) {
  Real qq(static_cast<long>(q));
  Real cap = Real(1) - Real(1) / (qq * qq);
  if (epsilon < 0 || epsilon > cap) {
    throw ConfigError("gamma_from_epsilon: epsilon out of range [0, 1 - q^-2]");
  }
  return epsilon / cap;
}

/// Two-copy gamma of a white-noise (depolarizing-like) channel with
/// one-copy decay gamma: gamma2 = 1 - (1 - gamma)^2, valid for any q.
template <class Real>
Real gamma2_white(const Real& gamma) {
  Real keep = Real(1) - gamma;
  return Real(1) - keep * keep;
}

// --- Named channel constructors (qubit families) ---------------------------

template <class Real>
KrausChannel<Real> identity_channel(int q = 2) {
  KrausChannel<Real> ch;
  ch.q = q;
  ch.ops.push_back(ComplexMatrix<Real>::identity(static_cast<std::size_t>(q)));
  return ch;
}

/// Depolarizing(p): Kraus {sqrt(1-3p/4) I, sqrt(p/4) X, sqrt(p/4) Y, sqrt(p/4) Z}.
template <class Real>
KrausChannel<Real> depolarizing_channel(const Real& p) {
  if (p < 0 || p > Real(4) / 3) throw ConfigError("depolarizing: p out of range [0, 4/3]");
  KrausChannel<Real> ch;
  ch.q = 2;
  Real w0 = sqrt(Real(1) - p * 3 / 4);
  Real w = sqrt(p / 4);
  ComplexMatrix<Real> k0(2, 2), kx(2, 2), ky(2, 2), kz(2, 2);
  k0(0, 0) = Complex<Real>(w0, Real(0));
  k0(1, 1) = Complex<Real>(w0, Real(0));
  kx(0, 1) = Complex<Real>(w, Real(0));
  kx(1, 0) = Complex<Real>(w, Real(0));
  ky(0, 1) = Complex<Real>(Real(0), -w);
  ky(1, 0) = Complex<Real>(Real(0), w);
  kz(0, 0) = Complex<Real>(w, Real(0));
  kz(1, 1) = Complex<Real>(-w, Real(0));
  ch.ops = {k0, kx, ky, kz};
  return ch;
}

/// Dephasing(p): phase flip with probability p.
template <class Real>
KrausChannel<Real> dephasing_channel(const Real& p) {
  if (p < 0 || p > 1) throw ConfigError("dephasing: p out of range [0, 1]");
  KrausChannel<Real> ch;
  ch.q = 2;
  Real w0 = sqrt(Real(1) - p), w1 = sqrt(p);
  ComplexMatrix<Real> k0(2, 2), k1(2, 2);
  k0(0, 0) = Complex<Real>(w0, Real(0));
  k0(1, 1) = Complex<Real>(w0, Real(0));
  k1(0, 0) = Complex<Real>(w1, Real(0));
  k1(1, 1) = Complex<Real>(-w1, Real(0));
  ch.ops = {k0, k1};
  return ch;
}

/// Amplitude damping(eta).
template <class Real>
KrausChannel<Real> amplitude_damping_channel(const Real& eta) {
  if (eta < 0 || eta > 1) throw ConfigError("ampdamp: eta out of range [0, 1]");
  KrausChannel<Real> ch;
  ch.q = 2;
  ComplexMatrix<Real> k0(2, 2), k1(2, 2);
  k0(0, 0) = Complex<Real>(Real(1), Real(0));
  k0(1, 1) = Complex<Real>(sqrt(Real(1) - eta), Real(0));
  k1(0, 1) = Complex<Real>(sqrt(eta), Real(0));
  ch.ops = {k0, k1};
  return ch;
}

}  // namespace xebstat
