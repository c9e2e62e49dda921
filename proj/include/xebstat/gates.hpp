#pragma once

#include <string>
#include <utility>

#include "xebstat/bigfloat.hpp"
#include "xebstat/complexmat.hpp"
#include "xebstat/errors.hpp"

// Two-qubit gate calculus: canonical angles, Makhlin-style local invariants,
// the two statistical-model parameters (alpha: entangling, beta: swapping),
// and the admissible (alpha, beta) region with its boundary families.
// All formulas here are for qubits (q = 2); the Haar point (alpha=1, beta=0)
// holds for any qudit dimension.

namespace xebstat {

/// Canonical two-qubit gate: angles (c1, c2, c3) in radians.
template <class Real>
struct CanonicalGate {
  Real c1, c2, c3;
};

/// Local invariants: |G1| in [0,1] and G2 in [-3,3].
template <class Real>
struct GateInvariants {
  Real abs_g1;
  Real g2;
};

/// Statistical-model gate parameters.
template <class Real>
struct GateStatParams {
  Real alpha;
  Real beta;
  int q = 2;
};

/// The same parameters in the {I, Omega} normalization.
template <class Real>
struct GaoBasisParams {
  Real D;
  Real R;
  Real eta;
};

template <class Real>
GateInvariants<Real> invariants_from_canonical(const CanonicalGate<Real>& g) {
  Real x = cos(g.c1 * 2), y = cos(g.c2 * 2), z = cos(g.c3 * 2);
  GateInvariants<Real> inv;
  inv.abs_g1 = (Real(1) + x * y + y * z + z * x) / 4;
  inv.g2 = x + y + z;
  return inv;
}

/// The 4x4 unitary of the canonical gate in the computational basis.
template <class Real>
ComplexMatrix<Real> canonical_unitary(const CanonicalGate<Real>& g) {
  Real cm = (g.c1 - g.c2) / 2;
  Real cp = (g.c1 + g.c2) / 2;
  Complex<Real> e3(cos(g.c3), sin(g.c3));
  ComplexMatrix<Real> u(4, 4);
  u(0, 0) = Complex<Real>(cos(cm), Real(0));
  u(0, 3) = Complex<Real>(Real(0), -sin(cm));
  u(3, 0) = Complex<Real>(Real(0), -sin(cm));
  u(3, 3) = Complex<Real>(cos(cm), Real(0));
  u(1, 1) = Complex<Real>(cos(cp), Real(0)) * e3;
  u(1, 2) = Complex<Real>(Real(0), -sin(cp)) * e3;
  u(2, 1) = Complex<Real>(Real(0), -sin(cp)) * e3;
  u(2, 2) = Complex<Real>(cos(cp), Real(0)) * e3;
  return u;
}

namespace detail {

/// Magic (Bell-like) basis transform Q; columns are the magic basis states.
template <class Real>
ComplexMatrix<Real> magic_basis() {
  ComplexMatrix<Real> q(4, 4);
  Real s = sqrt(Real(2)) / 2;
  // |m0> = (|00>+|11>)/sqrt2, |m1> = -i(|00>-|11>)/sqrt2,
  // |m2> = -i(|01>+|10>)/sqrt2, |m3> = (|01>-|10>)/sqrt2.
  q(0, 0) = Complex<Real>(s, Real(0));
  q(3, 0) = Complex<Real>(s, Real(0));
  q(0, 1) = Complex<Real>(Real(0), -s);
  q(3, 1) = Complex<Real>(Real(0), s);
  q(1, 2) = Complex<Real>(Real(0), -s);
  q(2, 2) = Complex<Real>(Real(0), -s);
  q(1, 3) = Complex<Real>(s, Real(0));
  q(2, 3) = Complex<Real>(-s, Real(0));
  return q;
}

}  // namespace detail

/// Local invariants of an arbitrary 4x4 unitary via the magic-basis
/// construction: with m = (Q^dag U Q)^T (Q^dag U Q),
/// G1 = tr(m)^2 / (16 det U) and G2 = (tr(m)^2 - tr(m^2)) / (4 det U).
/// Throws if U is not unitary to 1e-12 relative.
template <class Real>
GateInvariants<Real> invariants_from_unitary(const ComplexMatrix<Real>& u) {
  if (u.rows() != 4 || u.cols() != 4) throw ConfigError("invariants_from_unitary: need a 4x4 matrix");
  ComplexMatrix<Real> gram = u.adjoint() * u;
  ComplexMatrix<Real> eye = ComplexMatrix<Real>::identity(4);
  Real dev(0);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      Real d = abs(gram(i, j) - eye(i, j));
      if (d > dev) dev = d;
    }
  Real scale = u.max_abs();
  if (dev > Real(1e-12) * (scale > 0 ? scale : Real(1))) {
    throw ConfigError("invariants_from_unitary: input is not unitary to 1e-12");
  }

  ComplexMatrix<Real> q = detail::magic_basis<Real>();
  ComplexMatrix<Real> ub = q.adjoint() * u * q;
  ComplexMatrix<Real> m = ub.transposed() * ub;
  Complex<Real> tr = m.trace();
  Complex<Real> tr2 = (m * m).trace();
  Complex<Real> det = determinant(u);
  Complex<Real> g1 = (tr * tr) / (det * Real(16));
  Complex<Real> g2c = (tr * tr - tr2) / (det * Real(4));
  GateInvariants<Real> inv;
  inv.abs_g1 = abs(g1);
  inv.g2 = g2c.re;  // real for unitary input; imaginary part is rounding noise
  return inv;
}

template <class Real>
GateStatParams<Real> stat_params_from_invariants(const GateInvariants<Real>& inv) {
  GateStatParams<Real> p;
  p.alpha = (Real(1) - inv.abs_g1) * 10 / 9;
  p.beta = Real(-1) / 18 - inv.g2 / 6 + inv.abs_g1 * 5 / 9;
  return p;
}

template <class Real>
GateStatParams<Real> haar_stat_params() {
  return {Real(1), Real(0), 2};
}

/// fSim(theta, phi) family.
template <class Real>
GateStatParams<Real> fsim_params(const Real& theta, const Real& phi) {
  Real c4t = cos(theta * 4), c2t = cos(theta * 2), cp = cos(phi);
  GateStatParams<Real> p;
  p.alpha = (Real(5) - c4t - c2t * cp * 4) * 5 / 36;
  p.beta = (Real(11) + c4t * 5 - c2t * 24 + c2t * cp * 20 - cp * 12) / 72;
  return p;
}

/// Canonical angles realizing fSim(theta, phi) up to single-qubit gates.
template <class Real>
CanonicalGate<Real> fsim_canonical(const Real& theta, const Real& phi) {
  return {theta, theta, phi / 2};
}

/// Perfect entanglers PE(phi): maximal entangling power (|G1| = 0).
template <class Real>
GateStatParams<Real> pe_params(const Real& phi) {
  GateStatParams<Real> p;
  p.alpha = Real(10) / 9;
  p.beta = (Real(-1) + cos(phi * 4) * 3) / 18;
  return p;
}

template <class Real>
CanonicalGate<Real> pe_canonical(const Real& phi) {
  Real pi = atan(Real(1)) * 4;
  return {pi / 2, phi * 2 - pi / 2, Real(0)};
}

/// Composing with SWAP: alpha' = alpha, beta' = 1 - alpha - beta.
template <class Real>
GateStatParams<Real> swap_compose(const GateStatParams<Real>& p) {
  return {p.alpha, Real(1) - p.alpha - p.beta, p.q};
}

enum class RegionClass { interior, on_boundary, outside };

struct RegionCheck {
  RegionClass cls;
  bool on_lower = false;     // beta = -alpha/5
  bool on_upper = false;     // beta = 1 - 4 alpha/5
  bool on_parabola = false;  // beta + alpha/5 = (beta + alpha/2)^2
};

inline const char* region_name(RegionClass c) {
  switch (c) {
    case RegionClass::interior: return "interior";
    case RegionClass::on_boundary: return "on_boundary";
    default: return "outside";
  }
}

/// Membership in the admissible (alpha, beta) region for q = 2:
/// beta >= -alpha/5, beta <= 1 - 4 alpha/5, beta + alpha/5 <= (beta + alpha/2)^2.
template <class Real>
RegionCheck region_check(const GateStatParams<Real>& p, double tol = 1e-12) {
  Real t = real_from<Real>(tol);
  Real lower = p.beta + p.alpha / 5;                    // >= 0
  Real upper = Real(1) - p.alpha * 4 / 5 - p.beta;      // >= 0
  Real mid = p.beta + p.alpha / 2;
  Real parab = mid * mid - p.beta - p.alpha / 5;        // >= 0
  RegionCheck r;
  bool out = (lower < -t) || (upper < -t) || (parab < -t);
  r.on_lower = abs(lower) <= t;
  r.on_upper = abs(upper) <= t;
  r.on_parabola = abs(parab) <= t;
  if (out) {
    r.cls = RegionClass::outside;
  } else if (r.on_lower || r.on_upper || r.on_parabola) {
    r.cls = RegionClass::on_boundary;
  } else {
    r.cls = RegionClass::interior;
  }
  return r;
}

template <class Real>
GaoBasisParams<Real> gao_basis(const GateStatParams<Real>& p) {
  Real q2 = Real(p.q) * p.q;
  GaoBasisParams<Real> g;
  g.D = p.alpha * q2 / (q2 + 1) + p.beta;
  g.R = p.alpha * (q2 - 1) / (q2 + 1);
  g.eta = q2 - 1;
  return g;
}

/// A fixed gate whose update rules coincide with the Haar average:
/// c1 = pi/4, c2 = -atan(sqrt(2/3))/2, c3 = pi/2 + c2.
template <class Real>
CanonicalGate<Real> haar_lookalike_gate() {
  Real pi = atan(Real(1)) * 4;
  Real c2 = -atan(sqrt(Real(2) / 3)) / 2;
  return {pi / 4, c2, pi / 2 + c2};
}

/// Entangling power e_p = 2(1 - |G1|)/9 = alpha/5.
template <class Real>
Real entangling_power(const GateInvariants<Real>& inv) {
  return (Real(1) - inv.abs_g1) * 2 / 9;
}

}  // namespace xebstat
