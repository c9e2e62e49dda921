#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "xebstat/bigfloat.hpp"
#include "xebstat/errors.hpp"
#include "xebstat/linalg.hpp"
#include "xebstat/statmech.hpp"

// Permutation-symmetric (all-to-all) engine. The state reduces to the total
// probability p_S per Hamming sector S, evolved by the (N+1)x(N+1) transfer
// T_red = N_red(gamma) * M_red(alpha). M_red does not depend on beta.

namespace xebstat {

using boost::multiprecision::cpp_int;

namespace detail {

inline cpp_int binomial_int(long n, long k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  cpp_int r = 1;
  for (long i = 1; i <= k; ++i) {
    r *= (n - k + i);
    r /= i;
  }
  return r;
}

/// n! / (a! b! c!) with a + b + c = n.
inline cpp_int trinomial_int(long n, long a, long b, long /*c*/) {
  return binomial_int(n, a) * binomial_int(n - a, b);
}

/// Exact conversion of a nonnegative integer into the active precision
/// (exact while the integer fits the mantissa; rounded otherwise).
template <class Real>
Real from_cpp_int(const cpp_int& x) {
  cpp_int v = x < 0 ? cpp_int(-x) : x;
  std::vector<std::uint64_t> limbs;
  while (v > 0) {
    limbs.push_back(static_cast<std::uint64_t>(v & 0xFFFFFFFFFFFFFFFFull));
    v >>= 64;
  }
  Real acc(0);
  Real base = real_from<Real>(65536.0);  // 2^16
  Real big = base * base * base * base;  // 2^64, exact
  for (std::size_t i = limbs.size(); i-- > 0;) {
    acc = acc * big + Real(static_cast<unsigned long>(limbs[i]));
  }
  return x < 0 ? -acc : acc;
}

}  // namespace detail

template <class Real>
struct ReducedState {
  int n_sites = 0;
  int q = 2;
  std::vector<Real> p;  // length N+1, indexed by Hamming weight S
};

template <class Real>
ReducedState<Real> reduced_initial_state(int n_sites, int q) {
  if (n_sites <= 0 || n_sites % 2 != 0) throw ConfigError("reduced_initial_state: N must be even");
  ReducedState<Real> s;
  s.n_sites = n_sites;
  s.q = q;
  s.p.assign(n_sites + 1, Real(0));
  Real qr(static_cast<long>(q));
  Real denom = pow_int(qr + 1, n_sites);
  for (int w = 0; w <= n_sites; ++w) {
    s.p[w] = detail::from_cpp_int<Real>(detail::binomial_int(n_sites, w)) *
             pow_int(qr, n_sites - w) / denom;
  }
  return s;
}

/// Permutation-averaged gate layer in the Hamming basis: the multinomial sum
/// over gates seeing 0/1/2 SWAP sites (n0, n1, n2) and, for the n1 single-SWAP
/// gates, outcomes (a, b, c) producing 0/1/2 SWAP sites with weights
/// (q^2 a/(q^2+1))^a (1-a)^b (a/(q^2+1))^c. Exact integer combinatorics,
/// converted to the active precision.
template <class Real>
DenseMatrix<Real> reduced_gate_matrix(int n_sites, int q, const Real& alpha) {
  if (n_sites <= 0 || n_sites % 2 != 0) throw ConfigError("reduced_gate_matrix: N must be even");
  const long half = n_sites / 2;
  Real q2 = Real(static_cast<long>(q)) * static_cast<long>(q);
  Real pa = alpha * q2 / (q2 + 1);   // one SWAP destroyed
  Real pb = Real(1) - alpha;         // one SWAP kept
  Real pc = alpha / (q2 + 1);        // one SWAP duplicated
  std::vector<Real> pa_pow(half + 1, Real(1)), pb_pow(half + 1, Real(1)), pc_pow(half + 1, Real(1));
  for (long i = 1; i <= half; ++i) {
    pa_pow[i] = pa_pow[i - 1] * pa;
    pb_pow[i] = pb_pow[i - 1] * pb;
    pc_pow[i] = pc_pow[i - 1] * pc;
  }

  DenseMatrix<Real> m(n_sites + 1, n_sites + 1);
  for (long s = 0; s <= n_sites; ++s) {
    for (long n2 = 0; n2 <= std::min<long>(s / 2, half); ++n2) {
      long n1 = s - 2 * n2;
      long n0 = half - n1 - n2;
      if (n1 < 0 || n0 < 0) continue;
      cpp_int w_gate = detail::trinomial_int(half, n0, n1, n2) * (cpp_int(1) << n1);
      for (long b = 0; b <= n1; ++b) {
        for (long c = 0; c + b <= n1; ++c) {
          long a = n1 - b - c;
          long sp = b + 2 * c + 2 * n2;
          cpp_int w = w_gate * detail::trinomial_int(n1, a, b, c);
          Real term = detail::from_cpp_int<Real>(w) * pa_pow[a] * pb_pow[b] * pc_pow[c];
          m(sp, s) += term;
        }
      }
    }
    Real norm = detail::from_cpp_int<Real>(detail::binomial_int(n_sites, s));
    for (long sp = 0; sp <= n_sites; ++sp) m(sp, s) /= norm;
  }
  return m;
}

/// Noise layer in the Hamming basis: N[S'][S] = C(S,S') (1-g)^S' g^(S-S').
template <class Real>
DenseMatrix<Real> reduced_noise_matrix(int n_sites, const Real& gamma) {
  if (gamma < 0 || gamma > 1) throw ConfigError("reduced_noise_matrix: gamma out of [0,1]");
  DenseMatrix<Real> n(n_sites + 1, n_sites + 1);
  std::vector<Real> keep_pow(n_sites + 1, Real(1)), decay_pow(n_sites + 1, Real(1));
  Real keep = Real(1) - gamma;
  for (int i = 1; i <= n_sites; ++i) {
    keep_pow[i] = keep_pow[i - 1] * keep;
    decay_pow[i] = decay_pow[i - 1] * gamma;
  }
  for (int s = 0; s <= n_sites; ++s)
    for (int sp = 0; sp <= s; ++sp)
      n(sp, s) = detail::from_cpp_int<Real>(detail::binomial_int(s, sp)) * keep_pow[sp] *
                 decay_pow[s - sp];
  return n;
}

template <class Real>
DenseMatrix<Real> reduced_transfer(int n_sites, int q, const Real& alpha, const Real& gamma) {
  return mat_mul(reduced_noise_matrix(n_sites, gamma), reduced_gate_matrix(n_sites, q, alpha));
}

/// Observable contraction vectors in the Hamming basis:
/// fidelity F_S = q^(2S-N), collision X_S = q^(S-N), trace = 1.
template <class Real>
std::vector<Real> reduced_observable_vector(ObsKind kind, int n_sites, int q) {
  std::vector<Real> v(n_sites + 1, Real(1));
  Real qr(static_cast<long>(q));
  for (int s = 0; s <= n_sites; ++s) {
    switch (kind) {
      case ObsKind::fidelity: v[s] = pow_int(qr, 2 * s - n_sites); break;
      case ObsKind::xeb: v[s] = pow_int(qr, s - n_sites); break;
      case ObsKind::trace: v[s] = Real(1); break;
    }
  }
  return v;
}

template <class Real>
Real reduced_contract(const ReducedState<Real>& s, ObsKind kind) {
  std::vector<Real> v = reduced_observable_vector<Real>(kind, s.n_sites, s.q);
  return dot(v, s.p);
}

// --- Evolution ---------------------------------------------------------------

struct EvolveOptions {
  int depth = 100;
  bool stop_when_saturated = false;  // stop once F < 2 q^-N
  double plateau_rel_tol = 1e-4;
  int plateau_window = 5;
};

/// Evolve the reduced state for `depth` layers, recording per-depth
/// observables. A parallel gamma = 0 run provides the noiseless collision
/// reference for chi_B; a parallel run at gamma2 provides the noisy
/// collision-probability column (valid for unital two-copy noise).
template <class Real>
DecayTrace<Real> evolve_reduced(int n_sites, int q, const Real& alpha, const Real& gamma,
                                const Real& gamma2, const EvolveOptions& opt) {
  DenseMatrix<Real> m_red = reduced_gate_matrix(n_sites, q, alpha);
  DenseMatrix<Real> t = mat_mul(reduced_noise_matrix(n_sites, gamma), m_red);
  DenseMatrix<Real> t2 = mat_mul(reduced_noise_matrix(n_sites, gamma2), m_red);

  ReducedState<Real> st = reduced_initial_state<Real>(n_sites, q);
  std::vector<Real> p = st.p, p_ref = st.p, p_z = st.p;

  std::vector<Real> vf = reduced_observable_vector<Real>(ObsKind::fidelity, n_sites, q);
  std::vector<Real> vx = reduced_observable_vector<Real>(ObsKind::xeb, n_sites, q);
  Real qn = pow_int(Real(static_cast<long>(q)), n_sites);
  Real sat = Real(2) / qn;
  Real cons_tol = half_precision_tol<Real>();

  DecayTrace<Real> tr;
  auto record = [&](int d) {
    DecayRow<Real> row;
    row.depth = d;
    row.fidelity = dot(vf, p);
    Real x = dot(vx, p);
    row.chi = qn * x - 1;
    Real z_ref = dot(vx, p_ref);
    row.chi_b = row.chi / (qn * z_ref - 1);
    row.z_noisy = dot(vx, p_z);
    row.f_shifted = qn * row.fidelity - 1;
    tr.rows.push_back(std::move(row));
  };
  record(0);

  for (int d = 1; d <= opt.depth; ++d) {
    p = matvec(t, p);
    p_ref = matvec(m_red, p_ref);
    p_z = matvec(t2, p_z);
    Real total(0);
    for (const Real& w : p) total += w;
    if (abs(total - 1) > cons_tol) throw NumericError("evolve_reduced: trace drifted");
    record(d);
    DecayRow<Real>& prev = tr.rows[tr.rows.size() - 2];
    if (prev.chi > 0 && tr.rows.back().chi > 0) {
      prev.has_dlnchi = true;
      prev.dlnchi = log(tr.rows.back().chi / prev.chi);
    } else if (tr.rows.back().chi <= 0) {
      tr.chi_truncated = true;
      break;
    }
    if (tr.rows.back().fidelity < sat) {
      tr.saturated = true;
      if (opt.stop_when_saturated) break;
    }
  }
  detect_plateau(tr, opt.plateau_rel_tol, opt.plateau_window);
  return tr;
}

// --- Spectra -------------------------------------------------------------------

template <class Real>
struct LabeledEigenvalue {
  Real value{0};
  Real imag{0};
  bool is_complex = false;
  char sector = '0';  // 'I': low Hamming weight, 'S': extensive
  Real mean_weight{0};
  std::vector<Real> right, left;
};

template <class Real>
struct ReducedSpectrum {
  int n_sites = 0;
  std::vector<LabeledEigenvalue<Real>> eigs;  // descending |value|
  CouplingConstants<Real> couplings;          // per eigenvalue, w.r.t. the initial state
};

/// Leading k eigenpairs of T_red with sector labels (mean Hamming weight of
/// the right eigenvector against the N/2 threshold) and coupling constants.
template <class Real>
ReducedSpectrum<Real> reduced_spectrum(const DenseMatrix<Real>& t_red, std::size_t k, int n_sites,
                                       int q) {
  if (t_red.rows() != static_cast<std::size_t>(n_sites + 1)) {
    throw ConfigError("reduced_spectrum: transfer size mismatch");
  }
  EigenDecomposition<Real> eig = eig_dense(t_red, k);
  ReducedSpectrum<Real> out;
  out.n_sites = n_sites;
  std::vector<Real> vf = reduced_observable_vector<Real>(ObsKind::fidelity, n_sites, q);
  std::vector<Real> vx = reduced_observable_vector<Real>(ObsKind::xeb, n_sites, q);
  ReducedState<Real> rho0 = reduced_initial_state<Real>(n_sites, q);
  out.couplings = coupling_constants(eig, vf, vx, rho0.p, n_sites, q);
  Real half_n = Real(static_cast<long>(n_sites)) / 2;
  for (auto& pr : eig.pairs) {
    LabeledEigenvalue<Real> le;
    le.value = pr.value;
    le.imag = pr.imag;
    le.is_complex = pr.is_complex;
    if (!pr.right.empty()) {
      // Mean Hamming weight over sectors S >= 1. Every non-unit eigenvector
      // is zero-sum against the trace functional, so its S = 0 component is
      // the compensating fixed-point admixture and carries no branch
      // information.
      Real wsum(0), sum(0);
      for (int s = 1; s <= n_sites; ++s) {
        Real a = abs(pr.right[s]);
        sum += a;
        wsum = fma(Real(static_cast<long>(s)), a, wsum);
      }
      le.mean_weight = (sum > 0) ? wsum / sum : Real(0);
      le.sector = (le.mean_weight > half_n) ? 'S' : 'I';
    }
    le.right = std::move(pr.right);
    le.left = std::move(pr.left);
    out.eigs.push_back(std::move(le));
  }
  return out;
}

/// Noiseless gap eigenvalue: the largest eigenvalue below the doubly
/// degenerate unit pair of T_red(gamma = 0).
template <class Real>
Real lambda_g_noiseless(int n_sites, int q, const Real& alpha) {
  DenseMatrix<Real> m = reduced_gate_matrix(n_sites, q, alpha);
  EigenDecomposition<Real> eig = eig_dense(m, 3, /*want_vectors=*/false);
  const EigenPair<Real>& third = eig.pairs[2];
  if (third.is_complex) throw NumericError("lambda_g_noiseless: unexpected complex eigenvalue");
  return third.value;
}

/// The two sub-unit branch eigenvalues at a given noise value: the leading
/// low-weight eigenvalue (gap branch) and the leading extensive-weight
/// eigenvalue (vacuum-decay branch).
template <class Real>
struct BranchEigenvalues {
  Real lambda_g{0};
  Real lambda_v{0};
  Real lambda_1{0};  // max of the two
};

template <class Real>
BranchEigenvalues<Real> branch_eigenvalues(int n_sites, int q, const Real& alpha,
                                           const Real& gamma, std::size_t k = 7) {
  DenseMatrix<Real> t = reduced_transfer(n_sites, q, alpha, gamma);
  ReducedSpectrum<Real> sp = reduced_spectrum(t, std::min<std::size_t>(k, n_sites + 1), n_sites, q);
  BranchEigenvalues<Real> out;
  bool got_g = false, got_v = false;
  for (std::size_t i = 1; i < sp.eigs.size(); ++i) {  // skip the unit eigenvalue
    const auto& e = sp.eigs[i];
    if (e.is_complex) continue;
    if (!got_g && e.sector == 'I') {
      out.lambda_g = e.value;
      got_g = true;
    }
    if (!got_v && e.sector == 'S') {
      out.lambda_v = e.value;
      got_v = true;
    }
    if (got_g && got_v) break;
  }
  if (!got_g || !got_v) throw NumericError("branch_eigenvalues: branch not found within k eigenpairs");
  out.lambda_1 = (out.lambda_g > out.lambda_v) ? out.lambda_g : out.lambda_v;
  return out;
}

/// Analytic critical point -ln((1-alpha) + 2 alpha/(q^2+1)).
template <class Real>
Real critical_point_analytic(const Real& alpha, int q) {
  Real q2 = Real(static_cast<long>(q)) * static_cast<long>(q);
  Real lam = (Real(1) - alpha) + alpha * 2 / (q2 + 1);
  if (!(lam > 0)) throw NumericError("critical_point_analytic: gap eigenvalue not positive");
  return -log(lam);
}

template <class Real>
struct GapExtrapolation {
  std::vector<int> n_values;
  std::vector<Real> lambda_g;   // per N
  Real intercept{0};            // lambda_g extrapolated to 1/N -> 0
  Real slope{0};
  Real max_fit_residual{0};
};

/// Linear fit of lambda_g(N) against 1/N; the intercept estimates the
/// infinite-size gap eigenvalue.
template <class Real>
GapExtrapolation<Real> gap_extrapolation(const Real& alpha, int q, const std::vector<int>& n_list) {
  if (n_list.size() < 3) throw ConfigError("gap_extrapolation: need at least three sizes");
  GapExtrapolation<Real> out;
  out.n_values = n_list;
  std::vector<Real> xs, ys;
  for (int n : n_list) {
    Real lg = lambda_g_noiseless(n, q, alpha);
    out.lambda_g.push_back(lg);
    xs.push_back(Real(1) / static_cast<long>(n));
    ys.push_back(lg);
  }
  LinearFit<Real> fit = linear_fit(xs, ys);
  out.intercept = fit.intercept;
  out.slope = fit.slope;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    Real r = abs(ys[i] - (fit.intercept + fit.slope * xs[i]));
    if (r > out.max_fit_residual) out.max_fit_residual = r;
  }
  return out;
}

/// Numeric critical point: -ln lambda_g with lambda_g extrapolated in 1/N.
template <class Real>
Real critical_point_numeric(const Real& alpha, int q, const std::vector<int>& n_list) {
  GapExtrapolation<Real> g = gap_extrapolation(alpha, q, n_list);
  if (!(g.intercept > 0)) throw NumericError("critical_point_numeric: gap eigenvalue not positive");
  return -log(g.intercept);
}

/// Locate the eigenvalue crossing of the two spectral branches on an epsN
/// grid, refined by bisection. Throws if the grid does not bracket a crossing.
template <class Real>
Real kink_locator(int n_sites, int q, const Real& alpha, const std::vector<Real>& epsn_grid) {
  if (epsn_grid.size() < 2) throw ConfigError("kink_locator: grid too small");
  Real qr(static_cast<long>(q));
  Real cap = Real(1) - Real(1) / (qr * qr);
  auto branch_diff = [&](const Real& epsn) -> Real {
    Real gamma = (epsn / static_cast<long>(n_sites)) / cap;
    BranchEigenvalues<Real> b = branch_eigenvalues(n_sites, q, alpha, gamma);
    return b.lambda_v - b.lambda_g;
  };
  Real lo = epsn_grid.front(), hi = epsn_grid.front();
  Real flo = branch_diff(lo), fhi = flo;
  bool bracketed = false;
  for (std::size_t i = 1; i < epsn_grid.size(); ++i) {
    hi = epsn_grid[i];
    fhi = branch_diff(hi);
    if ((flo > 0) != (fhi > 0)) {
      bracketed = true;
      break;
    }
    lo = hi;
    flo = fhi;
  }
  if (!bracketed) throw NumericError("kink_locator: no branch crossing inside the grid");
  for (int it = 0; it < 60; ++it) {
    Real mid = (lo + hi) / 2;
    Real fm = branch_diff(mid);
    if ((flo > 0) != (fm > 0)) {
      hi = mid;
      fhi = fm;
    } else {
      lo = mid;
      flo = fm;
    }
    if (abs(hi - lo) < real_from<Real>(1e-6)) break;
  }
  return (lo + hi) / 2;
}

template <class Real>
struct ThreeTermFit {
  Real c{0};                 // fitted coefficient of the Lambda_g^d q^-N term
  Real max_rel_residual{0};  // relative to F, over pre-saturation depths
};

/// Fit F(d) ~ q^-N + (1-eps)^(N d) + C Lambda_g^d q^-N over depths before
/// saturation and report the worst relative residual.
template <class Real>
ThreeTermFit<Real> fit_three_term(const DecayTrace<Real>& tr, int n_sites, int q, const Real& eps,
                                  const Real& lambda_g) {
  Real qn = pow_int(Real(static_cast<long>(q)), n_sites);
  Real sat = Real(2) / qn;
  Real num(0), den(0);
  std::vector<std::pair<Real, Real>> pts;  // (basis value x_d, target y_d)
  for (const auto& row : tr.rows) {
    if (row.fidelity < sat) break;
    Real white = pow_int(Real(1) - eps, static_cast<long>(n_sites) * row.depth);
    Real x = pow_int(lambda_g, row.depth) / qn;
    Real y = row.fidelity - Real(1) / qn - white;
    num = fma(x, y, num);
    den = fma(x, x, den);
    pts.emplace_back(x, row.fidelity);
  }
  if (!(den > 0)) throw NumericError("fit_three_term: no usable depths");
  ThreeTermFit<Real> out;
  out.c = num / den;
  std::size_t i = 0;
  for (const auto& row : tr.rows) {
    if (row.fidelity < sat) break;
    Real white = pow_int(Real(1) - eps, static_cast<long>(n_sites) * row.depth);
    Real model = Real(1) / qn + white + out.c * pts[i].first;
    Real rel = abs(row.fidelity - model) / row.fidelity;
    if (rel > out.max_rel_residual) out.max_rel_residual = rel;
    ++i;
  }
  return out;
}

}  // namespace xebstat
