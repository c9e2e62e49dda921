#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "xebstat/bigfloat.hpp"
#include "xebstat/errors.hpp"
#include "xebstat/linalg.hpp"

// The configuration-space statistical model: per-site labels {I, SWAP}
// (sigma_i = 1 means SWAP/q), the two-site gate update M(alpha, beta), the
// single-site noise update N(gamma), observable contraction vectors, and the
// dense 2^N evolution used as the brute-force oracle.
//
// Basis order for two-site operators is {00, 01, 10, 11} with site i the low
// bit; all modules share this convention.

namespace xebstat {

template <class Real>
struct ModelParams {
  int q = 2;
  Real alpha{1};
  Real beta{0};
  Real gamma{0};
};

/// Two-qudit gate update M(alpha, beta), Eq. layout:
///   [1, a q^2/(q^2+1), a q^2/(q^2+1), 0]
///   [0, 1-a-b,         b,             0]
///   [0, b,             1-a-b,         0]
///   [0, a/(q^2+1),     a/(q^2+1),     1]
template <class Real>
DenseMatrix<Real> two_site_gate_update(const ModelParams<Real>& p) {
  Real q2 = Real(static_cast<long>(p.q)) * static_cast<long>(p.q);
  DenseMatrix<Real> m(4, 4);
  m(0, 0) = Real(1);
  m(3, 3) = Real(1);
  m(0, 1) = p.alpha * q2 / (q2 + 1);
  m(0, 2) = m(0, 1);
  m(3, 1) = p.alpha / (q2 + 1);
  m(3, 2) = m(3, 1);
  m(1, 1) = Real(1) - p.alpha - p.beta;
  m(2, 2) = m(1, 1);
  m(1, 2) = p.beta;
  m(2, 1) = p.beta;
  return m;
}

/// Single-site noise update [[1, gamma], [0, 1-gamma]].
template <class Real>
DenseMatrix<Real> single_site_noise_update(const Real& gamma) {
  if (gamma < 0 || gamma > 1) throw ConfigError("single_site_noise_update: gamma out of [0,1]");
  DenseMatrix<Real> n(2, 2);
  n(0, 0) = Real(1);
  n(0, 1) = gamma;
  n(1, 1) = Real(1) - gamma;
  return n;
}

/// Per-site weights of the initial product state: (q/(q+1), 1/(q+1)).
template <class Real>
std::pair<Real, Real> initial_site_weights(int q) {
  Real qq(static_cast<long>(q));
  return {qq / (qq + 1), Real(1) / (qq + 1)};
}

enum class ObsKind { trace, xeb, fidelity };

/// Per-site dual-basis weights (w0, w1): trace (1,1), xeb (1/q, 1),
/// fidelity (1/q, q).
template <class Real>
std::pair<Real, Real> observable_site_weights(ObsKind kind, int q) {
  Real qq(static_cast<long>(q));
  switch (kind) {
    case ObsKind::trace: return {Real(1), Real(1)};
    case ObsKind::xeb: return {Real(1) / qq, Real(1)};
    default: return {Real(1) / qq, qq};
  }
}

// --- Dense 2^N representation ----------------------------------------------

template <class Real>
struct DenseState {
  int n_sites = 0;
  int q = 2;
  std::vector<Real> w;  // length 2^N, sigma_i = bit i
};

template <class Real>
DenseState<Real> dense_initial_state(int n_sites, int q) {
  if (n_sites <= 0 || n_sites % 2 != 0) throw ConfigError("dense_initial_state: N must be even and positive");
  if (n_sites > 24) throw ConfigError("dense_initial_state: N too large for the dense oracle");
  auto [w0, w1] = initial_site_weights<Real>(q);
  DenseState<Real> s;
  s.n_sites = n_sites;
  s.q = q;
  std::size_t dim = std::size_t{1} << n_sites;
  s.w.assign(dim, Real(0));
  for (std::size_t sigma = 0; sigma < dim; ++sigma) {
    int ones = __builtin_popcountll(sigma);
    s.w[sigma] = pow_int(w0, n_sites - ones) * pow_int(w1, ones);
  }
  return s;
}

/// Contraction with a per-site product vector, using popcount powers.
template <class Real>
Real contract(const DenseState<Real>& s, ObsKind kind) {
  auto [w0, w1] = observable_site_weights<Real>(kind, s.q);
  std::vector<Real> pw0(s.n_sites + 1, Real(1)), pw1(s.n_sites + 1, Real(1));
  for (int i = 1; i <= s.n_sites; ++i) {
    pw0[i] = pw0[i - 1] * w0;
    pw1[i] = pw1[i - 1] * w1;
  }
  Real acc(0);
  for (std::size_t sigma = 0; sigma < s.w.size(); ++sigma) {
    int ones = __builtin_popcountll(sigma);
    acc = fma(s.w[sigma], pw0[s.n_sites - ones] * pw1[ones], acc);
  }
  return acc;
}

template <class Real>
void dense_apply_gate(DenseState<Real>& s, int site_i, int site_j, const DenseMatrix<Real>& m4) {
  std::size_t bi = std::size_t{1} << site_i;
  std::size_t bj = std::size_t{1} << site_j;
  std::size_t dim = s.w.size();
  for (std::size_t base = 0; base < dim; ++base) {
    if (base & (bi | bj)) continue;
    std::size_t idx[4] = {base, base | bi, base | bj, base | bi | bj};
    Real in[4] = {s.w[idx[0]], s.w[idx[1]], s.w[idx[2]], s.w[idx[3]]};
    for (int r = 0; r < 4; ++r) {
      Real acc(0);
      for (int c = 0; c < 4; ++c) acc = fma(m4(r, c), in[c], acc);
      s.w[idx[r]] = acc;
    }
  }
}

template <class Real>
void dense_apply_noise(DenseState<Real>& s, int site, const DenseMatrix<Real>& n2) {
  std::size_t b = std::size_t{1} << site;
  std::size_t dim = s.w.size();
  for (std::size_t base = 0; base < dim; ++base) {
    if (base & b) continue;
    Real x0 = s.w[base], x1 = s.w[base | b];
    s.w[base] = fma(n2(0, 0), x0, n2(0, 1) * x1);
    s.w[base | b] = fma(n2(1, 0), x0, n2(1, 1) * x1);
  }
}

/// One circuit layer: the two-site gate update on each pair, then the noise
/// update on every site touched by a gate. Pairs must be disjoint.
template <class Real>
void dense_layer(DenseState<Real>& s, const std::vector<std::pair<int, int>>& pairs,
                 const ModelParams<Real>& params) {
  std::vector<char> seen(s.n_sites, 0);
  for (auto [i, j] : pairs) {
    if (i < 0 || j < 0 || i >= s.n_sites || j >= s.n_sites || i == j)
      throw ConfigError("dense_layer: invalid pair");
    if (seen[i] || seen[j]) throw ConfigError("dense_layer: overlapping pairs");
    seen[i] = seen[j] = 1;
  }
  DenseMatrix<Real> m4 = two_site_gate_update(params);
  for (auto [i, j] : pairs) dense_apply_gate(s, i, j, m4);
  DenseMatrix<Real> n2 = single_site_noise_update(params.gamma);
  for (int site = 0; site < s.n_sites; ++site) {
    if (seen[site]) dense_apply_noise(s, site, n2);
  }
}

/// Full 2^N transfer matrix of one layer (columns = images of basis states).
template <class Real>
DenseMatrix<Real> dense_layer_transfer(int n_sites, int q,
                                       const std::vector<std::pair<int, int>>& pairs,
                                       const ModelParams<Real>& params) {
  std::size_t dim = std::size_t{1} << n_sites;
  DenseMatrix<Real> t(dim, dim);
  for (std::size_t col = 0; col < dim; ++col) {
    DenseState<Real> e;
    e.n_sites = n_sites;
    e.q = q;
    e.w.assign(dim, Real(0));
    e.w[col] = Real(1);
    dense_layer(e, pairs, params);
    for (std::size_t row = 0; row < dim; ++row) t(row, col) = e.w[row];
  }
  return t;
}

/// All perfect matchings of {0..n-1} (n even): (n-1)!! of them.
inline std::vector<std::vector<std::pair<int, int>>> all_perfect_matchings(int n) {
  if (n % 2 != 0) throw ConfigError("all_perfect_matchings: n must be even");
  std::vector<std::vector<std::pair<int, int>>> out;
  std::vector<int> free_sites(n);
  for (int i = 0; i < n; ++i) free_sites[i] = i;
  std::vector<std::pair<int, int>> current;
  auto rec = [&](auto&& self, std::vector<int>& rem) -> void {
    if (rem.empty()) {
      out.push_back(current);
      return;
    }
    int a = rem.front();
    for (std::size_t k = 1; k < rem.size(); ++k) {
      int b = rem[k];
      std::vector<int> next;
      next.reserve(rem.size() - 2);
      for (std::size_t t = 1; t < rem.size(); ++t)
        if (t != k) next.push_back(rem[t]);
      current.emplace_back(a, b);
      self(self, next);
      current.pop_back();
    }
  };
  rec(rec, free_sites);
  return out;
}

/// Matching-averaged all-to-all layer transfer on the full 2^N space.
template <class Real>
DenseMatrix<Real> a2a_dense_transfer(int n_sites, int q, const ModelParams<Real>& params) {
  auto matchings = all_perfect_matchings(n_sites);
  std::size_t dim = std::size_t{1} << n_sites;
  DenseMatrix<Real> acc(dim, dim);
  for (const auto& pairs : matchings) {
    DenseMatrix<Real> t = dense_layer_transfer(n_sites, q, pairs, params);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) acc(i, j) += t(i, j);
  }
  Real inv = Real(1) / static_cast<long>(matchings.size());
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) acc(i, j) *= inv;
  return acc;
}

/// Brickwork pairing: even layers (0,1)(2,3)..., odd layers (1,2)(3,4)...
/// with open boundaries (sites 0 and N-1 idle on odd layers).
inline std::vector<std::pair<int, int>> brickwork_pairs(int n_sites, int layer_parity) {
  std::vector<std::pair<int, int>> pairs;
  int start = (layer_parity % 2 == 0) ? 0 : 1;
  for (int i = start; i + 1 < n_sites; i += 2) pairs.emplace_back(i, i + 1);
  return pairs;
}

/// One brickwork period (even layer then odd layer) on the full 2^N space.
template <class Real>
DenseMatrix<Real> dense_period_transfer_1d(int n_sites, int q, const ModelParams<Real>& params) {
  DenseMatrix<Real> even = dense_layer_transfer(n_sites, q, brickwork_pairs(n_sites, 0), params);
  DenseMatrix<Real> odd = dense_layer_transfer(n_sites, q, brickwork_pairs(n_sites, 1), params);
  return mat_mul(odd, even);
}

/// Project a permutation-symmetric 2^N transfer onto Hamming sectors:
/// T_red[S'][S] = (1/C(N,S)) sum_{|sigma|=S} sum_{|sigma'|=S'} T[sigma'][sigma].
template <class Real>
DenseMatrix<Real> project_to_hamming(const DenseMatrix<Real>& t, int n_sites) {
  std::size_t dim = std::size_t{1} << n_sites;
  if (t.rows() != dim || t.cols() != dim) throw ConfigError("project_to_hamming: size mismatch");
  DenseMatrix<Real> red(n_sites + 1, n_sites + 1);
  std::vector<long> count(n_sites + 1, 0);
  for (std::size_t sigma = 0; sigma < dim; ++sigma) ++count[__builtin_popcountll(sigma)];
  for (std::size_t col = 0; col < dim; ++col) {
    int s = __builtin_popcountll(col);
    for (std::size_t row = 0; row < dim; ++row) {
      int sp = __builtin_popcountll(row);
      red(sp, s) += t(row, col);
    }
  }
  for (int s = 0; s <= n_sites; ++s) {
    Real inv = Real(1) / count[s];
    for (int sp = 0; sp <= n_sites; ++sp) red(sp, s) *= inv;
  }
  return red;
}

// --- Spectra and coupling constants ----------------------------------------

template <class Real>
struct CouplingConstants {
  std::vector<Real> c_f;    // fidelity couplings per eigenpair
  std::vector<Real> c_chi;  // XEB couplings; the -1 shift sits on the first unit eigenvalue
};

/// c^O_a = <O|v_a><w_a|rho0> / <w_a|v_a> for each real eigenpair; complex
/// pairs get zero couplings (they carry no vectors).
template <class Real>
CouplingConstants<Real> coupling_constants(const EigenDecomposition<Real>& eig,
                                           const std::vector<Real>& obs_f,
                                           const std::vector<Real>& obs_x,
                                           const std::vector<Real>& rho0, int n_sites, int q) {
  CouplingConstants<Real> out;
  Real qn = pow_int(Real(static_cast<long>(q)), n_sites);
  bool shifted = false;
  for (const auto& p : eig.pairs) {
    if (p.is_complex || p.right.empty()) {
      out.c_f.push_back(Real(0));
      out.c_chi.push_back(Real(0));
      continue;
    }
    Real wv = dot(p.left, p.right);
    Real cf = dot(obs_f, p.right) * dot(p.left, rho0) / wv;
    Real cx = dot(obs_x, p.right) * dot(p.left, rho0) / wv;
    Real cchi = qn * cx;
    if (!shifted && abs(p.value - 1) < real_from<Real>(1e-9) && !p.is_complex) {
      cchi -= 1;
      shifted = true;
    }
    out.c_f.push_back(cf);
    out.c_chi.push_back(cchi);
  }
  return out;
}

/// Dense-oracle spectrum plus couplings. Guarded by the oracle size limit.
template <class Real>
std::pair<EigenDecomposition<Real>, CouplingConstants<Real>> dense_spectrum_and_couplings(
    const DenseMatrix<Real>& t, std::size_t k, const DenseState<Real>& rho0,
    int oracle_limit = 10) {
  if (rho0.n_sites > oracle_limit) {
    throw ConfigError("dense_spectrum_and_couplings: N exceeds the oracle limit");
  }
  EigenDecomposition<Real> eig = eig_dense(t, k);
  std::size_t dim = rho0.w.size();
  std::vector<Real> obs_f(dim, Real(0)), obs_x(dim, Real(0));
  auto [f0, f1] = observable_site_weights<Real>(ObsKind::fidelity, rho0.q);
  auto [x0, x1] = observable_site_weights<Real>(ObsKind::xeb, rho0.q);
  for (std::size_t sigma = 0; sigma < dim; ++sigma) {
    int ones = __builtin_popcountll(sigma);
    obs_f[sigma] = pow_int(f0, rho0.n_sites - ones) * pow_int(f1, ones);
    obs_x[sigma] = pow_int(x0, rho0.n_sites - ones) * pow_int(x1, ones);
  }
  CouplingConstants<Real> cc =
      coupling_constants(eig, obs_f, obs_x, rho0.w, rho0.n_sites, rho0.q);
  return {std::move(eig), std::move(cc)};
}

// --- Per-depth observable traces -------------------------------------------

template <class Real>
struct DecayRow {
  int depth = 0;
  Real fidelity{0};
  Real chi{0};
  Real chi_b{0};       // chi normalized by the noiseless collision reference
  Real z_noisy{0};     // collision probability of the gamma2 (two-copy) run
  Real f_shifted{0};   // q^N F - 1
  bool has_dlnchi = false;
  Real dlnchi{0};      // ln(chi(d+1)/chi(d)), stored on row d
};

template <class Real>
struct DecayTrace {
  std::vector<DecayRow<Real>> rows;
  bool chi_truncated = false;   // chi <= 0 encountered; trace cut there
  bool saturated = false;       // fidelity crossed 2 q^-N
  int plateau_onset = -1;       // first row index of the detected plateau window
  std::optional<Real> plateau_dlnchi;
};

/// Plateau rule: five consecutive dlnchi values varying by < 1e-4 relative.
template <class Real>
void detect_plateau(DecayTrace<Real>& tr, double rel_tol = 1e-4, int window = 5) {
  std::vector<Real> d;
  std::vector<int> idx;
  for (int i = 0; i < static_cast<int>(tr.rows.size()); ++i) {
    if (tr.rows[i].has_dlnchi) {
      d.push_back(tr.rows[i].dlnchi);
      idx.push_back(i);
    }
  }
  if (static_cast<int>(d.size()) < window) return;
  Real tol = real_from<Real>(rel_tol);
  for (std::size_t start = 0; start + window <= d.size(); ++start) {
    bool flat = true;
    for (std::size_t j = start + 1; j < start + window; ++j) {
      Real scale = abs(d[start]);
      if (!(scale > 0)) scale = Real(1);
      if (abs(d[j] - d[start]) > tol * scale) {
        flat = false;
        break;
      }
    }
    if (flat) {
      Real mean(0);
      for (std::size_t j = start; j < start + window; ++j) mean += d[j];
      mean /= window;
      tr.plateau_onset = idx[start];
      tr.plateau_dlnchi = mean;
      return;
    }
  }
}

}  // namespace xebstat
